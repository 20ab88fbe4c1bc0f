//! Independent recomputations of derived values, from textbook formulas
//! written out here rather than through the library's own routines.

use sslevel3::field::FiniteField;
use sslevel3::formal::fgl_from_curve;
use sslevel3::groups::{gl23, hurwitz_units};
use sslevel3::ring::{teichmuller_lift, Scalar, TowerRing};
use sslevel3::series::TruncSeries;
use sslevel3::weierstrass::{automorphisms, WCurve};

/// Coordinate changes `(u, r, s, t)` fixing `[a1, a2, a3, a4, a6]`, counted
/// with the usual transformation table.
fn count_automorphisms(f: &FiniteField, a: [u32; 5]) -> usize {
    let [a1, a2, a3, a4, a6] = a;
    let (add, mul) = (|x, y| f.add(x, y), |x, y| f.mul(x, y));
    let sub = |x, y| f.sub(x, y);
    let k = |n: i64| f.from_int(n);
    let mut n = 0;
    for u in f.elements().filter(|&u| u != 0) {
        let up = |e| f.pow(u, e);
        for r in f.elements() {
            for s in f.elements() {
                for t in f.elements() {
                    let b1 = add(a1, mul(k(2), s));
                    let b2 = sub(add(sub(a2, mul(s, a1)), mul(k(3), r)), mul(s, s));
                    let b3 = add(add(a3, mul(r, a1)), mul(k(2), t));
                    let b4 = {
                        let x = add(sub(a4, mul(s, a3)), mul(k(2), mul(r, a2)));
                        let x = sub(x, mul(add(t, mul(r, s)), a1));
                        sub(add(x, mul(k(3), mul(r, r))), mul(k(2), mul(s, t)))
                    };
                    let b6 = {
                        let x = add(add(a6, mul(r, a4)), mul(mul(r, r), a2));
                        let x = sub(add(x, mul(r, mul(r, r))), mul(t, a3));
                        sub(sub(x, mul(t, t)), mul(mul(r, t), a1))
                    };
                    if [
                        (b1, 1),
                        (b2, 2),
                        (b3, 3),
                        (b4, 4),
                        (b6, 6),
                    ]
                    .iter()
                    .zip(a)
                    .all(|(&(b, e), ai)| b == mul(up(e), ai))
                    {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

#[test]
fn automorphism_counts_by_table() {
    let f4 = FiniteField::f4();
    let f2 = FiniteField::f2();
    let curve = [0, 0, 1, 0, 0];
    assert_eq!(count_automorphisms(&f4, curve), 24);
    assert_eq!(count_automorphisms(&f2, curve), 2);
    let lib = automorphisms(&WCurve::supersingular(&TowerRing::f4())).unwrap();
    assert_eq!(lib.len(), count_automorphisms(&f4, curve));
}

fn brute_count(f: &FiniteField) -> usize {
    let mut n = 1;
    for x in f.elements() {
        for y in f.elements() {
            if f.add(f.mul(y, y), y) == f.pow(x, 3) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn point_counts_by_brute_force() {
    let c = WCurve::supersingular(&TowerRing::f4());
    for deg in [2, 4, 6] {
        let f = FiniteField::binary(deg);
        let lib = c.base_change(&f).unwrap().field_curve().unwrap().points().len();
        assert_eq!(lib, brute_count(&f), "F_2^{deg}");
    }
    assert_eq!(brute_count(&FiniteField::f4()), 9);
    // supersingular over F_2: q + 1 points for odd degree
    assert_eq!(brute_count(&FiniteField::binary(3)), 9);
    assert_eq!(brute_count(&FiniteField::binary(5)), 33);
}

#[test]
fn gl23_counts_by_enumeration() {
    let mut all = 0;
    let mut upper = 0;
    let mut unipotent_corner = 0;
    for a in 0..3i32 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    if (a * d - b * c).rem_euclid(3) != 0 {
                        all += 1;
                        if c == 0 {
                            upper += 1;
                            if a == 1 {
                                unipotent_corner += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let g = gl23();
    assert_eq!((all, upper, unipotent_corner), (48, 12, 6));
    assert_eq!(
        (g.table.order(), g.gamma0.len(), g.gamma1.len()),
        (all, upper, unipotent_corner)
    );
}

#[test]
fn hurwitz_units_by_enumeration() {
    // doubled coordinates all even or all odd with norm 4
    let mut n = 0;
    for a in -2i32..=2 {
        for b in -2i32..=2 {
            for c in -2i32..=2 {
                for d in -2i32..=2 {
                    let same_parity = [b, c, d].iter().all(|x| (x - a).rem_euclid(2) == 0);
                    if same_parity && a * a + b * b + c * c + d * d == 4 {
                        n += 1;
                    }
                }
            }
        }
    }
    assert_eq!(n, 24);
    assert_eq!(hurwitz_units().units.len(), n);
}

#[test]
fn formal_group_low_degree_terms() {
    let w = TowerRing::witt(3);
    let v = |a: u64, b: u64| w.scalar(Scalar(a, b));
    let (a1, a2, a3, a4, a6) = (v(2, 6), v(5, 3), v(1, 4), v(2, 7), v(6, 3));
    let c = WCurve::new([a1.clone(), a2.clone(), a3.clone(), a4, a6]).unwrap();
    let f = fgl_from_curve(&c, 5).unwrap();
    let law = f.law();
    let two = w.from_int(2);
    let three = w.from_int(3);
    assert_eq!(law.coeff2(1, 0), w.one());
    assert_eq!(law.coeff2(1, 1), a1.neg());
    assert_eq!(law.coeff2(2, 1), a2.neg());
    assert_eq!(law.coeff2(1, 2), a2.neg());
    assert_eq!(law.coeff2(3, 1), (&two * &a3).neg());
    assert_eq!(law.coeff2(2, 2), &(&a1 * &a2) - &(&three * &a3));
    assert_eq!(law.coeff2(3, 0), w.zero());

    let i = f.inverse_series();
    let mut expect = TruncSeries::zero(&w, 1, 5);
    expect.set([1, 0, 0], w.one().neg());
    expect.set([2, 0, 0], a1.neg());
    expect.set([3, 0, 0], a1.pow(2).neg());
    expect.set([4, 0, 0], (&a1.pow(3) + &a3).neg());
    assert_eq!(i, expect);
}

#[test]
fn two_series_of_the_supersingular_curve() {
    let f4 = TowerRing::f4();
    let f = fgl_from_curve(&WCurve::supersingular(&f4), 9).unwrap();
    let two = f.n_series(2);
    for n in 1..4 {
        assert!(two.coeff1(n).is_zero());
    }
    assert!(two.coeff1(4).is_one());
}

#[test]
fn teichmuller_defining_properties() {
    for k in 1..=8 {
        let w = teichmuller_lift(2, k);
        assert!(w.pow(3).is_one(), "k = {k}");
        assert!(!w.is_one());
        assert_eq!(w.ring().base().residue(w.as_scalar().unwrap()), 2);
    }
}
