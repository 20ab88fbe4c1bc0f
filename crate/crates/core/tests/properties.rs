use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sslevel3::deformation::{c2_endo, c3_endo};
use sslevel3::formal::fgl_from_curve;
use sslevel3::ring::{Mono, Ring, RingValue, Scalar, TowerRing};
use sslevel3::series::TruncSeries;
use sslevel3::weierstrass::{iso_search, SearchMode, WCurve, WIso};

type Terms = Vec<(i16, i16, u64, u64)>;

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((0i16..4, -2i16..3, 0u64..8, 0u64..8), 0..5)
}

/// A value of `W_k(F4)[a1]/(a1^m)[u, 1/u]` from `(a1 exp, u exp, digits)`.
fn value(ring: &Ring, t: &Terms) -> RingValue {
    let (a1, u) = (ring.var_index("a1").unwrap(), ring.var_index("u").unwrap());
    let mut v = ring.zero();
    for &(e, f, a, b) in t {
        let mut m = Mono::ONE;
        m.0[a1] = e;
        m.0[u] = f;
        if ring.admits(&m) {
            v = &v + &ring.monomial(m, Scalar(a % 8, b % 8));
        }
    }
    v
}

fn deformation() -> Ring {
    TowerRing::deformation(3, 3)
}

proptest! {
    #[test]
    fn ring_axioms(x in terms(), y in terms(), z in terms()) {
        let r = deformation();
        let (x, y, z) = (value(&r, &x), value(&r, &y), value(&r, &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        prop_assert_eq!(&x * &r.one(), x);
    }

    #[test]
    fn one_plus_maximal_is_unit(x in terms()) {
        let r = deformation();
        let a1 = r.var("a1");
        let t = &value(&r, &x) * &(&a1 + &r.from_int(2));
        // only u-free elements of 1 + m are units; u is a unit on its own
        let t = t.terms().iter().filter(|(m, _)| m.0[r.var_index("u").unwrap()] == 0).fold(r.zero(), |acc, &(m, c)| &acc + &r.monomial(m, c));
        let w = &r.one() + &t;
        let inv = w.inverse().unwrap();
        prop_assert!((&w * &inv).is_one());
    }

    #[test]
    fn twists_are_ring_maps(x in terms(), y in terms(), i in 0u32..3) {
        let r = deformation();
        let (x, y) = (value(&r, &x), value(&r, &y));
        for e in [c3_endo(&r, i).unwrap(), c2_endo(&r).unwrap()] {
            prop_assert_eq!(e.apply(&(&x * &y)), &e.apply(&x) * &e.apply(&y));
            prop_assert_eq!(e.apply(&(&x + &y)), &e.apply(&x) + &e.apply(&y));
        }
    }

    #[test]
    fn projection_commutes(x in terms(), y in terms()) {
        let (big, small) = (TowerRing::deformation(3, 4), TowerRing::deformation(2, 2));
        let (x, y) = (value(&big, &x), value(&big, &y));
        let p = |v: &RingValue| v.project(&small).unwrap();
        prop_assert_eq!(p(&(&x * &y)), &p(&x) * &p(&y));
        prop_assert_eq!(p(&(&x + &y)), &p(&x) + &p(&y));
    }

    #[test]
    fn reversion_inverts(c in prop::collection::vec((0u64..8, 0u64..8), 1..7)) {
        let r = TowerRing::witt(3);
        let n = 8;
        let mut f = TruncSeries::z(&r, n);
        for (i, &(a, b)) in c.iter().enumerate() {
            f.set([(i + 2) as u16, 0, 0], r.scalar(Scalar(a, b)));
        }
        let g = f.reversion().unwrap();
        prop_assert_eq!(f.substitute(&g).unwrap(), TruncSeries::z(&r, n));
        prop_assert_eq!(g.substitute(&f).unwrap(), TruncSeries::z(&r, n));
    }
}

fn random_smooth(ring: &Ring, rng: &mut StdRng) -> WCurve {
    let elements = ring.base().elements();
    loop {
        let a = [0; 5].map(|_| ring.scalar(elements[rng.gen_range(0..elements.len())]));
        let c = WCurve::new(a).unwrap();
        if c.is_smooth() {
            return c;
        }
    }
}

#[test]
fn iso_search_recovers_random_coordinate_changes() {
    let mut rng = StdRng::seed_from_u64(7);
    let f4 = TowerRing::f4();
    for _ in 0..20 {
        let c = random_smooth(&f4, &mut rng);
        let u = f4.from_residue(rng.gen_range(1..4));
        let [r, s, t] = [0; 3].map(|_| f4.from_residue(rng.gen_range(0..4)));
        let target = c.apply_iso(&WIso::new(u, r, s, t).unwrap()).unwrap();
        let found = iso_search(&c, &target, SearchMode::FiniteFieldExhaustive).unwrap();
        let g = found.found().expect("isomorphic by construction");
        assert_eq!(c.apply_iso(g).unwrap(), target);
    }
}

#[test]
fn random_curve_laws_over_witt_rings() {
    let mut rng = StdRng::seed_from_u64(11);
    let w = TowerRing::witt(2);
    for _ in 0..10 {
        let c = random_smooth(&w, &mut rng);
        let f = fgl_from_curve(&c, 8).unwrap();
        assert!(f.axioms().all(), "{c}");
        // [2] = F(z, z) and [3] = F([2], z)
        let z = TruncSeries::z(&w, 8);
        assert_eq!(f.n_series(3), f.add_series(&f.n_series(2), &z));
        assert_eq!(f.add_series(&f.n_series(1), &f.n_series(-1)), TruncSeries::zero(&w, 1, 8));
    }
}
