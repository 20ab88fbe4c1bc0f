//! Base extension to F16, and the first-order obstruction over W_2(F4)[a1]/(a1^2).

use sslevel3::field::FiniteField;
use sslevel3::formal::{
    fgl_from_curve, star_iso_exhaustive, star_iso_solve, Height, StarIsoProblem,
};
use sslevel3::level::{covering_degrees, enumerate_level3};
use sslevel3::ring::{residue_ring, TowerRing};
use sslevel3::series::TruncSeries;
use sslevel3::weierstrass::{automorphisms, WCurve};

#[test]
fn counts_survive_extension_to_f16() {
    let f4 = TowerRing::field(FiniteField::f4());
    let c = WCurve::supersingular(&f4);
    let c16 = c.base_change(&FiniteField::binary(4)).unwrap();

    assert_eq!(automorphisms(&c).unwrap().len(), 24);
    assert_eq!(automorphisms(&c16).unwrap().len(), 24);

    let level = enumerate_level3(&c16).unwrap();
    assert_eq!(
        (level.points.len(), level.subgroups.len(), level.bases.len()),
        (8, 4, 48)
    );
    assert_eq!(covering_degrees(&level).unwrap().from_counts, (6, 2, 4));

    for curve in [&c, &c16] {
        let h = fgl_from_curve(curve, 8).unwrap().height().unwrap();
        assert_eq!(h, Height::Finite(2));
    }
}

#[test]
fn distinct_parameters_obstruct_at_first_step() {
    let ring = TowerRing::deformation(2, 2);
    let a1 = ring.var("a1");
    let u = ring.var("u");
    let z = ring.zero();
    let deformed = WCurve::new([&a1 * &u, z.clone(), u.pow(3), z.clone(), z.clone()]).unwrap();
    let flat = WCurve::new([z.clone(), z.clone(), u.pow(3), z.clone(), z]).unwrap();
    let (n, guard) = (6, 4);
    let res = residue_ring(&ring).unwrap();
    let p = StarIsoProblem {
        source: fgl_from_curve(&deformed, n + guard).unwrap(),
        target: fgl_from_curve(&flat, n + guard).unwrap(),
        residue_part: TruncSeries::z(&res, n + guard),
        order: n,
    };
    let out = star_iso_solve(&p).unwrap();
    assert_eq!(out.obstruction().expect("obstructed").step, 1);
    assert!(star_iso_exhaustive(&p, 1 << 12).unwrap().found().is_none());
}
