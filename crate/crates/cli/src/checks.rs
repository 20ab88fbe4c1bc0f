//! The check catalog.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;
use sslevel3::deformation::{
    c2_endo, c3_endo, certify_c2, certify_c3, lubin_tate_injectivity, precision_stability,
    serre_tate_first_order, universal_curve, v_proxy_invariance, LiftDecision, TwistKind,
};
use sslevel3::field::FiniteField;
use sslevel3::formal::{coordinate_map, fgl_from_curve, is_supersingular, Fgl, Height};
use sslevel3::groups::{
    group_from_automorphisms, gl23, hurwitz_units, iso_search, semidirect_decomposition,
    structure_id,
};
use sslevel3::level::{covering_degrees, enumerate_level3, orbits_stabilizers, describe};
use sslevel3::ring::{Scalar, TowerRing};
use sslevel3::weierstrass::{automorphisms, torsion_points, CurvePoint, WCurve, WIso};
use sslevel3::Result;

use crate::{Check, Config, Outcome};

static CATALOG: &[Check] = &[
    Check {
        name: "aut-order",
        anchor: "the automorphism group of y^2 + y = x^3 over F4 has order 24",
        body: aut_order,
    },
    Check {
        name: "aut-structure",
        anchor: "the automorphism group is binary tetrahedral, Q8 : C3, realized by the Hurwitz units",
        body: aut_structure,
    },
    Check {
        name: "point-count",
        anchor: "y^2 + y = x^3 has 9 points over F4",
        body: point_count,
    },
    Check {
        name: "three-torsion",
        anchor: "the 3-torsion is rational over F4 and is (Z/3)^2",
        body: three_torsion,
    },
    Check {
        name: "order-three-point",
        anchor: "(0, 0) is a point of order 3",
        body: order_three_point,
    },
    Check {
        name: "point-stabilizers",
        anchor: "automorphisms act on the 8 points of order 3 transitively with stabilizer C3",
        body: point_stabilizers,
    },
    Check {
        name: "subgroup-stabilizers",
        anchor: "automorphisms act on the 4 subgroups of order 3 transitively with stabilizer C2 x C3, its C2 acting as the formal inverse",
        body: subgroup_stabilizers,
    },
    Check {
        name: "modular-groups",
        anchor: "GL(2,3) has order 48, Gamma0(3) = C6 : C2 of order 12, Gamma1(3) = C3 : C2 of order 6",
        body: modular_groups,
    },
    Check {
        name: "tower-degrees",
        anchor: "the level-3 covers have degrees 6, 2 and 4",
        body: tower_degrees,
    },
    Check {
        name: "galois-action",
        anchor: "automorphisms with Frobenius act on full level-3 structures through GL(2,3)",
        body: galois_action,
    },
    Check {
        name: "height",
        anchor: "the formal group of the supersingular curve has height 2",
        body: height,
    },
    Check {
        name: "supersingular-counts",
        anchor: "supersingularity agrees with odd point counts over F_2^n",
        body: supersingular_counts,
    },
    Check {
        name: "fgl-axioms",
        anchor: "curve formal group laws are unital, commutative and associative",
        body: fgl_axioms,
    },
    Check {
        name: "twist-group",
        anchor: "the Teichmuller twists form C3 and commute with the involution u -> -u",
        body: twist_group,
    },
    Check {
        name: "c3-action",
        anchor: "the C3 twists fix the universal deformation up to scaling and leave v1, v2 invariant",
        body: c3_action,
    },
    Check {
        name: "c2-action",
        anchor: "the C2 action on the deformation comes from the formal inverse",
        body: c2_action,
    },
    Check {
        name: "c2-identity-residue",
        anchor: "whether the C2 twist is star-isomorphic to the universal law with identity residue",
        body: c2_identity_residue,
    },
    Check {
        name: "c2-curve-level",
        anchor: "whether the C2 twist is realized by a Weierstrass coordinate change",
        body: c2_curve_level,
    },
    Check {
        name: "c2-v-proxies",
        anchor: "the C2 twist on the normalized v-proxies c2 u and c4 u^3",
        body: c2_v_proxies,
    },
    Check {
        name: "serre-tate",
        anchor: "first-order deformations of the curve and of its formal group agree",
        body: serre_tate,
    },
    Check {
        name: "lubin-tate-injectivity",
        anchor: "distinct Lubin-Tate parameters give non-isomorphic deformations",
        body: lubin_tate,
    },
    Check {
        name: "precision-stability",
        anchor: "deformation certificates are stable under raising k, m and N",
        body: stability,
    },
];

pub fn catalog() -> &'static [Check] {
    CATALOG
}

fn f4_curve() -> WCurve {
    WCurve::supersingular(&TowerRing::f4())
}

fn aut_order(_: &Config) -> Result<Outcome> {
    let over_f4 = automorphisms(&f4_curve())?.len();
    let f2 = TowerRing::field(FiniteField::f2());
    let over_f2 = automorphisms(&WCurve::supersingular(&f2))?.len();
    Ok(Outcome::assert(
        over_f4 == 24 && over_f2 == 2,
        format!("|Aut| = {over_f4} over F4, {over_f2} over F2"),
        json!({ "order_f4": over_f4, "order_f2": over_f2 }),
    ))
}

fn aut_structure(_: &Config) -> Result<Outcome> {
    let g = group_from_automorphisms(&automorphisms(&f4_curve())?)?;
    let id = structure_id(&g)?;
    let h = hurwitz_units();
    let cert = iso_search(&g, &h.table);
    let verified = cert.as_ref().is_some_and(|c| c.verify(&g, &h.table));
    let semidirect = semidirect_decomposition(&g, 8, 3);
    let q8 = semidirect
        .as_ref()
        .map(|s| g.subgroup(&s.normal).and_then(|n| structure_id(&n)))
        .transpose()?;
    let ok = id.is("SL(2,3)")
        && id.is("Q8:C3")
        && verified
        && semidirect.as_ref().is_some_and(|s| s.verify(&g) && s.action_nontrivial)
        && q8.as_ref().is_some_and(|q| q.is("Q8"));
    Ok(Outcome::assert(
        ok,
        format!("{id}, isomorphic to the Hurwitz units: {verified}"),
        json!({
            "structure": id.to_string(),
            "hurwitz_iso": cert.map(|c| c.labels(&g, &h.table)),
            "normal_q8": semidirect.map(|s| s.normal.len()),
        }),
    ))
}

fn point_count(_: &Config) -> Result<Outcome> {
    let n = f4_curve().field_curve()?.points().len();
    Ok(Outcome::assert(n == 9, format!("#C(F4) = {n}"), json!({ "count": n })))
}

fn three_torsion(_: &Config) -> Result<Outcome> {
    let c = f4_curve();
    let t = torsion_points(&c, 3, 12)?;
    let orders = t
        .points
        .iter()
        .map(|p| t.curve.order(p))
        .collect::<Result<Vec<_>>>()?;
    let nontrivial = orders.iter().filter(|&&o| o == 3).count();
    // nine points, all nonzero ones of order 3: elementary abelian of rank 2
    let ok = t.points.len() == 9 && t.degree == 2 && nontrivial == 8;
    Ok(Outcome::assert(
        ok,
        format!(
            "{} points over F_2^{}, {} of order 3",
            t.points.len(),
            t.degree,
            nontrivial
        ),
        json!({
            "points": t.points.iter().map(|p| p.describe(t.field())).collect::<Vec<_>>(),
            "field_degree": t.degree,
        }),
    ))
}

fn order_three_point(_: &Config) -> Result<Outcome> {
    let fc = f4_curve().field_curve()?;
    let p = CurvePoint::Affine { x: 0, y: 0 };
    let on = fc.contains(&p);
    let o = fc.order(&p)?;
    Ok(Outcome::assert(
        on && o == 3,
        format!("(0, 0) has order {o}"),
        json!({ "order": o }),
    ))
}

fn point_stabilizers(_: &Config) -> Result<Outcome> {
    let level = enumerate_level3(&f4_curve())?;
    let data: Vec<_> = level.all_data()[..level.points.len()].to_vec();
    let labels: Vec<String> = data.iter().map(|d| describe(&level, d)).collect();
    let action = level.automorphism_action(&data)?;
    let rep = orbits_stabilizers(&action, &labels)?;
    let ok = rep.orbits.len() == 1
        && rep.orbit_stabilizer_holds()
        && rep.orbits[0].stabilizer.len() == 3
        && rep.orbits[0].stabilizer_structure.is("C3");
    Ok(Outcome::assert(
        ok,
        format!(
            "{} orbit(s) on {} points, stabilizer {}",
            rep.orbits.len(),
            data.len(),
            rep.orbits[0].stabilizer_structure
        ),
        json!({ "orbits": rep.orbits }),
    ))
}

fn subgroup_stabilizers(config: &Config) -> Result<Outcome> {
    let c = f4_curve();
    let level = enumerate_level3(&c)?;
    let np = level.points.len();
    let data: Vec<_> = level.all_data()[np..np + level.subgroups.len()].to_vec();
    let labels: Vec<String> = data.iter().map(|d| describe(&level, d)).collect();
    let action = level.automorphism_action(&data)?;
    let rep = orbits_stabilizers(&action, &labels)?;
    let stab = &rep.orbits[0].stabilizer;
    let neg = WIso::negation(&c);
    // the involution in the stabilizer
    let g = &action.group;
    let involutions: Vec<&String> = stab
        .iter()
        .filter(|l| g.index_of(l).is_some_and(|i| g.element_order(i) == 2))
        .collect();
    let central = involutions.len() == 1 && *involutions[0] == neg.to_string();
    let f = fgl_from_curve(&c, config.n)?;
    let formal_inverse = coordinate_map(&c, &neg, config.n)? == f.inverse_series();
    let ok = rep.orbits.len() == 1
        && rep.orbit_stabilizer_holds()
        && stab.len() == 6
        && rep.orbits[0].stabilizer_structure.is("C2xC3")
        && central
        && formal_inverse;
    Ok(Outcome::assert(
        ok,
        format!(
            "{} orbit(s) on {} subgroups, stabilizer {}, involution [-1] induces the formal inverse: {}",
            rep.orbits.len(),
            data.len(),
            rep.orbits[0].stabilizer_structure,
            formal_inverse
        ),
        json!({ "orbits": rep.orbits, "negation": neg.to_string() }),
    ))
}

fn modular_groups(_: &Config) -> Result<Outcome> {
    let g = gl23();
    let g0 = g.table.subgroup(&g.gamma0)?;
    let g1 = g.table.subgroup(&g.gamma1)?;
    let (s0, s1) = (structure_id(&g0)?, structure_id(&g1)?);
    let i0 = g.table.index(&g.gamma0)?;
    let i1 = g0.index(
        &g.gamma1
            .iter()
            .map(|&x| g0.index_of(&g.table.elements[x]).expect("Gamma1 inside Gamma0"))
            .collect::<Vec<_>>(),
    )?;
    let ok = g.table.order() == 48
        && g0.order() == 12
        && g1.order() == 6
        && s0.is("C6:C2")
        && s1.is("C3:C2")
        && (i0, i1) == (4, 2);
    Ok(Outcome::assert(
        ok,
        format!(
            "|GL(2,3)| = {}, Gamma0(3) = {s0}, Gamma1(3) = {s1}, indices ({i0}, {i1})",
            g.table.order()
        ),
        json!({
            "order": g.table.order(),
            "gamma0": { "order": g0.order(), "structure": s0.to_string() },
            "gamma1": { "order": g1.order(), "structure": s1.to_string() },
            "indices": [i0, i1],
        }),
    ))
}

fn tower_degrees(_: &Config) -> Result<Outcome> {
    let level = enumerate_level3(&f4_curve())?;
    let d = covering_degrees(&level)?;
    let ok = d.from_counts == (6, 2, 4) && d.from_stabilizers == (6, 2, 4) && level.bases.len() == 48;
    let (a, b, c) = d.from_counts;
    Ok(Outcome::assert(
        ok,
        format!("({a}, {b}, {c}), {} full level structures", level.bases.len()),
        json!({
            "from_counts": d.from_counts,
            "from_stabilizers": d.from_stabilizers,
            "full_level_count": level.bases.len(),
        }),
    ))
}

fn galois_action(_: &Config) -> Result<Outcome> {
    let level = enumerate_level3(&f4_curve())?;
    let np = level.points.len() + level.subgroups.len();
    let data: Vec<_> = level.all_data()[np..].to_vec();
    let action = level.galois_action(&data)?;
    let id = structure_id(&action.group)?;
    // simply transitive on bases
    let labels: Vec<String> = data.iter().map(|d| describe(&level, d)).collect();
    let rep = orbits_stabilizers(&action, &labels)?;
    let ok = action.group.order() == 48
        && id.is("GL(2,3)")
        && rep.orbits.len() == 1
        && rep.orbits[0].stabilizer.len() == 1;
    Ok(Outcome::assert(
        ok,
        format!(
            "group of order {} ({id}), {} orbit(s) on {} bases",
            action.group.order(),
            rep.orbits.len(),
            data.len()
        ),
        json!({ "order": action.group.order(), "structure": id.to_string() }),
    ))
}

fn height(config: &Config) -> Result<Outcome> {
    let n = config.n.max(5);
    let f = fgl_from_curve(&f4_curve(), n)?;
    let h = f.height()?;
    let two = f.n_series(2);
    let leading = two.coeff1(4);
    let shape = two.valuation() == Some(4) && leading.is_unit();
    let ring = TowerRing::f4();
    let mult = Fgl::multiplicative(&ring, n).height()?;
    let add = Fgl::additive(&ring, n).height()?;
    let ok = h == Height::Finite(2)
        && shape
        && mult == Height::Finite(1)
        && matches!(add, Height::AtLeast(_));
    Ok(Outcome::assert(
        ok,
        format!("supersingular {h:?}, multiplicative {mult:?}, additive {add:?}"),
        json!({
            "supersingular": h,
            "two_series_leading": leading.to_string(),
            "multiplicative": mult,
            "additive": add,
        }),
    ))
}

fn supersingular_counts(_: &Config) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut ok = true;
    let f4 = TowerRing::f4();
    let mut curves = vec![f4_curve()];
    // an ordinary control: y^2 + xy = x^3 + 1
    curves.push(WCurve::from_ints(&f4, [1, 0, 0, 0, 1]));
    for c in &curves {
        let ss = is_supersingular(c)?;
        for deg in [2, 4] {
            let big = FiniteField::binary(deg);
            let count = c.base_change(&big)?.field_curve()?.points().len();
            let odd = count % 2 == 1;
            ok &= odd == ss;
            rows.push(json!({ "curve": c.to_string(), "degree": deg, "count": count, "supersingular": ss }));
        }
    }
    Ok(Outcome::assert(
        ok,
        "height test agrees with point-count parity",
        json!({ "rows": rows }),
    ))
}

const RANDOM_SEED: u64 = 0x5eed_0003;

fn fgl_axioms(config: &Config) -> Result<Outcome> {
    let n = config.n;
    let mut rng = StdRng::seed_from_u64(RANDOM_SEED);
    let mut curves = vec![f4_curve(), universal_curve(config.precision()?)?.curve];
    let f4 = TowerRing::f4();
    while curves.len() < 12 {
        let a = [0; 5].map(|_| rng.gen_range(0..4u32));
        let c = WCurve::from_handles(&f4, a);
        if c.is_smooth() {
            curves.push(c);
        }
    }
    let w3 = TowerRing::witt(3);
    while curves.len() < 22 {
        let a = [0; 5].map(|_| w3.scalar(Scalar(rng.gen_range(0..8), rng.gen_range(0..8))));
        let c = WCurve::new(a)?;
        if c.is_smooth() {
            curves.push(c);
        }
    }
    let mut failures = Vec::new();
    for c in &curves {
        if !fgl_from_curve(c, n)?.axioms().all() {
            failures.push(c.to_string());
        }
    }
    Ok(Outcome::assert(
        failures.is_empty(),
        format!("{} laws to order {n}, {} failures", curves.len(), failures.len()),
        json!({ "laws": curves.len(), "order": n, "failures": failures }),
    ))
}

fn twist_group(config: &Config) -> Result<Outcome> {
    let c = universal_curve(config.precision()?)?;
    let g = c3_endo(&c.ring, 1)?;
    let s = c2_endo(&c.ring)?;
    let g3 = g.pow(3).is_identity() && !g.is_identity();
    let s2 = s.pow(2).is_identity() && !s.is_identity();
    let commute = g.compose(&s).eq_on_generators(&s.compose(&g));
    Ok(Outcome::assert(
        g3 && s2 && commute,
        format!("g^3 = 1: {g3}, [-1]^2 = 1: {s2}, commute: {commute}"),
        json!({ "g_order_3": g3, "involution": s2, "commute": commute }),
    ))
}

fn c3_action(config: &Config) -> Result<Outcome> {
    let c = universal_curve(config.precision()?)?;
    let mut certs = Vec::new();
    let mut ok = true;
    for i in 1..3 {
        let cert = certify_c3(&c, i)?;
        ok &= cert.verified;
        certs.push(json!({
            "twist": cert.twist.to_string(),
            "lambda": cert.lambda.to_string(),
            "iso": cert.iso.to_string(),
            "verified": cert.verified,
        }));
    }
    let v = v_proxy_invariance(&c)?;
    let fixed = v
        .entries
        .iter()
        .filter(|e| matches!(e.twist, TwistKind::C3(_)))
        .all(|e| e.c2u_fixed && e.c4u3_fixed);
    ok &= fixed;
    Ok(Outcome::assert(
        ok,
        format!("g, g^2 realized by pure scalings; c2 u, c4 u^3 fixed: {fixed}"),
        json!({
            "certificates": certs,
            "c2u": v.c2u.to_string(),
            "c4u3": v.c4u3.to_string(),
            "v_proxies_fixed": fixed,
        }),
    ))
}

fn decision_json(d: &LiftDecision) -> serde_json::Value {
    serde_json::to_value(d).expect("decision serializes")
}

fn c2_action(config: &Config) -> Result<Outcome> {
    let p = config.precision()?;
    let c = universal_curve(p)?;
    let cert = certify_c2(&c, p.guard())?;
    let summary = match &cert.decision {
        LiftDecision::NoLift {
            precision,
            failing_degree,
            ..
        } => format!(
            "no lift of [-1]: exhaustive search at (k, m, N) = ({}, {}, {}) fails in degree {}",
            precision.k, precision.m, precision.n, failing_degree
        ),
        LiftDecision::Undecided { .. } => "solver obstructed, exhaustive search undecided".into(),
        _ => format!(
            "lift found, linear coefficient {}",
            cert.linear_coefficient
                .as_ref()
                .map(|v| v.to_string())
                .unwrap_or_default()
        ),
    };
    Ok(Outcome::assert(
        cert.verified,
        summary,
        json!({
            "decision": decision_json(&cert.decision),
            "solver": serde_json::to_value(&cert.inverse_lift).expect("serializes"),
            "lift": cert.lift().map(|s| s.to_string()),
            "linear_coefficient_is_minus_one_mod_m": cert.linear_coefficient_is_minus_one_mod_m,
            "homomorphism_verified": cert.homomorphism_verified,
            "twist_is_involution": cert.twist_is_involution,
            "double_twist_star_trivial": cert.double_twist_star_trivial,
        }),
    ))
}

fn c2_identity_residue(config: &Config) -> Result<Outcome> {
    let p = config.precision()?;
    let cert = certify_c2(&universal_curve(p)?, p.guard())?;
    let solver = match cert.identity_residue.obstruction() {
        Some(o) => format!("solver obstructed at step {} ({}, {})", o.step, o.basis, o.monomial),
        None => "solver found a lift".into(),
    };
    let decided = match &cert.identity_decision {
        LiftDecision::NoLift {
            precision,
            failing_degree,
            ..
        } => format!(
            "no lift at ({}, {}, {}), degree {}",
            precision.k, precision.m, precision.n, failing_degree
        ),
        LiftDecision::Undecided { .. } => "exhaustive search undecided".into(),
        _ => "lift exists".into(),
    };
    Ok(Outcome::recorded(
        format!("{solver}; {decided}"),
        json!({
            "solver": serde_json::to_value(&cert.identity_residue).expect("serializes"),
            "decision": decision_json(&cert.identity_decision),
        }),
    ))
}

fn c2_curve_level(config: &Config) -> Result<Outcome> {
    let p = config.precision()?;
    let cert = certify_c2(&universal_curve(p)?, p.guard())?;
    let summary = match cert.curve_level.found() {
        Some(g) => format!("coordinate change {g}"),
        None => "no coordinate change".into(),
    };
    Ok(Outcome::recorded(
        summary,
        json!({ "outcome": serde_json::to_value(&cert.curve_level).expect("serializes") }),
    ))
}

fn c2_v_proxies(config: &Config) -> Result<Outcome> {
    let c = universal_curve(config.precision()?)?;
    let v = v_proxy_invariance(&c)?;
    let e = v
        .entries
        .iter()
        .find(|e| e.twist == TwistKind::C2)
        .expect("C2 entry");
    Ok(Outcome::recorded(
        format!(
            "c2 u fixed: {} (mod 2: {}), c4 u^3 fixed: {}",
            e.c2u_fixed, e.c2u_fixed_mod_2, e.c4u3_fixed
        ),
        json!({ "entry": e }),
    ))
}

fn serre_tate(config: &Config) -> Result<Outcome> {
    let n = config.n;
    let r = serre_tate_first_order(n, n + 3)?;
    let ok = r.curve_classes.len() == 4
        && r.fgl_classes == 4
        && r.class_map_well_defined
        && r.bijective
        && r.a1_direction_nonzero
        && r.zero_maps_to_zero;
    Ok(Outcome::assert(
        ok,
        format!(
            "{} curve classes, {} law classes, bijective: {}",
            r.curve_classes.len(),
            r.fgl_classes,
            r.bijective
        ),
        json!({ "report": r }),
    ))
}

fn lubin_tate(config: &Config) -> Result<Outcome> {
    let n = config.n;
    let out = lubin_tate_injectivity(n, n + 3)?;
    let step = out.obstruction().map(|o| o.step);
    Ok(Outcome::assert(
        step == Some(1),
        match step {
            Some(s) => format!("a1 = 0 and a1 = eps obstructed at step {s}"),
            None => "a1 = 0 and a1 = eps are star-isomorphic".into(),
        },
        json!({ "outcome": serde_json::to_value(&out).expect("serializes") }),
    ))
}

fn stability(config: &Config) -> Result<Outcome> {
    let rep = precision_stability(config.precision()?)?;
    let unstable: Vec<&str> = rep
        .entries
        .iter()
        .filter(|e| !e.stable)
        .map(|e| e.certificate.as_str())
        .collect();
    let r = rep.refined;
    Ok(Outcome::assert(
        unstable.is_empty(),
        format!(
            "{} certificates compared against ({}, {}, {}), unstable: {:?}",
            rep.entries.len(),
            r.k,
            r.m,
            r.n,
            unstable
        ),
        json!({ "report": rep }),
    ))
}
