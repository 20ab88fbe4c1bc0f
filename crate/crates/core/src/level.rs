//! Level-3 data on a curve over a finite field: points of exact order 3,
//! order-3 subgroups and ordered bases of the 3-torsion, with the action of
//! curve automorphisms and of Frobenius, and orbit/stabilizer reports.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{group_from_automorphisms, structure_id, GroupTable, StructureId};
use crate::weierstrass::{automorphisms, torsion_points, CurvePoint, FieldCurve, WCurve, WIso};

/// A point of exact order 3.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LevelPoint {
    pub point: CurvePoint,
}

/// The subgroup `{O, P, -P}`, stored by its canonical-order-least generator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LevelSubgroup {
    pub generator: LevelPoint,
}

/// An ordered basis `(P, Q)` of the 3-torsion.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FullLevel {
    pub basis: (LevelPoint, LevelPoint),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelDatum {
    Point(LevelPoint),
    Subgroup(LevelSubgroup),
    Full(FullLevel),
}

/// Something acting on level data: an automorphism of the curve, or the
/// Frobenius of the field over the prime field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Actor {
    Automorphism(WIso),
    Frobenius,
}

/// Level-3 data of one curve with full rational 3-torsion.
#[derive(Clone, Debug, Serialize)]
pub struct Level3 {
    #[serde(skip)]
    pub curve: WCurve,
    #[serde(skip)]
    pub field_curve: FieldCurve,
    pub points: Vec<LevelPoint>,
    pub subgroups: Vec<LevelSubgroup>,
    pub bases: Vec<FullLevel>,
}

/// Points, subgroups and bases of the 3-torsion over the curve's own field.
pub fn enumerate_level3(c: &WCurve) -> Result<Level3> {
    let fc = c.field_curve()?;
    let torsion = torsion_points(c, 3, 24)?;
    if torsion.degree != fc.field.degree() {
        return Err(Error::TorsionNotRational {
            degree: torsion.degree,
        });
    }
    let mut points: Vec<LevelPoint> = torsion
        .points
        .iter()
        .filter(|p| !p.is_infinity())
        .map(|&point| LevelPoint { point })
        .collect();
    points.sort();
    let mut subgroups: Vec<LevelSubgroup> = points.iter().map(|p| subgroup_of(&fc, p)).collect();
    subgroups.sort();
    subgroups.dedup();
    let mut bases = Vec::new();
    for p in &points {
        for q in &points {
            if subgroup_of(&fc, p) != subgroup_of(&fc, q) {
                bases.push(FullLevel { basis: (*p, *q) });
            }
        }
    }
    Ok(Level3 {
        curve: c.clone(),
        field_curve: fc,
        points,
        subgroups,
        bases,
    })
}

fn subgroup_of(fc: &FieldCurve, p: &LevelPoint) -> LevelSubgroup {
    let q = fc.neg(&p.point);
    LevelSubgroup {
        generator: LevelPoint {
            point: p.point.min(q),
        },
    }
}

impl Level3 {
    /// Every datum: points, then subgroups, then bases.
    pub fn all_data(&self) -> Vec<LevelDatum> {
        self.points
            .iter()
            .map(|&p| LevelDatum::Point(p))
            .chain(self.subgroups.iter().map(|&s| LevelDatum::Subgroup(s)))
            .chain(self.bases.iter().map(|&b| LevelDatum::Full(b)))
            .collect()
    }

    /// Elements of a subgroup, identity first.
    pub fn subgroup_points(&self, s: &LevelSubgroup) -> [CurvePoint; 3] {
        let p = s.generator.point;
        [CurvePoint::Infinity, p, self.field_curve.neg(&p)]
    }

    fn act_point(&self, g: &Actor, p: &CurvePoint) -> Result<CurvePoint> {
        let fc = &self.field_curve;
        match g {
            Actor::Automorphism(w) => {
                let h = w.field_iso()?;
                if fc.transform(&h) != *fc {
                    return Err(Error::NotAutomorphism(w.to_string()));
                }
                Ok(fc.map_point(&h, p))
            }
            Actor::Frobenius => {
                let f = &fc.field;
                if fc.a.iter().any(|&a| f.frobenius(a) != a) {
                    return Err(Error::NotAutomorphism(
                        "Frobenius does not preserve a curve that is not defined over the prime field"
                            .into(),
                    ));
                }
                Ok(match *p {
                    CurvePoint::Infinity => CurvePoint::Infinity,
                    CurvePoint::Affine { x, y } => CurvePoint::Affine {
                        x: f.frobenius(x),
                        y: f.frobenius(y),
                    },
                })
            }
        }
    }

    /// Image of a level datum.
    pub fn act(&self, g: &Actor, d: &LevelDatum) -> Result<LevelDatum> {
        let lp = |p: &LevelPoint| -> Result<LevelPoint> {
            Ok(LevelPoint {
                point: self.act_point(g, &p.point)?,
            })
        };
        Ok(match d {
            LevelDatum::Point(p) => LevelDatum::Point(lp(p)?),
            LevelDatum::Subgroup(s) => {
                LevelDatum::Subgroup(subgroup_of(&self.field_curve, &lp(&s.generator)?))
            }
            LevelDatum::Full(b) => LevelDatum::Full(FullLevel {
                basis: (lp(&b.basis.0)?, lp(&b.basis.1)?),
            }),
        })
    }

    fn permutation(&self, g: &Actor, data: &[LevelDatum]) -> Result<Vec<usize>> {
        let index: HashMap<&LevelDatum, usize> =
            data.iter().enumerate().map(|(i, d)| (d, i)).collect();
        data.iter()
            .map(|d| {
                let e = self.act(g, d)?;
                index
                    .get(&e)
                    .copied()
                    .ok_or_else(|| Error::NotClosed(format!("{d:?} maps outside the data set")))
            })
            .collect()
    }

    /// The automorphism group of the curve acting on `data`.
    pub fn automorphism_action(&self, data: &[LevelDatum]) -> Result<PermAction> {
        let autos = automorphisms(&self.curve)?;
        let group = group_from_automorphisms(&autos)?;
        let perms = autos
            .iter()
            .map(|g| self.permutation(&Actor::Automorphism(g.clone()), data))
            .collect::<Result<Vec<_>>>()?;
        PermAction::new(group, perms)
    }

    /// Automorphisms together with Frobenius, as the permutation group they
    /// generate on `data`. Elements are labelled `g` or `g*Frob`.
    pub fn galois_action(&self, data: &[LevelDatum]) -> Result<PermAction> {
        let base = self.automorphism_action(data)?;
        let frob = self.permutation(&Actor::Frobenius, data)?;
        let mut gens = base.perms.clone();
        gens.push(frob.clone());
        let identity: Vec<usize> = (0..data.len()).collect();
        let (_, perms) = GroupTable::from_generators(
            identity.clone(),
            &gens,
            |a, b| compose_perm(a, b),
            |p| format!("{p:?}"),
        )?;
        let label = |p: &Vec<usize>| -> String {
            if let Some(i) = base.perms.iter().position(|q| q == p) {
                return base.group.elements[i].clone();
            }
            // p = g o Frob with Frob an involution on these data
            let g = compose_perm(p, &frob);
            match base.perms.iter().position(|q| *q == g) {
                Some(i) => format!("{}*Frob", base.group.elements[i]),
                None => format!("{p:?}"),
            }
        };
        let group = GroupTable::from_elements(&perms, |a, b| compose_perm(a, b), label)?;
        PermAction::new(group, perms)
    }
}

/// `(a o b)[i] = a[b[i]]`.
fn compose_perm(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

/// A group together with the permutation each element induces on a data
/// list; `perms[g][i]` is the index of `g . data[i]`.
#[derive(Clone, Debug)]
pub struct PermAction {
    pub group: GroupTable,
    pub perms: Vec<Vec<usize>>,
}

impl PermAction {
    /// Checks that `g -> perms[g]` is a homomorphism.
    pub fn new(group: GroupTable, perms: Vec<Vec<usize>>) -> Result<PermAction> {
        let n = group.order();
        if perms.len() != n {
            return Err(Error::Precondition("one permutation per element".into()));
        }
        for a in 0..n {
            for b in 0..n {
                if compose_perm(&perms[a], &perms[b]) != perms[group.mul[a][b]] {
                    return Err(Error::Precondition(format!(
                        "not an action at ({}, {})",
                        group.elements[a], group.elements[b]
                    )));
                }
            }
        }
        Ok(PermAction { group, perms })
    }

    /// The trivial group acting on `n` items.
    pub fn trivial(n: usize) -> PermAction {
        let group = GroupTable::new(vec!["1".into()], vec![vec![0]]).expect("trivial group");
        PermAction {
            group,
            perms: vec![(0..n).collect()],
        }
    }

    pub fn stabilizer(&self, i: usize) -> Vec<usize> {
        (0..self.group.order())
            .filter(|&g| self.perms[g][i] == i)
            .collect()
    }

    pub fn orbit(&self, i: usize) -> Vec<usize> {
        let mut o: Vec<usize> = self.perms.iter().map(|p| p[i]).collect();
        o.sort_unstable();
        o.dedup();
        o
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Orbit {
    pub representative: String,
    pub members: Vec<String>,
    pub stabilizer: Vec<String>,
    pub stabilizer_structure: StructureId,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub group_order: usize,
    pub orbits: Vec<Orbit>,
}

impl OrbitReport {
    /// Whether `|orbit| * |stabilizer| = |G|` for every orbit.
    pub fn orbit_stabilizer_holds(&self) -> bool {
        self.orbits
            .iter()
            .all(|o| o.members.len() * o.stabilizer.len() == self.group_order)
    }
}

/// Orbits of `action` on data labelled by `labels`, each represented by its
/// least index, with the representative's stabilizer identified.
pub fn orbits_stabilizers(action: &PermAction, labels: &[String]) -> Result<OrbitReport> {
    let mut seen = vec![false; labels.len()];
    let mut orbits = Vec::new();
    for i in 0..labels.len() {
        if seen[i] {
            continue;
        }
        let members = action.orbit(i);
        for &m in &members {
            seen[m] = true;
        }
        let stab = action.stabilizer(i);
        let table = action.group.subgroup(&stab)?;
        orbits.push(Orbit {
            representative: labels[i].clone(),
            members: members.iter().map(|&m| labels[m].clone()).collect(),
            stabilizer: stab
                .iter()
                .map(|&g| action.group.elements[g].clone())
                .collect(),
            stabilizer_structure: structure_id(&table)?,
        });
    }
    Ok(OrbitReport {
        group_order: action.group.order(),
        orbits,
    })
}

/// Labels for level data over the curve's field.
pub fn describe(level: &Level3, d: &LevelDatum) -> String {
    let f = &level.field_curve.field;
    match d {
        LevelDatum::Point(p) => p.point.describe(f),
        LevelDatum::Subgroup(s) => format!("<{}>", s.generator.point.describe(f)),
        LevelDatum::Full(b) => format!(
            "[{}, {}]",
            b.basis.0.point.describe(f),
            b.basis.1.point.describe(f)
        ),
    }
}

/// Degrees of the tower full level -> point -> subgroup -> curve, computed
/// two ways: from counts of level data and from stabilizer orders under
/// automorphisms with Frobenius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveringDegrees {
    pub from_counts: (usize, usize, usize),
    pub from_stabilizers: (usize, usize, usize),
}

pub fn covering_degrees(level: &Level3) -> Result<CoveringDegrees> {
    let from_counts = (
        level.bases.len() / level.points.len(),
        level.points.len() / level.subgroups.len(),
        level.subgroups.len(),
    );
    let data = level.all_data();
    let action = level.galois_action(&data)?;
    let np = level.points.len();
    let ns = level.subgroups.len();
    let stab_point = action.stabilizer(0).len();
    let stab_sub = action.stabilizer(np).len();
    let stab_full = action.stabilizer(np + ns).len();
    let from_stabilizers = (
        stab_point / stab_full,
        stab_sub / stab_point,
        action.group.order() / stab_sub,
    );
    Ok(CoveringDegrees {
        from_counts,
        from_stabilizers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::ring::TowerRing;

    fn level() -> Level3 {
        enumerate_level3(&WCurve::supersingular(&TowerRing::f4())).unwrap()
    }

    #[test]
    fn counts() {
        let l = level();
        assert_eq!(l.points.len(), 8);
        assert_eq!(l.subgroups.len(), 4);
        assert_eq!(l.bases.len(), 48);
        assert!(l.points.contains(&LevelPoint {
            point: CurvePoint::Affine { x: 0, y: 0 }
        }));
        let f2 = TowerRing::field(FiniteField::f2());
        let err = enumerate_level3(&WCurve::supersingular(&f2)).unwrap_err();
        assert_eq!(err, Error::TorsionNotRational { degree: 2 });
    }

    #[test]
    fn stabilizers() {
        let l = level();
        let pts: Vec<LevelDatum> = l.points.iter().map(|&p| LevelDatum::Point(p)).collect();
        let labels: Vec<String> = pts.iter().map(|d| describe(&l, d)).collect();
        let action = l.automorphism_action(&pts).unwrap();
        let rep = orbits_stabilizers(&action, &labels).unwrap();
        assert!(rep.orbit_stabilizer_holds());
        assert_eq!(rep.orbits.len(), 1);
        assert!(rep.orbits[0].stabilizer_structure.is("C3"));
        let subs: Vec<LevelDatum> = l
            .subgroups
            .iter()
            .map(|&s| LevelDatum::Subgroup(s))
            .collect();
        let labels: Vec<String> = subs.iter().map(|d| describe(&l, d)).collect();
        let action = l.automorphism_action(&subs).unwrap();
        let rep = orbits_stabilizers(&action, &labels).unwrap();
        assert_eq!(rep.orbits.len(), 1);
        assert!(rep.orbits[0].stabilizer_structure.is("C6"));
        let triv = orbits_stabilizers(&PermAction::trivial(3), &labels[..3]).unwrap();
        assert_eq!(triv.orbits.len(), 3);
    }

    #[test]
    fn involution_and_galois() {
        let l = level();
        let neg = Actor::Automorphism(WIso::negation(&l.curve));
        for p in &l.points {
            let d = l.act(&neg, &LevelDatum::Point(*p)).unwrap();
            assert_eq!(
                d,
                LevelDatum::Point(LevelPoint {
                    point: l.field_curve.neg(&p.point)
                })
            );
        }
        for s in &l.subgroups {
            assert_eq!(
                l.act(&neg, &LevelDatum::Subgroup(*s)).unwrap(),
                LevelDatum::Subgroup(*s)
            );
        }
        let full = l.galois_action(&l.all_data()).unwrap();
        assert_eq!(full.group.order(), 48);
        assert!(structure_id(&full.group).unwrap().is("GL(2,3)"));
        let d = covering_degrees(&l).unwrap();
        assert_eq!(d.from_counts, (6, 2, 4));
        assert_eq!(d.from_stabilizers, (6, 2, 4));
    }
}
