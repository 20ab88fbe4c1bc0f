//! Weierstrass curves `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` over
//! tower rings: invariants, coordinate changes, the group law over finite
//! fields, torsion, automorphisms and isomorphism search.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::linalg::LinearSystem;
use crate::ring::{
    filtration_length, residue_ring, BaseRing, Mono, Ring, RingValue, Scalar, TowerRing,
};

/// Indices `i` of the coefficients `a_i`, in storage order.
pub const WEIGHTS: [u32; 5] = [1, 2, 3, 4, 6];

#[derive(Clone, Debug, Serialize)]
pub struct WCurve {
    pub a1: RingValue,
    pub a2: RingValue,
    pub a3: RingValue,
    pub a4: RingValue,
    pub a6: RingValue,
    #[serde(skip)]
    smooth: OnceLock<bool>,
}

impl PartialEq for WCurve {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs() == other.coeffs()
    }
}

impl Eq for WCurve {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub b2: RingValue,
    pub b4: RingValue,
    pub b6: RingValue,
    pub b8: RingValue,
    pub c4: RingValue,
    pub c6: RingValue,
    pub discriminant: RingValue,
    pub j: Option<RingValue>,
}

impl WCurve {
    pub fn new(a: [RingValue; 5]) -> Result<WCurve> {
        let ring = a[0].ring().clone();
        if a.iter().any(|x| x.ring() != &ring) {
            return Err(Error::RingMismatch(
                "Weierstrass coefficients over different rings".into(),
            ));
        }
        let [a1, a2, a3, a4, a6] = a;
        Ok(WCurve {
            a1,
            a2,
            a3,
            a4,
            a6,
            smooth: OnceLock::new(),
        })
    }

    pub fn from_ints(ring: &Ring, a: [i64; 5]) -> WCurve {
        Self::new(a.map(|x| ring.from_int(x))).expect("common ring")
    }

    /// A curve over a finite-field ring from field handles.
    /// `y^2 + y = x^3`.
    pub fn supersingular(ring: &Ring) -> WCurve {
        WCurve::from_ints(ring, [0, 0, 1, 0, 0])
    }

    pub fn from_handles(ring: &Ring, a: [u32; 5]) -> WCurve {
        Self::new(a.map(|x| ring.scalar(Scalar(x as u64, 0)))).expect("common ring")
    }

    pub fn ring(&self) -> &Ring {
        self.a1.ring()
    }

    pub fn coeffs(&self) -> [&RingValue; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn map_coeffs(&self, f: impl Fn(&RingValue) -> RingValue) -> Result<WCurve> {
        Self::new(self.coeffs().map(f))
    }

    pub fn project(&self, target: &Ring) -> Result<WCurve> {
        Self::new([
            self.a1.project(target)?,
            self.a2.project(target)?,
            self.a3.project(target)?,
            self.a4.project(target)?,
            self.a6.project(target)?,
        ])
    }

    pub fn invariants(&self) -> Invariants {
        let [a1, a2, a3, a4, a6] = self.coeffs();
        let b2 = &(a1 * a1) + &a2.mul_int(4);
        let b4 = &a4.mul_int(2) + &(a1 * a3);
        let b6 = &(a3 * a3) + &a6.mul_int(4);
        let b8 = &(&(&(&(a1 * a1) * a6) + &(&a2.mul_int(4) * a6)) - &(&(a1 * a3) * a4))
            + &(&(a2 * &(a3 * a3)) - &(a4 * a4));
        let c4 = &(&b2 * &b2) - &b4.mul_int(24);
        let c6 = &(&b2.pow(3).neg() + &(&b2 * &b4).mul_int(36)) - &b6.mul_int(216);
        let disc = &(&(&(&(&b2 * &b2) * &b8).neg() - &b4.pow(3).mul_int(8))
            - &(&b6 * &b6).mul_int(27))
            + &(&(&b2 * &b4) * &b6).mul_int(9);
        let j = disc.inverse().ok().map(|d| &c4.pow(3) * &d);
        Invariants {
            b2,
            b4,
            b6,
            b8,
            c4,
            c6,
            discriminant: disc,
            j,
        }
    }

    pub fn discriminant(&self) -> RingValue {
        self.invariants().discriminant
    }

    /// Whether the discriminant is a unit (cached).
    pub fn is_smooth(&self) -> bool {
        *self.smooth.get_or_init(|| self.discriminant().is_unit())
    }

    pub fn j_invariant(&self) -> Result<RingValue> {
        self.invariants()
            .j
            .ok_or_else(|| Error::SingularCurve(self.to_string()))
    }

    /// The curve in the coordinates `x = u^2 x' + r`, `y = u^3 y' + u^2 s x' + t`.
    pub fn apply_iso(&self, phi: &WIso) -> Result<WCurve> {
        if phi.ring() != self.ring() {
            return Err(Error::RingMismatch(format!(
                "iso over {} applied to curve over {}",
                phi.ring(),
                self.ring()
            )));
        }
        let [a1, a2, a3, a4, a6] = self.coeffs();
        let WIso { u, r, s, t } = phi;
        let ui = u.inverse()?;
        let rs = r * s;
        let p1 = a1 + &s.mul_int(2);
        let p2 = &(&(a2 - &(s * a1)) + &r.mul_int(3)) - &(s * s);
        let p3 = &(a3 + &(r * a1)) + &t.mul_int(2);
        let p4 = &(&(&(&(a4 - &(s * a3)) + &(r * a2).mul_int(2)) - &(&(t + &rs) * a1))
            + &(r * r).mul_int(3))
            - &(s * t).mul_int(2);
        let p6 = &(&(&(&(&(a6 + &(r * a4)) + &(&(r * r) * a2)) + &r.pow(3)) - &(t * a3))
            - &(t * t))
            - &(&(r * t) * a1);
        let out = WCurve::new([
            &p1 * &ui,
            &p2 * &ui.pow(2),
            &p3 * &ui.pow(3),
            &p4 * &ui.pow(4),
            &p6 * &ui.pow(6),
        ])?;
        debug_assert_eq!(
            out.discriminant(),
            &self.discriminant() * &ui.pow(12),
            "discriminant transforms by u^-12"
        );
        Ok(out)
    }

    /// Point arithmetic view, for a curve over a finite field.
    pub fn field_curve(&self) -> Result<FieldCurve> {
        let f = field_of(self.ring())?;
        let mut a = [0u32; 5];
        for (slot, c) in a.iter_mut().zip(self.coeffs()) {
            *slot = c.as_scalar().expect("field element").0 as u32;
        }
        Ok(FieldCurve { field: f, a })
    }

    /// The same curve over a larger binary field.
    pub fn base_change(&self, target: &FiniteField) -> Result<WCurve> {
        let f = field_of(self.ring())?;
        let emb = f.embedding_into(target).ok_or_else(|| {
            Error::InvalidField(format!(
                "{} does not embed in {}",
                f.descriptor(),
                target.descriptor()
            ))
        })?;
        let ring = TowerRing::field(target.clone());
        let fc = self.field_curve()?;
        Ok(WCurve::from_handles(&ring, fc.a.map(|x| emb[x as usize])))
    }

    pub fn point_add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        self.field_curve()?.add(p, q)
    }
}

impl fmt::Display for WCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}, {}]",
            self.a1, self.a2, self.a3, self.a4, self.a6
        )
    }
}

fn field_of(ring: &Ring) -> Result<FiniteField> {
    match ring.base() {
        BaseRing::Field(f) if ring.nvars() == 0 => Ok(f.clone()),
        _ => Err(Error::Unsupported(format!("{ring} is not a finite field"))),
    }
}

/// A change of Weierstrass coordinates `x = u^2 x' + r`, `y = u^3 y' + u^2 s x' + t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WIso {
    pub u: RingValue,
    pub r: RingValue,
    pub s: RingValue,
    pub t: RingValue,
}

impl WIso {
    pub fn new(u: RingValue, r: RingValue, s: RingValue, t: RingValue) -> Result<WIso> {
        let ring = u.ring();
        if [&r, &s, &t].iter().any(|x| x.ring() != ring) {
            return Err(Error::RingMismatch(
                "iso components over different rings".into(),
            ));
        }
        if !u.is_unit() {
            return Err(Error::NotUnit(format!("scaling {u}")));
        }
        Ok(WIso { u, r, s, t })
    }

    pub fn identity(ring: &Ring) -> WIso {
        WIso::scaling(ring.one())
    }

    pub fn scaling(u: RingValue) -> WIso {
        let z = u.ring().zero();
        WIso {
            u,
            r: z.clone(),
            s: z.clone(),
            t: z,
        }
    }

    /// The elliptic involution `(x, y) -> (x, -y - a1 x - a3)` of `c`.
    pub fn negation(c: &WCurve) -> WIso {
        let ring = c.ring();
        WIso {
            u: ring.from_int(-1),
            r: ring.zero(),
            s: c.a1.neg(),
            t: c.a3.neg(),
        }
    }

    pub fn from_handles(ring: &Ring, h: [u32; 4]) -> WIso {
        let [u, r, s, t] = h.map(|x| ring.scalar(Scalar(x as u64, 0)));
        WIso { u, r, s, t }
    }

    pub fn ring(&self) -> &Ring {
        self.u.ring()
    }

    pub fn is_identity(&self) -> bool {
        self.u.is_one() && self.r.is_zero() && self.s.is_zero() && self.t.is_zero()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &WIso) -> WIso {
        let u1 = &self.u;
        let u1sq = u1 * u1;
        WIso {
            u: u1 * &next.u,
            r: &self.r + &(&u1sq * &next.r),
            s: &self.s + &(u1 * &next.s),
            t: &(&self.t + &(&(&u1sq * &self.s) * &next.r)) + &(&(&u1sq * u1) * &next.t),
        }
    }

    pub fn inverse(&self) -> WIso {
        let ui = self.u.inverse().expect("iso scaling is a unit");
        let ui2 = &ui * &ui;
        WIso {
            r: (&self.r * &ui2).neg(),
            s: (&self.s * &ui).neg(),
            t: &(&(&self.r * &self.s) - &self.t) * &(&ui2 * &ui),
            u: ui,
        }
    }

    /// Group product: `self * other` acts on points as `self` after `other`.
    pub fn compose(&self, other: &WIso) -> WIso {
        other.then(self)
    }

    pub fn map_scalars(&self, f: impl Fn(&RingValue) -> RingValue) -> WIso {
        WIso {
            u: f(&self.u),
            r: f(&self.r),
            s: f(&self.s),
            t: f(&self.t),
        }
    }

    pub fn field_iso(&self) -> Result<FieldIso> {
        field_of(self.ring())?;
        let h = |v: &RingValue| v.as_scalar().expect("field element").0 as u32;
        Ok(FieldIso {
            u: h(&self.u),
            r: h(&self.r),
            s: h(&self.s),
            t: h(&self.t),
        })
    }
}

impl fmt::Display for WIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(u, r, s, t) = ({}, {}, {}, {})",
            self.u, self.r, self.s, self.t
        )
    }
}

/// The unit `λ` with `φ^* η' = λ η` for the invariant differentials
/// `η = dx / (2y + a1 x + a3)` of the source and target; it equals `u`.
pub fn differential_scaling(_curve: &WCurve, phi: &WIso) -> RingValue {
    phi.u.clone()
}

/// A coordinate change over a finite field, as field handles.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FieldIso {
    pub u: u32,
    pub r: u32,
    pub s: u32,
    pub t: u32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CurvePoint {
    Infinity,
    Affine { x: u32, y: u32 },
}

impl CurvePoint {
    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn describe(&self, field: &FiniteField) -> String {
        match self {
            CurvePoint::Infinity => "O".into(),
            CurvePoint::Affine { x, y } => format!(
                "({}, {})",
                field.element_string(*x),
                field.element_string(*y)
            ),
        }
    }
}

/// A Weierstrass curve over a finite field with handle coefficients
/// `[a1, a2, a3, a4, a6]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldCurve {
    pub field: FiniteField,
    pub a: [u32; 5],
}

impl FieldCurve {
    pub fn contains(&self, p: &CurvePoint) -> bool {
        match *p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                let f = &self.field;
                let [a1, a2, a3, a4, a6] = self.a;
                let lhs = f.add(f.mul(y, y), f.mul(y, f.add(f.mul(a1, x), a3)));
                let x2 = f.mul(x, x);
                let rhs = f.add(f.add(f.mul(x2, x), f.mul(a2, x2)), f.add(f.mul(a4, x), a6));
                lhs == rhs
            }
        }
    }

    fn check(&self, p: &CurvePoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointNotOnCurve(p.describe(&self.field)))
        }
    }

    pub fn neg(&self, p: &CurvePoint) -> CurvePoint {
        match *p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let f = &self.field;
                let [a1, _, a3, _, _] = self.a;
                CurvePoint::Affine {
                    x,
                    y: f.sub(f.neg(y), f.add(f.mul(a1, x), a3)),
                }
            }
        }
    }

    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    fn add_unchecked(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let (x1, y1, x2, y2) = match (*p, *q) {
            (CurvePoint::Infinity, _) => return *q,
            (_, CurvePoint::Infinity) => return *p,
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = self.a;
        if x1 == x2 && f.add(f.add(y1, y2), f.add(f.mul(a1, x2), a3)) == 0 {
            return CurvePoint::Infinity;
        }
        let (lambda, nu) = if x1 != x2 {
            let d = f.inv(f.sub(x2, x1)).expect("distinct x");
            (
                f.mul(f.sub(y2, y1), d),
                f.mul(f.sub(f.mul(y1, x2), f.mul(y2, x1)), d),
            )
        } else {
            let d = f
                .inv(f.add(f.add(f.mul(f.from_int(2), y1), f.mul(a1, x1)), a3))
                .expect("non-2-torsion tangent");
            let x1sq = f.mul(x1, x1);
            let num_l = f.sub(
                f.add(
                    f.add(
                        f.mul(f.from_int(3), x1sq),
                        f.mul(f.mul(f.from_int(2), a2), x1),
                    ),
                    a4,
                ),
                f.mul(a1, y1),
            );
            let num_n = f.sub(
                f.add(
                    f.add(f.neg(f.mul(x1sq, x1)), f.mul(a4, x1)),
                    f.mul(f.from_int(2), a6),
                ),
                f.mul(a3, y1),
            );
            (f.mul(num_l, d), f.mul(num_n, d))
        };
        let x3 = f.sub(
            f.sub(
                f.sub(f.add(f.mul(lambda, lambda), f.mul(a1, lambda)), a2),
                x1,
            ),
            x2,
        );
        let y3 = f.sub(f.sub(f.neg(f.mul(f.add(lambda, a1), x3)), nu), a3);
        CurvePoint::Affine { x: x3, y: y3 }
    }

    pub fn mul(&self, n: i64, p: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        let mut base = if n < 0 { self.neg(p) } else { *p };
        let mut e = n.unsigned_abs();
        let mut acc = CurvePoint::Infinity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            base = self.add_unchecked(&base, &base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Order of `p` in the group of points.
    pub fn order(&self, p: &CurvePoint) -> Result<u64> {
        self.check(p)?;
        let mut acc = *p;
        let mut n = 1;
        while !acc.is_infinity() {
            acc = self.add_unchecked(&acc, p);
            n += 1;
        }
        Ok(n)
    }

    /// Every rational point, infinity first, then affine points by `(x, y)`.
    pub fn points(&self) -> Vec<CurvePoint> {
        let mut out = vec![CurvePoint::Infinity];
        for x in self.field.elements() {
            for y in self.field.elements() {
                let p = CurvePoint::Affine { x, y };
                if self.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn transform(&self, g: &FieldIso) -> FieldCurve {
        let f = &self.field;
        let [a1, a2, a3, a4, a6] = self.a;
        let FieldIso { u, r, s, t } = *g;
        let two = f.from_int(2);
        let three = f.from_int(3);
        let ui = f.inv(u).expect("unit scaling");
        let p1 = f.add(a1, f.mul(two, s));
        let p2 = f.sub(f.add(f.sub(a2, f.mul(s, a1)), f.mul(three, r)), f.mul(s, s));
        let p3 = f.add(f.add(a3, f.mul(r, a1)), f.mul(two, t));
        let p4 = f.sub(
            f.add(
                f.sub(
                    f.add(f.sub(a4, f.mul(s, a3)), f.mul(two, f.mul(r, a2))),
                    f.mul(f.add(t, f.mul(r, s)), a1),
                ),
                f.mul(three, f.mul(r, r)),
            ),
            f.mul(two, f.mul(s, t)),
        );
        let p6 = f.sub(
            f.sub(
                f.sub(
                    f.add(
                        f.add(f.add(a6, f.mul(r, a4)), f.mul(f.mul(r, r), a2)),
                        f.pow(r, 3),
                    ),
                    f.mul(t, a3),
                ),
                f.mul(t, t),
            ),
            f.mul(f.mul(r, t), a1),
        );
        FieldCurve {
            field: f.clone(),
            a: [
                f.mul(p1, ui),
                f.mul(p2, f.pow(ui, 2)),
                f.mul(p3, f.pow(ui, 3)),
                f.mul(p4, f.pow(ui, 4)),
                f.mul(p6, f.pow(ui, 6)),
            ],
        }
    }

    /// Image of a point under the coordinate change `g`.
    pub fn map_point(&self, g: &FieldIso, p: &CurvePoint) -> CurvePoint {
        match *p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let f = &self.field;
                let ui = f.inv(g.u).expect("unit scaling");
                let xr = f.sub(x, g.r);
                CurvePoint::Affine {
                    x: f.mul(xr, f.pow(ui, 2)),
                    y: f.mul(f.sub(f.sub(y, f.mul(g.s, xr)), g.t), f.pow(ui, 3)),
                }
            }
        }
    }

    /// Every `(u, r, s, t)` with `transform(g) == target`, in canonical order.
    pub fn isomorphisms_to(&self, target: &FieldCurve) -> Vec<FieldIso> {
        let f = &self.field;
        let mut out = Vec::new();
        for u in f.elements().filter(|&u| u != 0) {
            for r in f.elements() {
                for s in f.elements() {
                    for t in f.elements() {
                        let g = FieldIso { u, r, s, t };
                        if self.transform(&g).a == target.a {
                            out.push(g);
                        }
                    }
                }
            }
        }
        out
    }
}

/// The `n`-torsion over the smallest extension containing all of it.
#[derive(Clone, Debug)]
pub struct Torsion {
    /// Absolute degree `m` of the field `F_{2^m}` of definition.
    pub degree: u32,
    pub curve: FieldCurve,
    pub points: Vec<CurvePoint>,
}

impl Torsion {
    pub fn field(&self) -> &FiniteField {
        &self.curve.field
    }
}

/// Points of order dividing `n`, over `F_{2^m}` for the least multiple `m`
/// of the base degree (up to `search_bound`) where there are `n^2` of them.
pub fn torsion_points(c: &WCurve, n: u32, search_bound: u32) -> Result<Torsion> {
    let f = field_of(c.ring())?;
    if f.characteristic() != 2 {
        return Err(Error::Unsupported(
            "torsion search needs a binary field".into(),
        ));
    }
    if n == 0 || n % 2 == 0 {
        return Err(Error::Precondition(format!(
            "torsion order {n} must be odd"
        )));
    }
    if !c.is_smooth() {
        return Err(Error::SingularCurve(c.to_string()));
    }
    let d = f.degree();
    let mut m = d;
    while m <= search_bound {
        let big = FiniteField::new(crate::field::FieldSpec::binary(m)?)?;
        let fc = c.base_change(&big)?.field_curve()?;
        let pts: Vec<CurvePoint> = fc
            .points()
            .into_iter()
            .filter(|p| fc.mul(n as i64, p).expect("point on curve").is_infinity())
            .collect();
        if pts.len() as u64 == (n as u64) * (n as u64) {
            return Ok(Torsion {
                degree: m,
                curve: fc,
                points: pts,
            });
        }
        m += d;
    }
    Err(Error::TorsionBoundExceeded {
        bound: search_bound,
    })
}

/// All automorphisms of a curve over a finite field, by exhaustion over
/// `(u, r, s, t)`; the identity comes first.
pub fn automorphisms(c: &WCurve) -> Result<Vec<WIso>> {
    if !c.is_smooth() {
        return Err(Error::SingularCurve(c.to_string()));
    }
    let fc = c.field_curve()?;
    Ok(fc
        .isomorphisms_to(&fc)
        .into_iter()
        .map(|g| WIso::from_handles(c.ring(), [g.u, g.r, g.s, g.t]))
        .collect())
}

/// Automorphisms fixing the point `p` and the invariant differential.
pub fn triple_automorphisms(c: &WCurve, p: &CurvePoint) -> Result<Vec<WIso>> {
    let fc = c.field_curve()?;
    Ok(automorphisms(c)?
        .into_iter()
        .filter(|g| {
            let h = g.field_iso().expect("field iso");
            fc.map_point(&h, p) == *p && differential_scaling(c, g).is_one()
        })
        .collect())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    FiniteFieldExhaustive,
    TruncatedElimination,
}

/// First linear system found inconsistent while lifting a residue solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    /// The residue-level coordinate change being lifted.
    pub residue: String,
    /// Filtration degree `j` of the failing step.
    pub step: u32,
    /// Basis element of the graded piece.
    pub basis: String,
    /// The equation that could not be satisfied.
    pub equation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsoSearchOutcome {
    Found(WIso),
    /// No candidate satisfies the equations (exhaustive mode), or no
    /// residue-level candidate does (elimination mode).
    Exhausted {
        candidates: u64,
    },
    /// Every residue-level solution failed to lift; the first failure is kept.
    Obstructed {
        first: Obstruction,
        residue_solutions: usize,
    },
}

impl IsoSearchOutcome {
    pub fn found(&self) -> Option<&WIso> {
        match self {
            IsoSearchOutcome::Found(g) => Some(g),
            _ => None,
        }
    }
}

/// Search for `φ` with `apply_iso(c1, φ) == c2`.
pub fn iso_search(c1: &WCurve, c2: &WCurve, mode: SearchMode) -> Result<IsoSearchOutcome> {
    if c1.ring() != c2.ring() {
        return Err(Error::RingMismatch("curves over different rings".into()));
    }
    match mode {
        SearchMode::FiniteFieldExhaustive => {
            let f1 = c1.field_curve()?;
            let f2 = c2.field_curve()?;
            let q = f1.field.size() as u64;
            Ok(match f1.isomorphisms_to(&f2).first() {
                Some(g) => {
                    IsoSearchOutcome::Found(WIso::from_handles(c1.ring(), [g.u, g.r, g.s, g.t]))
                }
                None => IsoSearchOutcome::Exhausted {
                    candidates: (q - 1) * q * q * q,
                },
            })
        }
        SearchMode::TruncatedElimination => eliminate(c1, c2),
    }
}

/// Weight `w` of a homogeneous pair of curves: every term of `a_i` has
/// Laurent degree `i * w`.
fn laurent_weight(ring: &Ring, curves: &[&WCurve]) -> Result<(Option<usize>, i16)> {
    let laurent: Vec<usize> = ring.laurent_indices().collect();
    let li = match laurent.as_slice() {
        [] => return Ok((None, 0)),
        [i] => *i,
        _ => {
            return Err(Error::Unsupported(
                "elimination supports at most one Laurent variable".into(),
            ))
        }
    };
    let mut w: Option<i16> = None;
    for c in curves {
        for (coef, &i) in c.coeffs().iter().zip(WEIGHTS.iter()) {
            for (m, _) in coef.terms() {
                let e = m.0[li];
                if e % i as i16 != 0 {
                    return Err(Error::Unsupported(format!(
                        "coefficient a{i} = {coef} is not homogeneous"
                    )));
                }
                match w {
                    None => w = Some(e / i as i16),
                    Some(w0) if w0 * i as i16 == e => {}
                    Some(_) => {
                        return Err(Error::Unsupported(format!(
                            "coefficient a{i} = {coef} is not homogeneous"
                        )))
                    }
                }
            }
        }
    }
    Ok((Some(li), w.unwrap_or(0)))
}

/// `u^i A_i - P_i(r, s, t)`: zero exactly when `φ` carries `c1` to `c2`.
fn iso_equations(c1: &WCurve, c2: &WCurve, g: &WIso) -> Result<[RingValue; 5]> {
    // With u = 1 the transformed coefficients are exactly P_i(r, s, t).
    let unipotent = WIso {
        u: g.u.ring().one(),
        ..g.clone()
    };
    let p = c1.apply_iso(&unipotent)?;
    let (p, a) = (p.coeffs(), c2.coeffs());
    Ok(std::array::from_fn(|k| {
        &(&g.u.pow(WEIGHTS[k] as u64) * a[k]) - p[k]
    }))
}

/// Partial derivatives of [`iso_equations`] with respect to `(u, r, s, t)`.
fn iso_jacobian(c1: &WCurve, c2: &WCurve, g: &WIso) -> [[RingValue; 4]; 5] {
    let [a1, a2, a3, a4, _] = c1.coeffs();
    let WIso { u, r, s, t } = g;
    let ring = u.ring();
    let z = ring.zero();
    let tgt = c2.coeffs();
    let du = |k: usize, i: u64| &u.pow(i - 1).mul_int(i as i64) * tgt[k];
    let a1_2s = a1 + &s.mul_int(2);
    [
        [du(0, 1), z.clone(), ring.from_int(-2), z.clone()],
        [du(1, 2), ring.from_int(-3), a1_2s.clone(), z.clone()],
        [du(2, 3), a1.neg(), z.clone(), ring.from_int(-2)],
        [
            du(3, 4),
            (&(&a2.mul_int(2) - &(s * a1)) + &r.mul_int(6)).neg(),
            &(a3 + &(r * a1)) + &t.mul_int(2),
            a1_2s,
        ],
        [
            du(4, 6),
            (&(&(a4 + &(r * a2).mul_int(2)) + &(r * r).mul_int(3)) - &(t * a1)).neg(),
            z,
            &(a3 + &t.mul_int(2)) + &(r * a1),
        ],
    ]
}

fn eliminate(c1: &WCurve, c2: &WCurve) -> Result<IsoSearchOutcome> {
    let ring = c1.ring().clone();
    let steps = filtration_length(&ring)?;
    let (li, w) = laurent_weight(&ring, &[c1, c2])?;
    let res = residue_ring(&ring)?;
    let field = match res.base() {
        BaseRing::Field(f) => f.clone(),
        _ => unreachable!("residue ring has a field base"),
    };
    // Laurent degrees of the unknowns u, r, s, t under the homogeneity ansatz.
    let degs = [0, 2 * w, w, 3 * w];
    let res_mono = |e: i16| {
        if li.is_some() {
            Mono::unit(0, e)
        } else {
            Mono::ONE
        }
    };
    let full_mono = |e: i16| match li {
        Some(i) => Mono::unit(i, e),
        None => Mono::ONE,
    };
    let r1 = c1.map_coeffs(|v| v.residue().expect("local ring"))?;
    let r2 = c2.map_coeffs(|v| v.residue().expect("local ring"))?;

    let mut candidates = 0u64;
    let mut solutions = Vec::new();
    for u0 in field.elements().filter(|&x| x != 0) {
        for r0 in field.elements() {
            for s0 in field.elements() {
                for t0 in field.elements() {
                    candidates += 1;
                    let h = [u0, r0, s0, t0];
                    let [u, r, s, t] = std::array::from_fn(|k| {
                        res.monomial(res_mono(degs[k]), Scalar(h[k] as u64, 0))
                    });
                    let g = WIso { u, r, s, t };
                    if r1.apply_iso(&g)? == r2 {
                        solutions.push(h);
                    }
                }
            }
        }
    }
    if solutions.is_empty() {
        return Ok(IsoSearchOutcome::Exhausted { candidates });
    }

    let base = ring.base();
    let mut first: Option<Obstruction> = None;
    'candidates: for h in &solutions {
        let describe_residue = || {
            format!(
                "(u, r, s, t) = ({})",
                h.iter()
                    .zip(degs.iter())
                    .map(|(&x, &d)| res.monomial(res_mono(d), Scalar(x as u64, 0)).to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        };
        let mut x: [RingValue; 4] =
            std::array::from_fn(|k| ring.monomial(full_mono(degs[k]), base.lift_residue(h[k])));
        for j in 1..steps {
            let g = WIso {
                u: x[0].clone(),
                r: x[1].clone(),
                s: x[2].clone(),
                t: x[3].clone(),
            };
            let eqs = iso_equations(c1, c2, &g)?;
            let level = eqs
                .iter()
                .map(|e| e.filtration_level())
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .unwrap_or(steps);
            if level >= steps {
                break;
            }
            if level > j {
                continue;
            }
            let jac = iso_jacobian(c1, c2, &g);
            let jac_res: Vec<Vec<RingValue>> = jac
                .iter()
                .map(|row| row.iter().map(|v| v.residue()).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let comps: Vec<_> = eqs
                .iter()
                .map(|e| e.graded_component(j))
                .collect::<Result<Vec<_>>>()?;
            let mut bases: Vec<_> = comps.iter().flat_map(|c| c.keys().copied()).collect();
            bases.sort();
            bases.dedup();
            let mut corrections: [RingValue; 4] = std::array::from_fn(|_| ring.zero());
            for b in bases {
                // Columns: J_ik * L^{deg_k}; rows keyed by (equation, Laurent exponent).
                let mut rows: std::collections::BTreeMap<(usize, i16), ([u32; 4], u32)> =
                    std::collections::BTreeMap::new();
                for (i, row) in jac_res.iter().enumerate() {
                    for (k, entry) in row.iter().enumerate() {
                        let col = entry * &res.monomial(res_mono(degs[k]), Scalar(1, 0));
                        for (m, c) in col.terms() {
                            rows.entry((i, m.0[0])).or_insert(([0; 4], 0)).0[k] = c.0 as u32;
                        }
                    }
                    if let Some(v) = comps[i].get(&b) {
                        for (m, c) in v.terms() {
                            rows.entry((i, m.0[0])).or_insert(([0; 4], 0)).1 =
                                field.neg(c.0 as u32);
                        }
                    }
                }
                let mut sys = LinearSystem::new(field.clone(), 4);
                let mut failed = None;
                for ((i, e), (coeffs, rhs)) in &rows {
                    if !sys.push(coeffs, *rhs) && failed.is_none() {
                        failed = Some((*i, *e));
                    }
                }
                match (failed, sys.solve()) {
                    (None, Some(sol)) => {
                        for k in 0..4 {
                            let v = res.monomial(res_mono(degs[k]), Scalar(sol[k] as u64, 0));
                            corrections[k] = &corrections[k] + &b.lift(&ring, &v);
                        }
                    }
                    (failed, _) => {
                        let (i, e) = failed.expect("inconsistent system");
                        if first.is_none() {
                            let var = li.map(|l| ring.vars()[l].name.clone());
                            first = Some(Obstruction {
                                residue: describe_residue(),
                                step: j,
                                basis: b.describe(&ring),
                                equation: match var {
                                    Some(v) => format!("a{} coefficient of {v}^{e}", WEIGHTS[i]),
                                    None => format!("a{} coefficient", WEIGHTS[i]),
                                },
                            });
                        }
                        continue 'candidates;
                    }
                }
            }
            for k in 0..4 {
                x[k] = &x[k] + &corrections[k];
            }
        }
        let g = WIso::new(x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone())?;
        if c1.apply_iso(&g)? == *c2 {
            return Ok(IsoSearchOutcome::Found(g));
        }
        if first.is_none() {
            first = Some(Obstruction {
                residue: describe_residue(),
                step: steps,
                basis: "1".into(),
                equation: "final verification".into(),
            });
        }
    }
    Ok(IsoSearchOutcome::Obstructed {
        first: first.expect("at least one residue solution"),
        residue_solutions: solutions.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::VarSpec;

    fn f4() -> Ring {
        TowerRing::f4()
    }

    fn supersingular(ring: &Ring) -> WCurve {
        WCurve::from_ints(ring, [0, 0, 1, 0, 0])
    }

    #[test]
    fn symbolic_discriminant() {
        let ring = TowerRing::new(
            BaseRing::integers(1_000_003),
            vec![VarSpec::series("a1", 8), VarSpec::series("a3", 8)],
        )
        .unwrap();
        let a1 = ring.var("a1");
        let a3 = ring.var("a3");
        let z = ring.zero();
        let c = WCurve::new([a1.clone(), z.clone(), a3.clone(), z.clone(), z]).unwrap();
        let expect = &a3.pow(3) * &(&a1.pow(3) - &a3.mul_int(27));
        let inv = c.invariants();
        assert_eq!(inv.discriminant, expect);
        assert_eq!(
            inv.b8.mul_int(4),
            &(&inv.b2 * &inv.b6) - &(&inv.b4 * &inv.b4)
        );
    }

    #[test]
    fn supersingular_over_f2() {
        let ring = TowerRing::field(FiniteField::f2());
        let c = supersingular(&ring);
        assert!(c.discriminant().is_one());
        assert!(c.j_invariant().unwrap().is_zero());
        assert!(c.is_smooth());
        let cusp = WCurve::from_ints(&ring, [0; 5]);
        assert!(cusp.discriminant().is_zero());
        assert!(matches!(cusp.j_invariant(), Err(Error::SingularCurve(_))));
    }

    #[test]
    fn scaling_and_discriminant() {
        let ring = TowerRing::new(
            BaseRing::integers(1_000_003),
            vec![VarSpec::series("a1", 8), VarSpec::laurent("u")],
        )
        .unwrap();
        let a1 = ring.var("a1");
        let u = ring.var("u");
        let c = WCurve::new([
            a1.clone(),
            ring.from_int(5),
            ring.from_int(1),
            &a1 * &a1,
            ring.from_int(7),
        ])
        .unwrap();
        let ui = u.inverse().unwrap();
        let scaled = c.apply_iso(&WIso::scaling(u.clone())).unwrap();
        assert_eq!(scaled.a1, &a1 * &ui);
        assert_eq!(scaled.a3, ui.pow(3));
        let g = WIso::new(u.clone(), ring.from_int(2), a1.clone(), ring.from_int(-3)).unwrap();
        let moved = c.apply_iso(&g).unwrap();
        assert_eq!(moved.discriminant(), &c.discriminant() * &ui.pow(12));
        assert_eq!(moved.invariants().c4, &c.invariants().c4 * &ui.pow(4));
        // Composition and inverse agree with successive application.
        let h = WIso::new(ring.from_int(3), a1.clone(), ring.from_int(1), &a1 * &u).unwrap();
        assert_eq!(
            c.apply_iso(&g.then(&h)).unwrap(),
            moved.apply_iso(&h).unwrap()
        );
        assert_eq!(moved.apply_iso(&g.inverse()).unwrap(), c);
        assert!(g.then(&g.inverse()).is_identity());
    }

    #[test]
    fn group_law_on_supersingular_curve() {
        let c = supersingular(&f4());
        let fc = c.field_curve().unwrap();
        let o = CurvePoint::Infinity;
        let p = CurvePoint::Affine { x: 0, y: 0 };
        assert_eq!(fc.add(&p, &o).unwrap(), p);
        assert_eq!(fc.add(&p, &p).unwrap(), CurvePoint::Affine { x: 0, y: 1 });
        assert!(fc.mul(3, &p).unwrap().is_infinity());
        let pts = fc.points();
        assert_eq!(pts.len(), 9);
        for a in &pts {
            assert!(fc.add(a, &fc.neg(a)).unwrap().is_infinity());
            for b in &pts {
                for d in &pts {
                    let l = fc.add(&fc.add(a, b).unwrap(), d).unwrap();
                    let r = fc.add(a, &fc.add(b, d).unwrap()).unwrap();
                    assert_eq!(l, r);
                }
            }
        }
        let bad = CurvePoint::Affine { x: 1, y: 1 };
        assert!(matches!(fc.add(&bad, &p), Err(Error::PointNotOnCurve(_))));
    }

    #[test]
    fn three_torsion() {
        let c = supersingular(&f4());
        let tor = torsion_points(&c, 3, 6).unwrap();
        assert_eq!(tor.degree, 2);
        assert_eq!(tor.points.len(), 9);
        let mut xs: Vec<u32> = tor
            .points
            .iter()
            .filter_map(|p| match p {
                CurvePoint::Affine { x, .. } => Some(*x),
                _ => None,
            })
            .collect();
        xs.dedup();
        assert_eq!(xs, vec![0, 1, 2, 3]);
        let f2 = TowerRing::field(FiniteField::f2());
        let over_f2 = supersingular(&f2);
        let one = torsion_points(&over_f2, 1, 6).unwrap();
        assert_eq!((one.degree, one.points.len()), (1, 1));
        assert_eq!(torsion_points(&over_f2, 3, 6).unwrap().degree, 2);
        assert!(matches!(
            torsion_points(&over_f2, 3, 1),
            Err(Error::TorsionBoundExceeded { bound: 1 })
        ));
    }

    #[test]
    fn automorphism_counts() {
        let c = supersingular(&f4());
        let autos = automorphisms(&c).unwrap();
        assert_eq!(autos.len(), 24);
        assert!(autos[0].is_identity());
        for a in &autos {
            for b in &autos {
                assert!(autos.contains(&a.compose(b)));
            }
            assert!(autos.contains(&a.inverse()));
        }
        let f2 = TowerRing::field(FiniteField::f2());
        assert_eq!(automorphisms(&supersingular(&f2)).unwrap().len(), 2);
        // y^2 + xy = x^3 + 1 is ordinary with j = 1.
        let ordinary = WCurve::from_ints(&f4(), [1, 0, 0, 0, 1]);
        assert!(ordinary.j_invariant().unwrap().is_one());
        assert_eq!(automorphisms(&ordinary).unwrap().len(), 2);
    }

    #[test]
    fn triple_rigidity() {
        let c = supersingular(&f4());
        let fixed = triple_automorphisms(&c, &CurvePoint::Affine { x: 0, y: 0 }).unwrap();
        assert_eq!(fixed.len(), 1);
        assert!(fixed[0].is_identity());
    }

    #[test]
    fn differential_scaling_values() {
        let ring = f4();
        let c = supersingular(&ring);
        assert!(differential_scaling(&c, &WIso::identity(&ring)).is_one());
        let w = ring.scalar(Scalar(2, 0));
        assert_eq!(differential_scaling(&c, &WIso::scaling(w.clone())), w);
        let z3 = TowerRing::new(BaseRing::integers(9), vec![]).unwrap();
        let c3 = WCurve::from_ints(&z3, [1, 0, 1, 0, 0]);
        assert_eq!(
            differential_scaling(&c3, &WIso::negation(&c3)),
            z3.from_int(-1)
        );
        assert_eq!(c3.apply_iso(&WIso::negation(&c3)).unwrap(), c3);
    }

    #[test]
    fn exhaustive_search() {
        let ring = f4();
        let c = supersingular(&ring);
        let found = iso_search(&c, &c, SearchMode::FiniteFieldExhaustive).unwrap();
        assert!(found.found().unwrap().is_identity());
        let c_w = WCurve::from_handles(&ring, [0, 0, 2, 0, 0]);
        // u^3 = 1 on F4^x, so a3 cannot be rescaled: a quadratic twist.
        assert_eq!(
            iso_search(&c, &c_w, SearchMode::FiniteFieldExhaustive).unwrap(),
            IsoSearchOutcome::Exhausted { candidates: 192 }
        );
        let ordinary = WCurve::from_ints(&ring, [1, 0, 0, 0, 1]);
        assert_eq!(
            iso_search(&c, &ordinary, SearchMode::FiniteFieldExhaustive).unwrap(),
            IsoSearchOutcome::Exhausted { candidates: 192 }
        );
    }

    #[test]
    fn elimination_recovers_a_scaling() {
        let ring = TowerRing::deformation(3, 4);
        let a1 = ring.var("a1");
        let u = ring.var("u");
        let c = WCurve::new([&a1 * &u, ring.zero(), u.pow(3), ring.zero(), ring.zero()]).unwrap();
        let same = iso_search(&c, &c, SearchMode::TruncatedElimination).unwrap();
        assert!(same.found().unwrap().is_identity());
        let w = ring.scalar(Scalar(0, 1));
        let g = WIso::new(w, ring.zero(), &a1 * &u, ring.zero()).unwrap();
        let target = c.apply_iso(&g).unwrap();
        let found = iso_search(&c, &target, SearchMode::TruncatedElimination).unwrap();
        let h = found.found().expect("iso exists");
        assert_eq!(c.apply_iso(h).unwrap(), target);
        let c0 = supersingular(&f4());
        let over_field = iso_search(&c0, &c0, SearchMode::TruncatedElimination).unwrap();
        assert!(over_field.found().unwrap().is_identity());
        let z = TowerRing::new(BaseRing::integers(15), vec![]).unwrap();
        let cz = supersingular(&z);
        assert!(iso_search(&cz, &cz, SearchMode::TruncatedElimination).is_err());
    }
}
