//! Tower rings `B[[s_1, ..]]/(s_i^{m_i})[u_1^{±1}, ..]` over a base ring `B`,
//! and their elements.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::base::{BaseRing, Scalar};
use crate::error::{Error, Result};
use crate::field::FiniteField;

/// Most variables a tower may adjoin.
pub const MAX_VARS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// A power-series variable `s` with `s^truncation = 0`.
    Series { truncation: u32 },
    /// An exact Laurent unit.
    Laurent,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarSpec {
    pub name: String,
    pub kind: VarKind,
}

impl VarSpec {
    pub fn series(name: &str, truncation: u32) -> Self {
        VarSpec {
            name: name.to_string(),
            kind: VarKind::Series { truncation },
        }
    }

    pub fn laurent(name: &str) -> Self {
        VarSpec {
            name: name.to_string(),
            kind: VarKind::Laurent,
        }
    }

    pub fn truncation(&self) -> Option<u32> {
        match self.kind {
            VarKind::Series { truncation } => Some(truncation),
            VarKind::Laurent => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TowerRing {
    base: BaseRing,
    vars: Vec<VarSpec>,
}

/// Shared handle to a ring; every [`RingValue`] carries one.
pub type Ring = Arc<TowerRing>;

/// Exponent vector, indexed like the ring's variables. Ordered graded
/// lexicographically: first by total degree, then lexicographically.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Mono(pub [i16; MAX_VARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; MAX_VARS]);

    pub fn degree(&self) -> i32 {
        self.0.iter().map(|&e| e as i32).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut out = [0i16; MAX_VARS];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a + b;
        }
        Mono(out)
    }

    pub fn inverse(&self) -> Mono {
        Mono(self.0.map(|e| -e))
    }

    pub fn unit(index: usize, exp: i16) -> Mono {
        let mut m = Mono::ONE;
        m.0[index] = exp;
        m
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TowerRing {
    pub fn new(base: BaseRing, vars: Vec<VarSpec>) -> Result<Ring> {
        if vars.len() > MAX_VARS {
            return Err(Error::Unsupported(format!(
                "at most {MAX_VARS} adjoined variables"
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Unsupported(format!("duplicate variable {}", v.name)));
            }
            if v.truncation() == Some(0) {
                return Err(Error::Unsupported(format!(
                    "variable {} has truncation 0",
                    v.name
                )));
            }
        }
        Ok(Arc::new(TowerRing { base, vars }))
    }

    /// The bare base ring with no adjoined variables.
    pub fn over(base: BaseRing) -> Ring {
        Arc::new(TowerRing { base, vars: vec![] })
    }

    pub fn field(f: FiniteField) -> Ring {
        Self::over(BaseRing::Field(f))
    }

    pub fn f4() -> Ring {
        Self::field(FiniteField::f4())
    }

    pub fn witt(k: u32) -> Ring {
        Self::over(BaseRing::witt(k))
    }

    /// `W_k(F_4)[[a1]]/(a1^m)[u^{±1}]`.
    pub fn deformation(k: u32, m: u32) -> Ring {
        Self::new(
            BaseRing::witt(k),
            vec![VarSpec::series("a1", m), VarSpec::laurent("u")],
        )
        .expect("valid tower")
    }

    /// `F[eps]/(eps^2)`.
    pub fn dual_numbers(f: FiniteField) -> Ring {
        Self::new(BaseRing::Field(f), vec![VarSpec::series("eps", 2)]).expect("valid tower")
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn series_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.truncation().is_some())
            .map(|(i, _)| i)
    }

    pub fn laurent_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.truncation().is_none())
            .map(|(i, _)| i)
    }

    /// Whether the monomial survives truncation.
    pub fn admits(&self, m: &Mono) -> bool {
        self.vars.iter().enumerate().all(|(i, v)| match v.kind {
            VarKind::Series { truncation } => m.0[i] >= 0 && (m.0[i] as u32) < truncation,
            VarKind::Laurent => true,
        })
    }

    /// Sum of the series-variable exponents of `m`.
    pub fn series_degree(&self, m: &Mono) -> u32 {
        self.series_indices().map(|i| m.0[i] as u32).sum()
    }

    pub fn with_base(&self, base: BaseRing) -> Ring {
        Arc::new(TowerRing {
            base,
            vars: self.vars.clone(),
        })
    }

    pub fn with_vars(&self, vars: Vec<VarSpec>) -> Result<Ring> {
        TowerRing::new(self.base.clone(), vars)
    }

    pub fn descriptor(&self) -> String {
        let mut s = self.base.descriptor();
        for v in &self.vars {
            match v.kind {
                VarKind::Series { truncation } => {
                    s.push_str(&format!("[[{0}]]/({0}^{1})", v.name, truncation))
                }
                VarKind::Laurent => s.push_str(&format!("[{0},1/{0}]", v.name)),
            }
        }
        s
    }

    pub fn zero(self: &Arc<Self>) -> RingValue {
        RingValue {
            ring: self.clone(),
            terms: vec![],
        }
    }

    pub fn one(self: &Arc<Self>) -> RingValue {
        self.scalar(self.base.one())
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> RingValue {
        self.scalar(self.base.from_int(n))
    }

    pub fn scalar(self: &Arc<Self>, c: Scalar) -> RingValue {
        self.monomial(Mono::ONE, c)
    }

    /// Lift of a residue-field handle along the digit-wise section.
    pub fn from_residue(self: &Arc<Self>, d: u32) -> RingValue {
        self.scalar(self.base.lift_residue(d))
    }

    pub fn monomial(self: &Arc<Self>, m: Mono, c: Scalar) -> RingValue {
        let terms = if c.is_zero() || !self.admits(&m) {
            vec![]
        } else {
            vec![(m, c)]
        };
        RingValue {
            ring: self.clone(),
            terms,
        }
    }

    /// The named variable. Panics if it does not exist.
    pub fn var(self: &Arc<Self>, name: &str) -> RingValue {
        let i = self
            .var_index(name)
            .unwrap_or_else(|| panic!("no variable {name} in {}", self.descriptor()));
        self.monomial(Mono::unit(i, 1), self.base.one())
    }

    /// `name^exp`; negative exponents are only meaningful for Laurent variables.
    pub fn var_pow(self: &Arc<Self>, name: &str, exp: i16) -> RingValue {
        let i = self
            .var_index(name)
            .unwrap_or_else(|| panic!("no variable {name} in {}", self.descriptor()));
        self.monomial(Mono::unit(i, exp), self.base.one())
    }

    pub fn from_terms(
        self: &Arc<Self>,
        terms: impl IntoIterator<Item = (Mono, Scalar)>,
    ) -> RingValue {
        RingValue::normalized(self.clone(), terms.into_iter().collect())
    }
}

impl fmt::Display for TowerRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// An element of a [`TowerRing`]: finitely many monomials with nonzero base
/// coefficients, sorted in canonical monomial order.
#[derive(Clone, Debug)]
pub struct RingValue {
    ring: Ring,
    terms: Vec<(Mono, Scalar)>,
}

impl PartialEq for RingValue {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring)
            && self.terms == other.terms
    }
}

impl Eq for RingValue {}

impl RingValue {
    fn normalized(ring: Ring, mut terms: Vec<(Mono, Scalar)>) -> RingValue {
        terms.retain(|(m, c)| !c.is_zero() && ring.admits(m));
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let base = ring.base();
        let mut out: Vec<(Mono, Scalar)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = base.add(*lc, c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        RingValue { ring, terms: out }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &[(Mono, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0] == (Mono::ONE, self.ring.base().one())
    }

    fn check_ring(&self, other: &RingValue) {
        assert!(
            Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring,
            "ring mismatch: {} vs {}",
            self.ring,
            other.ring
        );
    }

    pub fn add(&self, other: &RingValue) -> RingValue {
        self.check_ring(other);
        let base = self.ring.base();
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = base.add(a[i].1, b[j].1);
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        RingValue {
            ring: self.ring.clone(),
            terms: out,
        }
    }

    pub fn neg(&self) -> RingValue {
        let base = self.ring.base();
        RingValue {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|&(m, c)| (m, base.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &RingValue) -> RingValue {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingValue) -> RingValue {
        self.check_ring(other);
        if self.is_zero() || other.is_zero() {
            return self.ring.zero();
        }
        let base = self.ring.base();
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(m1, c1) in &self.terms {
            for &(m2, c2) in &other.terms {
                let m = m1.mul(&m2);
                if self.ring.admits(&m) {
                    terms.push((m, base.mul(c1, c2)));
                }
            }
        }
        RingValue::normalized(self.ring.clone(), terms)
    }

    pub fn scale(&self, c: Scalar) -> RingValue {
        let base = self.ring.base();
        RingValue::normalized(
            self.ring.clone(),
            self.terms
                .iter()
                .map(|&(m, x)| (m, base.mul(x, c)))
                .collect(),
        )
    }

    pub fn mul_int(&self, n: i64) -> RingValue {
        self.scale(self.ring.base().from_int(n))
    }

    pub fn pow(&self, mut e: u64) -> RingValue {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Integer power; negative exponents require a unit.
    pub fn powi(&self, e: i64) -> Result<RingValue> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }

    /// The unique term that is a unit when the element is a unit: a Laurent
    /// monomial with a unit base coefficient. Every other term is nilpotent.
    fn unit_term(&self) -> Option<(Mono, Scalar)> {
        let base = self.ring.base();
        let mut found = None;
        for &(m, c) in &self.terms {
            if self.ring.series_degree(&m) == 0 && base.is_unit(c) {
                if found.is_some() {
                    return None;
                }
                found = Some((m, c));
            }
        }
        found
    }

    pub fn is_unit(&self) -> bool {
        self.ring.base().is_local() && self.unit_term().is_some()
    }

    pub fn inverse(&self) -> Result<RingValue> {
        let base = self.ring.base();
        if !base.is_local() {
            return Err(Error::Unsupported(format!(
                "inversion over non-local base {}",
                base
            )));
        }
        let (m, c) = self
            .unit_term()
            .ok_or_else(|| Error::NotUnit(self.to_string()))?;
        let lead_inv = self
            .ring
            .monomial(m.inverse(), base.inv(c).expect("unit coefficient"));
        // self = lead * (1 + n) with n nilpotent
        let n = lead_inv.mul(self).sub(&self.ring.one());
        let minus_n = n.neg();
        let mut sum = self.ring.one();
        let mut term = self.ring.one();
        for _ in 0..4096 {
            term = term.mul(&minus_n);
            if term.is_zero() {
                return Ok(sum.mul(&lead_inv));
            }
            sum = sum.add(&term);
        }
        Err(Error::NotUnit(self.to_string()))
    }

    /// Exact division by a unit.
    pub fn div(&self, other: &RingValue) -> Result<RingValue> {
        Ok(self.mul(&other.inverse()?))
    }

    pub fn coefficient(&self, m: &Mono) -> Scalar {
        self.terms
            .binary_search_by(|(x, _)| x.cmp(m))
            .map(|i| self.terms[i].1)
            .unwrap_or(Scalar::ZERO)
    }

    /// The constant term, if the value is a base scalar.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.as_slice() {
            [] => Some(Scalar::ZERO),
            [(m, c)] if *m == Mono::ONE => Some(*c),
            _ => None,
        }
    }

    /// Applies `f` to every base coefficient, landing in `target` (which must
    /// have the same variables, possibly with smaller truncations).
    pub fn map_scalars(&self, target: &Ring, f: impl Fn(Scalar) -> Scalar) -> RingValue {
        RingValue::normalized(
            target.clone(),
            self.terms.iter().map(|&(m, c)| (m, f(c))).collect(),
        )
    }

    /// Canonical projection to a ring of lower precision (smaller `p`-adic
    /// precision and/or smaller truncations, same variables).
    pub fn project(&self, target: &Ring) -> Result<RingValue> {
        if self.ring.vars.len() != target.vars.len()
            || self.ring.vars.iter().zip(target.vars.iter()).any(|(a, b)| {
                match (&a.kind, &b.kind) {
                    (VarKind::Series { truncation: t }, VarKind::Series { truncation: t2 }) => {
                        a.name != b.name || t2 > t
                    }
                    (VarKind::Laurent, VarKind::Laurent) => a.name != b.name,
                    _ => true,
                }
            })
        {
            return Err(Error::RingMismatch(format!(
                "cannot project {} to {}",
                self.ring, target
            )));
        }
        let src = self.ring.base();
        let dst = target.base();
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(m, c) in &self.terms {
            let c2 = src
                .project(dst, c)
                .ok_or_else(|| Error::RingMismatch(format!("cannot project {} to {}", src, dst)))?;
            terms.push((m, c2));
        }
        Ok(RingValue::normalized(target.clone(), terms))
    }

    /// Exponent range `(min, max)` of variable `i` among the terms.
    pub fn exponent_range(&self, i: usize) -> Option<(i16, i16)> {
        let mut it = self.terms.iter().map(|(m, _)| m.0[i]);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), e| (lo.min(e), hi.max(e))))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl std::ops::$tr<&RingValue> for &RingValue {
            type Output = RingValue;
            fn $method(self, rhs: &RingValue) -> RingValue {
                RingValue::$method(self, rhs)
            }
        }
        impl std::ops::$tr<RingValue> for RingValue {
            type Output = RingValue;
            fn $method(self, rhs: RingValue) -> RingValue {
                RingValue::$method(&self, &rhs)
            }
        }
        impl std::ops::$tr<&RingValue> for RingValue {
            type Output = RingValue;
            fn $method(self, rhs: &RingValue) -> RingValue {
                RingValue::$method(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl std::ops::Neg for &RingValue {
    type Output = RingValue;
    fn neg(self) -> RingValue {
        RingValue::neg(self)
    }
}

impl std::ops::Neg for RingValue {
    type Output = RingValue;
    fn neg(self) -> RingValue {
        RingValue::neg(&self)
    }
}

impl fmt::Display for RingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let base = self.ring.base();
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            for (i, v) in self.ring.vars.iter().enumerate() {
                match m.0[i] {
                    0 => {}
                    1 => factors.push(v.name.clone()),
                    e => factors.push(format!("{}^{}", v.name, e)),
                }
            }
            let cs = base.scalar_string(*c);
            if factors.is_empty() {
                f.write_str(&cs)?;
            } else {
                if *c != base.one() {
                    if cs.contains('+') {
                        write!(f, "({cs})*")?;
                    } else {
                        write!(f, "{cs}*")?;
                    }
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for RingValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.ring.nvars();
        let base = self.ring.base();
        let monomials: Vec<(Vec<i16>, String)> = self
            .terms
            .iter()
            .map(|(m, c)| (m.0[..n].to_vec(), base.scalar_string(*c)))
            .collect();
        let mut st = serializer.serialize_struct("RingValue", 2)?;
        st.serialize_field("ring", &self.ring.descriptor())?;
        st.serialize_field("monomials", &monomials)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_and_units() {
        let r = TowerRing::deformation(3, 4);
        let a1 = r.var("a1");
        let u = r.var("u");
        assert!(a1.pow(4).is_zero());
        assert!(!a1.pow(3).is_zero());
        let x = &u.pow(3) + &(&a1 * &u);
        let xi = x.inverse().unwrap();
        assert!((&x * &xi).is_one());
        let two_plus_a1 = &r.from_int(2) + &a1;
        assert!(two_plus_a1.inverse().is_err());
        let one_plus_u = &r.one() + &u;
        assert!(!one_plus_u.is_unit());
    }

    #[test]
    fn canonical_order_is_graded() {
        let r = TowerRing::deformation(3, 4);
        let v = &(&r.var("a1") * &r.var("u")) + &r.var_pow("u", 3);
        let shown = v.to_string();
        assert_eq!(shown, "a1*u + u^3");
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(
            json,
            r#"{"ring":"W3(F4)[[a1]]/(a1^4)[u,1/u]","monomials":[[[1,1],"1"],[[0,3],"1"]]}"#
        );
    }

    #[test]
    fn projection_lowers_precision() {
        let hi = TowerRing::deformation(4, 6);
        let lo = TowerRing::deformation(2, 3);
        let v = &hi.from_int(6) + &hi.var("a1").pow(4);
        let p = v.project(&lo).unwrap();
        assert_eq!(p, lo.from_int(2));
        assert!(lo.one().project(&hi).is_err());
    }
}
