//! Truncated power series in one, two or three variables over a tower ring.
//!
//! A series of order `N` knows its coefficients in total degree `< N`.
//! Arithmetic results carry the minimum order of their operands.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::ring::{Ring, RingValue};

/// Exponent vector; entries past the arity are zero.
pub type Exp = [u16; 3];

const VAR_NAMES: [[&str; 3]; 3] = [["z", "", ""], ["x", "y", ""], ["x", "y", "w"]];

fn degree(e: &Exp) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

fn exp_add(a: &Exp, b: &Exp) -> Exp {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[derive(Clone, Debug)]
pub struct TruncSeries {
    ring: Ring,
    arity: usize,
    order: u32,
    coeffs: BTreeMap<Exp, RingValue>,
}

impl PartialEq for TruncSeries {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.order == other.order
            && self.coeffs == other.coeffs
            && (self.ring == other.ring)
    }
}

impl TruncSeries {
    pub fn zero(ring: &Ring, arity: usize, order: u32) -> Self {
        assert!((1..=3).contains(&arity), "arity {arity} not supported");
        TruncSeries {
            ring: ring.clone(),
            arity,
            order,
            coeffs: BTreeMap::new(),
        }
    }

    /// The coordinate function `x_index`.
    pub fn var(ring: &Ring, arity: usize, index: usize, order: u32) -> Self {
        let mut e = [0u16; 3];
        e[index] = 1;
        Self::monomial(ring, arity, order, e, ring.one())
    }

    /// The univariate series `z`.
    pub fn z(ring: &Ring, order: u32) -> Self {
        Self::var(ring, 1, 0, order)
    }

    pub fn constant(ring: &Ring, arity: usize, order: u32, c: RingValue) -> Self {
        Self::monomial(ring, arity, order, [0; 3], c)
    }

    pub fn monomial(ring: &Ring, arity: usize, order: u32, e: Exp, c: RingValue) -> Self {
        let mut s = Self::zero(ring, arity, order);
        s.set(e, c);
        s
    }

    /// Univariate series from coefficients `c_0, c_1, ...`.
    pub fn from_univariate(ring: &Ring, order: u32, coeffs: &[RingValue]) -> Self {
        let mut s = Self::zero(ring, 1, order);
        for (i, c) in coeffs.iter().enumerate() {
            s.set([i as u16, 0, 0], c.clone());
        }
        s
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, e: Exp) -> RingValue {
        self.coeffs
            .get(&e)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    /// Coefficient of `z^n` of a univariate series.
    pub fn coeff1(&self, n: u32) -> RingValue {
        self.coeff([n as u16, 0, 0])
    }

    /// Coefficient of `x^i y^j` of a bivariate series.
    pub fn coeff2(&self, i: u32, j: u32) -> RingValue {
        self.coeff([i as u16, j as u16, 0])
    }

    pub fn set(&mut self, e: Exp, c: RingValue) {
        assert!(
            e[self.arity..].iter().all(|&x| x == 0),
            "exponent beyond arity"
        );
        if c.is_zero() || degree(&e) >= self.order {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &RingValue)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_term(&self) -> RingValue {
        self.coeff([0; 3])
    }

    /// Lowest total degree with a nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.coeffs.keys().map(degree).min()
    }

    fn check(&self, other: &TruncSeries) {
        assert_eq!(self.arity, other.arity, "arity mismatch");
        assert!(self.ring == other.ring, "ring mismatch");
    }

    pub fn truncate(&self, order: u32) -> TruncSeries {
        let order = order.min(self.order);
        TruncSeries {
            ring: self.ring.clone(),
            arity: self.arity,
            order,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(e, _)| degree(e) < order)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// The same coefficients, declared known below `order`. Raising the
    /// order is only sound when the caller knows the new coefficients vanish
    /// or cannot contribute to the degrees it reads.
    pub fn with_order(&self, order: u32) -> TruncSeries {
        let mut out = self.truncate(order);
        out.order = order;
        out
    }

    /// A univariate series as a series in variable `index` of `arity` variables.
    pub fn embed(&self, arity: usize, index: usize) -> TruncSeries {
        assert_eq!(self.arity, 1, "embed a univariate series");
        let mut out = TruncSeries::zero(&self.ring, arity, self.order);
        for (e, c) in &self.coeffs {
            let mut f = [0u16; 3];
            f[index] = e[0];
            out.set(f, c.clone());
        }
        out
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.check(other);
        let mut out = self.truncate(other.order);
        for (e, c) in &other.coeffs {
            if degree(e) < out.order {
                let v = out.coeff(*e).add(c);
                out.set(*e, v);
            }
        }
        out
    }

    pub fn neg(&self) -> TruncSeries {
        self.map_coeffs(&self.ring, |c| c.neg())
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.check(other);
        let order = self.order.min(other.order);
        let mut acc: BTreeMap<Exp, RingValue> = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            let d1 = degree(e1);
            if d1 >= order {
                continue;
            }
            for (e2, c2) in &other.coeffs {
                if d1 + degree(e2) >= order {
                    continue;
                }
                let e = exp_add(e1, e2);
                let p = c1.mul(c2);
                match acc.get_mut(&e) {
                    Some(v) => *v = v.add(&p),
                    None => {
                        acc.insert(e, p);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        TruncSeries {
            ring: self.ring.clone(),
            arity: self.arity,
            order,
            coeffs: acc,
        }
    }

    /// Multiplication by a ring element.
    pub fn scale(&self, c: &RingValue) -> TruncSeries {
        self.map_coeffs(&self.ring, |x| x.mul(c))
    }

    pub fn mul_int(&self, n: i64) -> TruncSeries {
        self.map_coeffs(&self.ring, |x| x.mul_int(n))
    }

    pub fn pow(&self, n: u32) -> TruncSeries {
        let mut acc = TruncSeries::constant(&self.ring, self.arity, self.order, self.ring.one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Applies `f` to every coefficient, landing in `target`.
    pub fn map_coeffs(&self, target: &Ring, f: impl Fn(&RingValue) -> RingValue) -> TruncSeries {
        let mut out = TruncSeries::zero(target, self.arity, self.order);
        for (e, c) in &self.coeffs {
            out.set(*e, f(c));
        }
        out
    }

    pub fn try_map_coeffs(
        &self,
        target: &Ring,
        f: impl Fn(&RingValue) -> Result<RingValue>,
    ) -> Result<TruncSeries> {
        let mut out = TruncSeries::zero(target, self.arity, self.order);
        for (e, c) in &self.coeffs {
            out.set(*e, f(c)?);
        }
        Ok(out)
    }

    /// Projection to a lower-precision ring and a lower order.
    pub fn project(&self, target: &Ring, order: u32) -> Result<TruncSeries> {
        self.truncate(order)
            .try_map_coeffs(target, |c| c.project(target))
    }

    /// Multiplicative inverse of a series whose constant term is a unit.
    pub fn inverse(&self) -> Result<TruncSeries> {
        let c0 = self.constant_term();
        let c0_inv = c0.inverse()?;
        let mut n = self.scale(&c0_inv);
        n.set([0; 3], self.ring.zero());
        let minus_n = n.neg();
        let one = TruncSeries::constant(&self.ring, self.arity, self.order, self.ring.one());
        let mut sum = one.clone();
        let mut term = one;
        for _ in 1..self.order.max(1) {
            term = term.mul(&minus_n);
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        Ok(sum.scale(&c0_inv))
    }

    /// Partial derivative in variable `i`; the order drops by one.
    pub fn derivative(&self, i: usize) -> TruncSeries {
        let mut out = TruncSeries::zero(&self.ring, self.arity, self.order.saturating_sub(1));
        for (e, c) in &self.coeffs {
            if e[i] > 0 {
                let mut d = *e;
                d[i] -= 1;
                out.set(d, c.mul_int(e[i] as i64));
            }
        }
        out
    }

    /// `self(inner[0], .., inner[arity-1])`. Every inner series must have zero
    /// constant term and the same arity.
    pub fn compose(&self, inner: &[TruncSeries]) -> Result<TruncSeries> {
        assert_eq!(inner.len(), self.arity, "one inner series per variable");
        let inner_arity = inner[0].arity;
        let mut order = self.order;
        for g in inner {
            assert_eq!(g.arity, inner_arity, "inner arity mismatch");
            assert!(g.ring == self.ring, "ring mismatch");
            if !g.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm);
            }
            order = order.min(g.order);
        }
        let max_deg = order.saturating_sub(1) as usize;
        // powers[i][k] = inner[i]^k truncated to `order`
        let powers: Vec<Vec<TruncSeries>> = inner
            .iter()
            .map(|g| {
                let g = g.truncate(order);
                let mut ps = vec![TruncSeries::constant(
                    &self.ring,
                    inner_arity,
                    order,
                    self.ring.one(),
                )];
                for k in 1..=max_deg {
                    let next = ps[k - 1].mul(&g);
                    ps.push(next);
                }
                ps
            })
            .collect();
        let mut out = TruncSeries::zero(&self.ring, inner_arity, order);
        for (e, c) in &self.coeffs {
            if degree(e) >= order {
                continue;
            }
            let mut t = powers[0][e[0] as usize].clone();
            for (i, ps) in powers.iter().enumerate().skip(1) {
                if e[i] > 0 {
                    t = t.mul(&ps[e[i] as usize]);
                }
            }
            out = out.add(&t.scale(c));
        }
        Ok(out)
    }

    /// `f(g)` for univariate `f`.
    pub fn substitute(&self, g: &TruncSeries) -> Result<TruncSeries> {
        assert_eq!(self.arity, 1, "substitute needs a univariate outer series");
        self.compose(std::slice::from_ref(g))
    }

    /// `F(g1, g2)` for bivariate `F`.
    pub fn bivariate_substitute(&self, g1: &TruncSeries, g2: &TruncSeries) -> Result<TruncSeries> {
        assert_eq!(
            self.arity, 2,
            "bivariate_substitute needs a bivariate outer series"
        );
        self.compose(&[g1.clone(), g2.clone()])
    }

    /// Compositional inverse of `f = c z + O(z^2)` with `c` a unit.
    pub fn reversion(&self) -> Result<TruncSeries> {
        assert_eq!(self.arity, 1, "reversion of a univariate series");
        if !self.constant_term().is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let c = self.coeff1(1);
        let c_inv = c
            .inverse()
            .map_err(|_| Error::NotUnit(format!("linear coefficient {c}")))?;
        let z = TruncSeries::z(&self.ring, self.order);
        // g <- g - c^{-1} (f(g) - z) gains one correct degree per step
        let mut g = z.scale(&c_inv);
        for _ in 1..self.order {
            let err = self.substitute(&g)?.sub(&z);
            if err.is_zero() {
                break;
            }
            g = g.sub(&err.scale(&c_inv));
        }
        Ok(g)
    }

    fn sorted_terms(&self) -> Vec<(&Exp, &RingValue)> {
        let mut v: Vec<_> = self.coeffs.iter().collect();
        v.sort_by_key(|(e, _)| (degree(e), std::cmp::Reverse(**e)));
        v
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = &VAR_NAMES[self.arity - 1];
        let mut parts = Vec::new();
        for (e, c) in self.sorted_terms() {
            let mut vars = Vec::new();
            for i in 0..self.arity {
                match e[i] {
                    0 => {}
                    1 => vars.push(names[i].to_string()),
                    k => vars.push(format!("{}^{}", names[i], k)),
                }
            }
            let cs = c.to_string();
            let part = if vars.is_empty() {
                cs
            } else if c.is_one() {
                vars.join("*")
            } else if c.terms().len() > 1 || cs.contains('+') {
                format!("({cs})*{}", vars.join("*"))
            } else {
                format!("{cs}*{}", vars.join("*"))
            };
            parts.push(part);
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{} + O(deg {})", parts.join(" + "), self.order)
    }
}

impl Serialize for TruncSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let monomials: Vec<(Vec<u16>, String)> = self
            .sorted_terms()
            .into_iter()
            .map(|(e, c)| (e[..self.arity].to_vec(), c.to_string()))
            .collect();
        let mut st = serializer.serialize_struct("TruncSeries", 4)?;
        st.serialize_field("ring", &self.ring.descriptor())?;
        st.serialize_field("arity", &self.arity)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("monomials", &monomials)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::ring::{BaseRing, TowerRing};

    fn zmod16() -> Ring {
        TowerRing::over(BaseRing::integers(16))
    }

    fn uni(ring: &Ring, order: u32, coeffs: &[i64]) -> TruncSeries {
        let cs: Vec<_> = coeffs.iter().map(|&c| ring.from_int(c)).collect();
        TruncSeries::from_univariate(ring, order, &cs)
    }

    #[test]
    fn substitute_examples() {
        let r = zmod16();
        let z = TruncSeries::z(&r, 8);
        let g = uni(&r, 8, &[0, 1, 1]);
        assert_eq!(z.substitute(&g).unwrap(), g);
        let z2 = uni(&r, 8, &[0, 0, 1]);
        assert_eq!(z2.substitute(&g).unwrap(), uni(&r, 8, &[0, 0, 1, 2, 1]));

        let f2 = TowerRing::field(FiniteField::f2());
        let h = uni(&f2, 8, &[0, 1, 1]);
        assert_eq!(h.substitute(&h).unwrap(), uni(&f2, 8, &[0, 1, 0, 0, 1]));

        let bad = uni(&r, 8, &[1, 1]);
        assert_eq!(z.substitute(&bad), Err(Error::NonzeroConstantTerm));
    }

    #[test]
    fn reversion_examples() {
        let r = zmod16();
        let z = TruncSeries::z(&r, 5);
        assert_eq!(z.reversion().unwrap(), z);
        let f = uni(&r, 5, &[0, 1, 1]);
        // Catalan numbers with alternating signs
        assert_eq!(f.reversion().unwrap(), uni(&r, 5, &[0, 1, -1, 2, -5]));

        let d = TowerRing::deformation(3, 3);
        let u = d.var("u");
        let uz = TruncSeries::z(&d, 6).scale(&u);
        let inv = uz.reversion().unwrap();
        assert_eq!(inv, TruncSeries::z(&d, 6).scale(&u.inverse().unwrap()));

        let two_z = uni(&r, 5, &[0, 2, 1]);
        assert!(matches!(two_z.reversion(), Err(Error::NotUnit(_))));
    }

    #[test]
    fn bivariate_examples() {
        let r = zmod16();
        let x = TruncSeries::var(&r, 2, 0, 6);
        let y = TruncSeries::var(&r, 2, 1, 6);
        let z = TruncSeries::z(&r, 6);
        let zero = TruncSeries::zero(&r, 1, 6);
        let f = x.add(&y).add(&x.mul(&y).mul_int(3));
        assert_eq!(f.bivariate_substitute(&z, &zero).unwrap(), z);

        let phi = uni(&r, 6, &[0, 1, 5, 7]);
        let sum = x.add(&y);
        assert_eq!(
            sum.bivariate_substitute(&phi, &phi).unwrap(),
            phi.mul_int(2)
        );

        let prod = x.mul(&y);
        let g1 = uni(&r, 6, &[0, 1, 1]);
        assert_eq!(
            prod.bivariate_substitute(&g1, &z).unwrap(),
            uni(&r, 6, &[0, 0, 1, 1])
        );
    }

    #[test]
    fn inverse_and_derivative() {
        let r = zmod16();
        let s = uni(&r, 6, &[1, 1]);
        let inv = s.inverse().unwrap();
        assert_eq!(inv, uni(&r, 6, &[1, -1, 1, -1, 1, -1]));
        assert_eq!(s.mul(&inv), uni(&r, 6, &[1]));
        let d = uni(&r, 6, &[0, 0, 1, 1]).derivative(0);
        assert_eq!(d, uni(&r, 5, &[0, 2, 3]));
    }

    #[test]
    fn precision_shrinks() {
        let r = zmod16();
        let a = uni(&r, 6, &[0, 1, 1, 1, 1, 1]);
        let b = uni(&r, 4, &[0, 1, 1, 1]);
        assert_eq!(a.mul(&b).order(), 4);
        assert_eq!(a.add(&b).order(), 4);
        assert_eq!(a.substitute(&b).unwrap().order(), 4);
    }

    #[test]
    fn serialization_is_graded() {
        let r = zmod16();
        let x = TruncSeries::var(&r, 2, 0, 4);
        let y = TruncSeries::var(&r, 2, 1, 4);
        let f = x.add(&y).add(&x.mul(&y).mul_int(-1));
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"ring":"Z/16","arity":2,"order":4,"monomials":[[[1,0],"1"],[[0,1],"1"],[[1,1],"15"]]}"#
        );
        assert_eq!(f.to_string(), "x + y + 15*x*y + O(deg 4)");
    }
}
