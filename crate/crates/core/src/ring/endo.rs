//! Ring endomorphisms given by generator images, reduction maps, and the
//! Teichmüller lift.

use std::collections::HashMap;

use super::base::{BaseRing, Scalar};
use super::tower::{Ring, RingValue, TowerRing, VarKind, VarSpec};
use crate::error::{Error, Result};

impl RingValue {
    /// Whether the value lies in the maximal ideal generated by `p` and the
    /// series variables.
    pub fn in_maximal_ideal(&self) -> bool {
        let ring = self.ring();
        let base = ring.base();
        self.terms()
            .iter()
            .all(|(m, c)| ring.series_degree(m) > 0 || !base.is_unit(*c))
    }

    /// Image in `residue_field[laurent vars]`, killing `p` and every series variable.
    pub fn residue(&self) -> Result<RingValue> {
        let ring = self.ring();
        let target = residue_ring(ring)?;
        let base = ring.base();
        let laurent: Vec<usize> = ring.laurent_indices().collect();
        let terms = self.terms().iter().filter_map(|(m, c)| {
            if ring.series_degree(m) > 0 {
                return None;
            }
            let mut out = super::tower::Mono::ONE;
            for (j, &i) in laurent.iter().enumerate() {
                out.0[j] = m.0[i];
            }
            Some((out, Scalar(base.residue(*c) as u64, 0)))
        });
        Ok(target.from_terms(terms.collect::<Vec<_>>()))
    }
}

/// `residue_field[laurent vars]` for a tower over a local base.
pub fn residue_ring(ring: &Ring) -> Result<Ring> {
    let field = ring
        .base()
        .residue_field()
        .ok_or_else(|| Error::Unsupported(format!("{} has no residue field", ring.base())))?;
    let vars = ring
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Laurent)
        .cloned()
        .collect();
    TowerRing::new(BaseRing::Field(field), vars)
}

/// A ring endomorphism of a tower, determined by the images of the adjoined
/// variables and a power of the Frobenius on base coefficients.
#[derive(Clone, Debug)]
pub struct RingEndo {
    ring: Ring,
    images: Vec<RingValue>,
    inverse_images: Vec<Option<RingValue>>,
    frobenius_power: u32,
}

impl PartialEq for RingEndo {
    fn eq(&self, other: &Self) -> bool {
        self.eq_on_generators(other)
    }
}

fn frobenius_order(base: &BaseRing) -> u32 {
    match base {
        BaseRing::Field(f) => f.degree(),
        BaseRing::Witt { .. } => 2,
        BaseRing::Integers { .. } => 1,
    }
}

impl RingEndo {
    pub fn identity(ring: &Ring) -> RingEndo {
        let images = ring.vars().iter().map(|v| ring.var(&v.name)).collect();
        Self::build(ring, images, 0).expect("identity is an endomorphism")
    }

    /// Endomorphism sending each listed variable to its image; unlisted
    /// variables are fixed. `frobenius_power` applies that power of the
    /// Frobenius to base coefficients.
    pub fn new(
        ring: &Ring,
        images: &[(&str, RingValue)],
        frobenius_power: u32,
    ) -> Result<RingEndo> {
        let mut all: Vec<RingValue> = ring.vars().iter().map(|v| ring.var(&v.name)).collect();
        for (name, img) in images {
            let i = ring
                .var_index(name)
                .ok_or_else(|| Error::Unsupported(format!("no variable {name}")))?;
            all[i] = img.clone();
        }
        Self::build(ring, all, frobenius_power)
    }

    /// The `(u, u*a1)` generator convention: the image of `a1` is derived as
    /// `image(u*a1) / image(u)`.
    pub fn from_u_ua1(
        ring: &Ring,
        u_image: RingValue,
        ua1_image: RingValue,
        frobenius_power: u32,
    ) -> Result<RingEndo> {
        if !u_image.is_unit() {
            return Err(Error::NotUnit(format!("image of u: {u_image}")));
        }
        let a1_image = ua1_image.mul(&u_image.inverse()?);
        Self::new(ring, &[("u", u_image), ("a1", a1_image)], frobenius_power)
    }

    fn build(ring: &Ring, images: Vec<RingValue>, frobenius_power: u32) -> Result<RingEndo> {
        let mut inverse_images = Vec::with_capacity(images.len());
        for (v, img) in ring.vars().iter().zip(images.iter()) {
            match v.kind {
                VarKind::Laurent => {
                    if !img.is_unit() {
                        return Err(Error::NotUnit(format!("image of {}: {img}", v.name)));
                    }
                    inverse_images.push(Some(img.inverse()?));
                }
                VarKind::Series { .. } => {
                    if !img.in_maximal_ideal() {
                        return Err(Error::Precondition(format!(
                            "image of series variable {} must be topologically nilpotent, got {img}",
                            v.name
                        )));
                    }
                    inverse_images.push(None);
                }
            }
        }
        let order = frobenius_order(ring.base()).max(1);
        Ok(RingEndo {
            ring: ring.clone(),
            images,
            inverse_images,
            frobenius_power: frobenius_power % order,
        })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn image(&self, name: &str) -> Option<&RingValue> {
        self.ring.var_index(name).map(|i| &self.images[i])
    }

    pub fn frobenius_power(&self) -> u32 {
        self.frobenius_power
    }

    fn base_map(&self, c: Scalar) -> Scalar {
        let base = self.ring.base();
        (0..self.frobenius_power).fold(c, |x, _| base.frobenius(x))
    }

    pub fn apply(&self, v: &RingValue) -> RingValue {
        let mut cache: HashMap<(usize, i16), RingValue> = HashMap::new();
        let mut acc = self.ring.zero();
        for (m, c) in v.terms() {
            let mut t = self.ring.scalar(self.base_map(*c));
            for i in 0..self.ring.nvars() {
                let e = m.0[i];
                if e == 0 {
                    continue;
                }
                let p = cache
                    .entry((i, e))
                    .or_insert_with(|| {
                        if e > 0 {
                            self.images[i].pow(e as u64)
                        } else {
                            self.inverse_images[i]
                                .as_ref()
                                .expect("negative exponent on a Laurent variable")
                                .pow((-e) as u64)
                        }
                    })
                    .clone();
                t = t.mul(&p);
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RingEndo) -> RingEndo {
        let images = other.images.iter().map(|img| self.apply(img)).collect();
        Self::build(
            &self.ring,
            images,
            self.frobenius_power + other.frobenius_power,
        )
        .expect("composite of endomorphisms")
    }

    pub fn pow(&self, n: u32) -> RingEndo {
        (0..n).fold(RingEndo::identity(&self.ring), |acc, _| self.compose(&acc))
    }

    pub fn eq_on_generators(&self, other: &RingEndo) -> bool {
        self.frobenius_power == other.frobenius_power && self.images == other.images
    }

    pub fn is_identity(&self) -> bool {
        self.eq_on_generators(&RingEndo::identity(&self.ring))
    }
}

/// Ideals along which values can be reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ideal {
    /// `(2)`
    Two,
    /// `(2, a1)`
    TwoA1,
}

/// Canonical image of `value` in `R / ideal`.
pub fn reduce(value: &RingValue, ideal: Ideal) -> Result<RingValue> {
    let ring = value.ring();
    let base = ring.base();
    let residue_base = match base.prime_and_precision() {
        Some((2, _)) => BaseRing::Field(base.residue_field().expect("local ring")),
        _ => {
            return Err(Error::Unsupported(format!(
                "ideal (2) is not a proper nilpotent ideal of {}",
                ring
            )))
        }
    };
    let mut vars: Vec<VarSpec> = ring.vars().to_vec();
    let killed = match ideal {
        Ideal::Two => None,
        Ideal::TwoA1 => {
            let i = ring
                .var_index("a1")
                .ok_or_else(|| Error::Unsupported(format!("{} has no variable a1", ring)))?;
            vars.remove(i);
            Some(i)
        }
    };
    let target = TowerRing::new(residue_base.clone(), vars)?;
    let terms: Vec<_> = value
        .terms()
        .iter()
        .filter_map(|(m, c)| {
            let mut out = *m;
            if let Some(i) = killed {
                if m.0[i] != 0 {
                    return None;
                }
                out.0.copy_within(i + 1.., i);
                out.0[super::tower::MAX_VARS - 1] = 0;
            }
            Some((out, Scalar(base.residue(*c) as u64, 0)))
        })
        .collect();
    Ok(target.from_terms(terms))
}

/// Teichmüller representative of a residue-field element: the fixed point of
/// `y -> y^q` starting from the digit-wise lift.
pub fn teichmuller(base: &BaseRing, d: u32) -> Scalar {
    let q = base
        .residue_field()
        .expect("Teichmüller lift needs a residue field")
        .size() as u64;
    let mut y = base.lift_residue(d);
    loop {
        let next = base.pow(y, q);
        if next == y {
            return y;
        }
        y = next;
    }
}

/// `τ(x)` in `W_k(F_4)` for an `F_4` element handle `x`.
pub fn teichmuller_lift(x: u32, k: u32) -> RingValue {
    let ring = TowerRing::witt(k);
    let t = teichmuller(ring.base(), x);
    ring.scalar(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;

    #[test]
    fn teichmuller_values() {
        let k = 4;
        let zero = teichmuller_lift(0, k);
        let one = teichmuller_lift(1, k);
        assert!(zero.is_zero());
        assert!(one.is_one());
        let w = teichmuller_lift(0b10, k);
        assert!(w.pow(3).is_one());
        let w2 = teichmuller_lift(0b11, k);
        assert!((&w * &w2).is_one());
    }

    #[test]
    fn teichmuller_multiplicative_all_precisions() {
        let f4 = FiniteField::f4();
        for k in 1..=8 {
            for x in f4.elements() {
                for y in f4.elements() {
                    let lhs = teichmuller_lift(f4.mul(x, y), k);
                    let rhs = &teichmuller_lift(x, k) * &teichmuller_lift(y, k);
                    assert_eq!(lhs, rhs, "k={k} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn teichmuller_over_z_mod_2k() {
        let base = BaseRing::integers(1 << 10);
        // the Teichmüller lift of 1 in Z_2 is 1
        assert_eq!(teichmuller(&base, 1), Scalar(1, 0));
    }

    #[test]
    fn reduce_examples() {
        let r = TowerRing::deformation(3, 4);
        let a1u = &r.var("a1") * &r.var("u");
        let v = &r.from_int(2) + &a1u;
        let red = reduce(&v, Ideal::Two).unwrap();
        assert_eq!(red.to_string(), "a1*u");
        let tau = r.scalar(teichmuller(r.base(), 0b10));
        assert_eq!(reduce(&tau, Ideal::Two).unwrap().to_string(), "w");
        let v2 = &a1u + &r.var_pow("u", 3);
        assert_eq!(reduce(&v2, Ideal::TwoA1).unwrap().to_string(), "u^3");
        assert!(reduce(&TowerRing::witt(3).one(), Ideal::TwoA1).is_err());
        assert!(reduce(&TowerRing::field(FiniteField::f3()).one(), Ideal::Two).is_err());
    }

    #[test]
    fn generator_conventions() {
        let r = TowerRing::deformation(4, 5);
        let u = r.var("u");
        let a1 = r.var("a1");
        let ua1 = &u * &a1;
        let tau = r.scalar(teichmuller(r.base(), 0b10));
        let tau2 = &tau * &tau;
        let g = RingEndo::from_u_ua1(&r, &tau * &u, &tau2 * &ua1, 0).unwrap();
        assert!(g.pow(3).is_identity());
        assert!(!g.is_identity());
        assert_eq!(g.apply(&a1), &tau * &a1);

        let sigma = RingEndo::from_u_ua1(&r, u.neg(), ua1.clone(), 0).unwrap();
        assert!(sigma.pow(2).is_identity());
        assert_eq!(sigma.apply(&a1), a1.neg());

        let bad = RingEndo::new(&r, &[("u", &r.one() + &u)], 0);
        assert!(bad.is_err());
        let bad_series = RingEndo::new(&r, &[("a1", r.one())], 0);
        assert!(bad_series.is_err());
    }
}
