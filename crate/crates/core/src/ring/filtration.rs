//! The adic filtration of a tower by powers of its maximal ideal
//! `m = (p, series variables)`.
//!
//! `m^j / m^{j+1}` is a free module over the residue ring
//! `k[laurent vars]` with basis the monomials `p^a * s^c` of total degree
//! `a + |c| = j`. Solvers use this to linearize equations one step at a time.

use std::collections::BTreeMap;

use super::base::Scalar;
use super::endo::residue_ring;
use super::tower::{Mono, Ring, RingValue};
use crate::error::{Error, Result};

/// Basis element `p^p_power * series` of a graded piece. `series` uses the
/// ring's own variable indexing and is zero on Laurent variables.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GradedBasis {
    pub p_power: u32,
    pub series: Mono,
}

impl GradedBasis {
    pub fn degree(&self, ring: &Ring) -> u32 {
        self.p_power + ring.series_degree(&self.series)
    }

    pub fn describe(&self, ring: &Ring) -> String {
        let mut parts = Vec::new();
        if self.p_power > 0 {
            let (p, _) = ring.base().prime_and_precision().expect("local base");
            parts.push(if self.p_power == 1 {
                p.to_string()
            } else {
                format!("{p}^{}", self.p_power)
            });
        }
        for i in ring.series_indices() {
            match self.series.0[i] {
                0 => {}
                1 => parts.push(ring.vars()[i].name.clone()),
                e => parts.push(format!("{}^{}", ring.vars()[i].name, e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// `lift(r) * p^a * s^c` for a residue-ring value `r`.
    pub fn lift(&self, ring: &Ring, residue: &RingValue) -> RingValue {
        let base = ring.base();
        let scale = base.prime_power(self.p_power);
        let laurent: Vec<usize> = ring.laurent_indices().collect();
        let terms: Vec<(Mono, Scalar)> = residue
            .terms()
            .iter()
            .map(|(lm, d)| {
                let mut m = self.series;
                for (j, &i) in laurent.iter().enumerate() {
                    m.0[i] = lm.0[j];
                }
                (m, base.mul(base.lift_residue(d.0 as u32), scale))
            })
            .collect();
        ring.from_terms(terms)
    }
}

/// Least `J` with `m^J = 0`.
pub fn filtration_length(ring: &Ring) -> Result<u32> {
    let (_, prec) = ring
        .base()
        .prime_and_precision()
        .ok_or_else(|| Error::Unsupported(format!("{} is not local", ring.base())))?;
    let series: u32 = ring
        .vars()
        .iter()
        .filter_map(|v| v.truncation())
        .map(|t| t - 1)
        .sum();
    Ok(prec - 1 + series + 1)
}

fn term_level(ring: &Ring, m: &Mono, c: Scalar) -> u32 {
    ring.series_degree(m) + ring.base().valuation(c)
}

fn laurent_part(ring: &Ring, m: &Mono) -> Mono {
    let mut out = Mono::ONE;
    for (j, i) in ring.laurent_indices().enumerate() {
        out.0[j] = m.0[i];
    }
    out
}

impl RingValue {
    /// Largest `j` with `self` in `m^j` (the filtration length for zero).
    pub fn filtration_level(&self) -> Result<u32> {
        let ring = self.ring();
        let top = filtration_length(ring)?;
        Ok(self
            .terms()
            .iter()
            .map(|(m, c)| term_level(ring, m, *c))
            .min()
            .unwrap_or(top))
    }

    /// Coordinates of the class of `self` in `m^j / m^{j+1}`, as residue-ring
    /// values keyed by basis element. Errors if `self` is not in `m^j`.
    pub fn graded_component(&self, j: u32) -> Result<BTreeMap<GradedBasis, RingValue>> {
        let ring = self.ring();
        let base = ring.base();
        let res = residue_ring(ring)?;
        let mut out: BTreeMap<GradedBasis, Vec<(Mono, Scalar)>> = BTreeMap::new();
        for &(m, c) in self.terms() {
            let level = term_level(ring, &m, c);
            if level < j {
                return Err(Error::Precondition(format!(
                    "{self} is not in the {j}-th power of the maximal ideal"
                )));
            }
            if level > j {
                continue;
            }
            let v = base.valuation(c);
            let mut series = Mono::ONE;
            for i in ring.series_indices() {
                series.0[i] = m.0[i];
            }
            let digit = base.digit(c, v);
            out.entry(GradedBasis { p_power: v, series })
                .or_default()
                .push((laurent_part(ring, &m), Scalar(digit as u64, 0)));
        }
        Ok(out
            .into_iter()
            .map(|(b, terms)| (b, res.from_terms(terms)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::TowerRing;

    #[test]
    fn components_round_trip() {
        let r = TowerRing::deformation(3, 4);
        let a1 = r.var("a1");
        let u = r.var("u");
        let w = r.scalar(Scalar(0, 1));
        // 2*w*u + a1*u^2 + 4*a1 (level 3 term)
        let v = &(&(&r.from_int(2) * &w) * &u) + &(&a1 * &u.pow(2));
        let v = &v + &(&r.from_int(4) * &a1);
        assert_eq!(v.filtration_level().unwrap(), 1);
        let comp = v.graded_component(1).unwrap();
        assert_eq!(comp.len(), 2);
        let mut rebuilt = r.zero();
        for (b, val) in &comp {
            assert_eq!(b.degree(&r), 1);
            rebuilt = &rebuilt + &b.lift(&r, val);
        }
        let rest = &v - &rebuilt;
        assert!(rest.filtration_level().unwrap() >= 2);
        assert!(v.graded_component(2).is_err());
        assert_eq!(filtration_length(&r).unwrap(), 6);
    }
}
