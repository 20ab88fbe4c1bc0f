//! Small finite fields: `F_{2^n}` for `n <= 8` and the prime field `F_3`.
//!
//! Elements are plain `u32` handles. In characteristic 2 the handle is the
//! bitmask of the coefficients of the polynomial representative (bit `i`
//! is the coefficient of `w^i`); in `F_3` it is the least nonnegative
//! residue.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters of a finite field.
///
/// `modulus` holds the coefficients of the defining polynomial over the
/// prime field, lowest degree first, including the leading `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FieldSpec {
    pub characteristic: u32,
    pub degree: u32,
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    /// The standard modulus for `F_{2^n}`; `F_4` is always `F_2[w]/(w^2+w+1)`.
    pub fn binary(degree: u32) -> Result<Self> {
        let bits: u32 = match degree {
            1 => 0b10,
            2 => 0b111,
            3 => 0b1011,
            4 => 0b10011,
            5 => 0b100101,
            6 => 0b1000011,
            7 => 0b10000011,
            8 => 0b100011011,
            _ => {
                return Err(Error::InvalidField(format!(
                    "binary field degree {degree} outside 1..=8"
                )))
            }
        };
        Ok(Self::binary_with_modulus(degree, bits))
    }

    /// `F_{2^n}` with an explicit modulus given as a bitmask.
    pub fn binary_with_modulus(degree: u32, bits: u32) -> Self {
        let modulus = (0..=degree).map(|i| (bits >> i) & 1).collect();
        FieldSpec {
            characteristic: 2,
            degree,
            modulus,
        }
    }

    pub fn ternary() -> Self {
        FieldSpec {
            characteristic: 3,
            degree: 1,
            modulus: vec![0, 1],
        }
    }

    fn modulus_bits(&self) -> u32 {
        self.modulus
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| acc | ((c & 1) << i))
    }
}

/// A constructed finite field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteField {
    spec: FieldSpec,
    size: u32,
    modulus_bits: u32,
}

impl FiniteField {
    /// Validates the description (including irreducibility of the modulus) and builds the field.
    pub fn new(spec: FieldSpec) -> Result<Self> {
        match spec.characteristic {
            2 => {
                if spec.degree == 0 || spec.degree > 8 {
                    return Err(Error::InvalidField(format!(
                        "binary field degree {} outside 1..=8",
                        spec.degree
                    )));
                }
                if spec.modulus.len() != spec.degree as usize + 1
                    || spec.modulus.last() != Some(&1)
                    || spec.modulus.iter().any(|&c| c > 1)
                {
                    return Err(Error::InvalidField(format!(
                        "modulus {:?} is not a monic binary polynomial of degree {}",
                        spec.modulus, spec.degree
                    )));
                }
                let bits = spec.modulus_bits();
                if let Some(factor) = binary_factor(bits) {
                    return Err(Error::ReducibleModulus {
                        modulus: binary_poly_string(bits),
                        factor: binary_poly_string(factor),
                    });
                }
                Ok(FiniteField {
                    size: 1 << spec.degree,
                    modulus_bits: bits,
                    spec,
                })
            }
            3 => {
                if spec.degree != 1 || spec.modulus != [0, 1] {
                    return Err(Error::InvalidField(
                        "only the prime field F_3 is supported in characteristic 3".into(),
                    ));
                }
                Ok(FiniteField {
                    size: 3,
                    modulus_bits: 0,
                    spec,
                })
            }
            p => Err(Error::InvalidField(format!(
                "characteristic {p} not supported"
            ))),
        }
    }

    pub fn f2() -> Self {
        Self::binary(1)
    }

    pub fn f4() -> Self {
        Self::binary(2)
    }

    pub fn f3() -> Self {
        FiniteField::new(FieldSpec::ternary()).expect("F_3 is a field")
    }

    /// `F_{2^n}` with the standard modulus.
    ///
    /// Panics if `n` is outside `1..=8`.
    pub fn binary(n: u32) -> Self {
        FiniteField::new(FieldSpec::binary(n).expect("degree in range")).expect("standard modulus")
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.spec.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn zero(&self) -> u32 {
        0
    }

    pub fn one(&self) -> u32 {
        1
    }

    /// The class of the polynomial variable `w` (a generator of `F_4^x` for `F_4`).
    pub fn gen(&self) -> u32 {
        if self.spec.characteristic == 2 && self.spec.degree > 1 {
            0b10
        } else {
            1
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.size
    }

    pub fn from_int(&self, n: i64) -> u32 {
        let p = self.spec.characteristic as i64;
        n.rem_euclid(p) as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        match self.spec.characteristic {
            2 => a ^ b,
            _ => (a + b) % 3,
        }
    }

    pub fn neg(&self, a: u32) -> u32 {
        match self.spec.characteristic {
            2 => a,
            _ => (3 - a) % 3,
        }
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match self.spec.characteristic {
            2 => {
                let n = self.spec.degree;
                let mut prod = 0u32;
                for i in 0..n {
                    if (b >> i) & 1 == 1 {
                        prod ^= a << i;
                    }
                }
                for i in (n..2 * n).rev() {
                    if (prod >> i) & 1 == 1 {
                        prod ^= self.modulus_bits << (i - n);
                    }
                }
                prod
            }
            _ => (a * b) % 3,
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.size as u64 - 2))
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, a: u32) -> u32 {
        self.pow(a, self.spec.characteristic as u64)
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let mut x = a;
        let mut n = 1;
        while x != 1 {
            x = self.mul(x, a);
            n += 1;
        }
        Some(n)
    }

    /// An injective field homomorphism `self -> target`, given as the image
    /// of every element, if one exists. The image of `w` is the least root of
    /// the modulus in `target`.
    pub fn embedding_into(&self, target: &FiniteField) -> Option<Vec<u32>> {
        if self.characteristic() != target.characteristic() || target.degree() % self.degree() != 0
        {
            return None;
        }
        if self.characteristic() != 2 {
            return Some(self.elements().collect());
        }
        let root = target.elements().find(|&r| {
            let mut acc = 0;
            for (i, &c) in self.spec.modulus.iter().enumerate() {
                if c == 1 {
                    acc ^= target.pow(r, i as u64);
                }
            }
            acc == 0
        })?;
        Some(
            self.elements()
                .map(|a| {
                    (0..self.degree())
                        .filter(|i| (a >> i) & 1 == 1)
                        .fold(0, |acc, i| acc ^ target.pow(root, i as u64))
                })
                .collect(),
        )
    }

    pub fn element_string(&self, a: u32) -> String {
        if self.spec.characteristic != 2 || self.spec.degree == 1 {
            return a.to_string();
        }
        binary_poly_string_in(a, "w")
    }

    pub fn descriptor(&self) -> String {
        if self.spec.characteristic == 3 {
            "F3".to_string()
        } else {
            format!("F{}", self.size)
        }
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.descriptor())
    }
}

fn binary_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn binary_rem(mut a: u32, b: u32) -> u32 {
    let db = binary_degree(b);
    while a != 0 && binary_degree(a) >= db {
        a ^= b << (binary_degree(a) - db);
    }
    a
}

/// Least nontrivial factor of a binary polynomial, by trial division.
fn binary_factor(p: u32) -> Option<u32> {
    let d = binary_degree(p);
    (2u32..)
        .take_while(|&f| 2 * binary_degree(f) <= d)
        .find(|&f| binary_rem(p, f) == 0)
}

fn binary_poly_string(p: u32) -> String {
    binary_poly_string_in(p, "x")
}

fn binary_poly_string_in(p: u32, var: &str) -> String {
    if p == 0 {
        return "0".into();
    }
    let mut parts = Vec::new();
    for i in (0..32).rev() {
        if (p >> i) & 1 == 1 {
            parts.push(match i {
                0 => "1".to_string(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            });
        }
    }
    parts.join("+")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_defining_relation() {
        let f = FiniteField::f4();
        let w = f.gen();
        assert_eq!(f.mul(w, w), f.add(w, 1));
        assert_eq!(f.frobenius(w), f.add(w, 1));
        assert_eq!(f.elements().count(), 4);
    }

    #[test]
    fn f4_units_cyclic_of_order_3() {
        let f = FiniteField::f4();
        let orders: Vec<_> = (1..4).map(|a| f.order(a).unwrap()).collect();
        assert_eq!(orders, vec![1, 3, 3]);
    }

    #[test]
    fn frobenius_has_order_n() {
        for n in 1..=8 {
            let f = FiniteField::binary(n);
            let mut order = None;
            for k in 1..=n {
                let all_fixed = f
                    .elements()
                    .all(|a| (0..k).fold(a, |x, _| f.frobenius(x)) == a);
                if all_fixed {
                    order = Some(k);
                    break;
                }
            }
            assert_eq!(order, Some(n), "n = {n}");
        }
    }

    #[test]
    fn reducible_modulus_names_factor() {
        // x^2 + 1 = (x + 1)^2
        let err = FiniteField::new(FieldSpec::binary_with_modulus(2, 0b101)).unwrap_err();
        match err {
            Error::ReducibleModulus { factor, .. } => assert_eq!(factor, "x+1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inverses_and_embedding() {
        let f16 = FiniteField::binary(4);
        for a in 1..16 {
            assert_eq!(f16.mul(a, f16.inv(a).unwrap()), 1);
        }
        let f4 = FiniteField::f4();
        let emb = f4.embedding_into(&f16).unwrap();
        for a in f4.elements() {
            for b in f4.elements() {
                assert_eq!(
                    emb[f4.mul(a, b) as usize],
                    f16.mul(emb[a as usize], emb[b as usize])
                );
                assert_eq!(
                    emb[f4.add(a, b) as usize],
                    f16.add(emb[a as usize], emb[b as usize])
                );
            }
        }
        assert!(f4.embedding_into(&FiniteField::binary(3)).is_none());
    }

    #[test]
    fn f3_arithmetic() {
        let f = FiniteField::f3();
        assert_eq!(f.mul(2, 2), 1);
        assert_eq!(f.neg(1), 2);
        assert_eq!(f.inv(2), Some(2));
    }
}
