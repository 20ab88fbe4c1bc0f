//! Coefficient rings at the bottom of every tower: small finite fields, the
//! truncated Witt ring `W_k(F_4)`, and `Z/n`.

use std::fmt;

use crate::field::FiniteField;

/// A base-ring element. Its meaning depends on the owning [`BaseRing`]:
///
/// * `Field`: `.0` is the field handle, `.1 == 0`;
/// * `Witt`: the class of `.0 + .1 * w` in `(Z/2^k)[w]/(w^2+w+1)`;
/// * `Integers`: `.0` is the least nonnegative residue, `.1 == 0`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(pub u64, pub u64);

impl Scalar {
    pub const ZERO: Scalar = Scalar(0, 0);

    pub fn is_zero(self) -> bool {
        self == Scalar::ZERO
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseRing {
    Field(FiniteField),
    /// `W_k(F_4)`, presented as the unramified extension `(Z/2^k)[w]/(w^2+w+1)`.
    Witt {
        precision: u32,
    },
    /// `Z/n`; `local` caches `(p, e)` when `n = p^e`.
    Integers {
        modulus: u64,
        local: Option<(u64, u32)>,
    },
}

const MAX_WITT_PRECISION: u32 = 60;

impl BaseRing {
    pub fn witt(precision: u32) -> BaseRing {
        assert!(
            (1..=MAX_WITT_PRECISION).contains(&precision),
            "Witt precision {precision} outside 1..={MAX_WITT_PRECISION}"
        );
        BaseRing::Witt { precision }
    }

    pub fn integers(modulus: u64) -> BaseRing {
        assert!(modulus >= 2, "Z/n needs n >= 2");
        BaseRing::Integers {
            modulus,
            local: prime_power(modulus),
        }
    }

    fn witt_mask(k: u32) -> u64 {
        (1u64 << k) - 1
    }

    pub fn zero(&self) -> Scalar {
        Scalar::ZERO
    }

    pub fn one(&self) -> Scalar {
        Scalar(1, 0)
    }

    pub fn from_int(&self, n: i64) -> Scalar {
        match self {
            BaseRing::Field(f) => Scalar(f.from_int(n) as u64, 0),
            BaseRing::Witt { precision } => Scalar((n as u64) & Self::witt_mask(*precision), 0),
            BaseRing::Integers { modulus, .. } => {
                Scalar((n as i128).rem_euclid(*modulus as i128) as u64, 0)
            }
        }
    }

    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        match self {
            BaseRing::Field(f) => Scalar(f.add(a.0 as u32, b.0 as u32) as u64, 0),
            BaseRing::Witt { precision } => {
                let m = Self::witt_mask(*precision);
                Scalar(a.0.wrapping_add(b.0) & m, a.1.wrapping_add(b.1) & m)
            }
            BaseRing::Integers { modulus, .. } => {
                Scalar(((a.0 as u128 + b.0 as u128) % *modulus as u128) as u64, 0)
            }
        }
    }

    pub fn neg(&self, a: Scalar) -> Scalar {
        match self {
            BaseRing::Field(f) => Scalar(f.neg(a.0 as u32) as u64, 0),
            BaseRing::Witt { precision } => {
                let m = Self::witt_mask(*precision);
                Scalar(a.0.wrapping_neg() & m, a.1.wrapping_neg() & m)
            }
            BaseRing::Integers { modulus, .. } => Scalar((modulus - a.0) % modulus, 0),
        }
    }

    pub fn sub(&self, a: Scalar, b: Scalar) -> Scalar {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        match self {
            BaseRing::Field(f) => Scalar(f.mul(a.0 as u32, b.0 as u32) as u64, 0),
            BaseRing::Witt { precision } => {
                // w^2 = -w - 1
                let m = Self::witt_mask(*precision);
                let ac = a.0.wrapping_mul(b.0);
                let bd = a.1.wrapping_mul(b.1);
                let cross = a.0.wrapping_mul(b.1).wrapping_add(a.1.wrapping_mul(b.0));
                Scalar(ac.wrapping_sub(bd) & m, cross.wrapping_sub(bd) & m)
            }
            BaseRing::Integers { modulus, .. } => {
                Scalar(((a.0 as u128 * b.0 as u128) % *modulus as u128) as u64, 0)
            }
        }
    }

    pub fn pow(&self, a: Scalar, mut e: u64) -> Scalar {
        let mut acc = self.one();
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: Scalar) -> bool {
        match self {
            BaseRing::Field(_) => !a.is_zero(),
            BaseRing::Witt { .. } => {
                // unit iff the norm a^2 - ab + b^2 is odd
                let n =
                    a.0.wrapping_mul(a.0)
                        .wrapping_sub(a.0.wrapping_mul(a.1))
                        .wrapping_add(a.1.wrapping_mul(a.1));
                n & 1 == 1
            }
            BaseRing::Integers { modulus, .. } => gcd(a.0, *modulus) == 1,
        }
    }

    pub fn inv(&self, a: Scalar) -> Option<Scalar> {
        if !self.is_unit(a) {
            return None;
        }
        match self {
            BaseRing::Field(f) => f.inv(a.0 as u32).map(|x| Scalar(x as u64, 0)),
            BaseRing::Witt { precision } => {
                let m = Self::witt_mask(*precision);
                let norm =
                    a.0.wrapping_mul(a.0)
                        .wrapping_sub(a.0.wrapping_mul(a.1))
                        .wrapping_add(a.1.wrapping_mul(a.1));
                let ninv = inverse_odd_mod_2_64(norm);
                // conj(a + b w) = (a - b) - b w
                let conj = Scalar(a.0.wrapping_sub(a.1) & m, a.1.wrapping_neg() & m);
                Some(self.mul(conj, Scalar(ninv & m, 0)))
            }
            BaseRing::Integers { modulus, .. } => inverse_mod(a.0, *modulus).map(|x| Scalar(x, 0)),
        }
    }

    /// The absolute Frobenius of the residue field, lifted to the base ring.
    pub fn frobenius(&self, a: Scalar) -> Scalar {
        match self {
            BaseRing::Field(f) => Scalar(f.frobenius(a.0 as u32) as u64, 0),
            BaseRing::Witt { precision } => {
                // w -> w^2 = -1 - w
                let m = Self::witt_mask(*precision);
                Scalar(a.0.wrapping_sub(a.1) & m, a.1.wrapping_neg() & m)
            }
            BaseRing::Integers { .. } => a,
        }
    }

    /// The prime `p` and exponent `e` with `p^e = 0` in a local base ring.
    /// Fields report `e = 1`.
    pub fn prime_and_precision(&self) -> Option<(u64, u32)> {
        match self {
            BaseRing::Field(f) => Some((f.characteristic() as u64, 1)),
            BaseRing::Witt { precision } => Some((2, *precision)),
            BaseRing::Integers { local, .. } => *local,
        }
    }

    /// Whether every non-unit is nilpotent.
    pub fn is_local(&self) -> bool {
        self.prime_and_precision().is_some()
    }

    pub fn residue_field(&self) -> Option<FiniteField> {
        match self {
            BaseRing::Field(f) => Some(f.clone()),
            BaseRing::Witt { .. } => Some(FiniteField::f4()),
            BaseRing::Integers { .. } => match self.prime_and_precision() {
                Some((2, _)) => Some(FiniteField::f2()),
                Some((3, _)) => Some(FiniteField::f3()),
                _ => None,
            },
        }
    }

    /// Reduction to the residue field, as a field handle.
    pub fn residue(&self, a: Scalar) -> u32 {
        match self {
            BaseRing::Field(_) => a.0 as u32,
            BaseRing::Witt { .. } => ((a.0 & 1) | ((a.1 & 1) << 1)) as u32,
            BaseRing::Integers { .. } => {
                let (p, _) = self.prime_and_precision().expect("local ring");
                (a.0 % p) as u32
            }
        }
    }

    /// The digit-wise lift of a residue-field handle.
    pub fn lift_residue(&self, d: u32) -> Scalar {
        match self {
            BaseRing::Field(_) => Scalar(d as u64, 0),
            BaseRing::Witt { .. } => Scalar((d & 1) as u64, ((d >> 1) & 1) as u64),
            BaseRing::Integers { .. } => Scalar(d as u64, 0),
        }
    }

    /// `p`-adic valuation, capped at the precision (zero has full valuation).
    pub fn valuation(&self, a: Scalar) -> u32 {
        let (_, prec) = self.prime_and_precision().expect("local ring");
        if a.is_zero() {
            return prec;
        }
        match self {
            BaseRing::Field(_) => 0,
            BaseRing::Witt { .. } => (a.0 | a.1).trailing_zeros().min(prec),
            BaseRing::Integers { .. } => {
                let (p, _) = self.prime_and_precision().unwrap();
                let mut v = 0;
                let mut x = a.0;
                while x % p == 0 {
                    x /= p;
                    v += 1;
                }
                v
            }
        }
    }

    /// The residue of `a / p^e`, where `p^e` divides `a`.
    pub fn digit(&self, a: Scalar, e: u32) -> u32 {
        if e == 0 {
            return self.residue(a);
        }
        match self {
            BaseRing::Field(_) => 0,
            BaseRing::Witt { .. } => self.residue(Scalar(a.0 >> e, a.1 >> e)),
            BaseRing::Integers { .. } => {
                let (p, _) = self.prime_and_precision().unwrap();
                ((a.0 / p.pow(e)) % p) as u32
            }
        }
    }

    /// `p^e` as a scalar.
    pub fn prime_power(&self, e: u32) -> Scalar {
        let (p, _) = self.prime_and_precision().expect("local ring");
        self.pow(self.from_int(p as i64), e as u64)
    }

    /// The base ring obtained by killing the maximal ideal.
    pub fn residue_ring(&self) -> Option<BaseRing> {
        self.residue_field().map(BaseRing::Field)
    }

    /// Canonical projection onto a base ring of lower `p`-adic precision.
    pub fn project(&self, target: &BaseRing, a: Scalar) -> Option<Scalar> {
        match (self, target) {
            (BaseRing::Field(f), BaseRing::Field(g)) if f == g => Some(a),
            (BaseRing::Witt { precision: k }, BaseRing::Witt { precision: k2 }) if k2 <= k => {
                let m = Self::witt_mask(*k2);
                Some(Scalar(a.0 & m, a.1 & m))
            }
            (BaseRing::Witt { .. }, BaseRing::Field(f)) if *f == FiniteField::f4() => {
                Some(Scalar(self.residue(a) as u64, 0))
            }
            (BaseRing::Integers { modulus: n, .. }, BaseRing::Integers { modulus: n2, .. })
                if n % n2 == 0 =>
            {
                Some(Scalar(a.0 % n2, 0))
            }
            (BaseRing::Integers { .. }, BaseRing::Field(f)) => {
                let (p, _) = self.prime_and_precision()?;
                if f.degree() == 1 && f.characteristic() as u64 == p {
                    Some(Scalar(a.0 % p, 0))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn scalar_string(&self, a: Scalar) -> String {
        match self {
            BaseRing::Field(f) => f.element_string(a.0 as u32),
            BaseRing::Witt { .. } => match (a.0, a.1) {
                (x, 0) => x.to_string(),
                (0, 1) => "w".to_string(),
                (0, y) => format!("{y}w"),
                (x, 1) => format!("{x}+w"),
                (x, y) => format!("{x}+{y}w"),
            },
            BaseRing::Integers { .. } => a.0.to_string(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            BaseRing::Field(f) => f.descriptor(),
            BaseRing::Witt { precision } => format!("W{precision}(F4)"),
            BaseRing::Integers { modulus, .. } => format!("Z/{modulus}"),
        }
    }

    /// Every element of a finite base ring, in canonical order. Intended for
    /// small rings only.
    pub fn elements(&self) -> Vec<Scalar> {
        match self {
            BaseRing::Field(f) => f.elements().map(|x| Scalar(x as u64, 0)).collect(),
            BaseRing::Witt { precision } => {
                let n = 1u64 << precision;
                (0..n)
                    .flat_map(|b| (0..n).map(move |a| Scalar(a, b)))
                    .collect()
            }
            BaseRing::Integers { modulus, .. } => (0..*modulus).map(|x| Scalar(x, 0)).collect(),
        }
    }
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn inverse_odd_mod_2_64(n: u64) -> u64 {
    // Newton iteration doubles the number of correct bits each step.
    let mut x = n;
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(x)));
    }
    x
}

fn inverse_mod(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(n as i128) as u64)
}

fn prime_power(n: u64) -> Option<(u64, u32)> {
    let mut p = 2u64;
    let mut m = n;
    while p.saturating_mul(p) <= m {
        if m % p == 0 {
            break;
        }
        p += 1;
    }
    if p.saturating_mul(p) > m && m % p != 0 {
        // n itself is prime
        return Some((n, 1));
    }
    let mut e = 0;
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witt_relation_and_inverse() {
        let w = BaseRing::witt(4);
        let x = Scalar(0, 1);
        // x^2 + x + 1 = 0
        let s = w.add(w.add(w.mul(x, x), x), w.one());
        assert!(s.is_zero());
        for a in w.elements() {
            if let Some(inv) = w.inv(a) {
                assert_eq!(w.mul(a, inv), w.one());
            } else {
                assert_eq!(w.residue(a), 0);
            }
        }
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(16), Some((2, 4)));
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1_000_003), Some((1_000_003, 1)));
    }

    #[test]
    fn valuation_and_digits() {
        let w = BaseRing::witt(5);
        let a = Scalar(12, 4); // 4 * (3 + w)
        assert_eq!(w.valuation(a), 2);
        assert_eq!(w.digit(a, 2), 0b11);
        let z = BaseRing::integers(81);
        assert_eq!(z.valuation(Scalar(18, 0)), 2);
        assert_eq!(z.digit(Scalar(18, 0), 2), 2);
    }

    #[test]
    fn integers_from_negative() {
        let z = BaseRing::integers(16);
        assert_eq!(z.from_int(-5), Scalar(11, 0));
        let big = BaseRing::integers(1_000_003);
        assert_eq!(big.add(big.from_int(-27), big.from_int(27)), Scalar::ZERO);
    }
}
