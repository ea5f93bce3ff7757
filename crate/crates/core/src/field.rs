//! Arithmetic in the prime field F_q.
//!
//! Elements are stored as reduced `u64` residues. Every product goes through
//! a 128-bit intermediate, which is exact because moduli are capped at
//! [`MAX_MODULUS`].

use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported modulus.
pub const MAX_MODULUS: u64 = 1 << 40;

/// Moduli up to this size get a precomputed table of powers of omega.
const OMEGA_TABLE_MAX: u64 = 1 << 16;

/// A residue in `[0, q)`. Only [`FieldParams`] can build one, so the value is
/// always reduced.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub(crate) struct QftPlans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

struct Inner {
    q: u64,
    omega: Complex64,
    omega_table: OnceLock<Vec<Complex64>>,
    plans: OnceLock<QftPlans>,
}

/// The prime modulus together with its complex root of unity `e^{2πi/q}`.
///
/// Cloning is cheap; the lazily built caches are shared.
#[derive(Clone)]
pub struct FieldParams {
    inner: Arc<Inner>,
}

impl fmt::Debug for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldParams")
            .field("q", &self.inner.q)
            .finish()
    }
}

impl PartialEq for FieldParams {
    fn eq(&self, other: &Self) -> bool {
        self.inner.q == other.inner.q
    }
}

impl Eq for FieldParams {}

impl FieldParams {
    pub fn new(q: u64) -> Result<Self> {
        if q > MAX_MODULUS {
            return Err(Error::InvalidParameters(format!(
                "modulus {q} exceeds the supported maximum 2^40"
            )));
        }
        if !is_prime(q) {
            return Err(Error::InvalidParameters(format!(
                "modulus {q} is not prime"
            )));
        }
        Ok(FieldParams {
            inner: Arc::new(Inner {
                q,
                omega: Complex64::from_polar(1.0, TAU / q as f64),
                omega_table: OnceLock::new(),
                plans: OnceLock::new(),
            }),
        })
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.inner.q
    }

    pub fn omega(&self) -> Complex64 {
        self.inner.omega
    }

    /// `omega^e`. The exponent is reduced mod q before any floating-point
    /// work, so large exponents lose no precision.
    pub fn omega_pow(&self, e: u64) -> Complex64 {
        let q = self.inner.q;
        let e = e % q;
        if q <= OMEGA_TABLE_MAX {
            let table = self.inner.omega_table.get_or_init(|| {
                (0..q)
                    .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / q as f64))
                    .collect()
            });
            table[e as usize]
        } else {
            Complex64::from_polar(1.0, TAU * e as f64 / q as f64)
        }
    }

    /// `omega^{x·y}` with the product formed exactly in the field.
    #[inline]
    pub fn omega_prod(&self, x: FieldElement, y: FieldElement) -> Complex64 {
        self.omega_pow(self.mul(x, y).0)
    }

    pub(crate) fn qft_plans(&self) -> &QftPlans {
        self.inner.plans.get_or_init(|| {
            let mut planner = FftPlanner::new();
            let len = self.inner.q as usize;
            QftPlans {
                // rustfft's inverse direction is the positive exponent e^{+2πi jk/q}.
                forward: planner.plan_fft(len, FftDirection::Inverse),
                inverse: planner.plan_fft(len, FftDirection::Forward),
            }
        })
    }

    #[inline]
    pub fn elem(&self, x: u64) -> FieldElement {
        FieldElement(x % self.inner.q)
    }

    #[inline]
    pub fn from_signed(&self, x: i64) -> FieldElement {
        FieldElement(x.rem_euclid(self.inner.q as i64) as u64)
    }

    pub fn elems(&self, xs: &[u64]) -> Vec<FieldElement> {
        xs.iter().map(|&x| self.elem(x)).collect()
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(((a.0 as u128 + b.0 as u128) % self.inner.q as u128) as u64)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let q = self.inner.q;
        FieldElement(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            a.0 + (q - b.0)
        })
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.inner.q - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(mul_mod(a.0, b.0, self.inner.q))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        FieldElement(pow_mod(a.0, e, self.inner.q))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        mod_inverse(a.0, self.inner.q).map(FieldElement)
    }

    /// Signed representative in `[-(q-1)/2, (q-1)/2]` (for q = 2 the
    /// representatives are 0 and 1).
    pub fn centered(&self, a: FieldElement) -> i64 {
        let q = self.inner.q;
        if a.0 <= (q - 1) / 2 || q == 2 {
            a.0 as i64
        } else {
            a.0 as i64 - q as i64
        }
    }

    pub fn centered_abs(&self, a: FieldElement) -> u64 {
        self.centered(a).unsigned_abs()
    }

    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(a.len(), b.len());
        let q = self.inner.q as u128;
        let acc = a
            .iter()
            .zip(b)
            .fold(0u128, |acc, (x, y)| (acc + x.0 as u128 * y.0 as u128) % q);
        FieldElement(acc as u64)
    }

    pub fn scale(&self, c: FieldElement, v: &[FieldElement]) -> Vec<FieldElement> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    pub fn sub_vec(&self, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.random_range(0..self.inner.q))
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<FieldElement> {
        (0..n).map(|_| self.random_element(rng)).collect()
    }

    /// `q^n`, or `None` when it does not fit in a `u64`.
    pub fn space_size(&self, n: usize) -> Option<u64> {
        let n = u32::try_from(n).ok()?;
        self.inner.q.checked_pow(n)
    }

    /// `q^n` as a float; exact up to 2^53 and a close approximation beyond.
    pub fn space_size_f64(&self, n: usize) -> f64 {
        (self.inner.q as f64).powi(n as i32)
    }

    /// Lexicographic index of a vector, first coordinate most significant.
    pub fn index_of(&self, v: &[FieldElement]) -> u64 {
        v.iter().fold(0u64, |acc, x| acc * self.inner.q + x.0)
    }

    /// Inverse of [`FieldParams::index_of`].
    pub fn vector_at(&self, mut index: u64, n: usize) -> Vec<FieldElement> {
        let q = self.inner.q;
        let mut out = vec![FieldElement::ZERO; n];
        for slot in out.iter_mut().rev() {
            *slot = FieldElement(index % q);
            index /= q;
        }
        out
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin. The first twelve primes as witnesses are
/// sufficient for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Magnitude of the centered representative of `a` modulo an odd prime `q`.
pub fn centered_abs(a: u64, q: u64) -> Result<u64> {
    if q.is_multiple_of(2) || !is_prime(q) {
        return Err(Error::InvalidParameters(format!(
            "centered representatives need an odd prime modulus, got {q}"
        )));
    }
    let a = a % q;
    Ok(a.min(q - a))
}

/// Inverse of `a` modulo the prime `q`.
pub fn mod_inverse(a: u64, q: u64) -> Result<u64> {
    let a = a % q;
    if a == 0 {
        return Err(Error::NoInverse { value: a, q });
    }
    // Extended Euclid on signed 128-bit values.
    let (mut r0, mut r1) = (q as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    if r0 != 1 {
        return Err(Error::NoInverse { value: a, q });
    }
    Ok(t0.rem_euclid(q as i128) as u64)
}

/// Distinct prime factors by trial division; fine for `n < 2^40`.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of the multiplicative group F_q*.
pub fn generator(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::InvalidParameters(format!(
            "modulus {q} is not prime"
        )));
    }
    if q == 2 {
        return Ok(1);
    }
    let factors = prime_factors(q - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&p| pow_mod(g, (q - 1) / p, q) != 1))
        .ok_or_else(|| Error::InvalidParameters(format!("no generator found modulo {q}")))
}

/// An element of multiplicative order exactly `m` modulo the prime `q`.
///
/// Returns `g^{(q-1)/m}` for the smallest generator `g`, so the choice is
/// deterministic.
pub fn primitive_mth_root(m: u64, q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::InvalidParameters(format!(
            "modulus {q} is not prime"
        )));
    }
    if m == 0 || !(q - 1).is_multiple_of(m) {
        return Err(Error::NoRoot { m, q });
    }
    let g = generator(q)?;
    Ok(pow_mod(g, (q - 1) / m, q))
}

/// Multiplicative order of `a` modulo the prime `q`, by direct iteration.
pub fn multiplicative_order(a: u64, q: u64) -> Option<u64> {
    let a = a % q;
    if a == 0 {
        return None;
    }
    let mut x = a;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, a, q);
        k += 1;
    }
    Some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality_small_and_large() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(1_099_511_627_689)); // largest prime below 2^40
        assert!(!is_prime(1_099_511_627_691));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(FieldParams::new(4).is_err());
        assert!(FieldParams::new(1).is_err());
        assert!(FieldParams::new(MAX_MODULUS + 15).is_err());
        assert!(FieldParams::new(2).is_ok());
    }

    #[test]
    fn centered_abs_examples() {
        assert_eq!(centered_abs(0, 7).unwrap(), 0);
        assert_eq!(centered_abs(5, 7).unwrap(), 2);
        assert_eq!(centered_abs(3, 7).unwrap(), 3);
        assert!(centered_abs(1, 8).is_err());
        assert!(centered_abs(1, 9).is_err());
        assert!(centered_abs(1, 2).is_err());
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(1, 11).unwrap(), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert!(matches!(mod_inverse(0, 7), Err(Error::NoInverse { .. })));
        for a in 1..13 {
            assert_eq!(mul_mod(a, mod_inverse(a, 13).unwrap(), 13), 1);
        }
    }

    #[test]
    fn inverse_is_a_bijection_fixing_plus_minus_one() {
        let q = 101;
        let mut seen = vec![false; q as usize];
        for a in 1..q {
            let b = mod_inverse(a, q).unwrap();
            assert!(!seen[b as usize]);
            seen[b as usize] = true;
            if b == a {
                assert!(a == 1 || a == q - 1);
            }
        }
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_mth_root(2, 7).unwrap(), 6);
        assert!(matches!(
            primitive_mth_root(5, 7),
            Err(Error::NoRoot { .. })
        ));

        // Oracle: every element of F_13* whose order is exactly 4.
        let order_four: Vec<u64> = (1..13)
            .filter(|&g| multiplicative_order(g, 13) == Some(4))
            .collect();
        assert_eq!(order_four, vec![5, 8]);
        let g = primitive_mth_root(4, 13).unwrap();
        assert!(order_four.contains(&g));

        for m in [1, 2, 3, 4, 6, 12] {
            let g = primitive_mth_root(m, 13).unwrap();
            assert_eq!(multiplicative_order(g, 13), Some(m));
        }
    }

    #[test]
    fn omega_is_a_root_of_unity() {
        for q in [2, 3, 7, 101, 65_537, 1_000_003] {
            let fp = FieldParams::new(q).unwrap();
            assert!((fp.omega().norm() - 1.0).abs() < 1e-12);
            let w_q = fp.omega().powu(q as u32);
            assert!((w_q - Complex64::new(1.0, 0.0)).norm() < 1e-9, "q={q}");
        }
    }

    #[test]
    fn vector_index_roundtrip() {
        let fp = FieldParams::new(5).unwrap();
        for idx in 0..125 {
            let v = fp.vector_at(idx, 3);
            assert_eq!(fp.index_of(&v), idx);
        }
        assert_eq!(fp.vector_at(7, 2), fp.elems(&[1, 2]));
    }

    proptest! {
        #[test]
        fn centered_abs_is_symmetric_and_bounded(q_idx in 0usize..6, a in 0u64..10_000) {
            let q = [3u64, 5, 7, 11, 101, 257][q_idx];
            let fp = FieldParams::new(q).unwrap();
            let x = fp.elem(a);
            let c = fp.centered_abs(x);
            prop_assert!(c <= (q - 1) / 2);
            prop_assert_eq!(c, fp.centered_abs(fp.neg(x)));
            prop_assert_eq!(c, centered_abs(a, q).unwrap());
            prop_assert_eq!(fp.from_signed(fp.centered(x)), x);
        }

        #[test]
        fn omega_powers_add(q_idx in 0usize..5, i in 0u64..(1u64 << 50), j in 0u64..(1u64 << 50)) {
            let q = [3u64, 13, 101, 65_537, 1_099_511_627_689][q_idx];
            let fp = FieldParams::new(q).unwrap();
            let lhs = fp.omega_pow(i) * fp.omega_pow(j);
            let rhs = fp.omega_pow((i % q + j % q) % q);
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn field_ops_agree_with_integers(a in 0u64..MAX_MODULUS, b in 1u64..MAX_MODULUS) {
            let fp = FieldParams::new(1_099_511_627_689).unwrap();
            let (x, y) = (fp.elem(a), fp.elem(b));
            prop_assert_eq!(fp.sub(fp.add(x, y), y), x);
            if !y.is_zero() {
                prop_assert_eq!(fp.mul(fp.mul(x, y), fp.inv(y).unwrap()), x);
            }
        }
    }
}
