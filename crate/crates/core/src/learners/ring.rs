//! Ring-LWE over `R_q = Z_q[x]/Φ_m(x)` when one error is shared by the whole
//! superposition.
//!
//! With `m | q-1` the evaluation embedding `φ(p) = (p(ω_m^t))_{t ∈ Z_m^*}`
//! is a ring isomorphism onto `F_q^n` with component-wise product, so a
//! sample becomes `Σ_x |x⟩|x⊙φ(s) + φ(e)⟩` on 2n registers. A shared `φ(e)`
//! only contributes a global phase after the QFT.

use num_complex::Complex64;
use rand::Rng;

use super::{BvOutcome, Engine};
use crate::error::{Error, Result};
use crate::field::{primitive_mth_root, FieldElement, FieldParams};
use crate::samples::{NoiseModel, NoiseSampler};
use crate::sim::{dense_size, DenseState};

/// Euler's totient.
pub fn euler_phi(m: u64) -> u64 {
    let mut result = m;
    let mut rest = m;
    let mut p = 2;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            while rest.is_multiple_of(p) {
                rest /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if rest > 1 {
        result -= result / rest;
    }
    result
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer coefficients of `Φ_m`, lowest degree first, from
/// `x^m - 1 = Π_{d | m} Φ_d`.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i64> {
    assert!(m >= 1, "conductor must be positive");
    let mut poly = vec![0i64; m as usize + 1];
    poly[0] = -1;
    poly[m as usize] = 1;
    for d in (1..m).filter(|d| m.is_multiple_of(*d)) {
        poly = divide_monic(&poly, &cyclotomic_polynomial(d));
    }
    poly
}

/// Exact quotient of `num` by a monic `den`.
fn divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i64; num.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "Φ_d divides x^m - 1");
    quot
}

/// `R_q = F_q[x]/Φ_m` with its evaluation embedding. Elements are
/// coefficient vectors of length `n = φ(m)`.
#[derive(Clone, Debug)]
pub struct CyclotomicRing {
    fp: FieldParams,
    m: u64,
    /// `Φ_m mod q` without its leading 1.
    modulus: Vec<FieldElement>,
    /// `ω_m^t` for the units `t` of `Z_m`, ascending in `t`.
    points: Vec<FieldElement>,
    /// Inverse of the Vandermonde matrix `V[t][i] = points[t]^i`.
    inverse: Vec<Vec<FieldElement>>,
}

impl CyclotomicRing {
    pub fn new(fp: &FieldParams, m: u64) -> Result<Self> {
        let q = fp.q();
        let root = fp.elem(primitive_mth_root(m, q)?);
        let n = euler_phi(m) as usize;
        let phi = cyclotomic_polynomial(m);
        let modulus = phi[..n].iter().map(|&c| fp.from_signed(c)).collect();
        let points: Vec<FieldElement> = (1..=m)
            .filter(|&t| gcd(t, m) == 1)
            .map(|t| fp.pow(root, t))
            .collect();
        let vandermonde: Vec<Vec<FieldElement>> = points
            .iter()
            .map(|&p| (0..n as u64).map(|i| fp.pow(p, i)).collect())
            .collect();
        let inverse = invert_matrix(fp, vandermonde)?;
        Ok(CyclotomicRing {
            fp: fp.clone(),
            m,
            modulus,
            points,
            inverse,
        })
    }

    pub fn field(&self) -> &FieldParams {
        &self.fp
    }

    pub fn conductor(&self) -> u64 {
        self.m
    }

    /// Ring dimension `φ(m)`.
    pub fn degree(&self) -> usize {
        self.modulus.len()
    }

    pub fn add(&self, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        a.iter().zip(b).map(|(&x, &y)| self.fp.add(x, y)).collect()
    }

    pub fn mul(&self, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
        let fp = &self.fp;
        let n = self.degree();
        let mut prod = vec![FieldElement::ZERO; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = fp.add(prod[i + j], fp.mul(x, y));
            }
        }
        // x^n ≡ -Σ modulus[i] x^i
        for top in (n..prod.len()).rev() {
            let c = prod[top];
            if c.is_zero() {
                continue;
            }
            for (i, &mi) in self.modulus.iter().enumerate() {
                let at = top - n + i;
                prod[at] = fp.sub(prod[at], fp.mul(c, mi));
            }
        }
        prod.truncate(n);
        prod
    }

    pub fn embed(&self, a: &[FieldElement]) -> Vec<FieldElement> {
        self.points
            .iter()
            .map(|&p| {
                a.iter().rev().fold(FieldElement::ZERO, |acc, &c| {
                    self.fp.add(self.fp.mul(acc, p), c)
                })
            })
            .collect()
    }

    pub fn unembed(&self, values: &[FieldElement]) -> Vec<FieldElement> {
        self.inverse
            .iter()
            .map(|row| self.fp.dot(row, values))
            .collect()
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<FieldElement> {
        self.fp.random_vector(self.degree(), rng)
    }
}

/// Gauss–Jordan inversion over F_q.
fn invert_matrix(
    fp: &FieldParams,
    mut a: Vec<Vec<FieldElement>>,
) -> Result<Vec<Vec<FieldElement>>> {
    let n = a.len();
    let mut inv: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| (0..n).map(|j| fp.elem(u64::from(i == j))).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Construction("evaluation points are not distinct".into()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = fp.inv(a[col][col])?;
        a[col] = fp.scale(scale, &a[col]);
        inv[col] = fp.scale(scale, &inv[col]);
        for r in (0..n).filter(|&r| r != col) {
            let f = a[r][col];
            if f.is_zero() {
                continue;
            }
            a[r] = fp.sub_vec(&a[r], &fp.scale(f, &a[col]));
            inv[r] = fp.sub_vec(&inv[r], &fp.scale(f, &inv[col]));
        }
    }
    Ok(inv)
}

/// Ring-LWE samples `Σ_x |x⟩|x·s + e⟩` with one error `e` per sample whose
/// coefficients are drawn i.i.d. from the base noise model.
#[derive(Clone, Debug)]
pub struct RingGlobalSource {
    ring: CyclotomicRing,
    s: Vec<FieldElement>,
    noise: NoiseModel,
    sampler: Option<NoiseSampler>,
    drawn: u64,
}

impl RingGlobalSource {
    pub fn new(ring: CyclotomicRing, s: Vec<FieldElement>, noise: NoiseModel) -> Result<Self> {
        if s.len() != ring.degree() {
            return Err(Error::InvalidParameters(format!(
                "secret has {} coefficients, ring degree is {}",
                s.len(),
                ring.degree()
            )));
        }
        let sampler = match &noise {
            NoiseModel::None => None,
            NoiseModel::GlobalShift { .. } => {
                noise.validate(ring.field().q())?;
                Some(noise.sampler()?)
            }
            other => {
                return Err(Error::UnsupportedModel(format!(
                    "ring samples need a shared error, got {other}"
                )))
            }
        };
        Ok(RingGlobalSource {
            ring,
            s,
            noise,
            sampler,
            drawn: 0,
        })
    }

    pub fn ring(&self) -> &CyclotomicRing {
        &self.ring
    }

    pub fn secret(&self) -> &[FieldElement] {
        &self.s
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn samples_drawn(&self) -> u64 {
        self.drawn
    }

    /// Draws the shared error of a fresh sample.
    pub fn next_error<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<FieldElement> {
        self.drawn += 1;
        let fp = self.ring.field();
        match &self.sampler {
            None => vec![FieldElement::ZERO; self.ring.degree()],
            Some(sampler) => (0..self.ring.degree())
                .map(|_| fp.from_signed(sampler.sample(rng)))
                .collect(),
        }
    }

    /// A fresh sample in the evaluation embedding, on 2n registers.
    pub fn next_state<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<DenseState> {
        let e = self.next_error(rng);
        let fp = self.ring.field();
        let n = self.ring.degree();
        let size = dense_size(fp, 2 * n)?;
        let sigma = self.ring.embed(&self.s);
        let eps = self.ring.embed(&e);
        let half = fp.space_size(n).expect("bounded by the dense cap");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        for index in 0..half {
            let x = fp.vector_at(index, n);
            let y: Vec<FieldElement> = (0..n)
                .map(|t| fp.add(fp.mul(x[t], sigma[t]), eps[t]))
                .collect();
            let target = index * half + fp.index_of(&y);
            amplitudes[target as usize] = Complex64::new(1.0, 0.0);
        }
        DenseState::from_amplitudes(fp, 2 * n, amplitudes)
    }
}

/// One sample: QFT on all 2n registers, measure `(j, y')`, read
/// `φ(s)_t = -j_t / y'_t`, and invert the embedding. ⊥ when any `y'_t = 0`.
pub fn ring_lwe_global_learn<R: Rng + ?Sized>(
    source: &mut RingGlobalSource,
    engine: Engine,
    rng: &mut R,
) -> Result<BvOutcome> {
    let ring = source.ring().clone();
    let fp = ring.field();
    let n = ring.degree();
    let (j, ystar) = match engine {
        Engine::Dense => {
            let mut state = source.next_state(rng)?;
            state.apply_qft_all()?;
            let outcome = state.measure_all(rng);
            let (j, ystar) = outcome.split_at(n);
            (j.to_vec(), ystar.to_vec())
        }
        Engine::Analytic => {
            // The error is a phase, so (j, y') is uniform over y' with j = -y'⊙φ(s).
            source.next_error(rng);
            let sigma = ring.embed(source.secret());
            let ystar = fp.random_vector(n, rng);
            let j = (0..n).map(|t| fp.neg(fp.mul(ystar[t], sigma[t]))).collect();
            (j, ystar)
        }
    };
    if ystar.iter().any(|y| y.is_zero()) {
        return Ok(BvOutcome::Bot);
    }
    let sigma: Vec<FieldElement> = (0..n)
        .map(|t| fp.neg(fp.mul(j[t], fp.inv(ystar[t]).expect("nonzero"))))
        .collect();
    Ok(BvOutcome::Secret(ring.unembed(&sigma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn totient_and_cyclotomics() {
        assert_eq!(
            (1..=12).map(euler_phi).collect::<Vec<_>>(),
            [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]
        );
        assert_eq!(cyclotomic_polynomial(1), [-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), [1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), [1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), [1, 0, -1, 0, 1]);
    }

    #[test]
    fn embedding_is_a_homomorphism_exhaustively() {
        let fp = FieldParams::new(13).unwrap();
        let ring = CyclotomicRing::new(&fp, 4).unwrap();
        let all: Vec<Vec<FieldElement>> = (0..169).map(|i| fp.vector_at(i, 2)).collect();
        for a in &all {
            let ea = ring.embed(a);
            assert_eq!(&ring.unembed(&ea), a);
            for b in &all {
                let eb = ring.embed(b);
                let prod: Vec<FieldElement> =
                    ea.iter().zip(&eb).map(|(&x, &y)| fp.mul(x, y)).collect();
                assert_eq!(ring.embed(&ring.mul(a, b)), prod);
            }
        }
    }

    #[test]
    fn multiplication_matches_negacyclic_rule() {
        // Φ_4 = x² + 1: (1 + 2x)(3 + x) = 3 + 7x + 2x² = 1 + 7x
        let fp = FieldParams::new(13).unwrap();
        let ring = CyclotomicRing::new(&fp, 4).unwrap();
        assert_eq!(
            ring.mul(&fp.elems(&[1, 2]), &fp.elems(&[3, 1])),
            fp.elems(&[1, 7])
        );
    }

    #[test]
    fn rejects_bad_conductor_and_noise() {
        let fp = FieldParams::new(13).unwrap();
        assert!(matches!(
            CyclotomicRing::new(&fp, 5),
            Err(Error::NoRoot { .. })
        ));
        let ring = CyclotomicRing::new(&fp, 4).unwrap();
        let err =
            RingGlobalSource::new(ring, fp.elems(&[1, 1]), NoiseModel::BoundedUniform { k: 1 });
        assert!(matches!(err, Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn global_error_does_not_change_the_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let fp = FieldParams::new(13).unwrap();
        let ring = CyclotomicRing::new(&fp, 4).unwrap();
        let s = ring.random_element(&mut rng);
        let trials = 2_000;
        let expected = (12.0f64 / 13.0).powi(2);
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        for noise in [
            NoiseModel::None,
            NoiseModel::global(NoiseModel::BoundedUniform { k: 2 }),
        ] {
            let mut source = RingGlobalSource::new(ring.clone(), s.clone(), noise).unwrap();
            let mut hits = 0;
            for _ in 0..trials {
                match ring_lwe_global_learn(&mut source, Engine::Dense, &mut rng).unwrap() {
                    BvOutcome::Secret(x) => {
                        assert_eq!(x, s);
                        hits += 1;
                    }
                    BvOutcome::Bot => {}
                }
            }
            assert!((hits as f64 / trials as f64 - expected).abs() < 3.0 * sigma);
        }
    }
}
