use std::collections::BTreeMap;

use rand::Rng;

use super::{lwe_learn, LearnOutcome, LearnerConfig};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::samples::{
    FixedSource, NoiseModel, RealizedErrors, SampleSource, SampleSpec, SpecForm, Subset,
    EXPLICIT_MAP_THRESHOLD,
};

/// Largest q^n for which the rounding residuals are enumerated.
const ENUMERATION_LIMIT: u64 = 1 << 28;

/// `⌊x⌉_p = ⌊(p/q)·x⌉ mod p`, rounding halves up.
pub fn round_to(x: FieldElement, p: u64, q: u64) -> u64 {
    let num = 2 * p as u128 * x.value() as u128 + q as u128;
    ((num / (2 * q as u128)) % p as u128) as u64
}

/// Integer stand-in for multiplying by q/p: `y ↦ round(q·y/p) mod q`.
pub fn scale_up(y: u64, p: u64, q: u64) -> u64 {
    let num = 2 * q as u128 * y as u128 + p as u128;
    ((num / (2 * p as u128)) % q as u128) as u64
}

/// `⌈q/(2p)⌉ + 1`: bound on the centered residual `scale_up(⌊a·s⌉_p) - a·s`.
pub fn residual_bound(q: u64, p: u64) -> u64 {
    q.div_ceil(2 * p) + 1
}

/// The rescaled LWR sample `q^{-n/2} Σ_a |a⟩|scale_up(⌊a·s⌉_p)⟩`, written as
/// an LWE sample whose errors are the deterministic rounding residuals.
pub fn lwr_sample_spec(fp: &FieldParams, s: &[FieldElement], p: u64) -> Result<SampleSpec> {
    let q = fp.q();
    if p < 2 || p > q {
        return Err(Error::InvalidParameters(format!(
            "rounding modulus p = {p} must satisfy 2 <= p <= q = {q}"
        )));
    }
    let n = s.len();
    let total = fp
        .space_size(n)
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or_else(|| {
            Error::InvalidParameters(format!("q^n = {q}^{n} is too large to enumerate"))
        })?;
    let k = residual_bound(q, p).min((q - 1) / 2);
    let residual = |index: u64| {
        let a = fp.vector_at(index, n);
        let exact = fp.dot(&a, s);
        let rounded = fp.elem(scale_up(round_to(exact, p, q), p, q));
        fp.centered(fp.sub(rounded, exact))
    };
    let errors = if total <= EXPLICIT_MAP_THRESHOLD {
        RealizedErrors::ExplicitMap((0..total).map(residual).collect())
    } else {
        let mut hist = BTreeMap::new();
        for index in 0..total {
            *hist.entry(residual(index)).or_insert(0) += 1;
        }
        RealizedErrors::Histogram(hist)
    };
    SampleSpec::new(fp, s.to_vec(), Subset::All, NoiseModel::Fixed { k }, errors)
}

/// LWR samples for one secret. Every fresh sample is the same state.
#[derive(Clone, Debug)]
pub struct LwrSource {
    inner: FixedSource,
    p: u64,
}

impl LwrSource {
    pub fn new(fp: &FieldParams, s: Vec<FieldElement>, p: u64) -> Result<Self> {
        let spec = lwr_sample_spec(fp, &s, p)?;
        Ok(LwrSource {
            inner: FixedSource::new(spec),
            p,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn spec(&self) -> &SampleSpec {
        self.inner.spec()
    }

    pub fn secret(&self) -> &[FieldElement] {
        self.inner.spec().secret()
    }
}

impl SampleSource for LwrSource {
    fn field(&self) -> &FieldParams {
        self.inner.field()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn noise_bound(&self) -> u64 {
        self.inner.noise_bound()
    }

    fn next_spec<R: Rng + ?Sized>(&mut self, form: SpecForm, rng: &mut R) -> Result<SampleSpec> {
        self.inner.next_spec(form, rng)
    }

    fn next_classical<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<(Vec<FieldElement>, FieldElement)> {
        self.inner.next_classical(rng)
    }

    fn samples_drawn(&self) -> u64 {
        self.inner.samples_drawn()
    }
}

/// The repeat-and-test learner on rescaled LWR samples, with Test Candidate
/// widened to the residual bound.
pub fn lwr_learn<R: Rng + ?Sized>(
    config: &LearnerConfig,
    source: &mut LwrSource,
    rng: &mut R,
) -> Result<LearnOutcome> {
    let widened = LearnerConfig {
        k: source.noise_bound(),
        ..config.clone()
    };
    lwe_learn(&widened, source, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Engine;
    use crate::samples::outcome_distribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rounding_examples() {
        // q = 31, p = 4: (4/31)·x rounds to nearest.
        assert_eq!(round_to(FieldElement::default(), 4, 31), 0);
        let fp = FieldParams::new(31).unwrap();
        assert_eq!(round_to(fp.elem(4), 4, 31), 1); // 0.516
        assert_eq!(round_to(fp.elem(3), 4, 31), 0); // 0.387
        assert_eq!(round_to(fp.elem(30), 4, 31), 0); // 3.87 → 4 ≡ 0
        assert_eq!(scale_up(1, 4, 31), 8); // 7.75
        assert_eq!(scale_up(3, 4, 31), 23); // 23.25
        assert_eq!(residual_bound(31, 4), 5);
        assert_eq!(residual_bound(257, 16), 10);
    }

    #[test]
    fn rounding_identity_when_p_equals_q() {
        let fp = FieldParams::new(13).unwrap();
        let spec = lwr_sample_spec(&fp, &fp.elems(&[5, 2]), 13).unwrap();
        assert_eq!(spec.error_histogram(), BTreeMap::from([(0, 169)]));
        let d = outcome_distribution(&spec);
        assert!((d.p_correct - 12.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_respect_bound_exhaustively() {
        for (q, p) in [(31u64, 4u64), (31, 2), (31, 30), (257, 16), (257, 3)] {
            let fp = FieldParams::new(q).unwrap();
            let bound = residual_bound(q, p);
            for x in 0..q {
                let x = fp.elem(x);
                let back = fp.elem(scale_up(round_to(x, p, q), p, q));
                assert!(
                    fp.centered_abs(fp.sub(back, x)) <= bound,
                    "q={q} p={p} x={x}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_modulus() {
        let fp = FieldParams::new(7).unwrap();
        assert!(lwr_sample_spec(&fp, &fp.elems(&[1]), 8).is_err());
        assert!(lwr_sample_spec(&fp, &fp.elems(&[1]), 1).is_err());
    }

    #[test]
    fn learner_recovers_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let fp = FieldParams::new(257).unwrap();
        let s = fp.elems(&[77]);
        let mut source = LwrSource::new(&fp, s.clone(), 16).unwrap();
        let config = LearnerConfig {
            repetitions: 200,
            test_samples: 4,
            k: 0,
            engine: Engine::Analytic,
        };
        let hits = (0..40)
            .filter(|_| {
                lwr_learn(&config, &mut source, &mut rng)
                    .unwrap()
                    .output
                    .is(&s)
            })
            .count();
        assert!(hits >= 38, "{hits}/40");
    }
}
