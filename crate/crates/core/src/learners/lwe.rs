use rand::Rng;

use super::{field_bv, test_candidate, BvOutcome, Engine, LearnerConfig};
use crate::error::Result;
use crate::samples::{SampleSource, SpecForm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnOutcome {
    pub output: BvOutcome,
    /// Field-BV iterations actually run.
    pub iterations: usize,
    /// Quantum samples consumed, test samples included.
    pub samples_used: u64,
}

/// Repeat Field-BV up to L times and return the first candidate that
/// passes Test Candidate with M samples.
pub fn lwe_learn<S, R>(config: &LearnerConfig, source: &mut S, rng: &mut R) -> Result<LearnOutcome>
where
    S: SampleSource,
    R: Rng + ?Sized,
{
    config.validate()?;
    let start = source.samples_drawn();
    let form = match config.engine {
        Engine::Dense => SpecForm::Explicit,
        Engine::Analytic => SpecForm::Compact,
    };
    for iteration in 1..=config.repetitions {
        let spec = source.next_spec(form, rng)?;
        if let BvOutcome::Secret(candidate) = field_bv(&spec, config.engine, rng)? {
            if config.test_samples == 0
                || test_candidate(&candidate, config.test_samples, source, config.k, rng)?
            {
                return Ok(LearnOutcome {
                    output: BvOutcome::Secret(candidate),
                    iterations: iteration,
                    samples_used: source.samples_drawn() - start,
                });
            }
        }
    }
    Ok(LearnOutcome {
        output: BvOutcome::Bot,
        iterations: config.repetitions,
        samples_used: source.samples_drawn() - start,
    })
}

/// `1 - (1 - p)^L - (3k/q)^M · L`, clipped at zero. `per_iteration` is the
/// per-sample lower bound on returning s.
pub fn learner_bound(
    per_iteration: f64,
    k: u64,
    q: u64,
    repetitions: usize,
    test_samples: usize,
) -> f64 {
    let miss = (1.0 - per_iteration).powi(repetitions as i32);
    let false_accept = (3.0 * k as f64 / q as f64).powi(test_samples as i32) * repetitions as f64;
    (1.0 - miss - false_accept).max(0.0)
}

/// Exact success probability of [`lwe_learn`] when each iteration
/// independently yields s with `p_correct`, a wrong vector with `p_wrong`,
/// and any wrong vector survives the test with probability `wrong_accept`.
///
/// Each iteration ends the run with success `p_c`, with a false accept
/// `p_w·α`, or continues; summing the geometric series over L iterations
/// gives `p_c (1 - r^L) / (1 - r)` with `r = 1 - p_c - p_w·α`.
pub fn exact_learner_success(
    p_correct: f64,
    p_wrong: f64,
    wrong_accept: f64,
    repetitions: usize,
) -> f64 {
    let stop = p_correct + p_wrong * wrong_accept;
    if stop <= 0.0 {
        return 0.0;
    }
    let r = 1.0 - stop;
    p_correct * (1.0 - r.powi(repetitions as i32)) / stop
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldParams;
    use crate::samples::{LweSource, NoiseModel, SubsetMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_single_iteration_without_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let fp = FieldParams::new(7).unwrap();
        let s = fp.elems(&[2, 6]);
        let mut source = LweSource::new(&fp, s.clone(), SubsetMode::All, NoiseModel::None).unwrap();
        let config = LearnerConfig {
            repetitions: 1,
            test_samples: 0,
            k: 0,
            engine: Engine::Dense,
        };
        let trials = 5_000;
        let hits = (0..trials)
            .filter(|_| {
                lwe_learn(&config, &mut source, &mut rng)
                    .unwrap()
                    .output
                    .is(&s)
            })
            .count();
        let p = 6.0 / 7.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn sample_consumption_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let fp = FieldParams::new(257).unwrap();
        let s = fp.random_vector(2, &mut rng);
        let mut source =
            LweSource::new(&fp, s, SubsetMode::All, NoiseModel::BoundedUniform { k: 3 }).unwrap();
        let config = LearnerConfig {
            repetitions: (60.0 * 10f64.ln()).ceil() as usize,
            test_samples: 1,
            k: 3,
            engine: Engine::Analytic,
        };
        for _ in 0..50 {
            let out = lwe_learn(&config, &mut source, &mut rng).unwrap();
            assert!(out.samples_used <= (config.repetitions * 2) as u64);
        }
    }

    #[test]
    fn exact_success_formula_limits() {
        // With no false accepts and L → ∞ every run eventually succeeds.
        assert!((exact_learner_success(0.3, 0.5, 0.0, 10_000) - 1.0).abs() < 1e-12);
        // One iteration, no test: success is just p_correct.
        assert!((exact_learner_success(0.3, 0.5, 1.0, 1) - 0.3).abs() < 1e-15);
        assert_eq!(learner_bound(0.01, 2, 101, 93, 1), 0.0);
        assert!(
            (learner_bound(0.5, 1, 1_000_000, 10, 3) - (1.0 - 0.5f64.powi(10) - 2.7e-17 * 10.0))
                .abs()
                < 1e-12
        );
    }
}
