//! Seeded Monte Carlo harness over the learners.
//!
//! Trials run in fixed-size blocks; block `b` draws from a ChaCha8 stream
//! seeded with `seed ^ b`, so results do not depend on how many worker
//! threads execute the blocks.

mod config;
mod exact;
mod report;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::{FieldElement, FieldParams};
use crate::learners::{
    lpn_learn, lwe_learn, lwr_learn, ring_lwe_global_learn, sis_learn, BvOutcome, CyclotomicRing,
    LearnerConfig, LwrSource, RingGlobalSource, SisOutcome, SisSource,
};
use crate::samples::{LweSource, NoiseModel, SubsetMode};

pub use config::{ExperimentConfig, NoiseKind, PartialConfig, Problem, SweepFile};
pub use exact::{predictions, Predictions, LPN_DELTA};
pub use report::{to_text, write_csv, ExperimentReport, ReportRecord, SweepEntry, CSV_HEADER};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Trials per independently seeded block.
pub const BLOCK_TRIALS: u64 = 64;

/// Wilson score interval for `successes` out of `trials`, clamped so it
/// always contains the point estimate.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// State shared by all trials of one experiment.
struct Prepared {
    fp: FieldParams,
    noise: NoiseModel,
    ring: Option<CyclotomicRing>,
    fixed_lwr: Option<LwrSource>,
}

impl Prepared {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let fp = config.field()?;
        let noise = match config.problem {
            Problem::Lwr | Problem::Sis => NoiseModel::None,
            _ => config.noise_model()?,
        };
        let ring = match config.problem {
            Problem::RingGlobal => Some(CyclotomicRing::new(&fp, config.m.expect("validated"))?),
            _ => None,
        };
        let fixed_lwr = match (config.problem, &config.secret) {
            (Problem::Lwr, Some(s)) => Some(LwrSource::new(
                &fp,
                fp.elems(s),
                config.p.expect("validated"),
            )?),
            _ => None,
        };
        Ok(Prepared {
            fp,
            noise,
            ring,
            fixed_lwr,
        })
    }

    fn secret<R: Rng + ?Sized>(&self, config: &ExperimentConfig, rng: &mut R) -> Vec<FieldElement> {
        if let Some(s) = &config.secret {
            return self.fp.elems(s);
        }
        match config.problem {
            Problem::Sis => {
                let k = config.k as i64;
                (0..config.n)
                    .map(|_| self.fp.from_signed(rng.random_range(-k..=k)))
                    .collect()
            }
            _ => self.fp.random_vector(config.n, rng),
        }
    }

    fn trial<R: Rng + ?Sized>(&self, config: &ExperimentConfig, rng: &mut R) -> Result<SingleRun> {
        let fp = &self.fp;
        let learner = LearnerConfig {
            repetitions: config.repetitions,
            test_samples: config.test_samples,
            k: config.k,
            engine: config.engine,
        };
        let secret = self.secret(config, rng);
        let s = secret.clone();
        let output = match config.problem {
            Problem::Lwe => {
                let v = config.subset_size().expect("validated");
                let mode = if fp.space_size(config.n) == Some(v) {
                    SubsetMode::All
                } else {
                    SubsetMode::Random { v }
                };
                let mut source = LweSource::new(fp, s, mode, self.noise.clone())?;
                lwe_learn(&learner, &mut source, rng)?.output.into()
            }
            Problem::Lpn => {
                let mut source = LweSource::new(fp, s, SubsetMode::All, self.noise.clone())?;
                lpn_learn(
                    &mut source,
                    config.eta,
                    config.repetitions,
                    config.engine,
                    rng,
                )?
                .output
                .into()
            }
            Problem::Lwr => {
                let mut source = match &self.fixed_lwr {
                    Some(source) => source.clone(),
                    None => LwrSource::new(fp, s, config.p.expect("validated"))?,
                };
                lwr_learn(&learner, &mut source, rng)?.output.into()
            }
            Problem::Sis => {
                let mut source = SisSource::new(fp, s)?;
                match sis_learn(
                    config.k,
                    config.repetitions,
                    &mut source,
                    config.engine,
                    rng,
                )? {
                    SisOutcome::Recovered(v) => RunOutput::Recovered(v),
                    SisOutcome::Failed { coordinate } => RunOutput::Failed { coordinate },
                }
            }
            Problem::RingGlobal => {
                let ring = self.ring.clone().expect("prepared");
                let mut source = RingGlobalSource::new(ring, s, self.noise.clone())?;
                ring_lwe_global_learn(&mut source, config.engine, rng)?.into()
            }
        };
        Ok(SingleRun { secret, output })
    }
}

/// What one learner invocation returned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutput {
    Recovered(Vec<FieldElement>),
    Bot,
    /// SIS only: no candidate survived for this coordinate.
    Failed {
        coordinate: usize,
    },
}

impl From<BvOutcome> for RunOutput {
    fn from(outcome: BvOutcome) -> Self {
        match outcome {
            BvOutcome::Secret(s) => RunOutput::Recovered(s),
            BvOutcome::Bot => RunOutput::Bot,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleRun {
    /// The hidden secret of this run.
    pub secret: Vec<FieldElement>,
    pub output: RunOutput,
}

impl SingleRun {
    pub fn succeeded(&self) -> bool {
        self.output == RunOutput::Recovered(self.secret.clone())
    }
}

/// One learner invocation with a secret drawn from `rng` unless the config
/// fixes it.
pub fn learn_once<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Result<SingleRun> {
    config.validate()?;
    Prepared::new(config)?.trial(config, rng)
}

/// Runs `config.trials` independent trials and aggregates them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    config.validate()?;
    let prepared = Prepared::new(config)?;
    let predicted = predictions(config)?;
    let blocks = config.trials.div_ceil(BLOCK_TRIALS);
    let successes = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ block);
            let first = block * BLOCK_TRIALS;
            let count = BLOCK_TRIALS.min(config.trials - first);
            let mut hits = 0u64;
            for _ in 0..count {
                hits += u64::from(prepared.trial(config, &mut rng)?.succeeded());
            }
            Ok(hits)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let (wilson_lo, wilson_hi) = wilson_interval(successes, config.trials, Z_95);
    Ok(ExperimentReport {
        config: config.clone(),
        successes,
        empirical_rate: successes as f64 / config.trials as f64,
        wilson_lo,
        wilson_hi,
        exact_prob: predicted.exact,
        bound_paper: predicted.bound_paper,
        bound_optimized: predicted.bound_optimized,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Resolves and runs each configuration in order. A failing row records its
/// error and the sweep continues.
pub fn sweep(configs: &[PartialConfig]) -> Vec<SweepEntry> {
    configs
        .iter()
        .map(
            |partial| match ExperimentConfig::resolve(partial).and_then(|c| run_experiment(&c)) {
                Ok(report) => SweepEntry::Done(report),
                Err(e) => SweepEntry::Failed {
                    config: partial.clone(),
                    error: e.to_string(),
                },
            },
        )
        .collect()
}
