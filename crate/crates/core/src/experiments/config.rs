use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::learners::{euler_phi, residual_bound, Engine};
use crate::samples::NoiseModel;
use crate::sim::DENSE_CAP;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    #[default]
    Lwe,
    Lpn,
    Lwr,
    Sis,
    RingGlobal,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Lwe => "lwe",
            Problem::Lpn => "lpn",
            Problem::Lwr => "lwr",
            Problem::Sis => "sis",
            Problem::RingGlobal => "ring-global",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lwe" => Problem::Lwe,
            "lpn" => Problem::Lpn,
            "lwr" => Problem::Lwr,
            "sis" => Problem::Sis,
            "ring-global" => Problem::RingGlobal,
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown problem '{other}'"
                )))
            }
        })
    }
}

/// Noise family; magnitudes come from `k`, `sigma` and `eta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    Uniform,
    Gaussian,
    Bernoulli,
    GlobalUniform,
    GlobalGaussian,
    GlobalBernoulli,
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => NoiseKind::None,
            "uniform" => NoiseKind::Uniform,
            "gaussian" => NoiseKind::Gaussian,
            "bernoulli" => NoiseKind::Bernoulli,
            "global-uniform" => NoiseKind::GlobalUniform,
            "global-gaussian" => NoiseKind::GlobalGaussian,
            "global-bernoulli" => NoiseKind::GlobalBernoulli,
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown noise kind '{other}'"
                )))
            }
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Engine::Dense),
            "analytic" => Ok(Engine::Analytic),
            other => Err(Error::InvalidParameters(format!(
                "unknown engine '{other}'"
            ))),
        }
    }
}

/// Every field optional; used for layering defaults, config files and flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub problem: Option<Problem>,
    pub q: Option<u64>,
    pub n: Option<usize>,
    pub v: Option<u64>,
    pub k: Option<u64>,
    pub sigma: Option<f64>,
    pub eta: Option<f64>,
    pub p: Option<u64>,
    pub m: Option<u64>,
    pub noise: Option<NoiseKind>,
    pub engine: Option<Engine>,
    pub trials: Option<u64>,
    #[serde(rename = "L")]
    pub repetitions: Option<usize>,
    #[serde(rename = "M")]
    pub test_samples: Option<usize>,
    pub seed: Option<u64>,
    pub secret: Option<Vec<u64>>,
}

impl PartialConfig {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: &PartialConfig) -> PartialConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() {
                    self.$field = over.$field.clone();
                })*
            };
        }
        take!(
            problem,
            q,
            n,
            v,
            k,
            sigma,
            eta,
            p,
            m,
            noise,
            engine,
            trials,
            repetitions,
            test_samples,
            seed,
            secret
        );
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// A TOML sweep file: shared fields at the top level and one `[[run]]`
/// table per configuration.
#[derive(Clone, Debug, Default, Deserialize)]
pub struct SweepFile {
    #[serde(flatten)]
    pub base: PartialConfig,
    #[serde(default)]
    pub run: Vec<PartialConfig>,
}

impl SweepFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub q: u64,
    /// Secret dimension; for ring problems this is φ(m).
    pub n: usize,
    /// Subset size for LWE; q^n elsewhere.
    pub v: Option<u64>,
    pub k: u64,
    pub sigma: Option<f64>,
    pub eta: f64,
    pub p: Option<u64>,
    pub m: Option<u64>,
    pub noise: NoiseKind,
    pub engine: Engine,
    pub trials: u64,
    #[serde(rename = "L")]
    pub repetitions: usize,
    #[serde(rename = "M")]
    pub test_samples: usize,
    pub seed: u64,
    /// Fixed secret; a fresh uniform one per trial when absent.
    pub secret: Option<Vec<u64>>,
}

impl ExperimentConfig {
    /// Applies defaults to the unset fields and validates the result.
    pub fn resolve(partial: &PartialConfig) -> Result<Self> {
        let problem = partial.problem.unwrap_or_default();
        let q = partial
            .q
            .unwrap_or(if problem == Problem::Lpn { 2 } else { 5 });
        let k = partial.k.unwrap_or(u64::from(problem == Problem::Sis));
        let m = match problem {
            Problem::RingGlobal => Some(partial.m.unwrap_or(4)),
            _ => partial.m,
        };
        let n = match (problem, m) {
            (Problem::RingGlobal, Some(m)) => euler_phi(m) as usize,
            _ => partial.n.unwrap_or(2),
        };
        let noise = partial.noise.unwrap_or(match problem {
            Problem::Lpn => NoiseKind::Bernoulli,
            Problem::RingGlobal if k > 0 => NoiseKind::GlobalUniform,
            Problem::Lwe if k > 0 => NoiseKind::Uniform,
            _ => NoiseKind::None,
        });
        let config = ExperimentConfig {
            problem,
            q,
            n,
            v: partial.v,
            k,
            sigma: partial.sigma,
            eta: partial.eta.unwrap_or(0.0),
            p: partial.p,
            m,
            noise,
            engine: partial.engine.unwrap_or_default(),
            trials: partial.trials.unwrap_or(1_000),
            repetitions: partial.repetitions.unwrap_or(1),
            test_samples: partial.test_samples.unwrap_or(0),
            seed: partial.seed.unwrap_or(0),
            secret: partial.secret.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn field(&self) -> Result<FieldParams> {
        FieldParams::new(self.q)
    }

    /// The noise model applied to samples. LWR and SIS have none of their own.
    pub fn noise_model(&self) -> Result<NoiseModel> {
        let k = self.k;
        let gaussian = || -> Result<NoiseModel> {
            let sigma = self
                .sigma
                .ok_or_else(|| Error::InvalidParameters("gaussian noise needs sigma".into()))?;
            Ok(NoiseModel::TruncatedGaussian { sigma, k })
        };
        let model = match self.noise {
            NoiseKind::None => NoiseModel::None,
            NoiseKind::Uniform => NoiseModel::BoundedUniform { k },
            NoiseKind::Gaussian => gaussian()?,
            NoiseKind::Bernoulli => NoiseModel::BernoulliFlip { eta: self.eta },
            NoiseKind::GlobalUniform => NoiseModel::global(NoiseModel::BoundedUniform { k }),
            NoiseKind::GlobalGaussian => NoiseModel::global(gaussian()?),
            NoiseKind::GlobalBernoulli => {
                NoiseModel::global(NoiseModel::BernoulliFlip { eta: self.eta })
            }
        };
        model.validate(self.q)?;
        Ok(model)
    }

    /// Subset size of every LWE sample.
    pub fn subset_size(&self) -> Option<u64> {
        let full = FieldParams::new(self.q).ok()?.space_size(self.n);
        match self.problem {
            Problem::Lwe => self.v.or(full),
            Problem::Lpn | Problem::Lwr => full,
            Problem::Sis | Problem::RingGlobal => None,
        }
    }

    /// Bound that Test Candidate uses; LWR widens it to the residual bound.
    pub fn effective_k(&self) -> u64 {
        match (self.problem, self.p) {
            (Problem::Lwr, Some(p)) => residual_bound(self.q, p).min((self.q - 1) / 2),
            _ => self.k,
        }
    }

    pub fn noise_label(&self) -> String {
        match self.problem {
            Problem::Lwr => NoiseModel::Fixed {
                k: self.effective_k(),
            }
            .to_string(),
            Problem::Sis => NoiseModel::None.to_string(),
            _ => self
                .noise_model()
                .map(|m| m.to_string())
                .unwrap_or_else(|_| "invalid".into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParameters(msg));
        let fp = self.field()?;
        if self.trials == 0 {
            return invalid("trials must be at least 1".into());
        }
        if self.repetitions == 0 {
            return invalid("L must be at least 1".into());
        }
        if self.n == 0 {
            return invalid("n must be at least 1".into());
        }
        if let Some(secret) = &self.secret {
            if secret.len() != self.n {
                return invalid(format!(
                    "secret has {} coordinates, n = {}",
                    secret.len(),
                    self.n
                ));
            }
            if let Some(x) = secret.iter().find(|&&x| x >= self.q) {
                return invalid(format!(
                    "secret coordinate {x} is not reduced mod {}",
                    self.q
                ));
            }
        }
        let registers = match self.problem {
            Problem::RingGlobal => 2 * self.n,
            _ => self.n + 1,
        };
        let dense_len = (self.q as f64).powi(registers as i32);
        if self.engine == Engine::Dense && dense_len > DENSE_CAP as f64 {
            return invalid(format!(
                "dense engine needs {dense_len} amplitudes, cap is {DENSE_CAP}"
            ));
        }
        match self.problem {
            Problem::Lwe => {
                self.noise_model()?;
                let full = fp.space_size(self.n);
                if let Some(v) = self.v {
                    if v == 0 || full.is_some_and(|t| v > t) {
                        return invalid(format!("subset size {v} not in [1, q^n]"));
                    }
                }
                if full.is_none() && self.v.is_none() {
                    return invalid("q^n does not fit in 64 bits; give v".into());
                }
            }
            Problem::Lpn => {
                if self.q != 2 {
                    return invalid(format!("lpn needs q = 2, got {}", self.q));
                }
                if !matches!(
                    self.noise,
                    NoiseKind::Bernoulli | NoiseKind::GlobalBernoulli | NoiseKind::None
                ) {
                    return invalid("lpn noise must be bernoulli, global-bernoulli or none".into());
                }
                self.noise_model()?;
            }
            Problem::Lwr => {
                let p = self
                    .p
                    .ok_or_else(|| Error::InvalidParameters("lwr needs p".into()))?;
                if p < 2 || p > self.q {
                    return invalid(format!("p = {p} must satisfy 2 <= p <= q"));
                }
            }
            Problem::Sis => {
                if 2 * self.k + 1 > self.q {
                    return invalid(format!("2k+1 = {} exceeds q = {}", 2 * self.k + 1, self.q));
                }
                if let Some(secret) = &self.secret {
                    if secret.iter().any(|&x| fp.centered_abs(fp.elem(x)) > self.k) {
                        return invalid("sis secret exceeds the coefficient bound k".into());
                    }
                }
            }
            Problem::RingGlobal => {
                let m = self.m.expect("set by resolve");
                if m == 0 || !(self.q - 1).is_multiple_of(m) {
                    return Err(Error::NoRoot { m, q: self.q });
                }
                match self.noise_model()? {
                    NoiseModel::None | NoiseModel::GlobalShift { .. } => {}
                    other => {
                        return Err(Error::UnsupportedModel(format!(
                            "ring samples need a shared error, got {other}"
                        )))
                    }
                }
            }
        }
        Ok(())
    }
}
