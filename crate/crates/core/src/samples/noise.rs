use std::fmt;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldParams;

/// Distribution of the additive error attached to each superposition element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    None,
    /// Uniform over `{-k, …, k}`.
    BoundedUniform {
        k: u64,
    },
    /// Weights `∝ exp(-b²/(2σ²))` on `{-k, …, k}`.
    TruncatedGaussian {
        sigma: f64,
        k: u64,
    },
    /// `1` with probability `eta`, else `0`. Only over F_2.
    BernoulliFlip {
        eta: f64,
    },
    /// One error drawn from `base`, shared by every element of the superposition.
    GlobalShift {
        base: Box<NoiseModel>,
    },
    /// Errors are determined by the caller (e.g. rounding residuals) and bounded by `k`.
    Fixed {
        k: u64,
    },
}

impl NoiseModel {
    pub fn global(base: NoiseModel) -> Self {
        NoiseModel::GlobalShift {
            base: Box::new(base),
        }
    }

    pub fn validate(&self, q: u64) -> Result<()> {
        let fits = |k: u64| {
            if 2 * k + 1 > q {
                Err(Error::InvalidParameters(format!(
                    "noise bound k = {k} needs 2k+1 <= q = {q}"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            NoiseModel::None => Ok(()),
            NoiseModel::BoundedUniform { k } => fits(*k),
            NoiseModel::TruncatedGaussian { sigma, k } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameters(format!(
                        "gaussian width must be positive, got {sigma}"
                    )));
                }
                fits(*k)
            }
            NoiseModel::BernoulliFlip { eta } => {
                if q != 2 {
                    return Err(Error::InvalidParameters(format!(
                        "bit-flip noise needs q = 2, got q = {q}"
                    )));
                }
                if !(0.0..0.5).contains(eta) {
                    return Err(Error::InvalidParameters(format!(
                        "flip probability must lie in [0, 1/2), got {eta}"
                    )));
                }
                Ok(())
            }
            NoiseModel::GlobalShift { base } => match base.as_ref() {
                NoiseModel::GlobalShift { .. } | NoiseModel::Fixed { .. } => {
                    Err(Error::InvalidParameters(
                        "a global shift needs an i.i.d. base distribution".into(),
                    ))
                }
                other => other.validate(q),
            },
            NoiseModel::Fixed { k } => {
                if *k > (q - 1) / 2 && q > 2 {
                    return Err(Error::InvalidParameters(format!(
                        "fixed error bound {k} exceeds (q-1)/2 for q = {q}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// The magnitude bound k of every error this model can emit.
    pub fn bound(&self) -> u64 {
        match self {
            NoiseModel::None => 0,
            NoiseModel::BoundedUniform { k }
            | NoiseModel::TruncatedGaussian { k, .. }
            | NoiseModel::Fixed { k } => *k,
            NoiseModel::BernoulliFlip { .. } => 1,
            NoiseModel::GlobalShift { base } => base.bound(),
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self, NoiseModel::GlobalShift { .. })
    }

    /// Whether `e` can be emitted by this model.
    pub fn supports(&self, e: i64) -> bool {
        match self {
            NoiseModel::None => e == 0,
            NoiseModel::BernoulliFlip { .. } => e == 0 || e == 1,
            NoiseModel::GlobalShift { base } => base.supports(e),
            _ => e.unsigned_abs() <= self.bound(),
        }
    }

    /// Support points and their probabilities for the per-element draw.
    /// For a global shift this is the distribution of the shared error.
    pub fn weights(&self) -> Result<Vec<(i64, f64)>> {
        match self {
            NoiseModel::None => Ok(vec![(0, 1.0)]),
            NoiseModel::BoundedUniform { k } => {
                let k = *k as i64;
                let w = 1.0 / (2 * k + 1) as f64;
                Ok((-k..=k).map(|b| (b, w)).collect())
            }
            NoiseModel::TruncatedGaussian { sigma, k } => {
                let k = *k as i64;
                let raw: Vec<(i64, f64)> = (-k..=k)
                    .map(|b| (b, (-((b * b) as f64) / (2.0 * sigma * sigma)).exp()))
                    .collect();
                let total: f64 = raw.iter().map(|(_, w)| w).sum();
                Ok(raw.into_iter().map(|(b, w)| (b, w / total)).collect())
            }
            NoiseModel::BernoulliFlip { eta } => Ok(vec![(0, 1.0 - eta), (1, *eta)]),
            NoiseModel::GlobalShift { base } => base.weights(),
            NoiseModel::Fixed { .. } => Err(Error::UnsupportedModel(
                "fixed errors have no distribution to draw from".into(),
            )),
        }
    }

    /// `E[ω^{e·j}]` for one error draw.
    pub fn characteristic(&self, fp: &FieldParams, j: u64) -> Result<Complex64> {
        Ok(self
            .weights()?
            .into_iter()
            .map(|(b, w)| fp.omega_prod(fp.from_signed(b), fp.elem(j)) * w)
            .sum())
    }

    pub fn sampler(&self) -> Result<NoiseSampler> {
        let weights = self.weights()?;
        let values = weights.iter().map(|(b, _)| *b).collect();
        let probs: Vec<f64> = weights.iter().map(|(_, w)| *w).collect();
        let index = WeightedIndex::new(&probs)
            .map_err(|e| Error::InvalidParameters(format!("noise weights: {e}")))?;
        Ok(NoiseSampler {
            values,
            probs,
            index,
        })
    }

    /// Short label used in CSV rows, e.g. `uniform:2` or `global:bernoulli:0.1`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::None => write!(f, "none"),
            NoiseModel::BoundedUniform { k } => write!(f, "uniform:{k}"),
            NoiseModel::TruncatedGaussian { sigma, k } => write!(f, "gaussian:{sigma}:{k}"),
            NoiseModel::BernoulliFlip { eta } => write!(f, "bernoulli:{eta}"),
            NoiseModel::GlobalShift { base } => write!(f, "global:{base}"),
            NoiseModel::Fixed { k } => write!(f, "fixed:{k}"),
        }
    }
}

/// Draws error values for an i.i.d. noise model.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    values: Vec<i64>,
    probs: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl NoiseSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        self.values[self.index.sample(rng)]
    }

    /// Counts of each support value among `total` i.i.d. draws, via a chain
    /// of conditional binomials.
    pub fn multinomial<R: Rng + ?Sized>(&self, total: u64, rng: &mut R) -> Vec<(i64, u64)> {
        let mut remaining = total;
        let mut mass = 1.0;
        let mut out = Vec::with_capacity(self.values.len());
        for (i, (&b, &p)) in self.values.iter().zip(&self.probs).enumerate() {
            let count = if i + 1 == self.values.len() || remaining == 0 {
                remaining
            } else {
                let cond = (p / mass).clamp(0.0, 1.0);
                Binomial::new(remaining, cond)
                    .expect("conditional probability is clamped to [0, 1]")
                    .sample(rng)
            };
            remaining -= count;
            mass -= p;
            if count > 0 {
                out.push((b, count));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(NoiseModel::BoundedUniform { k: 3 }.validate(7).is_ok());
        assert!(NoiseModel::BoundedUniform { k: 4 }.validate(7).is_err());
        assert!(NoiseModel::BernoulliFlip { eta: 0.1 }.validate(3).is_err());
        assert!(NoiseModel::BernoulliFlip { eta: 0.5 }.validate(2).is_err());
        assert!(NoiseModel::TruncatedGaussian { sigma: 0.0, k: 1 }
            .validate(7)
            .is_err());
        assert!(NoiseModel::global(NoiseModel::BernoulliFlip { eta: 0.2 })
            .validate(2)
            .is_ok());
        assert!(NoiseModel::global(NoiseModel::global(NoiseModel::None))
            .validate(5)
            .is_err());
    }

    #[test]
    fn gaussian_weights_normalized() {
        let w = NoiseModel::TruncatedGaussian { sigma: 1.3, k: 4 }
            .weights()
            .unwrap();
        assert_eq!(w.len(), 9);
        let total: f64 = w.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((w[3].1 - w[5].1).abs() < 1e-15);
        assert!(w[4].1 > w[5].1);
    }

    #[test]
    fn uniform_multinomial_bins() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sampler = NoiseModel::BoundedUniform { k: 1 }.sampler().unwrap();
        let v = 100_000u64;
        let hist = sampler.multinomial(v, &mut rng);
        assert_eq!(hist.iter().map(|(_, c)| c).sum::<u64>(), v);
        let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / v as f64).sqrt();
        for (_, c) in hist {
            assert!((c as f64 / v as f64 - 1.0 / 3.0).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn characteristic_of_uniform_matches_closed_form() {
        let fp = FieldParams::new(101).unwrap();
        let noise = NoiseModel::BoundedUniform { k: 2 };
        for j in 0..101u64 {
            let x = std::f64::consts::TAU * j as f64 / 101.0;
            let expect = (1.0 + 2.0 * x.cos() + 2.0 * (2.0 * x).cos()) / 5.0;
            let got = noise.characteristic(&fp, j).unwrap();
            assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12);
        }
    }
}
