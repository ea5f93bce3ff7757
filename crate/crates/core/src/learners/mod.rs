//! Learning algorithms built on the Field Bernstein–Vazirani transform.

mod bv;
mod candidate;
mod lpn;
mod lwe;
mod lwr;
mod ring;
mod sis;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::FieldElement;

pub use bv::{decode_outcome, field_bv, field_bv_state, sample_category};
pub use candidate::test_candidate;
pub use lpn::{lpn_learn, lpn_trial, LpnOutcome};
pub use lwe::{exact_learner_success, learner_bound, lwe_learn, LearnOutcome};
pub use lwr::{lwr_learn, lwr_sample_spec, residual_bound, round_to, scale_up, LwrSource};
pub use ring::{
    cyclotomic_polynomial, euler_phi, ring_lwe_global_learn, CyclotomicRing, RingGlobalSource,
};
pub use sis::{sis_bound, sis_learn, sis_round, SisOutcome, SisSource};

/// Result of one learner invocation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BvOutcome {
    Secret(Vec<FieldElement>),
    Bot,
}

impl BvOutcome {
    pub fn secret(&self) -> Option<&[FieldElement]> {
        match self {
            BvOutcome::Secret(s) => Some(s),
            BvOutcome::Bot => None,
        }
    }

    pub fn is(&self, s: &[FieldElement]) -> bool {
        self.secret() == Some(s)
    }
}

impl fmt::Display for BvOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BvOutcome::Secret(s) => write!(f, "{}", format_vector(s)),
            BvOutcome::Bot => write!(f, "BOT"),
        }
    }
}

/// Decimal coordinate list, e.g. `[3, 0, 6]`.
pub fn format_vector(v: &[FieldElement]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Which simulator produces Field-BV outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Full state vector; exact but limited to small q^{n+1}.
    Dense,
    /// Samples output categories from the exact outcome distribution.
    #[default]
    Analytic,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Dense => "dense",
            Engine::Analytic => "analytic",
        })
    }
}

/// Parameters of the repeat-and-test learner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnerConfig {
    /// Field-BV repetitions L.
    pub repetitions: usize,
    /// Test Candidate samples M; zero skips the test.
    pub test_samples: usize,
    /// Noise magnitude bound k used by Test Candidate.
    pub k: u64,
    pub engine: Engine,
}

impl LearnerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.repetitions == 0 {
            return Err(crate::Error::InvalidParameters(
                "L must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
