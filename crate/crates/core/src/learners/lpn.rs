use std::collections::HashMap;

use rand::Rng;

use super::{field_bv, BvOutcome, Engine};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::samples::{NoiseModel, SampleSource, SpecForm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpnOutcome {
    pub output: BvOutcome,
    /// Trials that measured `j* = 1`.
    pub informative_trials: usize,
    /// Votes received by the returned candidate.
    pub votes: usize,
}

/// One Hadamard trial on a fresh sample: `Some(j)` when the parity qubit
/// reads `j* = 1`, `None` otherwise.
pub fn lpn_trial<S, R>(
    source: &mut S,
    engine: Engine,
    rng: &mut R,
) -> Result<Option<Vec<FieldElement>>>
where
    S: SampleSource,
    R: Rng + ?Sized,
{
    let form = match engine {
        Engine::Dense => SpecForm::Explicit,
        Engine::Analytic => SpecForm::Compact,
    };
    let spec = source.next_spec(form, rng)?;
    // Over F_2, -(1)^{-1} j = j, so a Secret output is the measured j itself.
    Ok(match field_bv(&spec, engine, rng)? {
        BvOutcome::Secret(j) => Some(j),
        BvOutcome::Bot => None,
    })
}

/// Runs `trials` Hadamard trials and returns the strict plurality among the
/// `j* = 1` outcomes. Ties and an empty vote give ⊥.
pub fn lpn_learn<S, R>(
    source: &mut S,
    eta: f64,
    trials: usize,
    engine: Engine,
    rng: &mut R,
) -> Result<LpnOutcome>
where
    S: SampleSource,
    R: Rng + ?Sized,
{
    if source.field().q() != 2 {
        return Err(Error::InvalidParameters(format!(
            "parity learning needs q = 2, got q = {}",
            source.field().q()
        )));
    }
    NoiseModel::BernoulliFlip { eta }.validate(2)?;
    let mut votes: HashMap<Vec<FieldElement>, usize> = HashMap::new();
    let mut informative = 0;
    for _ in 0..trials {
        if let Some(j) = lpn_trial(source, engine, rng)? {
            informative += 1;
            *votes.entry(j).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(Vec<FieldElement>, usize)> = votes.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let output = match ranked.as_slice() {
        [] => BvOutcome::Bot,
        [(best, _)] => BvOutcome::Secret(best.clone()),
        [(best, top), (_, second), ..] if top > second => BvOutcome::Secret(best.clone()),
        _ => BvOutcome::Bot,
    };
    let votes = ranked.first().map(|(_, c)| *c).unwrap_or(0);
    Ok(LpnOutcome {
        votes: if output == BvOutcome::Bot { 0 } else { votes },
        output,
        informative_trials: informative,
    })
}
