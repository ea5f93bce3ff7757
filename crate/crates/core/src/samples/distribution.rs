//! Exact Field Bernstein–Vazirani outcome probabilities.
//!
//! After the QFT on all n+1 registers, the amplitude on `|-j*s⟩|j*⟩` is
//! `(q^{n+1} v)^{-1/2} Σ_{a∈V} ω^{e_a j*}`, which only depends on how many
//! elements carry each error value. The analytic engine therefore works on
//! the error histogram and never touches the q^{n+1} amplitudes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use super::spec::SampleSpec;
use crate::error::{Error, Result};
use crate::field::FieldParams;

/// Probabilities of the three Field-BV output categories for one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub p_correct: f64,
    pub p_bot: f64,
    pub p_wrong: f64,
    /// Entry `j - 1` is the probability of measuring `(-j·s, j)`, for `j = 1..q`.
    pub per_jstar_good: Vec<f64>,
}

impl OutcomeDistribution {
    /// Probability of the good outcome for a nonzero `j*`.
    pub fn good(&self, jstar: u64) -> f64 {
        assert!(jstar >= 1, "j* = 0 is the abstention slice");
        self.per_jstar_good[(jstar - 1) as usize]
    }

    /// Total variation distance over the coarse outcome space
    /// `{good(j*) : j* ≠ 0} ∪ {⊥} ∪ {other}`.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let goods: f64 = self
            .per_jstar_good
            .iter()
            .zip(&other.per_jstar_good)
            .map(|(a, b)| (a - b).abs())
            .sum();
        0.5 * (goods + (self.p_bot - other.p_bot).abs() + (self.p_wrong - other.p_wrong).abs())
    }
}

/// Analytic engine: `O(q · |support|)` regardless of |V|.
pub fn outcome_distribution(spec: &SampleSpec) -> OutcomeDistribution {
    from_error_histogram(
        spec.field(),
        spec.dimension(),
        spec.v(),
        &spec.error_histogram(),
    )
}

/// Outcome distribution for any sample with `v` elements whose error values
/// have the given counts.
pub fn from_error_histogram(
    fp: &FieldParams,
    n: usize,
    v: u64,
    hist: &BTreeMap<i64, u64>,
) -> OutcomeDistribution {
    let q = fp.q();
    let vf = v as f64;
    // (|S|/v)^2 · (v/q^n) / q = |S|^2 / (q^{n+1} v)
    let density = vf / fp.space_size_f64(n) / q as f64;
    let weights: Vec<(u64, f64)> = hist
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&e, &c)| (fp.from_signed(e).value(), c as f64 / vf))
        .collect();
    let per_jstar_good: Vec<f64> = (1..q)
        .map(|jstar| {
            let sum: num_complex::Complex64 = weights
                .iter()
                .map(|&(e, w)| fp.omega_prod(fp.elem(e), fp.elem(jstar)) * w)
                .sum();
            sum.norm_sqr() * density
        })
        .collect();
    let p_correct: f64 = per_jstar_good.iter().sum();
    let p_bot = 1.0 / q as f64;
    let p_wrong = (1.0 - p_correct - p_bot).max(0.0);
    OutcomeDistribution {
        p_correct,
        p_bot,
        p_wrong,
        per_jstar_good,
    }
}

/// Dense engine: materializes the sample, applies the QFT to every register
/// and reads the probabilities off the amplitude vector.
pub fn dense_outcome_distribution(spec: &SampleSpec) -> Result<OutcomeDistribution> {
    let fp = spec.field();
    let q = fp.q();
    let n = spec.dimension();
    let mut state = spec.materialize_dense()?;
    state.apply_qft_all()?;
    let probs = state.probabilities();

    let mut per_jstar_good = Vec::with_capacity(q as usize - 1);
    let mut p_bot = 0.0;
    let mut p_wrong = 0.0;
    for jstar in 1..q {
        let js = fp.elem(jstar);
        let mut values: Vec<u64> = spec
            .secret()
            .iter()
            .map(|&s| fp.neg(fp.mul(js, s)).value())
            .collect();
        values.push(jstar);
        per_jstar_good.push(probs[state.index_of_values(&values)]);
    }
    for (idx, p) in probs.iter().enumerate() {
        let jstar = idx as u64 % q;
        if jstar == 0 {
            p_bot += p;
        } else {
            let values = state.values_at(idx);
            let js = values[n];
            let good = values[..n]
                .iter()
                .zip(spec.secret())
                .all(|(&j, &s)| j == fp.neg(fp.mul(js, s)));
            if !good {
                p_wrong += p;
            }
        }
    }
    Ok(OutcomeDistribution {
        p_correct: per_jstar_good.iter().sum(),
        p_bot,
        p_wrong,
        per_jstar_good,
    })
}

/// `E[p_correct]` over fresh i.i.d. error draws for a subset of size `v`.
///
/// For independent errors `E|Σ_a ω^{e_a j}|² = v + v(v-1)|E ω^{e j}|²`; a
/// global shift gives `v²` for every j.
pub fn expected_p_correct(fp: &FieldParams, n: usize, v: u64, noise: &NoiseModel) -> Result<f64> {
    let q = fp.q();
    let vf = v as f64;
    let per_unit = 1.0 / fp.space_size_f64(n) / q as f64; // 1/q^{n+1}
    if noise.is_global() || matches!(noise, NoiseModel::None) {
        return Ok((q - 1) as f64 * vf * per_unit);
    }
    if matches!(noise, NoiseModel::Fixed { .. }) {
        return Err(Error::UnsupportedModel(
            "fixed errors have no distribution to average over".into(),
        ));
    }
    let mut char_energy = 0.0;
    for j in 1..q {
        char_energy += noise.characteristic(fp, j)?.norm_sqr();
    }
    Ok(((q - 1) as f64 + (vf - 1.0) * char_energy) * per_unit)
}

/// Which lower bound on the per-sample success probability to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMode {
    /// `v / (20 k q^n)`.
    PaperConstant,
    /// `max_γ γ cos²(2πγ) · v / (k q^n)` over a grid on (0, 1/4).
    Optimized,
}

/// Grid step for the γ maximization.
pub const GAMMA_STEP: f64 = 1e-4;

/// Maximizer and maximum of `γ cos²(2πγ)` on the grid `GAMMA_STEP·{1, 2, …}` inside (0, 1/4).
pub fn optimal_gamma() -> (f64, f64) {
    let steps = (0.25 / GAMMA_STEP).round() as usize;
    (1..steps)
        .map(|i| {
            let g = i as f64 * GAMMA_STEP;
            let c = (std::f64::consts::TAU * g).cos();
            (g, g * c * c)
        })
        .fold(
            (0.0, f64::MIN),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
}

/// Lower bound on the probability that Field-BV returns s from a sample with
/// `v` elements and errors of magnitude at most `k`.
pub fn theoretical_bound(v: u64, k: u64, q: u64, n: usize, mode: GammaMode) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameters(
            "k = 0 is noiseless; the exact success probability is (q-1)/q".into(),
        ));
    }
    let space = (q as f64).powi(n as i32);
    if v == 0 || v as f64 > space {
        return Err(Error::InvalidParameters(format!(
            "subset size {v} not in [1, q^n]"
        )));
    }
    let density = v as f64 / space / k as f64;
    Ok(match mode {
        GammaMode::PaperConstant => density / 20.0,
        GammaMode::Optimized => optimal_gamma().1 * density,
    })
}
