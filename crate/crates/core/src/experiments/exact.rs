//! Closed-form success probabilities and theoretical lower bounds for each
//! experiment.

use super::config::{ExperimentConfig, Problem};
use crate::error::Result;
use crate::field::{FieldElement, FieldParams};
use crate::learners::{exact_learner_success, learner_bound, lwr_sample_spec, sis_bound, Engine};
use crate::samples::{
    expected_p_correct, outcome_distribution, theoretical_bound, GammaMode, NoiseModel,
    RealizedErrors,
};

/// Deviation below the mean that the per-trial LPN bound tolerates.
pub const LPN_DELTA: f64 = 0.05;

/// Largest enumeration (q^{2n} per secret) used for the LWR exact value.
const LWR_ENUMERATION_CAP: f64 = (1u64 << 26) as f64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Predictions {
    pub exact: Option<f64>,
    pub bound_paper: Option<f64>,
    pub bound_optimized: Option<f64>,
}

pub fn predictions(config: &ExperimentConfig) -> Result<Predictions> {
    let fp = config.field()?;
    match config.problem {
        Problem::Lwe => lwe(config, &fp),
        Problem::Lpn => lpn(config, &fp),
        Problem::Lwr => lwr(config, &fp),
        Problem::Sis => Ok(sis(config, &fp)),
        Problem::RingGlobal => {
            let q = config.q as f64;
            Ok(Predictions {
                exact: Some(((q - 1.0) / q).powi(config.n as i32)),
                ..Default::default()
            })
        }
    }
}

/// Probability that a fixed wrong candidate passes M test samples when
/// `b - a·u` is uniform on F_q.
fn uniform_false_accept(k: u64, q: u64, m: usize) -> f64 {
    if m == 0 {
        return 1.0;
    }
    ((2 * k + 1) as f64 / q as f64).min(1.0).powi(m as i32)
}

/// Learner-level bound from a per-iteration bound; with M = 0 every
/// non-⊥ candidate is returned, so the per-iteration bound itself holds.
fn lift(per_iteration: f64, k: u64, q: u64, config: &ExperimentConfig) -> f64 {
    if config.test_samples == 0 {
        per_iteration
    } else {
        learner_bound(per_iteration, k, q, config.repetitions, config.test_samples)
    }
}

fn lwe(config: &ExperimentConfig, fp: &FieldParams) -> Result<Predictions> {
    let q = fp.q();
    let v = config.subset_size().expect("validated");
    let noise = config.noise_model()?;
    // Every iteration draws a fresh sample, so iterations are i.i.d. with the
    // noise-averaged per-sample probabilities.
    let pc = expected_p_correct(fp, config.n, v, &noise)?;
    let pw = (1.0 - 1.0 / q as f64 - pc).max(0.0);
    let k = config.k;
    let alpha = uniform_false_accept(k, q, config.test_samples);
    let exact = exact_learner_success(pc, pw, alpha, config.repetitions);
    let bound = |mode| -> Result<Option<f64>> {
        if k == 0 {
            return Ok(None);
        }
        Ok(Some(lift(
            theoretical_bound(v, k, q, config.n, mode)?,
            k,
            q,
            config,
        )))
    };
    Ok(Predictions {
        exact: Some(exact),
        bound_paper: bound(GammaMode::PaperConstant)?,
        bound_optimized: bound(GammaMode::Optimized)?,
    })
}

fn lpn(config: &ExperimentConfig, fp: &FieldParams) -> Result<Predictions> {
    if config.repetitions != 1 {
        return Ok(Predictions::default());
    }
    let noise = config.noise_model()?;
    let v = fp.space_size(config.n).expect("validated");
    let exact = expected_p_correct(fp, config.n, v, &noise)?;
    let eta = match noise {
        NoiseModel::BernoulliFlip { eta } => eta,
        _ => 0.0,
    };
    let bound = 0.5 * (1.0 - LPN_DELTA).powi(2) * (1.0 - 2.0 * eta).powi(2);
    Ok(Predictions {
        exact: Some(exact),
        bound_paper: Some(bound),
        bound_optimized: None,
    })
}

fn lwr(config: &ExperimentConfig, fp: &FieldParams) -> Result<Predictions> {
    let q = fp.q();
    let p = config.p.expect("validated");
    let k = config.effective_k();
    let per_iteration = p as f64 / (12.0 * (q - 1) as f64);
    let mut out = Predictions {
        exact: None,
        bound_paper: Some(lift(per_iteration, k, q, config)),
        bound_optimized: None,
    };
    // Wrong outputs are only uniform under the analytic engine.
    if config.engine == Engine::Dense && config.test_samples > 0 {
        return Ok(out);
    }
    let space = fp.space_size_f64(config.n);
    out.exact = match &config.secret {
        Some(s) if space * space <= LWR_ENUMERATION_CAP => {
            Some(lwr_exact(fp, &fp.elems(s), p, config)?)
        }
        None if space * space * space <= LWR_ENUMERATION_CAP => {
            let total = fp.space_size(config.n).expect("small");
            let mut sum = 0.0;
            for index in 0..total {
                sum += lwr_exact(fp, &fp.vector_at(index, config.n), p, config)?;
            }
            Some(sum / total as f64)
        }
        _ => None,
    };
    Ok(out)
}

/// Analytic-engine success of the LWR learner for one secret. A wrong
/// output is uniform over `u ≠ s` and passes with the enumerated rate
/// `P_a[|a·(s-u) + e_a| ≤ k']^M`.
fn lwr_exact(
    fp: &FieldParams,
    s: &[FieldElement],
    p: u64,
    config: &ExperimentConfig,
) -> Result<f64> {
    let spec = lwr_sample_spec(fp, s, p)?;
    let dist = outcome_distribution(&spec);
    let k = spec.noise().bound();
    let alpha = if config.test_samples == 0 {
        1.0
    } else {
        let RealizedErrors::ExplicitMap(errors) = spec.errors() else {
            unreachable!("enumeration cap keeps q^n below the explicit threshold")
        };
        let total = fp.space_size(s.len()).expect("small");
        let points: Vec<Vec<FieldElement>> = (0..total).map(|i| fp.vector_at(i, s.len())).collect();
        let mut sum = 0.0;
        for u_index in 0..total {
            let u = &points[u_index as usize];
            if u == s {
                continue;
            }
            let diff = fp.sub_vec(s, u);
            let passing = points
                .iter()
                .zip(errors)
                .filter(|(a, &e)| fp.centered_abs(fp.add(fp.dot(a, &diff), fp.from_signed(e))) <= k)
                .count();
            sum += (passing as f64 / total as f64).powi(config.test_samples as i32);
        }
        sum / (total - 1) as f64
    };
    Ok(exact_learner_success(
        dist.p_correct,
        dist.p_wrong,
        alpha,
        config.repetitions,
    ))
}

fn sis(config: &ExperimentConfig, fp: &FieldParams) -> Predictions {
    let q = fp.q();
    let k = config.k;
    let n = config.n;
    let rounds = config.repetitions;
    // A wrong candidate survives all L rounds with probability q^{-L};
    // candidates before the true one must all be rejected.
    let reject = 1.0 - (q as f64).powi(-(rounds as i32));
    let exact = match &config.secret {
        // The true candidate -v_i sits at position k - v_i in -k..=k.
        Some(v) => v
            .iter()
            .map(|&x| reject.powi((k as i64 - fp.centered(fp.elem(x))) as i32))
            .product(),
        None => {
            let per: f64 =
                (0..=2 * k).map(|pos| reject.powi(pos as i32)).sum::<f64>() / (2 * k + 1) as f64;
            per.powi(n as i32)
        }
    };
    Predictions {
        exact: Some(exact),
        bound_paper: Some(sis_bound(k, n, q, rounds)),
        bound_optimized: Some(
            (1.0 - (2 * k) as f64 * n as f64 / (q as f64).powi(rounds as i32)).max(0.0),
        ),
    }
}
