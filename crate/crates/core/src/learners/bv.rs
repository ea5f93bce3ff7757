use rand::Rng;

use super::{BvOutcome, Engine};
use crate::error::Result;
use crate::field::{FieldElement, FieldParams};
use crate::samples::{outcome_distribution, OutcomeDistribution, SampleSpec};
use crate::sim::DenseState;

/// Field Bernstein–Vazirani on one sample.
///
/// The analytic engine draws the output category from the exact outcome
/// distribution; wrong outputs are drawn uniformly from F_q^n \ {s}.
pub fn field_bv<R: Rng + ?Sized>(
    spec: &SampleSpec,
    engine: Engine,
    rng: &mut R,
) -> Result<BvOutcome> {
    match engine {
        Engine::Dense => field_bv_state(spec.materialize_dense()?, rng),
        Engine::Analytic => {
            let dist = outcome_distribution(spec);
            Ok(sample_category(&dist, spec.field(), spec.secret(), rng))
        }
    }
}

/// QFT on every register of `state`, a full measurement, then decoding.
/// The last register is j*.
pub fn field_bv_state<R: Rng + ?Sized>(mut state: DenseState, rng: &mut R) -> Result<BvOutcome> {
    state.apply_qft_all()?;
    let outcome = state.measure_all(rng);
    Ok(decode_outcome(state.field(), &outcome))
}

/// `(j, j*) ↦ -(j*)^{-1} j`, or ⊥ when `j* = 0`.
pub fn decode_outcome(fp: &FieldParams, outcome: &[FieldElement]) -> BvOutcome {
    let (jstar, j) = outcome
        .split_last()
        .expect("outcome has at least one register");
    if jstar.is_zero() {
        return BvOutcome::Bot;
    }
    let factor = fp.neg(fp.inv(*jstar).expect("nonzero element of a prime field"));
    BvOutcome::Secret(fp.scale(factor, j))
}

/// Draws Secret(s) / ⊥ / a uniformly random wrong vector with the
/// probabilities of `dist`.
pub fn sample_category<R: Rng + ?Sized>(
    dist: &OutcomeDistribution,
    fp: &FieldParams,
    s: &[FieldElement],
    rng: &mut R,
) -> BvOutcome {
    let total = dist.p_correct + dist.p_bot + dist.p_wrong;
    let r = rng.random::<f64>() * total;
    if r < dist.p_correct {
        BvOutcome::Secret(s.to_vec())
    } else if r < dist.p_correct + dist.p_bot {
        BvOutcome::Bot
    } else {
        loop {
            let u = fp.random_vector(s.len(), rng);
            if u != s {
                return BvOutcome::Secret(u);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{draw_sample_spec, NoiseModel, SubsetMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decoding() {
        let fp = FieldParams::new(7).unwrap();
        assert_eq!(decode_outcome(&fp, &fp.elems(&[3, 0])), BvOutcome::Bot);
        // j = -j*·s with s = (2, 5), j* = 3  =>  j = (-6, -15) = (1, 6)
        let out = decode_outcome(&fp, &fp.elems(&[1, 6, 3]));
        assert_eq!(out, BvOutcome::Secret(fp.elems(&[2, 5])));
    }

    #[test]
    fn noiseless_success_rate_both_engines() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fp = FieldParams::new(5).unwrap();
        let s = fp.elems(&[3, 1]);
        let trials = 10_000;
        for engine in [Engine::Dense, Engine::Analytic] {
            let mut hits = 0;
            let mut bots = 0;
            for _ in 0..trials {
                let spec = draw_sample_spec(&fp, &s, SubsetMode::All, &NoiseModel::None, &mut rng)
                    .unwrap();
                match field_bv(&spec, engine, &mut rng).unwrap() {
                    BvOutcome::Secret(x) if x == s => hits += 1,
                    BvOutcome::Bot => bots += 1,
                    other => panic!("noiseless full sample produced {other:?}"),
                }
            }
            let rate = hits as f64 / trials as f64;
            let sigma = (0.8f64 * 0.2 / trials as f64).sqrt();
            assert!((rate - 0.8).abs() < 3.0 * sigma, "{engine}: {rate}");
            let bot_rate = bots as f64 / trials as f64;
            assert!((bot_rate - 0.2).abs() < 3.0 * sigma, "{engine}: {bot_rate}");
        }
    }
}
