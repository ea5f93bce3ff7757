//! Built-in invariant suite run by `quditlearn verify`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::FieldParams;
use crate::learners::{
    residual_bound, round_to, scale_up, test_candidate, CyclotomicRing, SisSource,
};
use crate::samples::{
    dense_outcome_distribution, draw_sample_spec, from_error_histogram, outcome_distribution,
    theoretical_bound, GammaMode, LweSource, NoiseModel, SubsetMode,
};
use crate::sim::DenseState;

/// Dense instances (q, n); each is skipped when q^{n+1} exceeds `max_qn`.
const DENSE_CASES: [(u64, usize); 8] = [
    (2, 3),
    (3, 2),
    (5, 2),
    (7, 2),
    (11, 1),
    (13, 2),
    (7, 3),
    (17, 2),
];

const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest q^{n+1} of any dense instance.
    pub max_qn: u64,
    /// Perturbs one amplitude in the norm check; the suite must then fail.
    pub inject_fault: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_qn: 4096,
            inject_fault: false,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    /// Instances exercised.
    pub cases: usize,
    /// First failure, if any.
    pub failure: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Check = fn(&VerifyOptions, &mut ChaCha8Rng) -> (usize, Result<(), String>);

const CHECKS: [(&str, Check); 10] = [
    ("norm-preservation", norm_preservation),
    ("qft-unitarity", qft_unitarity),
    ("qft-roundtrip", qft_roundtrip),
    ("engine-equivalence", engine_equivalence),
    ("bot-probability", bot_probability),
    ("per-sample-bound", per_sample_bound),
    ("test-candidate-soundness", test_candidate_soundness),
    ("sis-round-law", sis_round_law),
    ("lwr-residual-bound", lwr_residual_bound),
    ("ring-embedding-homomorphism", ring_embedding),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

pub fn run_checks(options: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ i as u64);
            let (cases, outcome) = check(options, &mut rng);
            CheckResult {
                name,
                cases,
                failure: outcome.err(),
            }
        })
        .collect()
}

fn dense_cases(options: &VerifyOptions) -> impl Iterator<Item = (FieldParams, usize)> + '_ {
    DENSE_CASES
        .iter()
        .filter(move |&&(q, n)| (q as f64).powi(n as i32 + 1) <= options.max_qn as f64)
        .map(|&(q, n)| (FieldParams::new(q).expect("prime"), n))
}

fn noisy(fp: &FieldParams) -> NoiseModel {
    match fp.q() {
        2 => NoiseModel::BernoulliFlip { eta: 0.2 },
        3 => NoiseModel::BoundedUniform { k: 1 },
        _ => NoiseModel::TruncatedGaussian { sigma: 1.0, k: 2 },
    }
}

fn norm_preservation(options: &VerifyOptions, rng: &mut ChaCha8Rng) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (fp, n) in dense_cases(options) {
        cases += 1;
        let s = fp.random_vector(n, rng);
        let mut run = || -> crate::Result<()> {
            let spec = draw_sample_spec(&fp, &s, SubsetMode::All, &noisy(&fp), rng)?;
            let mut state = spec.materialize_dense()?;
            for r in 0..=n {
                state.apply_qft(r)?;
            }
            state.apply_add_multiple(0, n, fp.elem(1))?;
            if options.inject_fault {
                state.perturb_amplitude(0, Complex64::new(1e-3, 0.0));
            }
            state.check_norm("verify")
        };
        if let Err(e) = run() {
            return (cases, Err(format!("q={} n={n}: {e}", fp.q())));
        }
    }
    (cases, Ok(()))
}

fn qft_unitarity(options: &VerifyOptions, _rng: &mut ChaCha8Rng) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for q in [2u64, 3, 5, 7, 11, 13, 31, 61, 101] {
        if q * q > options.max_qn {
            continue;
        }
        cases += 1;
        let fp = FieldParams::new(q).expect("prime");
        let columns: Vec<Vec<Complex64>> = (0..q)
            .map(|x| {
                let mut state =
                    DenseState::from_basis_terms([(vec![x], Complex64::new(1.0, 0.0))], &fp)
                        .expect("basis state");
                state.apply_qft(0).expect("qft");
                state.amplitudes().to_vec()
            })
            .collect();
        for (a, ca) in columns.iter().enumerate() {
            for (b, cb) in columns.iter().enumerate().skip(a) {
                let inner: Complex64 = ca.iter().zip(cb).map(|(x, y)| x.conj() * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                if (inner - Complex64::new(expected, 0.0)).norm() > TOLERANCE {
                    return (cases, Err(format!("q={q}: <F{a}|F{b}> = {inner}")));
                }
            }
        }
    }
    (cases, Ok(()))
}

fn qft_roundtrip(options: &VerifyOptions, rng: &mut ChaCha8Rng) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (fp, n) in dense_cases(options) {
        cases += 1;
        let s = fp.random_vector(n, rng);
        let spec = match draw_sample_spec(&fp, &s, SubsetMode::All, &noisy(&fp), rng) {
            Ok(spec) => spec,
            Err(e) => return (cases, Err(e.to_string())),
        };
        let original = spec.materialize_dense().expect("within cap");
        let mut state = original.clone();
        state.apply_qft_all().expect("qft");
        for r in 0..=n {
            state.apply_inverse_qft(r).expect("inverse qft");
        }
        let diff = original
            .amplitudes()
            .iter()
            .zip(state.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if diff > TOLERANCE {
            return (
                cases,
                Err(format!("q={} n={n}: max deviation {diff}", fp.q())),
            );
        }
    }
    (cases, Ok(()))
}

fn engine_equivalence(
    options: &VerifyOptions,
    rng: &mut ChaCha8Rng,
) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (fp, n) in dense_cases(options) {
        let total = fp.space_size(n).expect("small");
        for v in [1, total / 2 + 1, total] {
            cases += 1;
            let s = fp.random_vector(n, rng);
            let spec = draw_sample_spec(&fp, &s, SubsetMode::Random { v }, &noisy(&fp), rng)
                .expect("valid");
            let dense = dense_outcome_distribution(&spec).expect("within cap");
            let tv = outcome_distribution(&spec).total_variation(&dense);
            if tv > TOLERANCE {
                return (
                    cases,
                    Err(format!("q={} n={n} v={v}: total variation {tv}", fp.q())),
                );
            }
        }
    }
    (cases, Ok(()))
}

fn bot_probability(options: &VerifyOptions, rng: &mut ChaCha8Rng) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (fp, n) in dense_cases(options) {
        cases += 1;
        let s = fp.random_vector(n, rng);
        let spec = draw_sample_spec(&fp, &s, SubsetMode::Random { v: 2 }, &noisy(&fp), rng)
            .expect("valid");
        let dense = dense_outcome_distribution(&spec).expect("within cap");
        if (dense.p_bot - 1.0 / fp.q() as f64).abs() > TOLERANCE {
            return (
                cases,
                Err(format!("q={} n={n}: p_bot = {}", fp.q(), dense.p_bot)),
            );
        }
        let clean =
            draw_sample_spec(&fp, &s, SubsetMode::All, &NoiseModel::None, rng).expect("valid");
        let d = dense_outcome_distribution(&clean).expect("within cap");
        let expected = (fp.q() - 1) as f64 / fp.q() as f64;
        if (d.p_correct - expected).abs() > TOLERANCE {
            return (
                cases,
                Err(format!(
                    "q={} n={n}: noiseless p_correct = {}",
                    fp.q(),
                    d.p_correct
                )),
            );
        }
    }
    (cases, Ok(()))
}

/// Every error assignment in {-1,0,1}^7 over every prefix subset at q = 7.
fn per_sample_bound(
    _options: &VerifyOptions,
    _rng: &mut ChaCha8Rng,
) -> (usize, Result<(), String>) {
    let fp = FieldParams::new(7).expect("prime");
    let mut cases = 0;
    for code in 0..3u32.pow(7) {
        let errors: Vec<i64> = (0..7)
            .map(|i| (code / 3u32.pow(i) % 3) as i64 - 1)
            .collect();
        for v in 1..=7u64 {
            cases += 1;
            let mut hist = std::collections::BTreeMap::new();
            for &e in &errors[..v as usize] {
                *hist.entry(e).or_insert(0) += 1;
            }
            let p = from_error_histogram(&fp, 1, v, &hist).p_correct;
            let bound = theoretical_bound(v, 1, 7, 1, GammaMode::PaperConstant).expect("valid");
            if p < bound {
                return (
                    cases,
                    Err(format!("errors {errors:?}, v={v}: {p} < {bound}")),
                );
            }
        }
    }
    (cases, Ok(()))
}

fn test_candidate_soundness(
    _options: &VerifyOptions,
    rng: &mut ChaCha8Rng,
) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (q, k) in [(11u64, 1u64), (101, 5), (257, 3)] {
        cases += 1;
        let fp = FieldParams::new(q).expect("prime");
        let s = fp.random_vector(2, rng);
        let noise = NoiseModel::BoundedUniform { k };
        let mut source = LweSource::new(&fp, s.clone(), SubsetMode::All, noise).expect("valid");
        for _ in 0..500 {
            if !test_candidate(&s, 4, &mut source, k, rng).expect("classical draw") {
                return (
                    cases,
                    Err(format!("q={q} k={k}: correct candidate rejected")),
                );
            }
        }
    }
    (cases, Ok(()))
}

fn sis_round_law(options: &VerifyOptions, rng: &mut ChaCha8Rng) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (fp, n) in dense_cases(options) {
        let v = fp.random_vector(n, rng);
        let mut source = SisSource::new(&fp, v.clone()).expect("valid");
        for (coord, &vc) in v.iter().enumerate() {
            for j in 0..fp.q() {
                cases += 1;
                let mut state = source.next_state().expect("within cap");
                state
                    .apply_add_multiple(coord, n, fp.elem(j))
                    .expect("distinct registers");
                state.apply_qft(coord).expect("qft");
                let marginal = state.marginal(coord).expect("in range");
                let matching = fp.add(vc, fp.elem(j)).is_zero();
                let ok = if matching {
                    (marginal[0] - 1.0).abs() < TOLERANCE
                } else {
                    marginal
                        .iter()
                        .all(|p| (p - 1.0 / fp.q() as f64).abs() < TOLERANCE)
                };
                if !ok {
                    return (
                        cases,
                        Err(format!(
                            "q={} coordinate {coord}, j={j}: {marginal:?}",
                            fp.q()
                        )),
                    );
                }
            }
        }
    }
    (cases, Ok(()))
}

fn lwr_residual_bound(
    _options: &VerifyOptions,
    _rng: &mut ChaCha8Rng,
) -> (usize, Result<(), String>) {
    let mut cases = 0;
    for (q, p) in [(31u64, 4u64), (31, 2), (257, 16), (257, 100)] {
        let fp = FieldParams::new(q).expect("prime");
        let bound = residual_bound(q, p);
        for x in 0..q {
            cases += 1;
            let x = fp.elem(x);
            let back = fp.elem(scale_up(round_to(x, p, q), p, q));
            let r = fp.centered_abs(fp.sub(back, x));
            if r > bound {
                return (
                    cases,
                    Err(format!("q={q} p={p} x={x}: residual {r} > {bound}")),
                );
            }
        }
    }
    (cases, Ok(()))
}

fn ring_embedding(_options: &VerifyOptions, _rng: &mut ChaCha8Rng) -> (usize, Result<(), String>) {
    let fp = FieldParams::new(13).expect("prime");
    let ring = CyclotomicRing::new(&fp, 4).expect("4 | 12");
    let all: Vec<_> = (0..169).map(|i| fp.vector_at(i, 2)).collect();
    let mut cases = 0;
    for a in &all {
        let ea = ring.embed(a);
        if &ring.unembed(&ea) != a {
            return (cases, Err(format!("embedding of {a:?} does not invert")));
        }
        for b in &all {
            cases += 1;
            let eb = ring.embed(b);
            let pointwise: Vec<_> = ea.iter().zip(&eb).map(|(&x, &y)| fp.mul(x, y)).collect();
            if ring.embed(&ring.mul(a, b)) != pointwise {
                return (
                    cases,
                    Err(format!("φ(ab) ≠ φ(a)⊙φ(b) for a={a:?}, b={b:?}")),
                );
            }
        }
    }
    (cases, Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suite_passes() {
        let results = run_checks(&VerifyOptions::default());
        for r in &results {
            assert!(r.passed(), "{}: {:?}", r.name, r.failure);
            assert!(r.cases > 0, "{} ran no cases", r.name);
        }
    }

    #[test]
    fn injected_fault_fails_norm_check_only() {
        let results = run_checks(&VerifyOptions {
            inject_fault: true,
            ..Default::default()
        });
        let failed: Vec<_> = results
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.name)
            .collect();
        assert_eq!(failed, ["norm-preservation"]);
    }

    #[test]
    fn max_qn_filters_dense_cases() {
        let small = run_checks(&VerifyOptions {
            max_qn: 30,
            ..Default::default()
        });
        let norm = small
            .iter()
            .find(|r| r.name == "norm-preservation")
            .unwrap();
        assert_eq!(norm.cases, 2);
    }
}
