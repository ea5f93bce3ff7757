use num_complex::Complex64;
use rand::Rng;

use super::Engine;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::sim::{dense_size, DenseState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SisOutcome {
    Recovered(Vec<FieldElement>),
    /// No candidate in `{-k, …, k}` survived all L rounds for this coordinate.
    Failed {
        coordinate: usize,
    },
}

impl SisOutcome {
    pub fn recovered(&self) -> Option<&[FieldElement]> {
        match self {
            SisOutcome::Recovered(v) => Some(v),
            SisOutcome::Failed { .. } => None,
        }
    }
}

/// Traced SIS samples `q^{-n/2} Σ_a |a⟩|a·v⟩` for a hidden short `v`.
///
/// Every fresh sample is the same state, so the dense form is built once and
/// cloned per round.
#[derive(Clone, Debug)]
pub struct SisSource {
    fp: FieldParams,
    v: Vec<FieldElement>,
    base: Option<DenseState>,
    drawn: u64,
}

impl SisSource {
    pub fn new(fp: &FieldParams, v: Vec<FieldElement>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidParameters(
                "dimension n must be positive".into(),
            ));
        }
        Ok(SisSource {
            fp: fp.clone(),
            v,
            base: None,
            drawn: 0,
        })
    }

    pub fn field(&self) -> &FieldParams {
        &self.fp
    }

    pub fn dimension(&self) -> usize {
        self.v.len()
    }

    pub fn secret(&self) -> &[FieldElement] {
        &self.v
    }

    pub fn samples_drawn(&self) -> u64 {
        self.drawn
    }

    /// A fresh dense sample on n+1 registers.
    pub fn next_state(&mut self) -> Result<DenseState> {
        self.drawn += 1;
        if let Some(state) = &self.base {
            return Ok(state.clone());
        }
        let n = self.v.len();
        let registers = n + 1;
        let size = dense_size(&self.fp, registers)?;
        let q = self.fp.q();
        let amp = Complex64::new(1.0 / (size as f64 / q as f64).sqrt(), 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        for index in 0..self.fp.space_size(n).expect("bounded by the dense cap") {
            let a = self.fp.vector_at(index, n);
            let y = self.fp.dot(&a, &self.v);
            amplitudes[(index * q + y.value()) as usize] = amp;
        }
        let state = DenseState::from_amplitudes(&self.fp, registers, amplitudes)?;
        self.base = Some(state.clone());
        Ok(state)
    }

    /// Analytic stand-in for one round: outcome 0 with certainty when
    /// `j = -v_i`, uniform otherwise.
    fn analytic_round<R: Rng + ?Sized>(
        &mut self,
        coord: usize,
        j: FieldElement,
        rng: &mut R,
    ) -> FieldElement {
        self.drawn += 1;
        if self.fp.add(self.v[coord], j).is_zero() {
            FieldElement::ZERO
        } else {
            self.fp.random_element(rng)
        }
    }
}

/// One round on a fresh sample: add `j·a_coord` to the last register, apply
/// the QFT to register `coord` and measure it.
pub fn sis_round<R: Rng + ?Sized>(
    source: &mut SisSource,
    coord: usize,
    j: FieldElement,
    engine: Engine,
    rng: &mut R,
) -> Result<FieldElement> {
    let n = source.dimension();
    if coord >= n {
        return Err(Error::IndexOutOfRange {
            index: coord,
            registers: n,
        });
    }
    match engine {
        Engine::Dense => {
            let mut state = source.next_state()?;
            state.apply_add_multiple(coord, n, j)?;
            state.apply_qft(coord)?;
            state.measure_register(coord, rng)
        }
        Engine::Analytic => Ok(source.analytic_round(coord, j, rng)),
    }
}

/// Recovers each coordinate by trying `j = -k, …, k` in order and accepting
/// the first `j` whose L rounds all measure 0; returns `ṽ_i = -j`.
pub fn sis_learn<R: Rng + ?Sized>(
    k: u64,
    rounds: usize,
    source: &mut SisSource,
    engine: Engine,
    rng: &mut R,
) -> Result<SisOutcome> {
    let fp = source.field().clone();
    if rounds == 0 {
        return Err(Error::InvalidParameters("L must be at least 1".into()));
    }
    if 2 * k + 1 > fp.q() {
        return Err(Error::InvalidParameters(format!(
            "2k+1 = {} exceeds q = {}",
            2 * k + 1,
            fp.q()
        )));
    }
    let k = k as i64;
    let mut recovered = Vec::with_capacity(source.dimension());
    for coord in 0..source.dimension() {
        let mut accepted = None;
        'candidates: for j in -k..=k {
            let jf = fp.from_signed(j);
            for _ in 0..rounds {
                if !sis_round(source, coord, jf, engine, rng)?.is_zero() {
                    continue 'candidates;
                }
            }
            accepted = Some(jf);
            break;
        }
        match accepted {
            Some(j) => recovered.push(fp.neg(j)),
            None => return Ok(SisOutcome::Failed { coordinate: coord }),
        }
    }
    Ok(SisOutcome::Recovered(recovered))
}

/// `1 - (2k+1)·n / q^L`, clipped at zero.
pub fn sis_bound(k: u64, n: usize, q: u64, rounds: usize) -> f64 {
    (1.0 - (2 * k + 1) as f64 * n as f64 / (q as f64).powi(rounds as i32)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matching_candidate_always_measures_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let fp = FieldParams::new(5).unwrap();
        let mut source = SisSource::new(&fp, fp.elems(&[2])).unwrap();
        for _ in 0..500 {
            let out = sis_round(&mut source, 0, fp.elem(3), Engine::Dense, &mut rng).unwrap();
            assert!(out.is_zero());
        }
        assert_eq!(source.samples_drawn(), 500);
    }

    #[test]
    fn wrong_candidate_marginal_is_uniform() {
        let fp = FieldParams::new(7).unwrap();
        let mut source = SisSource::new(&fp, fp.elems(&[1, 6])).unwrap();
        for (coord, j) in [(0, 0u64), (0, 1), (1, 0), (1, 6)] {
            let mut state = source.next_state().unwrap();
            state.apply_add_multiple(coord, 2, fp.elem(j)).unwrap();
            state.apply_qft(coord).unwrap();
            for p in state.marginal(coord).unwrap() {
                assert!((p - 1.0 / 7.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recovery_rate_small_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let fp = FieldParams::new(7).unwrap();
        let v = fp.elems(&[6, 1]);
        let mut source = SisSource::new(&fp, v.clone()).unwrap();
        let runs = 500;
        let hits = (0..runs)
            .filter(|_| {
                sis_learn(1, 3, &mut source, Engine::Dense, &mut rng)
                    .unwrap()
                    .recovered()
                    == Some(&v[..])
            })
            .count();
        let p = sis_bound(1, 2, 7, 3);
        let sigma = (p * (1.0 - p) / runs as f64).sqrt();
        assert!(
            hits as f64 / runs as f64 >= p - 3.0 * sigma,
            "{hits}/{runs}"
        );
    }

    #[test]
    fn analytic_rounds_match_dense_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let fp = FieldParams::new(11).unwrap();
        let mut source = SisSource::new(&fp, fp.elems(&[10, 0])).unwrap();
        assert!(
            sis_round(&mut source, 0, fp.elem(1), Engine::Analytic, &mut rng)
                .unwrap()
                .is_zero()
        );
        let trials = 20_000;
        let zeros = (0..trials)
            .filter(|_| {
                sis_round(&mut source, 1, fp.elem(3), Engine::Analytic, &mut rng)
                    .unwrap()
                    .is_zero()
            })
            .count();
        let p = 1.0 / 11.0;
        assert!(
            (zeros as f64 / trials as f64 - p).abs() < 3.0 * (p * (1.0 - p) / trials as f64).sqrt()
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let fp = FieldParams::new(5).unwrap();
        let mut source = SisSource::new(&fp, fp.elems(&[1])).unwrap();
        assert!(sis_learn(3, 2, &mut source, Engine::Dense, &mut rng).is_err());
        assert!(sis_learn(1, 0, &mut source, Engine::Dense, &mut rng).is_err());
        assert!(sis_round(&mut source, 1, fp.elem(0), Engine::Dense, &mut rng).is_err());
    }
}
