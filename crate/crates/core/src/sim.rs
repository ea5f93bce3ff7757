//! Dense state-vector engine over q-dimensional registers.
//!
//! Basis states are laid out row-major: register 0 is the most significant
//! digit of the amplitude index. Every mutating operation re-checks the norm.

use num_complex::Complex64;
use rand::Rng;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};

/// Maximum number of amplitudes a dense state may hold.
pub const DENSE_CAP: u64 = 1 << 22;

/// Tolerance on `|Σ|amp|² - 1|`.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DenseState {
    fp: FieldParams,
    registers: usize,
    amplitudes: Vec<Complex64>,
}

/// Number of amplitudes for `registers` registers of dimension q, if under the cap.
pub fn dense_size(fp: &FieldParams, registers: usize) -> Result<usize> {
    let requested = (fp.q() as u128)
        .checked_pow(registers as u32)
        .unwrap_or(u128::MAX);
    if requested > DENSE_CAP as u128 {
        return Err(Error::SizeCap {
            requested,
            cap: DENSE_CAP,
        });
    }
    Ok(requested as usize)
}

impl DenseState {
    /// `|0…0⟩` on the given number of registers.
    pub fn zero(fp: &FieldParams, registers: usize) -> Result<Self> {
        if registers == 0 {
            return Err(Error::Construction(
                "a state needs at least one register".into(),
            ));
        }
        let len = dense_size(fp, registers)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(DenseState {
            fp: fp.clone(),
            registers,
            amplitudes,
        })
    }

    /// Builds the normalized superposition `Σ c_t |x_t⟩`.
    pub fn from_basis_terms<I>(terms: I, fp: &FieldParams) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u64>, Complex64)>,
    {
        let mut terms = terms.into_iter().peekable();
        let registers = match terms.peek() {
            Some((values, _)) => values.len(),
            None => return Err(Error::Construction("no basis terms given".into())),
        };
        let mut state = DenseState::zero(fp, registers)?;
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        let mut seen = HashSet::new();
        for (values, amp) in terms {
            if values.len() != registers {
                return Err(Error::Construction(format!(
                    "basis tuple {values:?} has {} registers, expected {registers}",
                    values.len()
                )));
            }
            if let Some(bad) = values.iter().find(|&&x| x >= fp.q()) {
                return Err(Error::Construction(format!(
                    "register value {bad} is not reduced modulo {}",
                    fp.q()
                )));
            }
            let index = state.index_of_values(&values);
            if !seen.insert(index) {
                return Err(Error::Construction(format!(
                    "duplicate basis tuple {values:?}"
                )));
            }
            state.amplitudes[index] = amp;
        }
        state.normalize()?;
        Ok(state)
    }

    /// Wraps a raw amplitude vector, normalizing it.
    pub fn from_amplitudes(
        fp: &FieldParams,
        registers: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let len = dense_size(fp, registers)?;
        if amplitudes.len() != len {
            return Err(Error::Construction(format!(
                "expected {len} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let mut state = DenseState {
            fp: fp.clone(),
            registers,
            amplitudes,
        };
        state.normalize()?;
        Ok(state)
    }

    fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Construction("amplitudes are all zero".into()));
        }
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn field(&self) -> &FieldParams {
        &self.fp
    }

    pub fn registers(&self) -> usize {
        self.registers
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn index_of_values(&self, values: &[u64]) -> usize {
        let q = self.fp.q() as usize;
        values.iter().fold(0usize, |acc, &x| acc * q + x as usize)
    }

    pub fn values_at(&self, mut index: usize) -> Vec<FieldElement> {
        let q = self.fp.q() as usize;
        let mut out = vec![FieldElement::ZERO; self.registers];
        for slot in out.iter_mut().rev() {
            *slot = self.fp.elem((index % q) as u64);
            index /= q;
        }
        out
    }

    pub fn amplitude(&self, values: &[u64]) -> Complex64 {
        self.amplitudes[self.index_of_values(values)]
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.registers {
            return Err(Error::IndexOutOfRange {
                index,
                registers: self.registers,
            });
        }
        Ok(())
    }

    /// Stride of one step in register `index`.
    fn stride(&self, index: usize) -> usize {
        (self.fp.q() as usize).pow((self.registers - 1 - index) as u32)
    }

    /// Errors if the norm has drifted from 1.
    pub fn check_norm(&self, operation: &'static str) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NormViolation { operation, norm });
        }
        Ok(())
    }

    /// `|j⟩ ↦ q^{-1/2} Σ_k ω^{jk} |k⟩` on one register.
    pub fn apply_qft(&mut self, index: usize) -> Result<()> {
        self.transform(index, false)?;
        self.check_norm("qft")
    }

    /// The adjoint of [`DenseState::apply_qft`].
    pub fn apply_inverse_qft(&mut self, index: usize) -> Result<()> {
        self.transform(index, true)?;
        self.check_norm("inverse qft")
    }

    pub fn apply_qft_all(&mut self) -> Result<()> {
        for index in 0..self.registers {
            self.apply_qft(index)?;
        }
        Ok(())
    }

    fn transform(&mut self, index: usize, inverse: bool) -> Result<()> {
        self.check_index(index)?;
        let q = self.fp.q() as usize;
        let plans = self.fp.qft_plans();
        let fft = if inverse {
            &plans.inverse
        } else {
            &plans.forward
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let scale = 1.0 / (q as f64).sqrt();
        let stride = self.stride(index);

        if stride == 1 {
            fft.process_with_scratch(&mut self.amplitudes, &mut scratch);
        } else {
            let mut fiber = vec![Complex64::new(0.0, 0.0); q];
            let block = stride * q;
            for base in (0..self.amplitudes.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (t, slot) in fiber.iter_mut().enumerate() {
                        *slot = self.amplitudes[start + t * stride];
                    }
                    fft.process_with_scratch(&mut fiber, &mut scratch);
                    for (t, value) in fiber.iter().enumerate() {
                        self.amplitudes[start + t * stride] = *value;
                    }
                }
            }
        }
        self.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(())
    }

    /// Basis permutation `|…x_src…, y_tgt…⟩ ↦ |…x_src…, y_tgt + factor·x_src⟩`.
    pub fn apply_add_multiple(
        &mut self,
        source: usize,
        target: usize,
        factor: FieldElement,
    ) -> Result<()> {
        self.check_index(source)?;
        self.check_index(target)?;
        if source == target {
            return Err(Error::InvalidParameters(
                "add-multiple needs distinct source and target registers".into(),
            ));
        }
        if factor.is_zero() {
            return Ok(());
        }
        let q = self.fp.q() as usize;
        let (src_stride, tgt_stride) = (self.stride(source), self.stride(target));
        let mut permuted = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let x = (idx / src_stride) % q;
            let y = (idx / tgt_stride) % q;
            let shifted = self.fp.add(
                self.fp.elem(y as u64),
                self.fp.mul(factor, self.fp.elem(x as u64)),
            );
            let new_idx = idx - y * tgt_stride + shifted.value() as usize * tgt_stride;
            permuted[new_idx] = *amp;
        }
        self.amplitudes = permuted;
        self.check_norm("add-multiple")
    }

    /// Marginal outcome distribution of one register.
    pub fn marginal(&self, index: usize) -> Result<Vec<f64>> {
        self.check_index(index)?;
        let q = self.fp.q() as usize;
        let stride = self.stride(index);
        let mut probs = vec![0.0; q];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            probs[(idx / stride) % q] += amp.norm_sqr();
        }
        Ok(probs)
    }

    /// Samples one register's outcome. The state is not collapsed.
    pub fn measure_register<R: Rng + ?Sized>(
        &self,
        index: usize,
        rng: &mut R,
    ) -> Result<FieldElement> {
        let marginal = self.marginal(index)?;
        let outcome = sample_index(&marginal, rng);
        Ok(self.fp.elem(outcome as u64))
    }

    /// Samples a full computational-basis outcome.
    pub fn measure_all<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<FieldElement> {
        let idx = sample_index_iter(
            self.amplitudes.iter().map(|a| a.norm_sqr()),
            self.norm_sqr(),
            rng,
        );
        self.values_at(idx)
    }

    #[doc(hidden)]
    /// Fault-injection hook for negative controls: bypasses every check.
    pub fn perturb_amplitude(&mut self, index: usize, delta: Complex64) {
        self.amplitudes[index] += delta;
    }
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total = weights.iter().sum();
    sample_index_iter(weights.iter().copied(), total, rng)
}

fn sample_index_iter<R, I>(weights: I, total: f64, rng: &mut R) -> usize
where
    R: Rng + ?Sized,
    I: Iterator<Item = f64>,
{
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_nonzero = i;
        }
        acc += w;
        if acc > target {
            return i;
        }
    }
    // Rounding left the target past the accumulated sum.
    last_nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_state(fp: &FieldParams, registers: usize, rng: &mut ChaCha8Rng) -> DenseState {
        let len = dense_size(fp, registers).unwrap();
        let amps = (0..len)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        DenseState::from_amplitudes(fp, registers, amps).unwrap()
    }

    /// Direct O(q²) QFT matrix, independent of the FFT path.
    fn qft_matrix(fp: &FieldParams) -> Vec<Vec<Complex64>> {
        let q = fp.q();
        let s = 1.0 / (q as f64).sqrt();
        (0..q)
            .map(|k| (0..q).map(|j| fp.omega_pow(j * k) * s).collect())
            .collect()
    }

    #[test]
    fn basis_term_construction() {
        let fp = FieldParams::new(3).unwrap();
        let zero = DenseState::from_basis_terms([(vec![0], c(1.0))], &fp).unwrap();
        assert_eq!(zero.probabilities(), vec![1.0, 0.0, 0.0]);

        let uniform = DenseState::from_basis_terms((0..3).map(|x| (vec![x], c(1.0))), &fp).unwrap();
        for p in uniform.probabilities() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }

        // Noiseless sample, n = 1, s = 2.
        let sample =
            DenseState::from_basis_terms((0..3).map(|a| (vec![a, (2 * a) % 3], c(1.0))), &fp)
                .unwrap();
        let support: Vec<usize> = (0..9)
            .filter(|&i| sample.amplitudes()[i].norm() > 0.0)
            .collect();
        assert_eq!(support, vec![0, 5, 7]); // (0,0), (1,2), (2,1)

        let dup = DenseState::from_basis_terms([(vec![1], c(1.0)), (vec![1], c(1.0))], &fp);
        assert!(matches!(dup, Err(Error::Construction(_))));
        let zero_amp = DenseState::from_basis_terms([(vec![1], c(0.0))], &fp);
        assert!(zero_amp.is_err());
    }

    #[test]
    fn size_cap_enforced() {
        let fp = FieldParams::new(101).unwrap();
        assert!(matches!(
            DenseState::zero(&fp, 4),
            Err(Error::SizeCap { .. })
        ));
        assert!(DenseState::zero(&fp, 3).is_ok());
    }

    #[test]
    fn qft_of_zero_is_uniform() {
        let fp = FieldParams::new(5).unwrap();
        let mut s = DenseState::zero(&fp, 1).unwrap();
        s.apply_qft(0).unwrap();
        for p in s.probabilities() {
            assert!((p - 0.2).abs() < 1e-12);
        }
        assert!(matches!(s.apply_qft(1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn qft_matches_direct_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [2u64, 3, 5, 7, 13] {
            let fp = FieldParams::new(q).unwrap();
            let state = random_state(&fp, 3, &mut rng);
            let m = qft_matrix(&fp);
            for reg in 0..3 {
                let mut fast = state.clone();
                fast.apply_qft(reg).unwrap();
                for idx in 0..state.len() {
                    let vals = state.values_at(idx);
                    let k = vals[reg].value() as usize;
                    let mut expect = Complex64::new(0.0, 0.0);
                    for (j, entry) in m[k].iter().enumerate() {
                        let mut src: Vec<u64> = vals.iter().map(|v| v.value()).collect();
                        src[reg] = j as u64;
                        expect += entry * state.amplitude(&src);
                    }
                    assert!((fast.amplitudes()[idx] - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn qft_matrix_is_unitary() {
        for q in [2u64, 3, 5, 31, 101] {
            let fp = FieldParams::new(q).unwrap();
            let m = qft_matrix(&fp);
            for a in 0..q as usize {
                for b in 0..q as usize {
                    let ip: Complex64 = (0..q as usize).map(|r| m[r][a].conj() * m[r][b]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - c(expect)).norm() < 1e-9, "q={q} cols {a},{b}");
                }
            }
        }
    }

    #[test]
    fn qft_roundtrip_restores_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fp = FieldParams::new(7).unwrap();
        let state = random_state(&fp, 3, &mut rng);
        let mut s = state.clone();
        for reg in 0..3 {
            s.apply_qft(reg).unwrap();
        }
        for reg in (0..3).rev() {
            s.apply_inverse_qft(reg).unwrap();
        }
        for (a, b) in s.amplitudes().iter().zip(state.amplitudes()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn add_multiple_examples() {
        let fp = FieldParams::new(5).unwrap();
        let basis = DenseState::from_basis_terms([(vec![2, 1], c(1.0))], &fp).unwrap();
        let mut s = basis.clone();
        s.apply_add_multiple(0, 1, fp.elem(3)).unwrap();
        assert!((s.amplitude(&[2, 2]).norm() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let state = random_state(&fp, 3, &mut rng);
        let mut ident = state.clone();
        ident.apply_add_multiple(2, 0, FieldElement::ZERO).unwrap();
        assert_eq!(ident.amplitudes(), state.amplitudes());

        let mut twice = state.clone();
        twice.apply_add_multiple(1, 2, fp.elem(2)).unwrap();
        let mut sorted_once: Vec<f64> = twice.probabilities();
        let mut sorted_orig = state.probabilities();
        sorted_once.sort_by(f64::total_cmp);
        sorted_orig.sort_by(f64::total_cmp);
        assert_eq!(sorted_once, sorted_orig);
        twice.apply_add_multiple(1, 2, fp.elem(3)).unwrap();
        assert_eq!(twice.amplitudes(), state.amplitudes());

        assert!(s.apply_add_multiple(1, 1, fp.elem(1)).is_err());
    }

    #[test]
    fn measurement_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let fp = FieldParams::new(3).unwrap();
        let zero = DenseState::zero(&fp, 1).unwrap();
        for _ in 0..100 {
            assert_eq!(
                zero.measure_register(0, &mut rng).unwrap(),
                FieldElement::ZERO
            );
        }

        let uniform = DenseState::from_basis_terms((0..3).map(|x| (vec![x], c(1.0))), &fp).unwrap();
        let draws = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[uniform.measure_register(0, &mut rng).unwrap().value() as usize] += 1;
        }
        let sigma = (1.0 / 3.0 * (2.0 / 3.0) / draws as f64).sqrt();
        for cnt in counts {
            assert!((cnt as f64 / draws as f64 - 1.0 / 3.0).abs() < 3.0 * sigma);
        }

        let basis = DenseState::from_basis_terms([(vec![1, 2], c(1.0))], &fp).unwrap();
        for _ in 0..50 {
            assert_eq!(basis.measure_all(&mut rng), fp.elems(&[1, 2]));
        }
    }

    #[test]
    fn perturbation_is_caught_by_norm_check() {
        let fp = FieldParams::new(3).unwrap();
        let mut s = DenseState::zero(&fp, 2).unwrap();
        s.apply_qft(0).unwrap();
        s.perturb_amplitude(4, c(0.1));
        assert!(matches!(
            s.check_norm("qft"),
            Err(Error::NormViolation { .. })
        ));
    }
}
