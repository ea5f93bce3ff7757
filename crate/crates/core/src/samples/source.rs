use rand::Rng;

use super::noise::{NoiseModel, NoiseSampler};
use super::spec::{draw_errors, draw_sample_spec, RealizedErrors, SampleSpec, Subset, SubsetMode};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};

/// Representation a learner needs for a fresh sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecForm {
    /// Per-element error map; required for dense simulation.
    Explicit,
    /// Histogram errors allowed wherever the sample covers all of F_q^n.
    Compact,
}

/// A supply of fresh, independent quantum samples for one hidden secret.
pub trait SampleSource {
    fn field(&self) -> &FieldParams;

    fn dimension(&self) -> usize;

    /// Magnitude bound k that Test Candidate uses.
    fn noise_bound(&self) -> u64;

    fn next_spec<R: Rng + ?Sized>(&mut self, form: SpecForm, rng: &mut R) -> Result<SampleSpec>;

    /// Computational-basis measurement of a fresh sample.
    fn next_classical<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<(Vec<FieldElement>, FieldElement)> {
        let spec = self.next_spec(SpecForm::Compact, rng)?;
        Ok(spec.draw_classical_sample(rng))
    }

    /// Quantum samples consumed so far, classical measurements included.
    fn samples_drawn(&self) -> u64;
}

/// LWE samples `|a⟩|a·s + e_a⟩` with a fresh subset and fresh errors per draw.
#[derive(Clone, Debug)]
pub struct LweSource {
    fp: FieldParams,
    s: Vec<FieldElement>,
    mode: SubsetMode,
    noise: NoiseModel,
    sampler: NoiseSampler,
    drawn: u64,
}

impl LweSource {
    pub fn new(
        fp: &FieldParams,
        s: Vec<FieldElement>,
        mode: SubsetMode,
        noise: NoiseModel,
    ) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidParameters(
                "dimension n must be positive".into(),
            ));
        }
        noise.validate(fp.q())?;
        let sampler = noise.sampler()?;
        if let SubsetMode::Random { v } = mode {
            if v == 0 || fp.space_size(s.len()).is_some_and(|t| v > t) {
                return Err(Error::InvalidParameters(format!(
                    "subset size {v} not in [1, q^n]"
                )));
            }
        }
        Ok(LweSource {
            fp: fp.clone(),
            s,
            mode,
            noise,
            sampler,
            drawn: 0,
        })
    }

    pub fn secret(&self) -> &[FieldElement] {
        &self.s
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn mode(&self) -> SubsetMode {
        self.mode
    }

    /// |V| of every sample this source yields.
    pub fn v(&self) -> Option<u64> {
        match self.mode {
            SubsetMode::All => self.fp.space_size(self.s.len()),
            SubsetMode::Random { v } => Some(v),
        }
    }

    fn covers_everything(&self) -> bool {
        match self.mode {
            SubsetMode::All => true,
            SubsetMode::Random { v } => self.fp.space_size(self.s.len()) == Some(v),
        }
    }
}

impl SampleSource for LweSource {
    fn field(&self) -> &FieldParams {
        &self.fp
    }

    fn dimension(&self) -> usize {
        self.s.len()
    }

    fn noise_bound(&self) -> u64 {
        self.noise.bound()
    }

    fn next_spec<R: Rng + ?Sized>(&mut self, form: SpecForm, rng: &mut R) -> Result<SampleSpec> {
        self.drawn += 1;
        if form == SpecForm::Compact && self.covers_everything() {
            let v = self
                .v()
                .ok_or_else(|| Error::InvalidParameters("q^n does not fit in 64 bits".into()))?;
            let errors = draw_errors(&self.noise, v, false, rng)?;
            return SampleSpec::new(
                &self.fp,
                self.s.clone(),
                Subset::All,
                self.noise.clone(),
                errors,
            );
        }
        draw_sample_spec(&self.fp, &self.s, self.mode, &self.noise, rng)
    }

    /// A uniformly random subset followed by a uniform pick inside it makes
    /// `a` uniform over F_q^n, and the picked error is one draw from the
    /// noise model, so the sample need not be built.
    fn next_classical<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<(Vec<FieldElement>, FieldElement)> {
        self.drawn += 1;
        let a = self.fp.random_vector(self.s.len(), rng);
        let e = self.sampler.sample(rng);
        let b = self
            .fp
            .add(self.fp.dot(&a, &self.s), self.fp.from_signed(e));
        Ok((a, b))
    }

    fn samples_drawn(&self) -> u64 {
        self.drawn
    }
}

/// Yields the same sample every time; used for deterministic-noise problems.
#[derive(Clone, Debug)]
pub struct FixedSource {
    spec: SampleSpec,
    drawn: u64,
}

impl FixedSource {
    pub fn new(spec: SampleSpec) -> Self {
        FixedSource { spec, drawn: 0 }
    }

    pub fn spec(&self) -> &SampleSpec {
        &self.spec
    }
}

impl SampleSource for FixedSource {
    fn field(&self) -> &FieldParams {
        self.spec.field()
    }

    fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    fn noise_bound(&self) -> u64 {
        self.spec.noise().bound()
    }

    fn next_spec<R: Rng + ?Sized>(&mut self, form: SpecForm, _rng: &mut R) -> Result<SampleSpec> {
        self.drawn += 1;
        if form == SpecForm::Explicit && matches!(self.spec.errors(), RealizedErrors::Histogram(_))
        {
            return Err(Error::EngineMismatch(
                "this sample only exists in histogram form".into(),
            ));
        }
        Ok(self.spec.clone())
    }

    fn next_classical<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
    ) -> Result<(Vec<FieldElement>, FieldElement)> {
        self.drawn += 1;
        Ok(self.spec.draw_classical_sample(rng))
    }

    fn samples_drawn(&self) -> u64 {
        self.drawn
    }
}
