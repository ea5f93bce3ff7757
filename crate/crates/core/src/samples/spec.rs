use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::sim::DenseState;

/// Subsets larger than this keep their errors as a histogram.
pub const EXPLICIT_MAP_THRESHOLD: u64 = 1_000_000;

/// The set V of inputs in superposition.
#[derive(Clone, Debug, PartialEq)]
pub enum Subset {
    /// All of F_q^n, enumerated lexicographically.
    All,
    Explicit(Vec<Vec<FieldElement>>),
}

/// How a fresh subset is chosen when drawing a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SubsetMode {
    All,
    /// Uniform among subsets of size `v`.
    Random {
        v: u64,
    },
}

/// Errors realized for one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum RealizedErrors {
    /// `errors[i]` is the error of the i-th element of V.
    ExplicitMap(Vec<i64>),
    /// Error value to number of elements carrying it.
    Histogram(BTreeMap<i64, u64>),
}

/// One quantum sample `v^{-1/2} Σ_{a∈V} |a⟩|a·s + e_a⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    fp: FieldParams,
    n: usize,
    s: Vec<FieldElement>,
    subset: Subset,
    noise: NoiseModel,
    errors: RealizedErrors,
    seed: Option<u64>,
}

impl SampleSpec {
    pub fn new(
        fp: &FieldParams,
        s: Vec<FieldElement>,
        subset: Subset,
        noise: NoiseModel,
        errors: RealizedErrors,
    ) -> Result<Self> {
        let n = s.len();
        if n == 0 {
            return Err(Error::InvalidParameters(
                "dimension n must be positive".into(),
            ));
        }
        noise.validate(fp.q())?;
        let v = match &subset {
            Subset::All => fp.space_size(n).ok_or_else(|| {
                Error::InvalidParameters(format!("q^n = {}^{n} does not fit in 64 bits", fp.q()))
            })?,
            Subset::Explicit(vectors) => {
                if vectors.is_empty() {
                    return Err(Error::InvalidParameters(
                        "subset V must be non-empty".into(),
                    ));
                }
                let mut seen = HashSet::with_capacity(vectors.len());
                for a in vectors {
                    if a.len() != n {
                        return Err(Error::InvalidParameters(format!(
                            "subset vector of length {} in dimension {n}",
                            a.len()
                        )));
                    }
                    if !seen.insert(a) {
                        return Err(Error::InvalidParameters(format!(
                            "subset vector {a:?} appears twice"
                        )));
                    }
                }
                vectors.len() as u64
            }
        };
        match &errors {
            RealizedErrors::ExplicitMap(map) => {
                if map.len() as u64 != v {
                    return Err(Error::InvalidParameters(format!(
                        "error map has {} entries for |V| = {v}",
                        map.len()
                    )));
                }
                if let Some(bad) = map.iter().find(|&&e| !noise.supports(e)) {
                    return Err(Error::InvalidParameters(format!(
                        "error {bad} lies outside the support of {noise}"
                    )));
                }
                if noise.is_global() && map.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::InvalidParameters(
                        "a global shift needs one error shared by every element".into(),
                    ));
                }
            }
            RealizedErrors::Histogram(hist) => {
                if matches!(subset, Subset::Explicit(_)) && v <= EXPLICIT_MAP_THRESHOLD {
                    return Err(Error::InvalidParameters(
                        "histogram errors are reserved for V = F_q^n or very large subsets".into(),
                    ));
                }
                let total: u64 = hist.values().sum();
                if total != v {
                    return Err(Error::InvalidParameters(format!(
                        "histogram counts sum to {total}, expected {v}"
                    )));
                }
                if let Some(bad) = hist.keys().find(|&&e| !noise.supports(e)) {
                    return Err(Error::InvalidParameters(format!(
                        "error {bad} lies outside the support of {noise}"
                    )));
                }
                if noise.is_global() && hist.values().filter(|&&c| c > 0).count() > 1 {
                    return Err(Error::InvalidParameters(
                        "a global shift needs one error shared by every element".into(),
                    ));
                }
            }
        }
        Ok(SampleSpec {
            fp: fp.clone(),
            n,
            s,
            subset,
            noise,
            errors,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn field(&self) -> &FieldParams {
        &self.fp
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn secret(&self) -> &[FieldElement] {
        &self.s
    }

    pub fn subset(&self) -> &Subset {
        &self.subset
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn errors(&self) -> &RealizedErrors {
        &self.errors
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// |V|.
    pub fn v(&self) -> u64 {
        match &self.subset {
            // Checked to fit at construction.
            Subset::All => self.fp.space_size(self.n).unwrap_or(u64::MAX),
            Subset::Explicit(vectors) => vectors.len() as u64,
        }
    }

    /// The i-th element of V.
    pub fn element(&self, i: u64) -> Vec<FieldElement> {
        match &self.subset {
            Subset::All => self.fp.vector_at(i, self.n),
            Subset::Explicit(vectors) => vectors[i as usize].clone(),
        }
    }

    /// Counts of each realized error value.
    pub fn error_histogram(&self) -> BTreeMap<i64, u64> {
        match &self.errors {
            RealizedErrors::Histogram(hist) => hist.clone(),
            RealizedErrors::ExplicitMap(map) => {
                let mut hist = BTreeMap::new();
                for &e in map {
                    *hist.entry(e).or_insert(0) += 1;
                }
                hist
            }
        }
    }

    /// Builds the dense state over n+1 registers.
    pub fn materialize_dense(&self) -> Result<DenseState> {
        let RealizedErrors::ExplicitMap(map) = &self.errors else {
            return Err(Error::EngineMismatch(
                "a histogram-form sample has no per-element error assignment".into(),
            ));
        };
        let registers = self.n + 1;
        let len = crate::sim::dense_size(&self.fp, registers)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        let amp = Complex64::new(1.0 / (self.v() as f64).sqrt(), 0.0);
        let q = self.fp.q();
        for (i, &e) in map.iter().enumerate() {
            let a = self.element(i as u64);
            let b = self
                .fp
                .add(self.fp.dot(&a, &self.s), self.fp.from_signed(e));
            let idx = self.fp.index_of(&a) * q + b.value();
            amps[idx as usize] = amp;
        }
        DenseState::from_amplitudes(&self.fp, registers, amps)
    }

    /// Measures the sample in the computational basis: `a` uniform over V
    /// and `b = a·s + e_a`.
    pub fn draw_classical_sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> (Vec<FieldElement>, FieldElement) {
        let i = rng.random_range(0..self.v());
        let a = self.element(i);
        let e = match &self.errors {
            RealizedErrors::ExplicitMap(map) => map[i as usize],
            RealizedErrors::Histogram(hist) => {
                // Error drawn from the empirical error distribution.
                let mut target = rng.random_range(0..self.v());
                let mut chosen = 0;
                for (&e, &count) in hist {
                    if target < count {
                        chosen = e;
                        break;
                    }
                    target -= count;
                }
                chosen
            }
        };
        let b = self
            .fp
            .add(self.fp.dot(&a, &self.s), self.fp.from_signed(e));
        (a, b)
    }

    pub fn to_document(&self) -> SampleDocument {
        let (subset, vectors) = match &self.subset {
            Subset::All => ("all".to_string(), None),
            Subset::Explicit(list) => (
                "explicit".to_string(),
                Some(
                    list.iter()
                        .map(|a| a.iter().map(|x| x.value()).collect())
                        .collect(),
                ),
            ),
        };
        let (errors, histogram) = match &self.errors {
            RealizedErrors::ExplicitMap(map) => (Some(map.clone()), None),
            RealizedErrors::Histogram(hist) => {
                (None, Some(hist.iter().map(|(&e, &c)| (e, c)).collect()))
            }
        };
        SampleDocument {
            q: self.fp.q(),
            n: self.n,
            s: self.s.iter().map(|x| x.value()).collect(),
            subset,
            v: self.v(),
            vectors,
            noise: self.noise.clone(),
            errors,
            histogram,
            seed: self.seed,
        }
    }

    pub fn from_document(doc: SampleDocument) -> Result<Self> {
        let fp = FieldParams::new(doc.q)?;
        if doc.s.len() != doc.n {
            return Err(Error::Serialization(format!(
                "secret has {} coordinates, n = {}",
                doc.s.len(),
                doc.n
            )));
        }
        let s = fp.elems(&doc.s);
        let subset = match (doc.subset.as_str(), doc.vectors) {
            ("all", None) => Subset::All,
            ("explicit", Some(vectors)) => {
                Subset::Explicit(vectors.iter().map(|a| fp.elems(a)).collect())
            }
            (mode, _) => {
                return Err(Error::Serialization(format!(
                    "subset mode {mode:?} does not match the vectors field"
                )))
            }
        };
        let errors = match (doc.errors, doc.histogram) {
            (Some(map), None) => RealizedErrors::ExplicitMap(map),
            (None, Some(hist)) => RealizedErrors::Histogram(hist.into_iter().collect()),
            _ => {
                return Err(Error::Serialization(
                    "exactly one of `errors` and `histogram` must be present".into(),
                ))
            }
        };
        let spec = SampleSpec::new(&fp, s, subset, doc.noise, errors)?;
        if spec.v() != doc.v {
            return Err(Error::Serialization(format!(
                "v = {} but |V| = {}",
                doc.v,
                spec.v()
            )));
        }
        Ok(match doc.seed {
            Some(seed) => spec.with_seed(seed),
            None => spec,
        })
    }

    /// TOML rendering of [`SampleDocument`].
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.to_document()).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: SampleDocument =
            toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        SampleSpec::from_document(doc)
    }
}

/// Key-value form of a [`SampleSpec`].
///
/// ```toml
/// q = 7
/// n = 1
/// s = [3]
/// subset = "all"          # or "explicit", with `vectors = [[0], [4]]`
/// v = 7
/// errors = [0, 1, -1, 0, 0, 1, 0]   # or `histogram = [[-1, 2], [0, 5]]`
/// seed = 11               # optional
///
/// [noise]
/// kind = "bounded-uniform"
/// k = 1
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDocument {
    pub q: u64,
    pub n: usize,
    pub s: Vec<u64>,
    pub subset: String,
    pub v: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Vec<(i64, u64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub noise: NoiseModel,
}

/// Draws a fresh sample: a uniformly random subset of the requested size
/// and i.i.d. errors from `noise`.
pub fn draw_sample_spec<R: Rng + ?Sized>(
    fp: &FieldParams,
    s: &[FieldElement],
    mode: SubsetMode,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SampleSpec> {
    let n = s.len();
    noise.validate(fp.q())?;
    let space = fp.space_size(n);
    let v = match mode {
        SubsetMode::All => space.ok_or_else(|| {
            Error::InvalidParameters(format!("q^n = {}^{n} does not fit in 64 bits", fp.q()))
        })?,
        SubsetMode::Random { v } => v,
    };
    if v == 0 || space.is_some_and(|total| v > total) {
        return Err(Error::InvalidParameters(format!(
            "subset size {v} not in [1, q^n]"
        )));
    }
    let subset = if Some(v) == space {
        Subset::All
    } else if v > EXPLICIT_MAP_THRESHOLD {
        return Err(Error::InvalidParameters(format!(
            "a random subset of size {v} is too large to materialize"
        )));
    } else {
        Subset::Explicit(random_subset(fp, n, v, rng))
    };
    let errors = draw_errors(noise, v, v <= EXPLICIT_MAP_THRESHOLD, rng)?;
    SampleSpec::new(fp, s.to_vec(), subset, noise.clone(), errors)
}

/// Uniform random subset of F_q^n of size `v`.
fn random_subset<R: Rng + ?Sized>(
    fp: &FieldParams,
    n: usize,
    v: u64,
    rng: &mut R,
) -> Vec<Vec<FieldElement>> {
    match fp.space_size(n).and_then(|t| usize::try_from(t).ok()) {
        Some(total) => rand::seq::index::sample(rng, total, v as usize)
            .into_iter()
            .map(|i| fp.vector_at(i as u64, n))
            .collect(),
        None => {
            // q^n beyond 64 bits: rejecting repeats of uniform draws is still exactly uniform.
            let mut seen = HashSet::with_capacity(v as usize);
            let mut out = Vec::with_capacity(v as usize);
            while (out.len() as u64) < v {
                let a = fp.random_vector(n, rng);
                if seen.insert(a.clone()) {
                    out.push(a);
                }
            }
            out
        }
    }
}

/// i.i.d. errors for `v` elements, as an explicit map or as multinomial counts.
pub fn draw_errors<R: Rng + ?Sized>(
    noise: &NoiseModel,
    v: u64,
    explicit: bool,
    rng: &mut R,
) -> Result<RealizedErrors> {
    let sampler = noise.sampler()?;
    if noise.is_global() {
        let e = sampler.sample(rng);
        return Ok(if explicit {
            RealizedErrors::ExplicitMap(vec![e; v as usize])
        } else {
            RealizedErrors::Histogram(BTreeMap::from([(e, v)]))
        });
    }
    Ok(if explicit {
        RealizedErrors::ExplicitMap((0..v).map(|_| sampler.sample(rng)).collect())
    } else {
        RealizedErrors::Histogram(sampler.multinomial(v, rng).into_iter().collect())
    })
}
