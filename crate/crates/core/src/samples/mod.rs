//! Noise models, quantum-sample descriptions and the analytic outcome engine.

mod distribution;
mod noise;
mod source;
mod spec;

pub use distribution::{
    dense_outcome_distribution, expected_p_correct, from_error_histogram, optimal_gamma,
    outcome_distribution, theoretical_bound, GammaMode, OutcomeDistribution, GAMMA_STEP,
};
pub use noise::{NoiseModel, NoiseSampler};
pub use source::{FixedSource, LweSource, SampleSource, SpecForm};
pub use spec::{
    draw_errors, draw_sample_spec, RealizedErrors, SampleDocument, SampleSpec, Subset, SubsetMode,
    EXPLICIT_MAP_THRESHOLD,
};
