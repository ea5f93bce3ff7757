//! Classical simulation of quantum-sample learners for LWE and its relatives.
//!
//! Two engines compute the Field Bernstein–Vazirani statistics: a dense
//! state-vector simulator ([`sim`]) for small instances, and an analytic
//! engine ([`samples::outcome_distribution`]) that works from error
//! histograms and scales to large q and n.

pub mod error;
pub mod experiments;
pub mod field;
pub mod learners;
pub mod samples;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldElement, FieldParams};
pub use sim::DenseState;
