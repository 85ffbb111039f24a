//! Photon-number bookkeeping for a driven two-level emitter post-selected
//! on its final state.

pub mod amplitudes;
pub mod collision;
pub mod config;
pub mod error;
pub mod husimi;
pub mod oracle;
pub mod qubit;
pub mod sweep;
pub mod wigner;

pub use config::{ConfigOverrides, GateConfig, GridSpec, Outcome};
pub use error::{Error, Result};
