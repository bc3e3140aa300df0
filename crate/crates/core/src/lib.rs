//! Measurement-device-independent QKD over thermal-loss and phase-noise
//! fiber channels.
//!
//! The crate evaluates per-arm channel figures ([`channel`]), the Bell-state
//! projection probabilities and key-rate metrics in closed form
//! ([`metrics`]), and checks those closed forms against an explicit
//! density-matrix evaluation ([`quantum`]). [`sweep`] maps the model over
//! distance and noise grids; [`io`] and [`validate`] back the command-line
//! tool.

pub mod channel;
pub mod error;
pub mod io;
pub mod metrics;
pub mod quadrature;
pub mod quantum;
pub mod sweep;
pub mod validate;

pub use channel::{noise_figures, ChannelParams, NoiseFigures};
pub use error::{Error, Result};
pub use metrics::{secret_key_rate, ErrorCorrectionConfig, MetricsRecord};
pub use quantum::{BellState, DensityMatrix, InputPair, Polarization};
pub use sweep::{
    evaluate_point, find_cutoff_distance, run_sweep, ArmSplit, SweepConfig, SweepResult,
};
