//! Time-series generators: discrete maps, chaotic flows and nonlinearly
//! transformed AR(1) noise.
//!
//! Multivariate systems are observed through their x-coordinate.

mod flows;
mod maps;
mod noise;
pub mod ode;
mod realize;

pub use flows::{chua_nonlinearity, flow_derivative, rk45_integrate, FlowParams, FlowSystem};
pub use maps::{henon_step, iterate_henon, iterate_logistic, logistic_step, MapParams};
pub use noise::{ar1_recursion, generate_ar1_nonlinear, static_transform, NoiseParams};
pub use ode::Tolerance;
pub use realize::{make_realizations, RealizationMode, Source, SystemSpec};

/// Map iterations discarded before sampling.
pub const MAP_BURN_IN: usize = 1000;
/// Model time discarded before sampling a flow.
pub const FLOW_BURN_IN_TIME: f64 = 100.0;
/// AR(1) steps discarded before sampling.
pub const AR_BURN_IN: usize = 100;
/// Magnitude beyond which a trajectory is treated as escaped.
pub const ESCAPE_BOUND: f64 = 1e6;
