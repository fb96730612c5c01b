//! Nonlinearity detection in short time series by surrogate classification.
//!
//! Realizations of a process are paired with IAAFT surrogates, and a small
//! recurrent network is trained to tell them apart. Accuracy well above chance
//! indicates structure the surrogates do not preserve (dynamical
//! nonlinearity); accuracy near 0.5 is consistent with a static transform of
//! linearly correlated noise.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! pipeline and the CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod dynsys;
pub mod error;
pub mod pipeline;
pub mod rng;
pub mod rnn;
pub mod scalar;
pub mod series;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::{SeriesMeta, TimeSeries};

/// Double-precision time series.
pub type Series = TimeSeries<f64>;
/// Double-precision recurrent classifier.
pub type Model = rnn::RnnModel<f64>;
/// Double-precision labeled dataset.
pub type Dataset = dataset::LabeledDataset<f64>;
/// Double-precision training report.
pub type Report = rnn::TrainReport<f64>;
/// Double-precision surrogate result.
pub type Surrogate = spectral::SurrogateResult<f64>;
/// Single-precision time series.
pub type Series32 = TimeSeries<f32>;
/// Single-precision recurrent classifier.
pub type Model32 = rnn::RnnModel<f32>;
