//! Single-hidden-layer recurrent classifier trained from scratch.
//!
//! The cell reads one scalar per time step,
//! `h_t = relu(w_in x_t + W_rec h_{t-1} + b_h)` with `h_0 = 0`, and the
//! output is `sigmoid(w_out . h_L + b_out)`, the probability that the
//! sequence is an original rather than a surrogate.

mod adam;
mod model;
mod report;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use model::{bce_loss, bptt_gradients, Forward, Gradients, RnnModel};
pub use report::{ReportSidecar, TrainReport, TrainSettings};
pub use train::{evaluate, train, TrainConfig, TrainOutcome};
