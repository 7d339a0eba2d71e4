//! Neural building blocks: matrix kernels, layers, losses, and the optimizer.
//!
//! Everything runs in f64 and every layer exposes an explicit backward pass;
//! there is no tape machinery beyond each layer's own forward cache.

pub mod adam;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod fdcheck;
pub mod gru;
pub mod init;
pub mod loss;
pub mod lstm;
pub mod matrix;

pub use adam::Adam;
pub use conv::ConvMaxPool;
pub use dense::Dense;
pub use gru::Gru;
pub use lstm::{BiLstm, Lstm};
pub use matrix::Matrix;

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
