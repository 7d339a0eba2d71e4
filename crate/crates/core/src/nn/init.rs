//! Parameter initialization.

use rand::Rng;

use super::matrix::Matrix;
use crate::rng::ChaCha8Rng;

/// Fills `m` with Glorot-uniform values for a layer with the given fan sizes.
///
/// Samples from `U(-s, s)` with `s = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(m: &mut Matrix, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in m.data.iter_mut() {
        *v = rng.gen_range(-s..s);
    }
}

/// Fills `out` with `U(-bound, bound)` samples.
pub fn uniform(out: &mut [f64], bound: f64, rng: &mut ChaCha8Rng) {
    for v in out.iter_mut() {
        *v = rng.gen_range(-bound..bound);
    }
}
