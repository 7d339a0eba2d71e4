//! Central finite-difference gradient checking, test builds only.

use super::conv::ConvMaxPool;
use super::dense::Dense;
use super::gru::Gru;
use super::lstm::{BiLstm, Lstm};

pub trait ParamAccess {
    fn param_slices(&mut self) -> Vec<&mut [f64]>;
}

impl ParamAccess for Dense {
    fn param_slices(&mut self) -> Vec<&mut [f64]> {
        self.params_mut()
    }
}

impl ParamAccess for Gru {
    fn param_slices(&mut self) -> Vec<&mut [f64]> {
        self.params_mut()
    }
}

impl ParamAccess for Lstm {
    fn param_slices(&mut self) -> Vec<&mut [f64]> {
        self.params_mut()
    }
}

impl ParamAccess for BiLstm {
    fn param_slices(&mut self) -> Vec<&mut [f64]> {
        self.params_mut()
    }
}

impl ParamAccess for ConvMaxPool {
    fn param_slices(&mut self) -> Vec<&mut [f64]> {
        self.params_mut()
    }
}

/// Compares `analytic` (one vector per parameter group, in `param_slices`
/// order) against central differences of `loss` with step 1e-5. Returns the
/// worst relative error over all entries.
pub fn check_gradients<T: ParamAccess>(
    obj: &mut T,
    loss: impl Fn(&T) -> f64,
    analytic: &[Vec<f64>],
) -> f64 {
    check_gradients_with_step(obj, loss, analytic, 1e-5)
}

/// Deep composite stacks need a larger step: tiny true gradients put the
/// 1e-5 central difference inside floating-point roundoff.
pub fn check_gradients_with_step<T: ParamAccess>(
    obj: &mut T,
    loss: impl Fn(&T) -> f64,
    analytic: &[Vec<f64>],
    eps: f64,
) -> f64 {
    let groups = obj.param_slices().len();
    assert_eq!(groups, analytic.len(), "group count mismatch");
    let mut worst: f64 = 0.0;
    for gi in 0..groups {
        let len = obj.param_slices()[gi].len();
        assert_eq!(len, analytic[gi].len(), "group {gi} length mismatch");
        for i in 0..len {
            let orig = obj.param_slices()[gi][i];
            obj.param_slices()[gi][i] = orig + eps;
            let up = loss(obj);
            obj.param_slices()[gi][i] = orig - eps;
            let dn = loss(obj);
            obj.param_slices()[gi][i] = orig;
            let fd = (up - dn) / (2.0 * eps);
            let an = analytic[gi][i];
            let denom = fd.abs().max(an.abs()).max(1e-8);
            let rel = (fd - an).abs() / denom;
            if rel > worst {
                worst = rel;
            }
        }
    }
    worst
}
