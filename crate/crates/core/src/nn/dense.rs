//! Fully connected layer `y = W x + b`.

use super::init::glorot_uniform;
use super::matrix::Matrix;
use crate::rng::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Dense {
    /// `out x in` weight matrix.
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Dense { w: Matrix::zeros(output, input), b: vec![0.0; output] }
    }

    pub fn glorot(input: usize, output: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut layer = Dense::zeros(input, output);
        glorot_uniform(&mut layer.w, input, output, rng);
        layer
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols
    }

    pub fn output_dim(&self) -> usize {
        self.w.rows
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.clone();
        self.w.matvec_add(x, &mut y);
        y
    }

    /// Accumulates parameter gradients for one input and returns `dL/dx`.
    ///
    /// `g` is `dL/dy`; `x` is the input the forward pass saw.
    pub fn backward(&self, x: &[f64], g: &[f64], grad: &mut Dense) -> Vec<f64> {
        grad.w.add_outer(g, x);
        super::matrix::add_assign(&mut grad.b, g);
        let mut dx = vec![0.0; self.w.cols];
        self.w.tvec_add(g, &mut dx);
        dx
    }

    pub fn params(&self) -> Vec<&[f64]> {
        vec![&self.w.data, &self.b]
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.w.data, &mut self.b]
    }
}
