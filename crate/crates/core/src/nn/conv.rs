//! One-layer convolution over a vector sequence with global max-pooling.
//!
//! Each width w has its own filter bank; a filter's response at position p is
//! the linear map over the concatenated window x_p..x_{p+w-1} plus bias. The
//! layer output concatenates every filter's maximum response over positions.
//! Ties break toward the earliest position; a width longer than the sequence
//! contributes a zero block so the output dimension never varies.

use super::init::glorot_uniform;
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct ConvBank {
    pub width: usize,
    /// `filters x (width * input_dim)`.
    pub w: Matrix,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvMaxPool {
    pub input_dim: usize,
    pub banks: Vec<ConvBank>,
}

pub struct ConvTape {
    inputs: Vec<Vec<f64>>,
    /// Winning position per filter, flattened in output order; None for a
    /// skipped width.
    argmax: Vec<Option<usize>>,
    pub output: Vec<f64>,
}

impl ConvMaxPool {
    pub fn zeros(input_dim: usize, widths: &[usize], filters_per_width: usize) -> Self {
        let banks = widths
            .iter()
            .map(|&width| ConvBank {
                width,
                w: Matrix::zeros(filters_per_width, width * input_dim),
                b: vec![0.0; filters_per_width],
            })
            .collect();
        ConvMaxPool { input_dim, banks }
    }

    pub fn glorot(
        input_dim: usize,
        widths: &[usize],
        filters_per_width: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut layer = ConvMaxPool::zeros(input_dim, widths, filters_per_width);
        for bank in &mut layer.banks {
            glorot_uniform(&mut bank.w, bank.width * input_dim, filters_per_width, rng);
        }
        layer
    }

    pub fn zeros_like(&self) -> ConvMaxPool {
        let widths: Vec<usize> = self.banks.iter().map(|b| b.width).collect();
        let per = self.banks.first().map(|b| b.w.rows).unwrap_or(0);
        ConvMaxPool::zeros(self.input_dim, &widths, per)
    }

    pub fn output_dim(&self) -> usize {
        self.banks.iter().map(|b| b.w.rows).sum()
    }

    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<ConvTape> {
        let n = inputs.len();
        if n == 0 || self.banks.iter().all(|b| b.width > n) {
            return Err(Error::input("sequence shorter than every filter width"));
        }
        let mut output = Vec::with_capacity(self.output_dim());
        let mut argmax = Vec::with_capacity(self.output_dim());
        let mut window = Vec::new();
        for bank in &self.banks {
            if bank.width > n {
                for _ in 0..bank.w.rows {
                    output.push(0.0);
                    argmax.push(None);
                }
                continue;
            }
            let positions = n - bank.width + 1;
            let mut best = vec![f64::NEG_INFINITY; bank.w.rows];
            let mut best_pos = vec![0usize; bank.w.rows];
            for p in 0..positions {
                window.clear();
                for x in &inputs[p..p + bank.width] {
                    window.extend_from_slice(x);
                }
                for f in 0..bank.w.rows {
                    let resp = bank.b[f] + super::matrix::dot(bank.w.row(f), &window);
                    if resp > best[f] {
                        best[f] = resp;
                        best_pos[f] = p;
                    }
                }
            }
            for f in 0..bank.w.rows {
                output.push(best[f]);
                argmax.push(Some(best_pos[f]));
            }
        }
        Ok(ConvTape { inputs: inputs.to_vec(), argmax, output })
    }

    /// Routes dL/d(output) through the pooling argmax. Returns dL/d(input t).
    pub fn backward(&self, tape: &ConvTape, g: &[f64], grad: &mut ConvMaxPool) -> Vec<Vec<f64>> {
        debug_assert_eq!(g.len(), self.output_dim());
        let mut d_inputs = vec![vec![0.0; self.input_dim]; tape.inputs.len()];
        let mut idx = 0;
        let mut window = Vec::new();
        for (bank, gbank) in self.banks.iter().zip(grad.banks.iter_mut()) {
            for f in 0..bank.w.rows {
                let gf = g[idx];
                if let Some(p) = tape.argmax[idx] {
                    if gf != 0.0 {
                        window.clear();
                        for x in &tape.inputs[p..p + bank.width] {
                            window.extend_from_slice(x);
                        }
                        for (wv, xv) in gbank.w.row_mut(f).iter_mut().zip(window.iter()) {
                            *wv += gf * xv;
                        }
                        gbank.b[f] += gf;
                        let row = bank.w.row(f);
                        for (offset, chunk) in row.chunks(self.input_dim).enumerate() {
                            for (d, wv) in d_inputs[p + offset].iter_mut().zip(chunk.iter()) {
                                *d += gf * wv;
                            }
                        }
                    }
                }
                idx += 1;
            }
        }
        d_inputs
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.banks
            .iter()
            .flat_map(|b| vec![b.w.data.as_slice(), b.b.as_slice()])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.banks
            .iter_mut()
            .flat_map(|b| vec![b.w.data.as_mut_slice(), b.b.as_mut_slice()])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::fdcheck::check_gradients;
    use crate::nn::matrix::dot;
    use crate::rng::rng_from_seed;

    #[test]
    fn width_one_identity_filter_takes_max() {
        let mut layer = ConvMaxPool::zeros(1, &[1], 1);
        layer.banks[0].w.set(0, 0, 1.0);
        let tape = layer
            .forward(&[vec![1.0], vec![5.0], vec![3.0]])
            .unwrap();
        assert_eq!(tape.output, vec![5.0]);
        assert_eq!(tape.argmax, vec![Some(1)]);
    }

    #[test]
    fn zero_filters_zero_output() {
        let layer = ConvMaxPool::zeros(2, &[1, 2], 3);
        let tape = layer.forward(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(tape.output.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn long_widths_contribute_zero_blocks() {
        let mut rng = rng_from_seed(30);
        let layer = ConvMaxPool::glorot(2, &[1, 4], 2, &mut rng);
        let tape = layer.forward(&[vec![0.5, -0.5]]).unwrap();
        assert_eq!(tape.output.len(), 4);
        assert_eq!(&tape.output[2..], &[0.0, 0.0]);
    }

    #[test]
    fn all_widths_too_long_rejected() {
        let layer = ConvMaxPool::zeros(2, &[3, 4], 1);
        assert!(layer.forward(&[vec![0.0, 0.0], vec![1.0, 1.0]]).is_err());
        assert!(layer.forward(&[]).is_err());
    }

    #[test]
    fn ties_break_earliest() {
        let mut layer = ConvMaxPool::zeros(1, &[1], 1);
        layer.banks[0].w.set(0, 0, 1.0);
        let tape = layer.forward(&[vec![2.0], vec![2.0]]).unwrap();
        assert_eq!(tape.argmax, vec![Some(0)]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rng_from_seed(31);
        let mut layer = ConvMaxPool::glorot(3, &[1, 2, 3], 2, &mut rng);
        let inputs: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                use rand::Rng;
                (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()
            })
            .collect();
        let probe: Vec<f64> = {
            use rand::Rng;
            (0..layer.output_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let tape = layer.forward(&inputs).unwrap();
        let mut grad = layer.zeros_like();
        layer.backward(&tape, &probe, &mut grad);
        let analytic: Vec<Vec<f64>> = grad.params().iter().map(|s| s.to_vec()).collect();
        let rel = check_gradients(
            &mut layer,
            |m| {
                let tape = m.forward(&inputs).unwrap();
                dot(&tape.output, &probe)
            },
            &analytic,
        );
        assert!(rel <= 1e-4, "rel err {rel}");
    }

    #[test]
    fn input_gradient_routes_to_argmax_window() {
        let mut layer = ConvMaxPool::zeros(1, &[1], 1);
        layer.banks[0].w.set(0, 0, 2.0);
        let tape = layer.forward(&[vec![1.0], vec![5.0], vec![3.0]]).unwrap();
        let mut grad = layer.zeros_like();
        let d_in = layer.backward(&tape, &[1.0], &mut grad);
        assert_eq!(d_in, vec![vec![0.0], vec![2.0], vec![0.0]]);
        assert_eq!(grad.banks[0].w.get(0, 0), 5.0);
        assert_eq!(grad.banks[0].b[0], 1.0);
    }
}
