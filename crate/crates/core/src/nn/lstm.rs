//! Stacked LSTM and the bidirectional wrapper used by the word composers.
//!
//! Gates are fused into one `4h x in` input matrix and one `4h x h` recurrent
//! matrix with row blocks [input; forget; cell; output]. The bidirectional
//! variant keeps two fully independent direction stacks, so a forward state at
//! step t depends only on inputs 1..t and a backward state only on t..k.

use super::init::glorot_uniform;
use super::matrix::{add_assign, Matrix};
use super::sigmoid;
use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct LstmCell {
    /// `4h x in`, row blocks [i; f; g; o].
    pub w: Matrix,
    /// `4h x h`, same block order.
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmCell {
            w: Matrix::zeros(4 * hidden, input),
            u: Matrix::zeros(4 * hidden, hidden),
            b: vec![0.0; 4 * hidden],
        }
    }

    pub fn glorot(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut cell = LstmCell::zeros(input, hidden);
        glorot_uniform(&mut cell.w, input, hidden, rng);
        glorot_uniform(&mut cell.u, hidden, hidden, rng);
        cell
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.cols
    }

    fn step(&self, x: &[f64], h: &[f64], c: &[f64], cache: &mut LstmStepCache) -> (Vec<f64>, Vec<f64>) {
        let hid = self.hidden_dim();
        let mut pre = self.b.clone();
        self.w.matvec_add(x, &mut pre);
        self.u.matvec_add(h, &mut pre);
        let mut gates = pre;
        for (idx, v) in gates.iter_mut().enumerate() {
            let block = idx / hid;
            *v = if block == 2 { v.tanh() } else { sigmoid(*v) };
        }
        let mut c_new = vec![0.0; hid];
        let mut tc = vec![0.0; hid];
        let mut h_new = vec![0.0; hid];
        for i in 0..hid {
            let gi = gates[i];
            let gf = gates[hid + i];
            let gg = gates[2 * hid + i];
            let go = gates[3 * hid + i];
            c_new[i] = gf * c[i] + gi * gg;
            tc[i] = c_new[i].tanh();
            h_new[i] = go * tc[i];
        }
        cache.x = x.to_vec();
        cache.h_prev = h.to_vec();
        cache.c_prev = c.to_vec();
        cache.gates = gates;
        cache.tc = tc;
        (h_new, c_new)
    }

    /// Backward through one step; `dh`/`dc` carry dL/dh_new and dL/dc_new.
    /// Returns (dx, dh_prev, dc_prev).
    fn step_backward(
        &self,
        cache: &LstmStepCache,
        dh: &[f64],
        dc: &[f64],
        grad: &mut LstmCell,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hid = self.hidden_dim();
        let LstmStepCache { x, h_prev, c_prev, gates, tc } = cache;
        let mut dpre = vec![0.0; 4 * hid];
        let mut dc_prev = vec![0.0; hid];
        for i in 0..hid {
            let gi = gates[i];
            let gf = gates[hid + i];
            let gg = gates[2 * hid + i];
            let go = gates[3 * hid + i];
            let d_out = dh[i] * tc[i];
            let dc_total = dc[i] + dh[i] * go * (1.0 - tc[i] * tc[i]);
            let d_in = dc_total * gg;
            let d_forget = dc_total * c_prev[i];
            let d_cand = dc_total * gi;
            dc_prev[i] = dc_total * gf;
            dpre[i] = d_in * gi * (1.0 - gi);
            dpre[hid + i] = d_forget * gf * (1.0 - gf);
            dpre[2 * hid + i] = d_cand * (1.0 - gg * gg);
            dpre[3 * hid + i] = d_out * go * (1.0 - go);
        }
        grad.w.add_outer(&dpre, x);
        grad.u.add_outer(&dpre, h_prev);
        add_assign(&mut grad.b, &dpre);
        let mut dx = vec![0.0; self.w.cols];
        self.w.tvec_add(&dpre, &mut dx);
        let mut dh_prev = vec![0.0; hid];
        self.u.tvec_add(&dpre, &mut dh_prev);
        (dx, dh_prev, dc_prev)
    }

    pub fn params(&self) -> Vec<&[f64]> {
        vec![&self.w.data, &self.u.data, &self.b]
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.w.data, &mut self.u.data, &mut self.b]
    }
}

#[derive(Debug, Clone, Default)]
struct LstmStepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>,
    tc: Vec<f64>,
}

/// Unidirectional stack of LSTM layers.
#[derive(Debug, Clone)]
pub struct Lstm {
    pub layers: Vec<LstmCell>,
}

pub struct LstmTape {
    steps: Vec<Vec<LstmStepCache>>,
    /// Output sequence of the top layer.
    pub outputs: Vec<Vec<f64>>,
}

impl Lstm {
    pub fn glorot(input: usize, hidden: usize, layers: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(layers >= 1, "layer count must be at least 1");
        let mut cells = Vec::with_capacity(layers);
        cells.push(LstmCell::glorot(input, hidden, rng));
        for _ in 1..layers {
            cells.push(LstmCell::glorot(hidden, hidden, rng));
        }
        Lstm { layers: cells }
    }

    pub fn zeros_like(&self) -> Lstm {
        Lstm {
            layers: self
                .layers
                .iter()
                .map(|c| LstmCell::zeros(c.w.cols, c.hidden_dim()))
                .collect(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers.last().map(|c| c.hidden_dim()).unwrap_or(0)
    }

    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<LstmTape> {
        if inputs.is_empty() {
            return Err(Error::input("empty input sequence"));
        }
        let n = inputs.len();
        let mut steps = Vec::with_capacity(self.layers.len());
        let mut current = inputs.to_vec();
        for cell in &self.layers {
            let hid = cell.hidden_dim();
            let mut layer_steps = vec![LstmStepCache::default(); n];
            let mut h = vec![0.0; hid];
            let mut c = vec![0.0; hid];
            let mut outputs = Vec::with_capacity(n);
            for (t, x) in current.iter().enumerate() {
                let (h_new, c_new) = cell.step(x, &h, &c, &mut layer_steps[t]);
                h = h_new;
                c = c_new;
                outputs.push(h.clone());
            }
            steps.push(layer_steps);
            current = outputs;
        }
        Ok(LstmTape { steps, outputs: current })
    }

    /// `d_outputs[t]` is dL/d(top output t); empty vectors mean zero.
    pub fn backward(&self, tape: &LstmTape, d_outputs: &[Vec<f64>], grad: &mut Lstm) -> Vec<Vec<f64>> {
        let n = tape.outputs.len();
        debug_assert_eq!(d_outputs.len(), n);
        let mut d_above: Vec<Vec<f64>> = d_outputs
            .iter()
            .map(|g| {
                if g.is_empty() {
                    vec![0.0; self.hidden_dim()]
                } else {
                    g.clone()
                }
            })
            .collect();
        for (l, cell) in self.layers.iter().enumerate().rev() {
            let hid = cell.hidden_dim();
            let mut d_below: Vec<Vec<f64>> = vec![Vec::new(); n];
            let mut dh_carry = vec![0.0; hid];
            let mut dc_carry = vec![0.0; hid];
            for t in (0..n).rev() {
                let mut dh = d_above[t].clone();
                add_assign(&mut dh, &dh_carry);
                let (dx, dh_prev, dc_prev) =
                    cell.step_backward(&tape.steps[l][t], &dh, &dc_carry, &mut grad.layers[l]);
                d_below[t] = dx;
                dh_carry = dh_prev;
                dc_carry = dc_prev;
            }
            d_above = d_below;
        }
        d_above
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|c| c.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(|c| c.params_mut()).collect()
    }
}

/// Two independent direction stacks over the same input sequence.
#[derive(Debug, Clone)]
pub struct BiLstm {
    pub fwd: Lstm,
    pub bwd: Lstm,
}

pub struct BiLstmTape {
    fwd: LstmTape,
    bwd: LstmTape,
    /// Forward-direction states aligned with input positions.
    pub fwd_outputs: Vec<Vec<f64>>,
    /// Backward-direction states aligned with input positions.
    pub bwd_outputs: Vec<Vec<f64>>,
}

impl BiLstm {
    pub fn glorot(input: usize, hidden: usize, layers: usize, rng: &mut ChaCha8Rng) -> Self {
        BiLstm {
            fwd: Lstm::glorot(input, hidden, layers, rng),
            bwd: Lstm::glorot(input, hidden, layers, rng),
        }
    }

    pub fn zeros_like(&self) -> BiLstm {
        BiLstm { fwd: self.fwd.zeros_like(), bwd: self.bwd.zeros_like() }
    }

    pub fn hidden_dim(&self) -> usize {
        self.fwd.hidden_dim()
    }

    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<BiLstmTape> {
        let fwd = self.fwd.forward(inputs)?;
        let reversed: Vec<Vec<f64>> = inputs.iter().rev().cloned().collect();
        let bwd = self.bwd.forward(&reversed)?;
        let fwd_outputs = fwd.outputs.clone();
        let mut bwd_outputs = bwd.outputs.clone();
        bwd_outputs.reverse();
        Ok(BiLstmTape { fwd, bwd, fwd_outputs, bwd_outputs })
    }

    /// `d_fwd[t]` and `d_bwd[t]` are gradients w.r.t. the aligned outputs;
    /// empty vectors mean zero. Returns dL/d(input t).
    pub fn backward(
        &self,
        tape: &BiLstmTape,
        d_fwd: &[Vec<f64>],
        d_bwd: &[Vec<f64>],
        grad: &mut BiLstm,
    ) -> Vec<Vec<f64>> {
        let mut d_inputs = self.fwd.backward(&tape.fwd, d_fwd, &mut grad.fwd);
        let d_bwd_rev: Vec<Vec<f64>> = d_bwd.iter().rev().cloned().collect();
        let d_rev = self.bwd.backward(&tape.bwd, &d_bwd_rev, &mut grad.bwd);
        for (t, d) in d_rev.into_iter().rev().enumerate() {
            add_assign(&mut d_inputs[t], &d);
        }
        d_inputs
    }

    pub fn params(&self) -> Vec<&[f64]> {
        let mut p = self.fwd.params();
        p.extend(self.bwd.params());
        p
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut p: Vec<&mut [f64]> = Vec::new();
        p.extend(self.fwd.params_mut());
        p.extend(self.bwd.params_mut());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::fdcheck::check_gradients;
    use crate::nn::matrix::dot;
    use crate::rng::rng_from_seed;

    fn seq(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
        use rand::Rng;
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn zero_params_zero_output() {
        let bi = BiLstm {
            fwd: Lstm { layers: vec![LstmCell::zeros(2, 3)] },
            bwd: Lstm { layers: vec![LstmCell::zeros(2, 3)] },
        };
        let tape = bi.forward(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        for h in tape.fwd_outputs.iter().chain(tape.bwd_outputs.iter()) {
            assert!(h.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn empty_sequence_rejected() {
        let mut rng = rng_from_seed(20);
        let bi = BiLstm::glorot(2, 3, 1, &mut rng);
        assert!(bi.forward(&[]).is_err());
    }

    #[test]
    fn single_step_uses_only_that_input() {
        let mut rng = rng_from_seed(21);
        let bi = BiLstm::glorot(2, 3, 2, &mut rng);
        let tape = bi.forward(&[vec![0.3, -0.7]]).unwrap();
        assert_eq!(tape.fwd_outputs.len(), 1);
        assert_eq!(tape.bwd_outputs.len(), 1);
    }

    #[test]
    fn forward_states_ignore_future_inputs() {
        let mut rng = rng_from_seed(22);
        let bi = BiLstm::glorot(2, 3, 2, &mut rng);
        let a = seq(&mut rng, 5, 2);
        let mut b = a.clone();
        b[4] = vec![9.0, -9.0];
        let ta = bi.forward(&a).unwrap();
        let tb = bi.forward(&b).unwrap();
        for t in 0..4 {
            assert_eq!(ta.fwd_outputs[t], tb.fwd_outputs[t]);
        }
        assert_eq!(ta.bwd_outputs[4].len(), 3);
    }

    #[test]
    fn backward_states_ignore_past_inputs() {
        let mut rng = rng_from_seed(23);
        let bi = BiLstm::glorot(2, 3, 2, &mut rng);
        let a = seq(&mut rng, 5, 2);
        let mut b = a.clone();
        b[0] = vec![9.0, -9.0];
        let ta = bi.forward(&a).unwrap();
        let tb = bi.forward(&b).unwrap();
        for t in 1..5 {
            assert_eq!(ta.bwd_outputs[t], tb.bwd_outputs[t]);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rng_from_seed(24);
        let mut bi = BiLstm::glorot(3, 4, 2, &mut rng);
        let inputs = seq(&mut rng, 5, 3);
        let pf = seq(&mut rng, 5, 4);
        let pb = seq(&mut rng, 5, 4);
        let tape = bi.forward(&inputs).unwrap();
        let mut grad = bi.zeros_like();
        bi.backward(&tape, &pf, &pb, &mut grad);
        let analytic: Vec<Vec<f64>> = grad.params().iter().map(|s| s.to_vec()).collect();
        let rel = check_gradients(
            &mut bi,
            |m| {
                let tape = m.forward(&inputs).unwrap();
                let lf: f64 = tape
                    .fwd_outputs
                    .iter()
                    .zip(pf.iter())
                    .map(|(h, p)| dot(h, p))
                    .sum();
                let lb: f64 = tape
                    .bwd_outputs
                    .iter()
                    .zip(pb.iter())
                    .map(|(h, p)| dot(h, p))
                    .sum();
                lf + lb
            },
            &analytic,
        );
        assert!(rel <= 1e-4, "rel err {rel}");
    }

    #[test]
    fn input_gradients_match_finite_differences() {
        let mut rng = rng_from_seed(25);
        let bi = BiLstm::glorot(2, 3, 1, &mut rng);
        let mut inputs = seq(&mut rng, 4, 2);
        let pf = seq(&mut rng, 4, 3);
        let pb = seq(&mut rng, 4, 3);
        let loss = |m: &BiLstm, inputs: &[Vec<f64>]| -> f64 {
            let tape = m.forward(inputs).unwrap();
            tape.fwd_outputs
                .iter()
                .zip(pf.iter())
                .map(|(h, p)| dot(h, p))
                .sum::<f64>()
                + tape
                    .bwd_outputs
                    .iter()
                    .zip(pb.iter())
                    .map(|(h, p)| dot(h, p))
                    .sum::<f64>()
        };
        let tape = bi.forward(&inputs).unwrap();
        let mut grad = bi.zeros_like();
        let d_in = bi.backward(&tape, &pf, &pb, &mut grad);
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        for t in 0..inputs.len() {
            for i in 0..2 {
                let orig = inputs[t][i];
                inputs[t][i] = orig + eps;
                let up = loss(&bi, &inputs);
                inputs[t][i] = orig - eps;
                let dn = loss(&bi, &inputs);
                inputs[t][i] = orig;
                let fd = (up - dn) / (2.0 * eps);
                let denom = fd.abs().max(d_in[t][i].abs()).max(1e-8);
                worst = worst.max((fd - d_in[t][i]).abs() / denom);
            }
        }
        assert!(worst <= 1e-4, "input grad rel err {worst}");
    }
}
