//! Stacked GRU with backpropagation through time.
//!
//! Gate convention: z = sigmoid(Wz x + Uz h + bz), r = sigmoid(Wr x + Ur h + br),
//! candidate = tanh(Wh x + Uh (r*h) + bh), h' = (1-z)*h + z*candidate.
//! Dropout acts on non-recurrent connections only: each layer's output sequence
//! is masked on the way up, while the recurrent state stays intact.

use rand::Rng;

use super::init::glorot_uniform;
use super::matrix::{add_assign, Matrix};
use super::sigmoid;
use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct GruCell {
    pub wz: Matrix,
    pub uz: Matrix,
    pub bz: Vec<f64>,
    pub wr: Matrix,
    pub ur: Matrix,
    pub br: Vec<f64>,
    pub wh: Matrix,
    pub uh: Matrix,
    pub bh: Vec<f64>,
}

impl GruCell {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruCell {
            wz: Matrix::zeros(hidden, input),
            uz: Matrix::zeros(hidden, hidden),
            bz: vec![0.0; hidden],
            wr: Matrix::zeros(hidden, input),
            ur: Matrix::zeros(hidden, hidden),
            br: vec![0.0; hidden],
            wh: Matrix::zeros(hidden, input),
            uh: Matrix::zeros(hidden, hidden),
            bh: vec![0.0; hidden],
        }
    }

    pub fn glorot(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut cell = GruCell::zeros(input, hidden);
        for w in [&mut cell.wz, &mut cell.wr, &mut cell.wh] {
            glorot_uniform(w, input, hidden, rng);
        }
        for u in [&mut cell.uz, &mut cell.ur, &mut cell.uh] {
            glorot_uniform(u, hidden, hidden, rng);
        }
        cell
    }

    pub fn hidden_dim(&self) -> usize {
        self.wz.rows
    }

    fn step(&self, x: &[f64], h: &[f64], cache: &mut StepCache) -> Vec<f64> {
        let hid = self.hidden_dim();
        let mut z = self.bz.clone();
        self.wz.matvec_add(x, &mut z);
        self.uz.matvec_add(h, &mut z);
        z.iter_mut().for_each(|v| *v = sigmoid(*v));

        let mut r = self.br.clone();
        self.wr.matvec_add(x, &mut r);
        self.ur.matvec_add(h, &mut r);
        r.iter_mut().for_each(|v| *v = sigmoid(*v));

        let rh: Vec<f64> = r.iter().zip(h.iter()).map(|(a, b)| a * b).collect();
        let mut hh = self.bh.clone();
        self.wh.matvec_add(x, &mut hh);
        self.uh.matvec_add(&rh, &mut hh);
        hh.iter_mut().for_each(|v| *v = v.tanh());

        let mut h_new = vec![0.0; hid];
        for i in 0..hid {
            h_new[i] = (1.0 - z[i]) * h[i] + z[i] * hh[i];
        }
        cache.x = x.to_vec();
        cache.h_prev = h.to_vec();
        cache.z = z;
        cache.r = r;
        cache.rh = rh;
        cache.hh = hh;
        h_new
    }

    /// Backward through one step. `g` is dL/dh_new including the carry from
    /// step t+1; returns (dL/dx, dL/dh_prev) and accumulates into `grad`.
    fn step_backward(&self, cache: &StepCache, g: &[f64], grad: &mut GruCell) -> (Vec<f64>, Vec<f64>) {
        let hid = self.hidden_dim();
        let StepCache { x, h_prev, z, r, rh, hh } = cache;

        let mut dh = vec![0.0; hid];
        let mut dhh_pre = vec![0.0; hid];
        let mut dz_pre = vec![0.0; hid];
        for i in 0..hid {
            let dz = g[i] * (hh[i] - h_prev[i]);
            let dhh = g[i] * z[i];
            dh[i] = g[i] * (1.0 - z[i]);
            dhh_pre[i] = dhh * (1.0 - hh[i] * hh[i]);
            dz_pre[i] = dz * z[i] * (1.0 - z[i]);
        }

        grad.wh.add_outer(&dhh_pre, x);
        grad.uh.add_outer(&dhh_pre, rh);
        add_assign(&mut grad.bh, &dhh_pre);

        let mut drh = vec![0.0; hid];
        self.uh.tvec_add(&dhh_pre, &mut drh);
        let mut dr_pre = vec![0.0; hid];
        for i in 0..hid {
            let dr = drh[i] * h_prev[i];
            dh[i] += drh[i] * r[i];
            dr_pre[i] = dr * r[i] * (1.0 - r[i]);
        }

        grad.wz.add_outer(&dz_pre, x);
        grad.uz.add_outer(&dz_pre, h_prev);
        add_assign(&mut grad.bz, &dz_pre);
        grad.wr.add_outer(&dr_pre, x);
        grad.ur.add_outer(&dr_pre, h_prev);
        add_assign(&mut grad.br, &dr_pre);

        self.uz.tvec_add(&dz_pre, &mut dh);
        self.ur.tvec_add(&dr_pre, &mut dh);

        let mut dx = vec![0.0; self.wz.cols];
        self.wz.tvec_add(&dz_pre, &mut dx);
        self.wr.tvec_add(&dr_pre, &mut dx);
        self.wh.tvec_add(&dhh_pre, &mut dx);
        (dx, dh)
    }

    pub fn params(&self) -> Vec<&[f64]> {
        vec![
            &self.wz.data, &self.uz.data, &self.bz,
            &self.wr.data, &self.ur.data, &self.br,
            &self.wh.data, &self.uh.data, &self.bh,
        ]
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            &mut self.wz.data, &mut self.uz.data, &mut self.bz,
            &mut self.wr.data, &mut self.ur.data, &mut self.br,
            &mut self.wh.data, &mut self.uh.data, &mut self.bh,
        ]
    }
}

#[derive(Debug, Clone, Default)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    rh: Vec<f64>,
    hh: Vec<f64>,
}

/// Stack of GRU layers; layer l+1 consumes layer l's hidden sequence.
#[derive(Debug, Clone)]
pub struct Gru {
    pub layers: Vec<GruCell>,
}

/// Forward-pass record needed for backprop.
pub struct GruTape {
    steps: Vec<Vec<StepCache>>,
    masks: Vec<Vec<Vec<f64>>>,
    /// Output sequence of the top layer after any dropout.
    pub outputs: Vec<Vec<f64>>,
}

impl Gru {
    pub fn glorot(input: usize, hidden: usize, layers: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(layers >= 1, "layer count must be at least 1");
        let mut cells = Vec::with_capacity(layers);
        cells.push(GruCell::glorot(input, hidden, rng));
        for _ in 1..layers {
            cells.push(GruCell::glorot(hidden, hidden, rng));
        }
        Gru { layers: cells }
    }

    pub fn zeros_like(&self) -> Gru {
        Gru {
            layers: self
                .layers
                .iter()
                .map(|c| GruCell::zeros(c.wz.cols, c.hidden_dim()))
                .collect(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers.last().map(|c| c.hidden_dim()).unwrap_or(0)
    }

    /// Runs the stack over `inputs` from h0 = 0. With `dropout = Some((rate, rng))`
    /// each layer's outputs get an inverted-dropout mask recorded on the tape.
    pub fn forward(
        &self,
        inputs: &[Vec<f64>],
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<GruTape> {
        if inputs.is_empty() {
            return Err(Error::input("empty input sequence"));
        }
        let n = inputs.len();
        let mut steps = Vec::with_capacity(self.layers.len());
        let mut masks: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.layers.len());
        let mut current: Vec<Vec<f64>> = inputs.to_vec();
        let mut drop = dropout;
        for cell in &self.layers {
            let hid = cell.hidden_dim();
            let mut layer_steps = vec![StepCache::default(); n];
            let mut h = vec![0.0; hid];
            let mut outputs = Vec::with_capacity(n);
            for (t, x) in current.iter().enumerate() {
                h = cell.step(x, &h, &mut layer_steps[t]);
                outputs.push(h.clone());
            }
            let layer_masks = match &mut drop {
                Some((rate, rng)) if *rate > 0.0 => {
                    let keep = 1.0 - *rate;
                    let mut ms = Vec::with_capacity(n);
                    for out in outputs.iter_mut() {
                        let mask: Vec<f64> = (0..hid)
                            .map(|_| if rng.gen::<f64>() < *rate { 0.0 } else { 1.0 / keep })
                            .collect();
                        for (o, m) in out.iter_mut().zip(mask.iter()) {
                            *o *= m;
                        }
                        ms.push(mask);
                    }
                    ms
                }
                _ => Vec::new(),
            };
            steps.push(layer_steps);
            masks.push(layer_masks);
            current = outputs;
        }
        Ok(GruTape { steps, masks, outputs: current })
    }

    /// Backward through the stack. `d_outputs[t]` is dL/d(top output t); entries
    /// may be empty vectors meaning zero. Accumulates into `grad` and returns
    /// dL/d(input t) for the embedding layer underneath.
    pub fn backward(&self, tape: &GruTape, d_outputs: &[Vec<f64>], grad: &mut Gru) -> Vec<Vec<f64>> {
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
            let layer_masks = &tape.masks[l];
            if !layer_masks.is_empty() {
                for (g, m) in d_above.iter_mut().zip(layer_masks.iter()) {
                    for (gv, mv) in g.iter_mut().zip(m.iter()) {
                        *gv *= mv;
                    }
                }
            }
            let mut d_below: Vec<Vec<f64>> = vec![Vec::new(); n];
            let mut carry = vec![0.0; cell.hidden_dim()];
            for t in (0..n).rev() {
                let mut g = d_above[t].clone();
                add_assign(&mut g, &carry);
                let (dx, dh_prev) = cell.step_backward(&tape.steps[l][t], &g, &mut grad.layers[l]);
                d_below[t] = dx;
                carry = dh_prev;
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
