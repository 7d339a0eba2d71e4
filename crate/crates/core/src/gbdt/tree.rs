//! Single regression tree fit to per-sample gradients and hessians.
//!
//! Exact greedy split search over presorted feature columns. Thresholds sit
//! at midpoints between adjacent distinct values; candidate order (feature
//! index, then position) breaks gain ties, which keeps the chosen partition
//! identical under any strictly increasing per-feature transform of the data.

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, features: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return *v,
                Node::Split { feature, threshold, left, right } => {
                    at = if features[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: f64,
    /// Learning rate folded into leaf values at build time.
    pub shrinkage: f64,
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Builder<'a> {
    features: &'a [Vec<f64>],
    g: &'a [f64],
    h: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

/// `sorted[f]` lists the node's sample indices in ascending feature-f order;
/// every list holds the same sample set.
pub fn fit_tree(
    features: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    sample_indices: &[usize],
    params: &TreeParams,
) -> DecisionTree {
    let n_features = features.first().map(Vec::len).unwrap_or(0);
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(n_features);
    for f in 0..n_features {
        let mut order = sample_indices.to_vec();
        order.sort_by(|&a, &b| {
            features[a][f]
                .partial_cmp(&features[b][f])
                .unwrap()
                .then(a.cmp(&b))
        });
        sorted.push(order);
    }
    let mut builder = Builder { features, g, h, params, nodes: Vec::new() };
    if n_features == 0 {
        let (gs, hs) = builder.sums(sample_indices);
        builder.nodes.push(Node::Leaf(builder.leaf_value(gs, hs)));
    } else {
        builder.grow(sorted, 0);
    }
    DecisionTree { nodes: builder.nodes }
}

impl<'a> Builder<'a> {
    fn sums(&self, samples: &[usize]) -> (f64, f64) {
        let mut gs = 0.0;
        let mut hs = 0.0;
        for &i in samples {
            gs += self.g[i];
            hs += self.h[i];
        }
        (gs, hs)
    }

    fn leaf_value(&self, gsum: f64, hsum: f64) -> f64 {
        -self.params.shrinkage * gsum / (hsum + self.params.lambda)
    }

    fn grow(&mut self, sorted: Vec<Vec<usize>>, depth: usize) -> usize {
        let n = sorted[0].len();
        let (gsum, hsum) = self.sums(&sorted[0]);
        let make_leaf = depth >= self.params.max_depth || n < 2 * self.params.min_leaf;
        let best = if make_leaf { None } else { self.find_split(&sorted, gsum, hsum) };
        match best {
            None => {
                let at = self.nodes.len();
                self.nodes.push(Node::Leaf(self.leaf_value(gsum, hsum)));
                at
            }
            Some(best) => {
                let mut left_sorted = Vec::with_capacity(sorted.len());
                let mut right_sorted = Vec::with_capacity(sorted.len());
                for order in &sorted {
                    let mut l = Vec::new();
                    let mut r = Vec::new();
                    for &i in order {
                        if self.features[i][best.feature] <= best.threshold {
                            l.push(i);
                        } else {
                            r.push(i);
                        }
                    }
                    left_sorted.push(l);
                    right_sorted.push(r);
                }
                let at = self.nodes.len();
                self.nodes.push(Node::Leaf(0.0));
                let left = self.grow(left_sorted, depth + 1);
                let right = self.grow(right_sorted, depth + 1);
                self.nodes[at] = Node::Split {
                    feature: best.feature,
                    threshold: best.threshold,
                    left,
                    right,
                };
                at
            }
        }
    }

    fn find_split(&self, sorted: &[Vec<usize>], gsum: f64, hsum: f64) -> Option<Best> {
        let n = sorted[0].len();
        let lambda = self.params.lambda;
        let parent = gsum * gsum / (hsum + lambda);
        let mut best: Option<Best> = None;
        for (f, order) in sorted.iter().enumerate() {
            let mut gl = 0.0;
            let mut hl = 0.0;
            for pos in 0..n - 1 {
                let i = order[pos];
                gl += self.g[i];
                hl += self.h[i];
                let v = self.features[i][f];
                let v_next = self.features[order[pos + 1]][f];
                if v == v_next {
                    continue;
                }
                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < self.params.min_leaf || n_right < self.params.min_leaf {
                    continue;
                }
                let gr = gsum - gl;
                let hr = hsum - hl;
                let gain =
                    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                // Zero-gain splits stay admissible: a symmetric pattern (XOR)
                // has no positive-gain root split yet separates one level down.
                // First candidate wins ties, so feature index then position
                // break them deterministically.
                if gain >= 0.0 && best.as_ref().map(|b| gain > b.gain).unwrap_or(true) {
                    best = Some(Best { gain, feature: f, threshold: 0.5 * (v + v_next) });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(max_depth: usize, min_leaf: usize) -> TreeParams {
        TreeParams { max_depth, min_leaf, lambda: 1.0, shrinkage: 1.0 }
    }

    #[test]
    fn constant_feature_gives_single_leaf() {
        let features = vec![vec![1.0], vec![1.0], vec![1.0], vec![1.0]];
        let g = vec![1.0, 1.0, -1.0, -1.0];
        let h = vec![1.0; 4];
        let tree = fit_tree(&features, &g, &h, &[0, 1, 2, 3], &params(3, 1));
        assert_eq!(tree.nodes.len(), 1);
        assert!(matches!(tree.nodes[0], Node::Leaf(v) if v == 0.0));
    }

    #[test]
    fn separates_one_dimensional_groups() {
        let features = vec![vec![0.0], vec![0.1], vec![1.0], vec![1.1]];
        let g = vec![1.0, 1.0, -1.0, -1.0];
        let h = vec![1.0; 4];
        let tree = fit_tree(&features, &g, &h, &[0, 1, 2, 3], &params(3, 1));
        assert!(tree.predict(&[0.05]) < 0.0);
        assert!(tree.predict(&[1.05]) > 0.0);
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn threshold_is_a_midpoint() {
        let features = vec![vec![0.0], vec![2.0]];
        let g = vec![4.0, -4.0];
        let h = vec![1.0, 1.0];
        let tree = fit_tree(&features, &g, &h, &[0, 1], &params(2, 1));
        match &tree.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, 1.0),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn min_leaf_blocks_unbalanced_splits() {
        let features = vec![vec![0.0], vec![1.0], vec![1.0], vec![1.0]];
        let g = vec![3.0, -1.0, -1.0, -1.0];
        let h = vec![1.0; 4];
        let tree = fit_tree(&features, &g, &h, &[0, 1, 2, 3], &params(3, 2));
        assert_eq!(tree.nodes.len(), 1);
    }

    #[test]
    fn depth_limit_respected() {
        let features: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        let g: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let h = vec![1.0; 16];
        let idx: Vec<usize> = (0..16).collect();
        let tree = fit_tree(&features, &g, &h, &idx, &params(2, 1));
        assert!(tree.depth() <= 2);
    }

    #[test]
    fn xor_solved_at_depth_two() {
        let features = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let g = vec![1.0, -1.0, -1.0, 1.0];
        let h = vec![1.0; 4];
        let tree = fit_tree(&features, &g, &h, &[0, 1, 2, 3], &params(2, 1));
        assert!(tree.predict(&[0.0, 0.0]) < 0.0);
        assert!(tree.predict(&[1.0, 1.0]) < 0.0);
        assert!(tree.predict(&[0.0, 1.0]) > 0.0);
        assert!(tree.predict(&[1.0, 0.0]) > 0.0);
    }
}
