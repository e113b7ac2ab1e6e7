//! Fully connected Q-network with ReLU hidden layers and a linear head,
//! trained by minibatch gradient descent on the squared TD error.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out × in`.
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub layers: Vec<Dense>,
}

/// Parameter gradients, laid out like [`QNetwork::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Sgd,
    Adam,
}

impl QNetwork {
    /// Zero weights for the widths `sizes[0] → … → sizes[n]`.
    pub fn zeros(sizes: &[usize]) -> Self {
        let layers = sizes
            .windows(2)
            .map(|w| Dense { w: DMatrix::zeros(w[1], w[0]), b: DVector::zeros(w[1]) })
            .collect();
        Self { layers }
    }

    /// Uniform initialization in ±1/√fan_in for weights and biases.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.inputs() as f64).sqrt();
            for v in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                *v = rng.random_range(-bound..=bound);
            }
        }
        net
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs()];
        s.extend(self.layers.iter().map(Dense::outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn forward(&self, x: &[f64]) -> DVector<f64> {
        let mut h = DVector::from_column_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            h = &l.w * h + &l.b;
            if i < last {
                h.apply(|v| *v = v.max(0.0));
            }
        }
        h
    }

    /// Column-batched forward pass keeping every layer's output
    /// (post-activation for hidden layers).
    fn forward_batch(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.w * &acts[i];
            for mut col in z.column_iter_mut() {
                col += &l.b;
            }
            if i < last {
                z.apply(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    pub fn forward_many(&self, inputs: &[Vec<f64>]) -> DMatrix<f64> {
        let x = DMatrix::from_fn(self.input_dim(), inputs.len(), |r, c| inputs[c][r]);
        self.forward_batch(&x).pop().expect("at least one layer")
    }

    /// Mean over the batch of `(Q(s_n, a_n) - y_n)²` and its gradient.
    pub fn loss_and_gradients(&self, inputs: &[Vec<f64>], actions: &[usize], targets: &[f64]) -> (f64, Gradients) {
        let n = inputs.len();
        let x = DMatrix::from_fn(self.input_dim(), n, |r, c| inputs[c][r]);
        let acts = self.forward_batch(&x);
        let out = &acts[acts.len() - 1];
        let mut delta = DMatrix::zeros(out.nrows(), n);
        let mut loss = 0.0;
        for c in 0..n {
            let e = out[(actions[c], c)] - targets[c];
            loss += e * e;
            delta[(actions[c], c)] = 2.0 * e / n as f64;
        }
        loss /= n as f64;

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let gw = &delta * acts[i].transpose();
            let gb = delta.column_sum();
            if i > 0 {
                let mut back = self.layers[i].w.transpose() * &delta;
                back.zip_apply(&acts[i], |d, a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = back;
            }
            grads.push(Dense { w: gw, b: gb });
        }
        grads.reverse();
        (loss, Gradients { layers: grads })
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameters: per layer, weights row-major then biases.
    pub fn params(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "parameter count mismatch");
        let mut k = 0;
        for l in &mut self.layers {
            for r in 0..l.w.nrows() {
                for c in 0..l.w.ncols() {
                    l.w[(r, c)] = flat[k];
                    k += 1;
                }
            }
            for v in l.b.iter_mut() {
                *v = flat[k];
                k += 1;
            }
        }
    }

    pub fn copy_from(&mut self, other: &QNetwork) {
        self.layers.clone_from(&other.layers);
    }
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }
}

fn flatten(layers: &[Dense]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        for r in 0..l.w.nrows() {
            out.extend(l.w.row(r).iter());
        }
        out.extend(l.b.iter());
    }
    out
}

/// Gradient-descent optimizer over the flat parameter vector.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, params: usize) -> Self {
        let (m, v) = match kind {
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
            OptimizerKind::Adam => (vec![0.0; params], vec![0.0; params]),
        };
        Self { kind, lr, m, v, t: 0 }
    }

    pub fn step(&mut self, net: &mut QNetwork, grads: &Gradients) {
        let mut p = net.params();
        let g = grads.flat();
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in p.iter_mut().zip(&g) {
                    *p -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                const EPS: f64 = 1e-8;
                self.t += 1;
                let c1 = 1.0 - B1.powi(self.t);
                let c2 = 1.0 - B2.powi(self.t);
                for i in 0..p.len() {
                    self.m[i] = B1 * self.m[i] + (1.0 - B1) * g[i];
                    self.v[i] = B2 * self.v[i] + (1.0 - B2) * g[i] * g[i];
                    p[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + EPS);
                }
            }
        }
        net.set_params(&p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = QNetwork::zeros(&[5, 128, 128, 3]);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5, 0.1]).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_input_zero_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = QNetwork::random(&[5, 16, 16, 3], &mut rng);
        for l in &mut net.layers {
            l.b.fill(0.0);
        }
        assert_eq!(net.forward(&[0.0; 5]).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn hand_computed_chain() {
        let mut net = QNetwork::zeros(&[2, 2, 1]);
        net.layers[0].w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        net.layers[0].b = DVector::from_vec(vec![0.5, -3.0]);
        net.layers[1].w = DMatrix::from_row_slice(1, 2, &[2.0, 7.0]);
        net.layers[1].b = DVector::from_vec(vec![0.25]);
        // h = relu([1 + 4 + 0.5, -1 + 1 - 3]) = [5.5, 0]; q = 11 + 0.25
        assert_relative_eq!(net.forward(&[1.0, 2.0])[0], 11.25);
    }

    #[test]
    fn params_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = QNetwork::random(&[3, 4, 2], &mut rng);
        let mut other = QNetwork::zeros(&[3, 4, 2]);
        other.set_params(&net.params());
        assert_eq!(net, other);
        assert_eq!(net.param_count(), 3 * 4 + 4 + 4 * 2 + 2);
    }

    #[test]
    fn batch_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::random(&[5, 8, 8, 3], &mut rng);
        let xs: Vec<Vec<f64>> = (0..4).map(|k| (0..5).map(|j| (k * 5 + j) as f64 * 0.1 - 1.0).collect()).collect();
        let batch = net.forward_many(&xs);
        for (c, x) in xs.iter().enumerate() {
            let q = net.forward(x);
            for r in 0..3 {
                assert_relative_eq!(batch[(r, c)], q[r], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn init_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = QNetwork::random(&[5, 128, 128, 3], &mut rng);
        for l in &net.layers {
            let bound = 1.0 / (l.inputs() as f64).sqrt();
            assert!(l.w.iter().chain(l.b.iter()).all(|v| v.abs() <= bound));
        }
    }
}
