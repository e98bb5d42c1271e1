//! First-order optimizers over [`DenseNet`] parameters.

use super::net::{DenseNet, Gradients};

pub trait Optimizer {
    fn step(&mut self, net: &mut DenseNet, grads: &Gradients);
}

#[derive(Debug, Clone)]
pub struct Sgd {
    pub learning_rate: f64,
}

impl Optimizer for Sgd {
    fn step(&mut self, net: &mut DenseNet, grads: &Gradients) {
        for (l, (dw, db)) in net.layers_mut().iter_mut().zip(&grads.layers) {
            l.weights.scaled_add(-self.learning_rate, dw);
            l.biases.scaled_add(-self.learning_rate, db);
        }
    }
}

fn zero_state(net: &DenseNet) -> Vec<f64> {
    vec![0.0; net.n_params()]
}

/// Visits `(param, grad)` pairs in flat parameter order.
fn zip_params(net: &mut DenseNet, grads: &Gradients, mut f: impl FnMut(usize, &mut f64, f64)) {
    let mut i = 0;
    for (l, (dw, db)) in net.layers_mut().iter_mut().zip(&grads.layers) {
        for (p, &g) in l.weights.iter_mut().zip(dw.iter()) {
            f(i, p, g);
            i += 1;
        }
        for (p, &g) in l.biases.iter_mut().zip(db.iter()) {
            f(i, p, g);
            i += 1;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: zero_state(net),
            v: zero_state(net),
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, net: &mut DenseNet, grads: &Gradients) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let (lr, eps) = (self.learning_rate, self.eps);
        let (m, v) = (&mut self.m, &mut self.v);
        zip_params(net, grads, |i, p, g| {
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            *p -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
        });
    }
}

#[derive(Debug, Clone)]
pub struct RmsProp {
    learning_rate: f64,
    decay: f64,
    eps: f64,
    s: Vec<f64>,
}

impl RmsProp {
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        RmsProp {
            learning_rate,
            decay: 0.9,
            eps: 1e-8,
            s: zero_state(net),
        }
    }
}

impl Optimizer for RmsProp {
    fn step(&mut self, net: &mut DenseNet, grads: &Gradients) {
        let (lr, decay, eps) = (self.learning_rate, self.decay, self.eps);
        let s = &mut self.s;
        zip_params(net, grads, |i, p, g| {
            s[i] = decay * s[i] + (1.0 - decay) * g * g;
            *p -= lr * g / (s[i].sqrt() + eps);
        });
    }
}
