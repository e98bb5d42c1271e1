//! Dense feed-forward network with cached forward pass and backpropagation.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::FeatureVector;

pub const LEAKY_RELU_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    LeakyRelu,
    Sigmoid,
    Tanh,
    Linear,
}

/// Logistic function kept strictly inside (0, 1) in floating point.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_RELU_SLOPE * x
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if y > 0.0 {
                    1.0
                } else {
                    LEAKY_RELU_SLOPE
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Activation::LeakyRelu => 0,
            Activation::Sigmoid => 1,
            Activation::Tanh => 2,
            Activation::Linear => 3,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => Activation::LeakyRelu,
            1 => Activation::Sigmoid,
            2 => Activation::Tanh,
            3 => Activation::Linear,
            _ => return None,
        })
    }
}

/// Affine map followed by an activation. `weights` is `inputs × outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.ncols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    layers: Vec<Dense>,
}

/// Activations recorded by [`DenseNet::forward_cached`]; `values[0]` is the
/// input batch and `values[i + 1]` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    values: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.values.last().expect("cache holds at least the input")
    }
}

/// Per-layer `(weight, bias)` gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.weights.raw_dim()), Array1::zeros(l.biases.len())))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in &self.layers {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }
}

impl DenseNet {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for l in &layers {
            if l.biases.len() != l.output_dim() {
                return Err(Error::dim(l.output_dim(), l.biases.len()));
            }
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::dim(pair[0].output_dim(), pair[1].input_dim()));
            }
        }
        Ok(DenseNet { layers })
    }

    /// Glorot-uniform weights, zero biases. `dims` lists every layer width
    /// including input and output.
    pub fn init<R: Rng + ?Sized>(dims: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(dims.len() >= 2, "need input and output widths");
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-limit..limit));
                Dense {
                    weights,
                    biases: Array1::zeros(fan_out),
                    activation: if i + 2 == dims.len() { output } else { hidden },
                }
            })
            .collect();
        DenseNet { layers }
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn forward(&self, x: &FeatureVector) -> Result<FeatureVector> {
        if x.dim() != self.input_dim() {
            return Err(Error::dim(self.input_dim(), x.dim()));
        }
        let batch = Array2::from_shape_vec((1, x.dim()), x.values().to_vec()).expect("shape");
        let out = self.forward_batch(&batch);
        FeatureVector::new(out.into_raw_vec_and_offset().0)
    }

    /// Row-per-sample forward pass without caching.
    /// Forward pass over one raw row; panics on a dimension mismatch.
    pub fn forward_row(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for l in &self.layers {
            let mut next = l.biases.to_vec();
            for (xi, wrow) in cur.iter().zip(l.weights.rows()) {
                for (o, w) in next.iter_mut().zip(wrow) {
                    *o += xi * w;
                }
            }
            next.iter_mut().for_each(|v| *v = l.activation.apply(*v));
            cur = next;
        }
        cur
    }

    pub fn forward_batch(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut h = x.to_owned();
        for l in &self.layers {
            h = affine(&h, l);
        }
        h
    }

    pub fn forward_cached(&self, x: Array2<f64>) -> ForwardCache {
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x);
        for l in &self.layers {
            let next = affine(values.last().unwrap(), l);
            values.push(next);
        }
        ForwardCache { values }
    }

    /// Backpropagates `grad_output` (dL/d output, one row per sample).
    /// Returns parameter gradients and dL/d input.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &Array2<f64>) -> (Gradients, Array2<f64>) {
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut grad = grad_output.to_owned();
        for (i, l) in self.layers.iter().enumerate().rev() {
            let out = &cache.values[i + 1];
            let input = &cache.values[i];
            let act = l.activation;
            grad.zip_mut_with(out, |g, &y| *g *= act.derivative_from_output(y));
            let dw = input.t().dot(&grad);
            let db = grad.sum_axis(Axis(0));
            let next = grad.dot(&l.weights.t());
            layers.push((dw, db));
            grad = next;
        }
        layers.reverse();
        (Gradients { layers }, grad)
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.biases.iter().copied());
        }
        out
    }

    /// Visits every parameter mutably in the order of [`Self::params_flat`].
    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(&mut f);
            l.biases.iter_mut().for_each(&mut f);
        }
    }

    pub fn clip_params(&mut self, bound: f64) {
        self.for_each_param_mut(|p| *p = p.clamp(-bound, bound));
    }
}

fn affine(x: &Array2<f64>, l: &Dense) -> Array2<f64> {
    let mut h = x.dot(&l.weights);
    h += &l.biases;
    let act = l.activation;
    h.mapv_inplace(|v| act.apply(v));
    h
}
