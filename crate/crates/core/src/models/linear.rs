//! Linear models trained by full-batch (sub)gradient descent.

use serde::{Deserialize, Serialize};

use super::hyper::{MAX_ITER, REGULARIZATION};
use super::{Classifier, Design, HyperParams};
use crate::error::{Error, Result};
use crate::gan::{sigmoid, softplus};
use crate::types::LabeledRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearLoss {
    Logistic,
    Hinge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub loss: LinearLoss,
    /// Regularized objective at the start and after every iteration.
    pub loss_trace: Vec<f64>,
}

impl LinearModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

impl Classifier for LinearModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

fn margins(design: &Design, w: &[f64], b: f64, out: &mut [f64]) {
    for (z, row) in out.iter_mut().zip(design.rows()) {
        *z = b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
    }
}

fn half_sq_norm(w: &[f64]) -> f64 {
    0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

fn logistic_objective(z: &[f64], y: &[f64], w: &[f64], reg: f64) -> f64 {
    let data = z.iter().zip(y).map(|(&z, &y)| softplus(z) - y * z).sum::<f64>() / z.len() as f64;
    data + reg * half_sq_norm(w)
}

/// Largest eigenvalue of the second-moment matrix of `[x, 1]` by power iteration.
fn second_moment_spectral_norm(design: &Design) -> f64 {
    let d = design.d + 1;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..30 {
        let mut u = vec![0.0; d];
        for row in design.rows() {
            let dot = v[design.d] + row.iter().zip(&v).map(|(x, v)| x * v).sum::<f64>();
            u.iter_mut().zip(row).for_each(|(u, x)| *u += dot * x);
            u[design.d] += dot;
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt() / design.n as f64;
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        let scale = 1.0 / (norm * design.n as f64);
        v.iter_mut().zip(&u).for_each(|(v, u)| *v = u * scale);
    }
    lambda
}

/// L2-regularized logistic regression, `max_iter` (default 100) gradient
/// steps with `regularization` (default 0.01). The step size starts at the
/// inverse smoothness constant and halves whenever a step would raise the
/// objective, so the loss trace never increases.
pub fn fit_logistic_regression(train: &[LabeledRecord], hp: &HyperParams) -> Result<LinearModel> {
    let design = Design::two_class(train)?;
    let reg = hp.get_f64(REGULARIZATION, 0.01)?;
    let iters = hp.get_usize(MAX_ITER, 100)?;
    if reg < 0.0 {
        return Err(Error::Config("regularization must be non-negative".into()));
    }
    let (n, d) = (design.n, design.d);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut z = vec![0.0; n];
    let mut obj = logistic_objective(&z, &design.y, &w, reg);
    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(obj);

    let smoothness = 1.05 * 0.25 * second_moment_spectral_norm(&design) + reg;
    let mut step = if smoothness > 0.0 { 1.0 / smoothness } else { 1.0 };
    let mut gw = vec![0.0; d];
    let mut cand_w = vec![0.0; d];
    let mut cand_z = vec![0.0; n];
    for it in 0..iters {
        gw.iter_mut().zip(&w).for_each(|(g, w)| *g = reg * w);
        let mut gb = 0.0;
        for ((row, &zi), &yi) in design.rows().zip(&z).zip(&design.y) {
            let r = (sigmoid(zi) - yi) / n as f64;
            gw.iter_mut().zip(row).for_each(|(g, x)| *g += r * x);
            gb += r;
        }
        let mut accepted = false;
        for _ in 0..60 {
            cand_w.iter_mut().zip(w.iter().zip(&gw)).for_each(|(c, (w, g))| *c = w - step * g);
            let cand_b = b - step * gb;
            margins(&design, &cand_w, cand_b, &mut cand_z);
            let cand_obj = logistic_objective(&cand_z, &design.y, &cand_w, reg);
            if !cand_obj.is_finite() {
                return Err(Error::TrainingDiverged { epoch: it });
            }
            if cand_obj <= obj {
                std::mem::swap(&mut w, &mut cand_w);
                std::mem::swap(&mut z, &mut cand_z);
                b = cand_b;
                obj = cand_obj;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        trace.push(obj);
        if !accepted {
            // Stationary to machine precision.
            trace.resize(iters + 1, obj);
            break;
        }
    }
    Ok(LinearModel { weights: w, bias: b, loss: LinearLoss::Logistic, loss_trace: trace })
}

fn hinge_objective(z: &[f64], y: &[f64], w: &[f64], reg: f64) -> f64 {
    let data = z.iter().zip(y).map(|(&z, &y)| (1.0 - (2.0 * y - 1.0) * z).max(0.0)).sum::<f64>() / z.len() as f64;
    data + reg * half_sq_norm(w)
}

/// Linear SVM: hinge loss plus `regularization / 2 * |w|^2`, minimized by
/// `max_iter` full-batch subgradient steps of size `eta0 / sqrt(t + 1)` with
/// `eta0 = 1 / mean |[x, 1]|^2`. The iterate with the lowest objective is kept.
pub fn fit_linear_svm(train: &[LabeledRecord], hp: &HyperParams) -> Result<LinearModel> {
    let design = Design::two_class(train)?;
    let reg = hp.get_f64(REGULARIZATION, 0.01)?;
    let iters = hp.get_usize(MAX_ITER, 100)?;
    if reg < 0.0 {
        return Err(Error::Config("regularization must be non-negative".into()));
    }
    let (n, d) = (design.n, design.d);
    let mean_sq = design.rows().map(|r| 1.0 + r.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / n as f64;
    let eta0 = 1.0 / mean_sq;

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut z = vec![0.0; n];
    let mut obj = hinge_objective(&z, &design.y, &w, reg);
    let mut best = (obj, w.clone(), b);
    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(obj);
    let mut gw = vec![0.0; d];
    for t in 0..iters {
        gw.iter_mut().zip(&w).for_each(|(g, w)| *g = reg * w);
        let mut gb = 0.0;
        for ((row, &zi), &yi) in design.rows().zip(&z).zip(&design.y) {
            let s = 2.0 * yi - 1.0;
            if s * zi < 1.0 {
                gw.iter_mut().zip(row).for_each(|(g, x)| *g -= s * x / n as f64);
                gb -= s / n as f64;
            }
        }
        let eta = eta0 / ((t + 1) as f64).sqrt();
        w.iter_mut().zip(&gw).for_each(|(w, g)| *w -= eta * g);
        b -= eta * gb;
        margins(&design, &w, b, &mut z);
        obj = hinge_objective(&z, &design.y, &w, reg);
        if !obj.is_finite() {
            return Err(Error::TrainingDiverged { epoch: t });
        }
        trace.push(obj);
        if obj < best.0 {
            best = (obj, w.clone(), b);
        }
    }
    Ok(LinearModel { weights: best.1, bias: best.2, loss: LinearLoss::Hinge, loss_trace: trace })
}
