use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BotError;

/// Per-feature z-score parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: f64,
    pub stddev: f64,
}

impl Normalization {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.stddev
    }
}

/// Logistic scorer over z-scored features. Serialized as the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub normalization: Vec<Normalization>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<(), BotError> {
        let d = self.weights.len();
        if self.normalization.len() != d || self.feature_names.len() != d {
            return Err(BotError::ModelMismatch { expected: d, got: self.normalization.len() });
        }
        let finite = self.bias.is_finite()
            && self.weights.iter().all(|w| w.is_finite())
            && self.normalization.iter().all(|n| n.mean.is_finite() && n.stddev.is_finite() && n.stddev > 0.0);
        if !finite {
            return Err(BotError::NonFinite("model parameters".into()));
        }
        Ok(())
    }

    pub fn normalize(&self, x: &[f64]) -> Result<Vec<f64>, BotError> {
        if x.len() != self.dim() || self.normalization.len() != self.dim() {
            return Err(BotError::ModelMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(x.iter().zip(&self.normalization).map(|(v, n)| n.apply(*v)).collect())
    }

    /// sigmoid(w . normalize(x) + b)
    pub fn score(&self, x: &[f64]) -> Result<f64, BotError> {
        let z: f64 = self.normalize(x)?.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias;
        // sigmoid rounds to exactly 0 or 1 for |z| beyond ~37; keep scores strictly inside
        Ok(sigmoid(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    pub fn from_json(src: &str) -> Result<Self, BotError> {
        let m: LogisticModel = serde_json::from_str(src).map_err(|e| BotError::ModelFile(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on weights (not on the bias).
    pub l2: f64,
    /// Seeds the small random weight initialization.
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams { learning_rate: 0.5, epochs: 2000, l2: 1e-3, seed: 0, init_scale: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Regularized loss before each epoch's update, plus the final loss.
    pub loss_history: Vec<f64>,
}

/// Mean log-loss plus `l2/2 * |w|^2` over already normalized rows.
pub fn regularized_loss(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> f64 {
    loss_and_gradient(weights, bias, xs, ys, l2).0
}

/// Regularized loss, weight gradient and bias gradient.
///
/// Accumulation is sequential in row order so the result is bit-for-bit
/// reproducible.
pub fn loss_and_gradient(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> (f64, Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let z: f64 = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + bias;
        // -log p = softplus(-z), -log(1-p) = softplus(z)
        loss += if y { softplus(-z) } else { softplus(z) };
        let r = sigmoid(z) - if y { 1.0 } else { 0.0 };
        for (g, a) in gw.iter_mut().zip(x) {
            *g += r * a;
        }
        gb += r;
    }
    let reg: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (loss / n + reg, gw, gb / n)
}

/// Largest step for which full-batch gradient descent is guaranteed not to
/// increase the loss: 1/L with L = (1 + mean |x|^2)/4 + l2, an upper bound
/// on the Hessian's largest eigenvalue.
pub fn stable_step_bound(xs: &[Vec<f64>], l2: f64) -> f64 {
    let mean_sq = xs.iter().map(|x| x.iter().map(|a| a * a).sum::<f64>()).sum::<f64>() / xs.len().max(1) as f64;
    1.0 / (0.25 * (1.0 + mean_sq) + l2)
}

fn fit_normalization(rows: &[Vec<f64>], d: usize) -> Vec<Normalization> {
    let n = rows.len() as f64;
    (0..d)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            Normalization { mean, stddev: if sd > 1e-12 && sd.is_finite() { sd } else { 1.0 } }
        })
        .collect()
}

/// Full-batch gradient descent on the L2-regularized log-loss.
pub fn train(
    rows: &[Vec<f64>],
    labels: &[bool],
    feature_names: &[String],
    params: &TrainParams,
) -> Result<(LogisticModel, TrainReport), BotError> {
    if rows.len() != labels.len() {
        return Err(BotError::ModelMismatch { expected: rows.len(), got: labels.len() });
    }
    let d = feature_names.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(BotError::ModelMismatch { expected: d, got: bad.len() });
    }
    if rows.len() < 2 || labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(BotError::DegenerateData);
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(BotError::NonFinite("training features".into()));
    }
    let normalization = fit_normalization(rows, d);
    let xs: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().zip(&normalization).map(|(v, n)| n.apply(*v)).collect()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut weights: Vec<f64> =
        (0..d).map(|_| params.init_scale * (rand::Rng::gen::<f64>(&mut rng) * 2.0 - 1.0)).collect();
    let mut bias = 0.0;
    let mut history = Vec::with_capacity(params.epochs + 1);
    for epoch in 0..params.epochs {
        let (loss, gw, gb) = loss_and_gradient(&weights, bias, &xs, labels, params.l2);
        if !loss.is_finite() || gw.iter().any(|g| !g.is_finite()) {
            return Err(BotError::NonFinite(format!("loss diverged at epoch {epoch}")));
        }
        history.push(loss);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * gb;
    }
    let final_loss = regularized_loss(&weights, bias, &xs, labels, params.l2);
    if !final_loss.is_finite() || weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(BotError::NonFinite("final parameters".into()));
    }
    history.push(final_loss);
    let model = LogisticModel { feature_names: feature_names.to_vec(), weights, bias, normalization };
    Ok((model, TrainReport { loss_history: history }))
}
