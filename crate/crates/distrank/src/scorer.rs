//! The differentiable scorer: a linear map or a one-hidden-layer tanh
//! network with two heads, one for the score mean and one for a strictly
//! positive output that is read as confidence (reciprocal mode) or as the
//! standard deviation directly (direct mode).
//!
//! Parameters live in one flat vector so gradient checking and SGD are
//! index arithmetic. Backpropagation is hand-written against the analytic
//! pair-loss gradients.

use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{grad_confidence, grad_mu, grad_sigma, pair_loss, GaussianScore};
use crate::metrics::OrdinalPair;

/// How the positive head output enters the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameterization {
    /// Head output is the confidence c = 1/sigma.
    Reciprocal,
    /// Head output is sigma itself.
    Direct,
}

impl std::str::FromStr for Parameterization {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reciprocal" => Ok(Self::Reciprocal),
            "direct" => Ok(Self::Direct),
            other => Err(format!(
                "unknown parameterization '{other}' (expected 'reciprocal' or 'direct')"
            )),
        }
    }
}

impl std::fmt::Display for Parameterization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Reciprocal => "reciprocal",
            Self::Direct => "direct",
        })
    }
}

/// Default floor added to the softplus head output.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Default hidden width.
pub const DEFAULT_HIDDEN_WIDTH: usize = 32;

/// Scorer parameters plus the layout needed to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerParams {
    feature_dim: usize,
    hidden_width: Option<usize>,
    parameterization: Parameterization,
    epsilon: f64,
    theta: Vec<f64>,
}

/// Loss and flat parameter gradient for one batch of pairs.
#[derive(Debug, Clone)]
pub struct BatchGradient {
    pub loss: f64,
    pub grad: Vec<f64>,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-item forward cache used by backpropagation.
struct ItemActivation {
    hidden: Option<Vec<f64>>,
    mu: f64,
    raw: f64,
    positive: f64,
}

impl ScorerParams {
    /// Number of parameters for a given layout.
    pub fn param_count(feature_dim: usize, hidden_width: Option<usize>) -> usize {
        match hidden_width {
            Some(h) => h * feature_dim + h + 2 * h + 2,
            None => 2 * feature_dim + 2,
        }
    }

    /// Seeded initialization, uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]
    /// per layer.
    pub fn init<R: Rng>(
        feature_dim: usize,
        hidden_width: Option<usize>,
        parameterization: Parameterization,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Self::validate_layout(feature_dim, hidden_width, epsilon)?;
        let mut theta = Vec::with_capacity(Self::param_count(feature_dim, hidden_width));
        match hidden_width {
            Some(h) => {
                let first = Uniform::new_inclusive(
                    -1.0 / (feature_dim as f64).sqrt(),
                    1.0 / (feature_dim as f64).sqrt(),
                );
                for _ in 0..h * feature_dim + h {
                    theta.push(first.sample(rng));
                }
                let head = Uniform::new_inclusive(-1.0 / (h as f64).sqrt(), 1.0 / (h as f64).sqrt());
                for _ in 0..2 * h + 2 {
                    theta.push(head.sample(rng));
                }
            }
            None => {
                let head = Uniform::new_inclusive(
                    -1.0 / (feature_dim as f64).sqrt(),
                    1.0 / (feature_dim as f64).sqrt(),
                );
                for _ in 0..2 * feature_dim + 2 {
                    theta.push(head.sample(rng));
                }
            }
        }
        Ok(Self {
            feature_dim,
            hidden_width,
            parameterization,
            epsilon,
            theta,
        })
    }

    /// All-zero parameters (useful as a fixed point in tests).
    pub fn zeros(
        feature_dim: usize,
        hidden_width: Option<usize>,
        parameterization: Parameterization,
        epsilon: f64,
    ) -> Result<Self> {
        Self::validate_layout(feature_dim, hidden_width, epsilon)?;
        Ok(Self {
            feature_dim,
            hidden_width,
            parameterization,
            epsilon,
            theta: vec![0.0; Self::param_count(feature_dim, hidden_width)],
        })
    }

    fn validate_layout(feature_dim: usize, hidden_width: Option<usize>, epsilon: f64) -> Result<()> {
        if feature_dim == 0 {
            return Err(Error::InvalidArgument("feature dimension must be >= 1".into()));
        }
        if hidden_width == Some(0) {
            return Err(Error::InvalidArgument("hidden width must be >= 1".into()));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be a positive finite floor, got {epsilon}"
            )));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn hidden_width(&self) -> Option<usize> {
        self.hidden_width
    }

    pub fn parameterization(&self) -> Parameterization {
        self.parameterization
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    // Flat layout offsets. Hidden: [w1 (h*d), b1 (h), w_mu (h), b_mu,
    // w_conf (h), b_conf]; linear: [w_mu (d), b_mu, w_conf (d), b_conf].
    fn head_dim(&self) -> usize {
        self.hidden_width.unwrap_or(self.feature_dim)
    }

    fn off_w_mu(&self) -> usize {
        match self.hidden_width {
            Some(h) => h * self.feature_dim + h,
            None => 0,
        }
    }

    fn off_b_mu(&self) -> usize {
        self.off_w_mu() + self.head_dim()
    }

    fn off_w_conf(&self) -> usize {
        self.off_b_mu() + 1
    }

    fn off_b_conf(&self) -> usize {
        self.off_w_conf() + self.head_dim()
    }

    fn activate(&self, features: &[f64]) -> Result<ItemActivation> {
        if features.len() != self.feature_dim {
            return Err(Error::ShapeMismatch {
                expected: self.feature_dim,
                got: features.len(),
            });
        }
        let hidden = self.hidden_width.map(|h| {
            let mut out = Vec::with_capacity(h);
            for k in 0..h {
                let row = &self.theta[k * self.feature_dim..(k + 1) * self.feature_dim];
                let mut pre = self.theta[h * self.feature_dim + k];
                for (w, x) in row.iter().zip(features) {
                    pre += w * x;
                }
                out.push(pre.tanh());
            }
            out
        });
        let inputs: &[f64] = hidden.as_deref().unwrap_or(features);
        let dim = self.head_dim();
        let mut mu = self.theta[self.off_b_mu()];
        let w_mu = &self.theta[self.off_w_mu()..self.off_w_mu() + dim];
        for (w, x) in w_mu.iter().zip(inputs) {
            mu += w * x;
        }
        let mut raw = self.theta[self.off_b_conf()];
        let w_conf = &self.theta[self.off_w_conf()..self.off_w_conf() + dim];
        for (w, x) in w_conf.iter().zip(inputs) {
            raw += w * x;
        }
        let positive = softplus(raw) + self.epsilon;
        Ok(ItemActivation {
            hidden,
            mu,
            raw,
            positive,
        })
    }

    /// Scores one feature vector. The positive head output is at least
    /// epsilon; in direct mode it is the standard deviation, otherwise the
    /// confidence.
    pub fn forward(&self, features: &[f64]) -> Result<GaussianScore> {
        let act = self.activate(features)?;
        self.score_from(&act)
    }

    fn score_from(&self, act: &ItemActivation) -> Result<GaussianScore> {
        let confidence = match self.parameterization {
            Parameterization::Reciprocal => act.positive,
            Parameterization::Direct => 1.0 / act.positive,
        };
        GaussianScore::new(act.mu, confidence)
    }

    /// Scores every feature vector in order.
    pub fn forward_all<F: AsRef<[f64]>>(&self, features: &[F]) -> Result<Vec<GaussianScore>> {
        features.iter().map(|f| self.forward(f.as_ref())).collect()
    }

    /// Mean pair loss over the batch and its gradient with respect to
    /// every parameter, composed from the analytic mean/confidence (or
    /// sigma) gradients and the layer Jacobians.
    pub fn backward<F: AsRef<[f64]>>(
        &self,
        features: &[F],
        pairs: &[OrdinalPair],
    ) -> Result<BatchGradient> {
        let mut grad = vec![0.0; self.theta.len()];
        if pairs.is_empty() {
            return Ok(BatchGradient { loss: 0.0, grad });
        }

        // Touched items, sorted for a deterministic accumulation order.
        let mut touched: Vec<usize> = pairs.iter().flat_map(|p| [p.i, p.j]).collect();
        touched.sort_unstable();
        touched.dedup();

        let mut activations = Vec::with_capacity(touched.len());
        let mut scores = Vec::with_capacity(touched.len());
        for &index in &touched {
            let item = features.get(index).ok_or(Error::IndexOutOfRange {
                index,
                len: features.len(),
            })?;
            let act = self.activate(item.as_ref())?;
            scores.push(self.score_from(&act)?);
            activations.push(act);
        }
        let slot = |index: usize| touched.binary_search(&index).expect("touched item");

        // Accumulate per-item loss gradients in score space.
        let mut d_mu = vec![0.0; touched.len()];
        let mut d_positive = vec![0.0; touched.len()];
        let mut loss_sum = 0.0;
        for pair in pairs {
            let (fi, ci) = match pair.relation {
                1 => (pair.i, pair.j),
                -1 => (pair.j, pair.i),
                other => {
                    return Err(Error::UnsupportedRelation {
                        value: other,
                        line: None,
                    })
                }
            };
            let (fs, cs) = (slot(fi), slot(ci));
            let farther = &scores[fs];
            let closer = &scores[cs];
            loss_sum += pair_loss(farther, closer);
            let (gmf, gmc) = grad_mu(farther, closer);
            d_mu[fs] += gmf;
            d_mu[cs] += gmc;
            let (gpf, gpc) = match self.parameterization {
                Parameterization::Reciprocal => grad_confidence(farther, closer),
                Parameterization::Direct => grad_sigma(farther, closer),
            };
            d_positive[fs] += gpf;
            d_positive[cs] += gpc;
        }
        let inv_n = 1.0 / pairs.len() as f64;
        let loss = loss_sum * inv_n;

        // Backpropagate through heads (and the hidden layer if present).
        let dim = self.head_dim();
        let (off_w_mu, off_b_mu) = (self.off_w_mu(), self.off_b_mu());
        let (off_w_conf, off_b_conf) = (self.off_w_conf(), self.off_b_conf());
        for (k, &index) in touched.iter().enumerate() {
            let act = &activations[k];
            let dmu = d_mu[k] * inv_n;
            let draw = d_positive[k] * inv_n * sigmoid(act.raw);
            let inputs: &[f64] = act.hidden.as_deref().unwrap_or(features[index].as_ref());
            for l in 0..dim {
                grad[off_w_mu + l] += dmu * inputs[l];
                grad[off_w_conf + l] += draw * inputs[l];
            }
            grad[off_b_mu] += dmu;
            grad[off_b_conf] += draw;

            if let (Some(h), Some(hidden)) = (self.hidden_width, act.hidden.as_ref()) {
                let x = features[index].as_ref();
                for unit in 0..h {
                    let dh = dmu * self.theta[off_w_mu + unit] + draw * self.theta[off_w_conf + unit];
                    let dpre = dh * (1.0 - hidden[unit] * hidden[unit]);
                    let row = unit * self.feature_dim;
                    for l in 0..self.feature_dim {
                        grad[row + l] += dpre * x[l];
                    }
                    grad[h * self.feature_dim + unit] += dpre;
                }
            }
        }

        Ok(BatchGradient { loss, grad })
    }

    /// Serializes to a versioned checkpoint file (JSON). Floats round-trip
    /// bit-exactly.
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = Checkpoint {
            version: CHECKPOINT_VERSION,
            feature_dim: self.feature_dim,
            hidden_width: self.hidden_width,
            parameterization: self.parameterization,
            epsilon: self.epsilon,
            theta: self.theta.clone(),
        };
        let body = serde_json::to_string(&file)
            .map_err(|e| Error::InvalidCheckpoint(e.to_string()))?;
        fs::write(path, body + "\n")?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let body = fs::read_to_string(path)?;
        let file: Checkpoint =
            serde_json::from_str(&body).map_err(|e| Error::InvalidCheckpoint(e.to_string()))?;
        if file.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidCheckpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                file.version, CHECKPOINT_VERSION
            )));
        }
        Self::validate_layout(file.feature_dim, file.hidden_width, file.epsilon)?;
        let expected = Self::param_count(file.feature_dim, file.hidden_width);
        if file.theta.len() != expected {
            return Err(Error::InvalidCheckpoint(format!(
                "parameter count {} does not match layout (expected {expected})",
                file.theta.len()
            )));
        }
        if file.theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCheckpoint("non-finite parameter".into()));
        }
        Ok(Self {
            feature_dim: file.feature_dim,
            hidden_width: file.hidden_width,
            parameterization: file.parameterization,
            epsilon: file.epsilon,
            theta: file.theta,
        })
    }
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    feature_dim: usize,
    hidden_width: Option<usize>,
    parameterization: Parameterization,
    epsilon: f64,
    theta: Vec<f64>,
}
