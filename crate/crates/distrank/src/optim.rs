//! Plain SGD with a cyclic cosine-annealed learning rate, and the
//! mini-batch training loop over ordinal pairs.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::RankingDataset;
use crate::error::{Error, Result};
use crate::metrics::whdr;
use crate::scorer::{Parameterization, ScorerParams, DEFAULT_EPSILON, DEFAULT_HIDDEN_WIDTH};

/// Cyclic cosine annealing: decays from `lr_max` to `lr_min` over one
/// cycle and restarts at `lr_max`.
pub fn cosine_lr(step: usize, steps_per_cycle: usize, lr_max: f64, lr_min: f64) -> f64 {
    assert!(steps_per_cycle >= 1, "steps_per_cycle must be >= 1");
    let phase = (step % steps_per_cycle) as f64 / steps_per_cycle as f64;
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (std::f64::consts::PI * phase).cos())
}

/// One gradient-descent update: theta <- theta - lr * grad. No momentum.
pub fn sgd_step(params: &mut ScorerParams, grad: &[f64], lr: f64) -> Result<()> {
    if grad.len() != params.theta().len() {
        return Err(Error::InvalidArgument(format!(
            "gradient length {} does not match parameter count {}",
            grad.len(),
            params.theta().len()
        )));
    }
    if let Some(pos) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient {
            detail: Some(format!("component {pos} is {}", grad[pos])),
        });
    }
    for (theta, g) in params.theta_mut().iter_mut().zip(grad) {
        *theta -= lr * g;
    }
    Ok(())
}

/// Training hyperparameters. Defaults follow the training protocol used
/// throughout: batches of 8 pairs, learning rate cycling in
/// [1e-7, 1e-3] with a 5-epoch cosine cycle, plain SGD.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_max: f64,
    pub lr_min: f64,
    pub cycle_epochs: usize,
    pub seed: u64,
    pub parameterization: Parameterization,
    pub hidden_width: Option<usize>,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 25,
            batch_size: 8,
            lr_max: 1e-3,
            lr_min: 1e-7,
            cycle_epochs: 5,
            seed: 7,
            parameterization: Parameterization::Reciprocal,
            hidden_width: Some(DEFAULT_HIDDEN_WIDTH),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl TrainConfig {
    /// Rejects configurations the loop cannot run. A zero learning rate is
    /// allowed (useful as a no-op baseline), but the range must be ordered
    /// and nonnegative.
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if self.cycle_epochs < 1 {
            return Err(Error::InvalidArgument("cycle epochs must be >= 1".into()));
        }
        if !self.lr_max.is_finite() || !self.lr_min.is_finite() {
            return Err(Error::InvalidArgument("learning rates must be finite".into()));
        }
        if self.lr_min < 0.0 || self.lr_max < self.lr_min {
            return Err(Error::InvalidArgument(format!(
                "learning-rate range must satisfy lr_max >= lr_min >= 0, got [{}, {}]",
                self.lr_min, self.lr_max
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean pair loss over the epoch's batches (pair-weighted).
    pub train_loss: f64,
    /// WHDR on the held-out set, when one was provided.
    pub heldout_whdr: Option<f64>,
    /// Learning rate of the epoch's final step.
    pub lr: f64,
}

/// Why training stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub epoch: usize,
    pub step: usize,
    pub detail: String,
}

/// Final parameters, per-epoch history, and the divergence report if the
/// run was cut short.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: ScorerParams,
    pub history: Vec<EpochRecord>,
    pub divergence: Option<Divergence>,
}

impl TrainOutput {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }
}

/// Mini-batch SGD over the training pairs, shuffled each epoch with a
/// seeded generator. Non-finite losses, gradients, or head outputs are
/// reported as a [`Divergence`] instead of crashing; the history up to
/// that point is preserved.
pub fn train(
    train_set: &RankingDataset,
    heldout: Option<&RankingDataset>,
    config: &TrainConfig,
) -> Result<TrainOutput> {
    config.validate()?;
    if train_set.pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "training requires at least one pair".into(),
        ));
    }
    let feature_dim = train_set.feature_dim().ok_or_else(|| {
        Error::InvalidArgument("training requires at least one item".into())
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ScorerParams::init(
        feature_dim,
        config.hidden_width,
        config.parameterization,
        config.epsilon,
        &mut rng,
    )?;

    let features: Vec<&[f64]> = train_set.items.iter().map(|it| it.features.as_slice()).collect();
    let heldout_features: Option<Vec<&[f64]>> =
        heldout.map(|ds| ds.items.iter().map(|it| it.features.as_slice()).collect());

    let n_pairs = train_set.pairs.len();
    let batches_per_epoch = n_pairs.div_ceil(config.batch_size);
    let steps_per_cycle = (config.cycle_epochs * batches_per_epoch).max(1);

    let mut order: Vec<usize> = (0..n_pairs).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut divergence = None;
    let mut step = 0usize;

    'epochs: for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut pairs_seen = 0usize;
        let mut last_lr = cosine_lr(step, steps_per_cycle, config.lr_max, config.lr_min);

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&k| train_set.pairs[k]).collect();
            let lr = cosine_lr(step, steps_per_cycle, config.lr_max, config.lr_min);
            last_lr = lr;
            let result = params
                .backward(&features, &batch)
                .and_then(|g| {
                    if g.loss.is_finite() {
                        Ok(g)
                    } else {
                        Err(Error::NonFiniteGradient {
                            detail: Some(format!("batch loss is {}", g.loss)),
                        })
                    }
                })
                .and_then(|g| {
                    sgd_step(&mut params, &g.grad, lr)?;
                    Ok(g)
                });
            match result {
                Ok(g) => {
                    loss_sum += g.loss * batch.len() as f64;
                    pairs_seen += batch.len();
                    step += 1;
                }
                Err(err) => {
                    divergence = Some(Divergence {
                        epoch,
                        step,
                        detail: err.to_string(),
                    });
                    history.push(EpochRecord {
                        epoch,
                        train_loss: if pairs_seen > 0 {
                            loss_sum / pairs_seen as f64
                        } else {
                            f64::NAN
                        },
                        heldout_whdr: None,
                        lr: last_lr,
                    });
                    break 'epochs;
                }
            }
        }

        let heldout_whdr = match (heldout, &heldout_features) {
            (Some(ds), Some(feats)) => {
                let scores = params.forward_all(feats)?;
                Some(whdr(&ds.pairs, &scores)?)
            }
            _ => None,
        };
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / pairs_seen as f64,
            heldout_whdr,
            lr: last_lr,
        });
    }

    Ok(TrainOutput {
        params,
        history,
        divergence,
    })
}
