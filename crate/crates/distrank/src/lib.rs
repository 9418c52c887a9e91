//! Pairwise ranking with per-item Gaussian scores.
//!
//! Each item gets a score distribution N(mu, sigma^2) with confidence
//! c = 1/sigma. Ordinal supervision ("item i outranks item j") is fit by
//! maximum likelihood through a pairwise loss on P(d_f > d_c), with
//! closed-form gradients, so a trained scorer reports both a ranking and
//! how sure it is about it.
//!
//! The crate provides:
//!
//! - [`special`]: stable `erf` / `erfc` / `erfcx` / `log_erfc`;
//! - [`loss`]: scores, farther-probabilities, the pairwise loss, and its
//!   analytic gradients with respect to means, sigmas, and confidences;
//! - [`metrics`]: relation prediction and the weighted disagreement rate;
//! - [`calibration`]: ECE / AdaECE / MCE and reliability tables for two
//!   probability readings of a pair (full distribution vs mean
//!   difference);
//! - [`scorer`] and [`optim`]: a small differentiable scorer with manual
//!   backpropagation, plain SGD, and a cyclic cosine learning-rate
//!   schedule;
//! - [`data`]: a seeded synthetic ordinal-data generator with known
//!   latent depths, item splits, and a JSON-Lines interchange format.

pub mod calibration;
pub mod data;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod optim;
pub mod scorer;
pub mod special;

pub use calibration::{
    bin_outcomes, ece, mce, reliability_table, BinningScheme, CalibrationBins, ScoredOutcome,
};
pub use data::{generate, load_jsonl, save_jsonl, split, GenConfig, Item, RankingDataset};
pub use error::{Error, Result};
pub use loss::{
    batch_loss, grad_confidence, grad_mu, grad_sigma, pair_loss, prob_farther, GaussianScore,
    PairStatistic,
};
pub use metrics::{predict_relation, whdr, OrdinalPair};
pub use optim::{cosine_lr, sgd_step, train, TrainConfig, TrainOutput};
pub use scorer::{Parameterization, ScorerParams};
