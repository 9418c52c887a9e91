//! Calibration measurement for pairwise relation probabilities: binning,
//! ECE / MCE (AdaECE is ECE over equal-mass bins), and reliability tables.
//!
//! Outcomes treat relation +1 as the positive class: an outcome's
//! `probability` is the predicted P(r = +1) and `correct` records whether
//! the observed relation was the positive class, so a calibrated model
//! has per-bin positive rates matching mean predicted probability.

use crate::error::{Error, Result};
use crate::loss::{prob_farther, GaussianScore};
use crate::metrics::OrdinalPair;

/// Bin count used for ECE / AdaECE / MCE reports.
pub const DEFAULT_ECE_BINS: usize = 15;
/// Bin count used for reliability tables.
pub const DEFAULT_RELIABILITY_BINS: usize = 25;

/// One probabilistic prediction and its observed outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredOutcome {
    /// Predicted probability of the positive class (relation +1).
    pub probability: f64,
    /// Whether the observed relation was the positive class.
    pub correct: bool,
}

/// How outcomes are grouped over the probability axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinningScheme {
    /// M equal intervals of [0, 1]; the final interval is closed so
    /// probability 1.0 lands in the last bin. Empty bins are kept with
    /// count 0 and their midpoint as mean confidence.
    EqualWidth,
    /// Outcomes sorted by probability and split into M contiguous groups
    /// whose sizes differ by at most one (earlier groups take the
    /// remainder). Outcomes with identical probability never straddle a
    /// boundary — they join the earlier group — so a constant collection
    /// forms a single effective bin.
    EqualMass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub count: usize,
    /// Fraction of positive outcomes in the bin (0 for an empty bin).
    pub accuracy: f64,
    /// Mean predicted probability in the bin (midpoint for an empty
    /// equal-width bin).
    pub mean_confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBins {
    pub bins: Vec<Bin>,
    pub total: usize,
    pub scheme: BinningScheme,
}

/// One row of a reliability table, in ascending confidence order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityRow {
    pub bin_index: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
    pub count: usize,
}

/// The distribution interpretation of P(r = +1): the farther-probability
/// of the pair computed from both means and both confidences.
pub fn prob_from_distribution(a: &GaussianScore, b: &GaussianScore) -> f64 {
    prob_farther(a, b)
}

/// The mean-difference interpretation of P(r = +1): per-pair mu_i - mu_j,
/// min-max normalized to [0, 1] over the whole collection. Output order
/// matches pair order.
pub fn prob_from_mu_diff(scores: &[GaussianScore], pairs: &[OrdinalPair]) -> Result<Vec<f64>> {
    let mut diffs = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let fetch = |index: usize| {
            scores.get(index).ok_or(Error::IndexOutOfRange {
                index,
                len: scores.len(),
            })
        };
        diffs.push(fetch(pair.i)?.mu() - fetch(pair.j)?.mu());
    }
    normalize_min_max(&diffs)
}

/// Min-max normalization of a difference collection onto [0, 1].
pub fn normalize_min_max(values: &[f64]) -> Result<Vec<f64>> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || !(hi > lo) {
        return Err(Error::DegenerateNormalization);
    }
    let span = hi - lo;
    Ok(values.iter().map(|v| (v - lo) / span).collect())
}

/// Outcomes for the distribution interpretation.
pub fn distribution_outcomes(
    scores: &[GaussianScore],
    pairs: &[OrdinalPair],
) -> Result<Vec<ScoredOutcome>> {
    pairs
        .iter()
        .map(|pair| {
            let fetch = |index: usize| {
                scores.get(index).ok_or(Error::IndexOutOfRange {
                    index,
                    len: scores.len(),
                })
            };
            Ok(ScoredOutcome {
                probability: prob_from_distribution(fetch(pair.i)?, fetch(pair.j)?),
                correct: pair.relation == 1,
            })
        })
        .collect()
}

/// Outcomes for the min-max mean-difference interpretation.
pub fn mu_diff_outcomes(
    scores: &[GaussianScore],
    pairs: &[OrdinalPair],
) -> Result<Vec<ScoredOutcome>> {
    let probs = prob_from_mu_diff(scores, pairs)?;
    Ok(probs
        .into_iter()
        .zip(pairs)
        .map(|(probability, pair)| ScoredOutcome {
            probability,
            correct: pair.relation == 1,
        })
        .collect())
}

/// Groups outcomes into calibration bins under the given scheme.
pub fn bin_outcomes(
    outcomes: &[ScoredOutcome],
    bins: usize,
    scheme: BinningScheme,
) -> Result<CalibrationBins> {
    if bins < 1 {
        return Err(Error::InvalidArgument("bin count must be >= 1".into()));
    }
    if outcomes.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot bin an empty outcome list".into(),
        ));
    }
    for o in outcomes {
        if !o.probability.is_finite() || !(0.0..=1.0).contains(&o.probability) {
            return Err(Error::InvalidArgument(format!(
                "outcome probability {} outside [0, 1]",
                o.probability
            )));
        }
    }

    let built = match scheme {
        BinningScheme::EqualWidth => {
            let mut counts = vec![0usize; bins];
            let mut hits = vec![0usize; bins];
            let mut conf = vec![0.0f64; bins];
            for o in outcomes {
                let idx = ((o.probability * bins as f64) as usize).min(bins - 1);
                counts[idx] += 1;
                hits[idx] += o.correct as usize;
                conf[idx] += o.probability;
            }
            (0..bins)
                .map(|k| {
                    if counts[k] == 0 {
                        Bin {
                            count: 0,
                            accuracy: 0.0,
                            mean_confidence: (k as f64 + 0.5) / bins as f64,
                        }
                    } else {
                        Bin {
                            count: counts[k],
                            accuracy: hits[k] as f64 / counts[k] as f64,
                            mean_confidence: conf[k] / counts[k] as f64,
                        }
                    }
                })
                .collect()
        }
        BinningScheme::EqualMass => {
            let mut order: Vec<usize> = (0..outcomes.len()).collect();
            order.sort_by(|&a, &b| {
                outcomes[a]
                    .probability
                    .partial_cmp(&outcomes[b].probability)
                    .expect("probabilities are finite")
                    .then(a.cmp(&b))
            });
            let n = outcomes.len();
            let base = n / bins;
            let extra = n % bins;
            let mut built = Vec::with_capacity(bins);
            let mut start = 0;
            for k in 0..bins {
                let target = base + usize::from(k < extra);
                let mut end = (start + target).min(n);
                // Equal probabilities stay in one bin.
                while end > start
                    && end < n
                    && outcomes[order[end]].probability == outcomes[order[end - 1]].probability
                {
                    end += 1;
                }
                let slice = &order[start..end];
                let size = slice.len();
                start = end;
                if size == 0 {
                    built.push(Bin {
                        count: 0,
                        accuracy: 0.0,
                        mean_confidence: 0.0,
                    });
                    continue;
                }
                let hits = slice.iter().filter(|&&i| outcomes[i].correct).count();
                let conf: f64 = slice.iter().map(|&i| outcomes[i].probability).sum();
                built.push(Bin {
                    count: size,
                    accuracy: hits as f64 / size as f64,
                    mean_confidence: conf / size as f64,
                });
            }
            built
        }
    };

    Ok(CalibrationBins {
        bins: built,
        total: outcomes.len(),
        scheme,
    })
}

/// Expected calibration error: the count-weighted mean absolute gap
/// between per-bin accuracy and mean confidence. Applying this to
/// equal-mass bins gives AdaECE.
pub fn ece(bins: &CalibrationBins) -> Result<f64> {
    if bins.total == 0 {
        return Err(Error::DegenerateMetric("ece over zero outcomes".into()));
    }
    Ok(bins
        .bins
        .iter()
        .map(|b| b.count as f64 / bins.total as f64 * (b.accuracy - b.mean_confidence).abs())
        .sum())
}

/// Maximum calibration error: the largest gap over nonempty bins.
pub fn mce(bins: &CalibrationBins) -> Result<f64> {
    bins.bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.accuracy - b.mean_confidence).abs())
        .fold(None, |acc: Option<f64>, gap| {
            Some(acc.map_or(gap, |a| a.max(gap)))
        })
        .ok_or_else(|| Error::DegenerateMetric("mce over empty bins".into()))
}

/// ECE of outcomes under equal-width binning.
pub fn ece_of(outcomes: &[ScoredOutcome], bins: usize) -> Result<f64> {
    ece(&bin_outcomes(outcomes, bins, BinningScheme::EqualWidth)?)
}

/// AdaECE: the ECE formula over equal-mass bins.
pub fn ada_ece_of(outcomes: &[ScoredOutcome], bins: usize) -> Result<f64> {
    ece(&bin_outcomes(outcomes, bins, BinningScheme::EqualMass)?)
}

/// MCE of outcomes under equal-width binning.
pub fn mce_of(outcomes: &[ScoredOutcome], bins: usize) -> Result<f64> {
    mce(&bin_outcomes(outcomes, bins, BinningScheme::EqualWidth)?)
}

/// Per-bin rows for a reliability plot, ascending in confidence. Empty
/// bins appear with count 0.
pub fn reliability_table(bins: &CalibrationBins) -> Vec<ReliabilityRow> {
    bins.bins
        .iter()
        .enumerate()
        .map(|(bin_index, b)| ReliabilityRow {
            bin_index,
            mean_confidence: b.mean_confidence,
            accuracy: b.accuracy,
            count: b.count,
        })
        .collect()
}
