//! Test-time relation prediction and the weighted disagreement rate.

use crate::error::{Error, Result};
use crate::loss::GaussianScore;

/// A ground-truth ordinal relation between two items.
///
/// `relation` is +1 when item `i` outranks item `j` and -1 for the
/// reverse; equality relations are not representable and are rejected at
/// construction. `weight` is the annotation weight used by [`whdr`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdinalPair {
    pub i: usize,
    pub j: usize,
    pub relation: i8,
    pub weight: f64,
}

impl OrdinalPair {
    pub fn new(i: usize, j: usize, relation: i8, weight: f64) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidArgument(format!(
                "pair must reference two distinct items, got ({i}, {j})"
            )));
        }
        if relation != 1 && relation != -1 {
            return Err(Error::UnsupportedRelation {
                value: relation,
                line: None,
            });
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "pair weight must be finite and nonnegative, got {weight}"
            )));
        }
        Ok(Self {
            i,
            j,
            relation,
            weight,
        })
    }

    /// Unit-weight pair.
    pub fn unweighted(i: usize, j: usize, relation: i8) -> Result<Self> {
        Self::new(i, j, relation, 1.0)
    }
}

/// Predicted ordinal relation between two scored items: the comparison of
/// the two means decides, since P(d_a > d_b) > 1/2 exactly when
/// mu_a > mu_b. Returns 0 on an exact tie.
pub fn predict_relation(a: &GaussianScore, b: &GaussianScore) -> i8 {
    if a.mu() > b.mu() {
        1
    } else if a.mu() < b.mu() {
        -1
    } else {
        0
    }
}

/// Weighted human disagreement rate: the weighted fraction of pairs whose
/// predicted relation differs from the annotated one.
///
/// A predicted tie (relation 0) counts as a disagreement against any
/// ground truth. Accumulation is in fixed pair order.
pub fn whdr(pairs: &[OrdinalPair], scores: &[GaussianScore]) -> Result<f64> {
    let mut weight_total = 0.0;
    let mut weight_wrong = 0.0;
    for pair in pairs {
        let fetch = |index: usize| {
            scores.get(index).ok_or(Error::IndexOutOfRange {
                index,
                len: scores.len(),
            })
        };
        let a = fetch(pair.i)?;
        let b = fetch(pair.j)?;
        weight_total += pair.weight;
        if predict_relation(a, b) != pair.relation {
            weight_wrong += pair.weight;
        }
    }
    if weight_total <= 0.0 {
        return Err(Error::DegenerateMetric(
            "whdr requires a positive total pair weight".into(),
        ));
    }
    Ok(weight_wrong / weight_total)
}
