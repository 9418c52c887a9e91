//! Per-item Gaussian scores, the farther-probability of a pair, the
//! negative-log-likelihood ranking loss, and its closed-form gradients.
//!
//! An item's score is a normal distribution N(mu, sigma^2) with the model
//! reporting confidence c = 1/sigma. For a pair with a designated farther
//! item `f` and closer item `c`, the score difference z = d_f - d_c is
//! normal with mean mu_z = mu_f - mu_c and variance sigma_f^2 + sigma_c^2,
//! and the loss of the pair is -log P(z > 0).
//!
//! Everything here is evaluated through `erfcx`/`log_erfc`, so losses and
//! gradients stay finite even when the standardized margin |mu_z|/sigma_z
//! is in the tens and the raw probability would underflow.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::metrics::OrdinalPair;
use crate::special::{erfc, erfcx, log_erfc};

/// sqrt(2/pi)
const SQRT_2_OVER_PI: f64 = 0.7978845608028654;
/// 1/sqrt(2)
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Lower bound on confidence accepted by [`GaussianScore::new`].
pub const MIN_CONFIDENCE: f64 = 1e-8;
/// Upper bound on confidence accepted by [`GaussianScore::new`].
pub const MAX_CONFIDENCE: f64 = 1e8;

/// A per-item score distribution: mean `mu` and confidence `c = 1/sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianScore {
    mu: f64,
    confidence: f64,
}

impl GaussianScore {
    /// Builds a score, rejecting non-finite means and confidences outside
    /// [`MIN_CONFIDENCE`, `MAX_CONFIDENCE`]. The bounds keep the pair
    /// statistic sigma_z well conditioned.
    pub fn new(mu: f64, confidence: f64) -> Result<Self> {
        if !mu.is_finite()
            || !confidence.is_finite()
            || !(MIN_CONFIDENCE..=MAX_CONFIDENCE).contains(&confidence)
        {
            return Err(Error::InvalidScore { mu, confidence });
        }
        Ok(Self { mu, confidence })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Reported confidence, the reciprocal of the standard deviation.
    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    /// Standard deviation of the score distribution.
    pub fn sigma(&self) -> f64 {
        1.0 / self.confidence
    }
}

/// Distribution of the score difference z = d_f - d_c of a (farther,
/// closer) pair: z ~ N(mu_z, sigma_z^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStatistic {
    mu_z: f64,
    sigma_z: f64,
}

impl PairStatistic {
    pub fn new(mu_z: f64, sigma_z: f64) -> Result<Self> {
        if !mu_z.is_finite() || !sigma_z.is_finite() || sigma_z <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "pair statistic requires finite mu_z and sigma_z > 0, got mu_z={mu_z}, sigma_z={sigma_z}"
            )));
        }
        Ok(Self { mu_z, sigma_z })
    }

    pub fn from_scores(farther: &GaussianScore, closer: &GaussianScore) -> Self {
        let sf = farther.sigma();
        let sc = closer.sigma();
        Self {
            mu_z: farther.mu - closer.mu,
            sigma_z: (sf * sf + sc * sc).sqrt(),
        }
    }

    pub fn mu_z(&self) -> f64 {
        self.mu_z
    }

    pub fn sigma_z(&self) -> f64 {
        self.sigma_z
    }

    /// Argument of erfc in P(z > 0) = erfc(u) / 2.
    fn u(&self) -> f64 {
        -self.mu_z / self.sigma_z * FRAC_1_SQRT_2
    }

    /// P(z > 0), clamped into the open interval (0, 1).
    pub fn prob_farther(&self) -> f64 {
        let p = 0.5 * erfc(self.u());
        p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }

    /// -log P(z > 0), evaluated in the log domain.
    ///
    /// For mu_z <= 0 this is ln 2 - log_erfc(u); for mu_z > 0 the same
    /// expression is rearranged through ln(1 - erfc(-u)/2) so the result
    /// stays strictly monotone in mu_z instead of collapsing to 0 once
    /// erfc(u) rounds to 2.
    pub fn loss(&self) -> f64 {
        let u = self.u();
        if u > 0.0 {
            LN_2 - log_erfc(u)
        } else {
            -(-0.5 * erfc(-u)).ln_1p()
        }
    }

    /// d loss / d mu_f. The matching derivative for the closer item is the
    /// negation. Always negative, vanishing as mu_z -> +inf.
    pub fn grad_mu_farther(&self) -> f64 {
        -self.margin_factor()
    }

    /// sqrt(2/pi) exp(-u^2) / (sigma_z erfc(u)), computed via erfcx so the
    /// ratio never degenerates to 0/0 or inf/inf.
    fn margin_factor(&self) -> f64 {
        SQRT_2_OVER_PI / (self.sigma_z * erfcx(self.u()))
    }
}

/// Probability that item `f` outranks item `c`.
pub fn prob_farther(farther: &GaussianScore, closer: &GaussianScore) -> f64 {
    PairStatistic::from_scores(farther, closer).prob_farther()
}

/// Loss of a single (farther, closer) pair: -log P(d_f > d_c).
pub fn pair_loss(farther: &GaussianScore, closer: &GaussianScore) -> f64 {
    PairStatistic::from_scores(farther, closer).loss()
}

/// Gradients of [`pair_loss`] with respect to the two means, returned as
/// (d/d mu_f, d/d mu_c). They differ only in sign.
pub fn grad_mu(farther: &GaussianScore, closer: &GaussianScore) -> (f64, f64) {
    let g = PairStatistic::from_scores(farther, closer).grad_mu_farther();
    (g, -g)
}

/// Gradients of [`pair_loss`] with respect to the two standard deviations,
/// returned as (d/d sigma_f, d/d sigma_c). Both carry the sign of mu_z and
/// scale with their own sigma.
pub fn grad_sigma(farther: &GaussianScore, closer: &GaussianScore) -> (f64, f64) {
    let stat = PairStatistic::from_scores(farther, closer);
    let k = stat.margin_factor() / (stat.sigma_z * stat.sigma_z) * stat.mu_z;
    (k * farther.sigma(), k * closer.sigma())
}

/// Gradients of [`pair_loss`] with respect to the two confidences, via the
/// chain rule through sigma = 1/c: d/dc = d/d sigma * (-sigma^2).
pub fn grad_confidence(farther: &GaussianScore, closer: &GaussianScore) -> (f64, f64) {
    let (dsf, dsc) = grad_sigma(farther, closer);
    let sf = farther.sigma();
    let sc = closer.sigma();
    (-sf * sf * dsf, -sc * sc * dsc)
}

/// Mean pair loss over a set of ordinal pairs.
///
/// Each pair's farther/closer roles are assigned from its relation: +1
/// means item `i` is farther, -1 means item `j` is. Summation is
/// left-to-right in pair order so results are bit-reproducible.
pub fn batch_loss(scores: &[GaussianScore], pairs: &[OrdinalPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for pair in pairs {
        let (f, c) = pair_roles(scores, pair)?;
        sum += pair_loss(f, c);
    }
    Ok(sum / pairs.len() as f64)
}

/// Resolves a pair's (farther, closer) scores from its relation.
pub fn pair_roles<'a>(
    scores: &'a [GaussianScore],
    pair: &OrdinalPair,
) -> Result<(&'a GaussianScore, &'a GaussianScore)> {
    let fetch = |index: usize| {
        scores.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: scores.len(),
        })
    };
    let a = fetch(pair.i)?;
    let b = fetch(pair.j)?;
    match pair.relation {
        1 => Ok((a, b)),
        -1 => Ok((b, a)),
        other => Err(Error::UnsupportedRelation {
            value: other,
            line: None,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(mu: f64, confidence: f64) -> GaussianScore {
        GaussianScore::new(mu, confidence).unwrap()
    }

    #[test]
    fn score_invariants_enforced() {
        assert!(GaussianScore::new(f64::NAN, 1.0).is_err());
        assert!(GaussianScore::new(0.0, 0.0).is_err());
        assert!(GaussianScore::new(0.0, -1.0).is_err());
        assert!(GaussianScore::new(0.0, 1e-9).is_err());
        assert!(GaussianScore::new(0.0, 1e9).is_err());
        assert!(GaussianScore::new(0.0, f64::INFINITY).is_err());
        assert!(GaussianScore::new(1.0, 2.0).is_ok());
    }

    #[test]
    fn equal_scores_give_half() {
        let a = score(0.0, 1.0);
        assert_eq!(prob_farther(&a, &a), 0.5);
        assert!((pair_loss(&a, &a) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn unit_margin_probability() {
        // mu_z = 1, sigma_z = sqrt(2): standard normal CDF at 1/sqrt(2).
        let p = prob_farther(&score(1.0, 1.0), &score(0.0, 1.0));
        assert!((p - 0.760249938906523269).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn complementarity() {
        let a = score(0.7, 2.5);
        let b = score(-0.3, 0.4);
        let s = prob_farther(&a, &b) + prob_farther(&b, &a);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_margin_losses() {
        let up = PairStatistic::new(1.0, 1.0).unwrap();
        let down = PairStatistic::new(-1.0, 1.0).unwrap();
        assert!((up.loss() - 0.172753779023449890).abs() < 1e-12);
        assert!((down.loss() - 1.84102164500926351).abs() < 1e-12);
    }

    #[test]
    fn loss_strictly_positive_and_monotone_in_margin() {
        let mut prev = f64::INFINITY;
        for k in -50..=50 {
            let stat = PairStatistic::new(k as f64 / 10.0, 1.0).unwrap();
            let loss = stat.loss();
            assert!(loss > 0.0);
            assert!(loss < prev, "not strictly decreasing at mu_z = {}", stat.mu_z());
            prev = loss;
        }
    }

    #[test]
    fn translation_invariance() {
        let a = score(0.4, 1.3);
        let b = score(-0.9, 0.7);
        let a2 = score(0.4 + 17.0, 1.3);
        let b2 = score(-0.9 + 17.0, 0.7);
        assert!((pair_loss(&a, &b) - pair_loss(&a2, &b2)).abs() < 1e-12);
        assert!((prob_farther(&a, &b) - prob_farther(&a2, &b2)).abs() < 1e-12);
        let (g1, _) = grad_mu(&a, &b);
        let (g2, _) = grad_mu(&a2, &b2);
        assert!((g1 - g2).abs() < 1e-12);
    }

    #[test]
    fn grad_mu_at_zero_margin() {
        let (df, dc) = grad_mu(&score(0.0, std::f64::consts::SQRT_2), &score(0.0, std::f64::consts::SQRT_2));
        // sigma_z = 1 here, so the gradient is -sqrt(2/pi).
        assert!((df + SQRT_2_OVER_PI).abs() < 1e-12, "df = {df}");
        assert!((dc - SQRT_2_OVER_PI).abs() < 1e-12);
    }

    #[test]
    fn grad_mu_antisymmetric_and_vanishing() {
        let (df, dc) = grad_mu(&score(2.0, 1.7), &score(-1.0, 0.3));
        assert_eq!(df + dc, 0.0);
        assert!(df < 0.0);
        let far = PairStatistic::new(10.0, 1.0).unwrap();
        assert!(far.grad_mu_farther().abs() < 1e-10);
    }

    #[test]
    fn grad_sigma_known_value_and_signs() {
        // mu_z = 1, sigma_f = sigma_c = 1.
        let f = score(1.0, 1.0);
        let c = score(0.0, 1.0);
        let (dsf, dsc) = grad_sigma(&f, &c);
        assert!((dsf - 0.144489090686315684).abs() < 1e-12, "dsf = {dsf}");
        assert!((dsc - 0.144489090686315684).abs() < 1e-12);

        // Zero margin kills the gradient entirely.
        let (z1, z2) = grad_sigma(&score(3.0, 1.0), &score(3.0, 0.5));
        assert_eq!(z1, 0.0);
        assert_eq!(z2, 0.0);

        // Sign follows mu_z; ratio follows the sigmas.
        let (nf, nc) = grad_sigma(&score(-1.0, 2.0), &score(0.0, 0.5));
        assert!(nf < 0.0 && nc < 0.0);
        let ratio = nf / nc;
        let expected = score(-1.0, 2.0).sigma() / score(0.0, 0.5).sigma();
        assert!((ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn grad_confidence_chain_rule() {
        let f = score(1.0, 1.0);
        let c = score(0.0, 1.0);
        let (dcf, dcc) = grad_confidence(&f, &c);
        // At confidence 1 the chain factor is -1.
        assert!((dcf + 0.144489090686315684).abs() < 1e-12);
        assert!((dcc + 0.144489090686315684).abs() < 1e-12);
        let (zf, zc) = grad_confidence(&score(2.0, 3.0), &score(2.0, 0.7));
        assert_eq!((zf, zc), (0.0, 0.0));
    }

    #[test]
    fn extreme_margins_stay_finite() {
        for &t in &[-40.0, -25.0, 25.0, 40.0] {
            let stat = PairStatistic::new(t, 1.0).unwrap();
            assert!(stat.loss().is_finite());
            assert!(stat.prob_farther() > 0.0 && stat.prob_farther() < 1.0);
            assert!(stat.grad_mu_farther().is_finite());
            let f = score(t, 1.0);
            let c = score(0.0, 1.0);
            let (a, b) = grad_sigma(&f, &c);
            assert!(a.is_finite() && b.is_finite());
            let (a, b) = grad_confidence(&f, &c);
            assert!(a.is_finite() && b.is_finite());
        }
    }

    #[test]
    fn batch_loss_examples() {
        let scores = vec![score(0.0, 1.0), score(0.0, 1.0)];
        assert_eq!(batch_loss(&scores, &[]).unwrap(), 0.0);

        let one = vec![OrdinalPair::new(0, 1, 1, 1.0).unwrap()];
        let loss = batch_loss(&scores, &one).unwrap();
        assert!((loss - LN_2).abs() < 1e-15);
    }

    #[test]
    fn batch_loss_mixed_margins() {
        // Three pairs with mu_z in {1, 0, -1}, all at sigma_z = 1
        // (confidence sqrt(2) gives sigma = 1/sqrt(2) per item).
        let c = std::f64::consts::SQRT_2;
        let scores = vec![score(1.0, c), score(0.0, c), score(-1.0, c), score(0.0, c)];
        let pairs = vec![
            OrdinalPair::new(0, 1, 1, 1.0).unwrap(), // mu_z = 1
            OrdinalPair::new(1, 3, 1, 1.0).unwrap(), // mu_z = 0
            OrdinalPair::new(2, 1, 1, 1.0).unwrap(), // mu_z = -1
        ];
        let expected = (0.172753779023449890 + LN_2 + 1.84102164500926351) / 3.0;
        let loss = batch_loss(&scores, &pairs).unwrap();
        assert!((loss - expected).abs() < 1e-9, "loss = {loss}");
    }

    #[test]
    fn batch_loss_error_paths() {
        let scores = vec![score(0.0, 1.0), score(1.0, 1.0)];
        let oob = vec![OrdinalPair::new(0, 5, 1, 1.0).unwrap()];
        assert!(matches!(
            batch_loss(&scores, &oob),
            Err(Error::IndexOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn relation_zero_rejected_at_pair_construction() {
        assert!(matches!(
            OrdinalPair::new(0, 1, 0, 1.0),
            Err(Error::UnsupportedRelation { value: 0, .. })
        ));
    }
}
