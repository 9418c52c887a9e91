//! Randomized gradient checks: every analytic derivative against central
//! finite differences of the loss it claims to differentiate.

mod common;

use common::{central_diff, rel_err};
use distrank::loss::{batch_loss, grad_confidence, grad_mu, grad_sigma, pair_loss, GaussianScore};
use distrank::metrics::OrdinalPair;
use distrank::scorer::{Parameterization, ScorerParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn score(mu: f64, confidence: f64) -> GaussianScore {
    GaussianScore::new(mu, confidence).unwrap()
}

const CORE_TOL: f64 = 1e-5;
const BACKWARD_TOL: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;

/// Checks one random configuration; returns the worst relative error seen.
fn check_point(mu_f: f64, mu_c: f64, sigma_f: f64, sigma_c: f64) -> f64 {
    let f = score(mu_f, 1.0 / sigma_f);
    let c = score(mu_c, 1.0 / sigma_c);
    let mut worst = 0.0f64;

    let (dmf, dmc) = grad_mu(&f, &c);
    let fd = central_diff(
        |m| pair_loss(&score(m, 1.0 / sigma_f), &c),
        mu_f,
        FD_STEP,
    );
    worst = worst.max(rel_err(dmf, fd));
    let fd = central_diff(
        |m| pair_loss(&f, &score(m, 1.0 / sigma_c)),
        mu_c,
        FD_STEP,
    );
    worst = worst.max(rel_err(dmc, fd));

    let (dsf, dsc) = grad_sigma(&f, &c);
    let fd = central_diff(
        |s| pair_loss(&score(mu_f, 1.0 / s), &c),
        sigma_f,
        FD_STEP,
    );
    worst = worst.max(rel_err(dsf, fd));
    let fd = central_diff(
        |s| pair_loss(&f, &score(mu_c, 1.0 / s)),
        sigma_c,
        FD_STEP,
    );
    worst = worst.max(rel_err(dsc, fd));

    let (dcf, dcc) = grad_confidence(&f, &c);
    let fd = central_diff(|k| pair_loss(&score(mu_f, k), &c), 1.0 / sigma_f, FD_STEP);
    worst = worst.max(rel_err(dcf, fd));
    let fd = central_diff(|k| pair_loss(&f, &score(mu_c, k)), 1.0 / sigma_c, FD_STEP);
    worst = worst.max(rel_err(dcc, fd));

    worst
}

#[test]
fn analytic_gradients_match_finite_differences_on_1000_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mu_f = rng.gen_range(-3.0..3.0);
        let mu_c = rng.gen_range(-3.0..3.0);
        let sigma_f = rng.gen_range(0.1..5.0);
        let sigma_c = rng.gen_range(0.1..5.0);
        worst = worst.max(check_point(mu_f, mu_c, sigma_f, sigma_c));
    }
    assert!(worst <= CORE_TOL, "worst relative error {worst:e}");
}

fn random_features<R: Rng>(rng: &mut R, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect()
}

fn random_pairs<R: Rng>(rng: &mut R, count: usize, items: usize) -> Vec<OrdinalPair> {
    (0..count)
        .map(|_| loop {
            let i = rng.gen_range(0..items);
            let j = rng.gen_range(0..items);
            if i != j {
                let r = if rng.gen_bool(0.5) { 1 } else { -1 };
                break OrdinalPair::unweighted(i, j, r).unwrap();
            }
        })
        .collect()
}

fn backward_vs_finite_differences(
    parameterization: Parameterization,
    hidden: Option<usize>,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = random_features(&mut rng, 8, 2);
    let pairs = random_pairs(&mut rng, 12, 8);
    let params = ScorerParams::init(2, hidden, parameterization, 1e-6, &mut rng).unwrap();

    let analytic = params.backward(&features, &pairs).unwrap();

    // Independent path: perturb one parameter, rescore everything, and
    // take the batch loss of the resulting score list.
    let loss_at = |theta_index: usize, delta: f64| {
        let mut p = params.clone();
        p.theta_mut()[theta_index] += delta;
        let scores = p.forward_all(&features).unwrap();
        batch_loss(&scores, &pairs).unwrap()
    };

    let mut worst = 0.0f64;
    for k in 0..params.theta().len() {
        let fd = (loss_at(k, FD_STEP) - loss_at(k, -FD_STEP)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(analytic.grad[k], fd));
    }
    worst
}

#[test]
fn backward_matches_finite_differences_hidden_reciprocal() {
    let worst = backward_vs_finite_differences(Parameterization::Reciprocal, Some(4), 77);
    assert!(worst <= BACKWARD_TOL, "worst relative error {worst:e}");
}

#[test]
fn backward_matches_finite_differences_hidden_direct() {
    let worst = backward_vs_finite_differences(Parameterization::Direct, Some(4), 78);
    assert!(worst <= BACKWARD_TOL, "worst relative error {worst:e}");
}

#[test]
fn backward_matches_finite_differences_linear() {
    let worst = backward_vs_finite_differences(Parameterization::Reciprocal, None, 79);
    assert!(worst <= BACKWARD_TOL, "worst relative error {worst:e}");
}
