//! Equilibrium certification: re-test max-player stationarity with exact
//! gradients, Monte-Carlo-estimate the probability that a fresh proposal
//! fails to decrease the objective, validate recorded ascent paths, and run
//! oracle-concentration and known-solution cross-checks.
//!
//! The rejection-probability check is one-sided by construction: the value
//! at a gradient-ascent endpoint lower-bounds the best ascending-path value,
//! so a high pass fraction certifies the equilibrium condition
//! conservatively.

use serde::{Deserialize, Serialize};

use crate::ascent::{ascend, ascend_projected, AscentPath};
use crate::error::{CoreError, CoreResult};
use crate::linalg::{add_scaled, dot, norm, scale, sub};
use crate::minmax::{propose, ProposalSpec, RunRecord};
use crate::objective::ObjectiveSpec;
use crate::oracle::{streams, substream, OracleSet};
use crate::scalar::{lit, Scalar};

/// 97.5% standard-normal quantile, for two-sided 95% intervals.
const WILSON_Z: f64 = 1.959963984540054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCheckCounts {
    pub pass: u64,
    pub fail: u64,
}

/// Result of certifying one candidate point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate<F> {
    /// Exact max-player gradient norm at the candidate.
    pub stationarity_norm: F,
    /// Stationarity tolerance the candidate was tested against.
    pub eps_star: F,
    pub stationary: bool,
    /// Fraction of proposals that failed to decrease the objective by delta.
    pub rejection_prob_estimate: F,
    pub ci_lower: F,
    pub ci_upper: F,
    pub n_trials: u64,
    pub path_checks: PathCheckCounts,
    pub verdict: Verdict,
}

/// Wilson score interval for `passes` successes in `n` Bernoulli trials,
/// two-sided at 95%.
pub fn wilson_interval<F: Scalar>(passes: u64, n: u64) -> (F, F) {
    assert!(n > 0 && passes <= n);
    let z = lit::<F>(WILSON_Z);
    let n_f = lit::<F>(n as f64);
    let p = lit::<F>(passes as f64) / n_f;
    let z2 = z * z;
    let denom = F::one() + z2 / n_f;
    let center = (p + z2 / (lit::<F>(2.0) * n_f)) / denom;
    let half = z * (p * (F::one() - p) / n_f + z2 / (lit::<F>(4.0) * n_f * n_f)).sqrt() / denom;
    // at the boundaries the formula reduces exactly; evaluate it that way
    // instead of accumulating rounding on the clamp
    let lo = if passes == 0 {
        F::zero()
    } else {
        (center - half).max(F::zero())
    };
    let hi = if passes == n {
        F::one()
    } else {
        (center + half).min(F::one())
    };
    (lo, hi)
}

/// Exact max-player gradient norm at (x*, y*) and whether it is within eps.
pub fn check_y_stationarity<F: Scalar>(
    obj: &ObjectiveSpec<F>,
    x_star: &[F],
    y_star: &[F],
    eps: F,
) -> CoreResult<(F, bool)> {
    let g = obj.grad_y(x_star, y_star)?;
    let n = norm(&g);
    Ok((n, n <= eps))
}

/// Monte Carlo estimate of the probability that a proposal from `proposal`
/// fails to decrease the objective below f(x*, y*) - delta after the max
/// player responds by gradient ascent from y*.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RejectionEstimate<F> {
    pub estimate: F,
    pub ci_lower: F,
    pub ci_upper: F,
    pub n_trials: u64,
    pub passes: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_rejection_probability<F: Scalar>(
    o: &mut OracleSet<F>,
    x_star: &[F],
    y_star: &[F],
    proposal: &ProposalSpec<F>,
    eps_prime: F,
    delta: F,
    eta: F,
    inner_cap: usize,
    n_trials: u64,
    seed: u64,
) -> CoreResult<RejectionEstimate<F>> {
    if n_trials == 0 {
        return Err(CoreError::Config("n_trials must be >= 1".into()));
    }
    let f_star = o.value(x_star, y_star)?;
    let domain_y = o.objective.domain_y().clone();
    let mut passes = 0u64;
    for t in 0..n_trials {
        let mut rng = substream(seed, streams::CERTIFY_TRIAL_BASE + t);
        let delta_x = propose(proposal, o, x_star, y_star, &mut rng)?;
        let x_new = add_scaled(x_star, F::one(), &delta_x);
        let path = if domain_y.is_bounded() {
            ascend_projected(o, &x_new, y_star, eps_prime, eta, inner_cap, &domain_y)?
        } else {
            ascend(o, &x_new, y_star, eps_prime, eta, inner_cap)?
        };
        let f_new = o.value(&x_new, path.last())?;
        if f_new >= f_star - delta {
            passes += 1;
        }
    }
    let (lo, hi) = wilson_interval(passes, n_trials);
    Ok(RejectionEstimate {
        estimate: lit::<F>(passes as f64) / lit::<F>(n_trials as f64),
        ci_lower: lo,
        ci_upper: hi,
        n_trials,
        passes,
    })
}

/// Check that f(x, .) increases at rate >= `rate` along a recorded ascent
/// path: the directional derivative is tested at each segment start and at
/// 10 interior points per segment. Returns the overall pass flag and the
/// per-segment worst margins (derivative minus rate); zero-length segments
/// are skipped.
pub fn verify_increasing_path<F: Scalar>(
    obj: &ObjectiveSpec<F>,
    path: &AscentPath<F>,
    rate: F,
) -> CoreResult<(bool, Vec<F>)> {
    let samples_per_segment = 11usize;
    let mut margins = Vec::new();
    for j in 0..path.steps() {
        let seg = sub(&path.points[j + 1], &path.points[j]);
        let len = norm(&seg);
        if len == F::zero() {
            continue;
        }
        let dir = scale(F::one() / len, &seg);
        let mut worst = F::infinity();
        for s in 0..samples_per_segment {
            let t = lit::<F>(s as f64) / lit::<F>(samples_per_segment as f64);
            let p = add_scaled(&path.points[j], t, &seg);
            let g = obj.grad_y(&path.x_fixed, &p)?;
            worst = worst.min(dot(&g, &dir) - rate);
        }
        margins.push(worst);
    }
    let ok = margins.iter().all(|m| *m >= F::zero());
    Ok((ok, margins))
}

/// Empirical exceedance rates of the stochastic oracles against the exact
/// objective: how often |F - f| and ||G_y - grad_y f|| reach eps_hat1 / 10
/// over `n_draws` points drawn uniformly from `region` (bounds over the
/// concatenated (x, y) vector).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConcentrationReport<F> {
    pub value_exceed_rate: F,
    pub grad_exceed_rate: F,
    pub n_draws: u64,
}

pub fn concentration_test<F: Scalar>(
    o: &mut OracleSet<F>,
    exact: &ObjectiveSpec<F>,
    eps_hat1: F,
    n_draws: u64,
    region: &(Vec<F>, Vec<F>),
    seed: u64,
) -> CoreResult<ConcentrationReport<F>> {
    if n_draws == 0 {
        return Err(CoreError::Config("n_draws must be >= 1".into()));
    }
    let (lo, hi) = region;
    let dim = exact.dim_x + exact.dim_y;
    if lo.len() != dim || hi.len() != dim {
        return Err(CoreError::DimMismatch {
            expected: dim,
            got: lo.len().max(hi.len()),
        });
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(CoreError::BadBounds);
    }
    let threshold = eps_hat1 / lit::<F>(10.0);
    let mut rng = substream(seed, streams::CONCENTRATION);
    let mut value_exceed = 0u64;
    let mut grad_exceed = 0u64;
    for _ in 0..n_draws {
        let point: Vec<F> = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| l + (h - l) * F::unit_uniform(&mut rng))
            .collect();
        let (x, y) = point.split_at(exact.dim_x);
        let f_hat = o.value(x, y)?;
        let f = exact.value(x, y)?;
        if (f_hat - f).abs() >= threshold {
            value_exceed += 1;
        }
        let g_hat = o.grad_y(x, y)?;
        let g = exact.grad_y(x, y)?;
        if norm(&sub(&g_hat, &g)) >= threshold {
            grad_exceed += 1;
        }
    }
    let n_f = lit::<F>(n_draws as f64);
    Ok(ConcentrationReport {
        value_exceed_rate: lit::<F>(value_exceed as f64) / n_f,
        grad_exceed_rate: lit::<F>(grad_exceed as f64) / n_f,
        n_draws,
    })
}

/// Known-solution cross-check for the compact bilinear testbed: its exact
/// min-max set is {x = 0} x [-1, 1], so a returned point is correct iff
/// |x*| <= eps with y* anywhere in the box.
pub fn crosscheck_bilinear_global<F: Scalar>(run: &RunRecord<F>, eps: F) -> CoreResult<bool> {
    if !run.objective.eq_ignore_ascii_case("bilinearcompact") {
        return Err(CoreError::Config(format!(
            "cross-check applies to BilinearCompact, run used {}",
            run.objective
        )));
    }
    let x_ok = run.final_x.iter().all(|v| v.abs() <= eps);
    let y_ok = run.final_y.iter().all(|v| v.abs() <= F::one());
    Ok(x_ok && y_ok)
}

/// Everything certify_point needs besides the candidate itself.
#[derive(Clone, Debug)]
pub struct CertifyParams<F> {
    pub proposal: ProposalSpec<F>,
    pub eps_star: F,
    pub delta: F,
    pub omega: F,
    pub eta: F,
    pub inner_cap: usize,
    pub n_trials: u64,
    pub seed: u64,
}

/// Certify one candidate point. Certified requires exact stationarity within
/// eps_star AND rejection-probability CI lower bound >= 1 - omega; Refuted
/// requires stationarity violated OR CI upper bound < 1 - omega; fewer than
/// 30 trials force Inconclusive.
pub fn certify_point<F: Scalar>(
    o: &mut OracleSet<F>,
    x_star: &[F],
    y_star: &[F],
    params: &CertifyParams<F>,
) -> CoreResult<Certificate<F>> {
    let exact = o.objective.as_spec();
    let (stat_norm, stationary) = check_y_stationarity(&exact, x_star, y_star, params.eps_star)?;
    let est = estimate_rejection_probability(
        o,
        x_star,
        y_star,
        &params.proposal,
        params.eps_star,
        params.delta,
        params.eta,
        params.inner_cap,
        params.n_trials,
        params.seed,
    )?;
    let target = F::one() - params.omega;
    let verdict = if params.n_trials < 30 {
        Verdict::Inconclusive
    } else if !stationary || est.ci_upper < target {
        Verdict::Refuted
    } else if est.ci_lower >= target {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    Ok(Certificate {
        stationarity_norm: stat_norm,
        eps_star: params.eps_star,
        stationary,
        rejection_prob_estimate: est.estimate,
        ci_lower: est.ci_lower,
        ci_upper: est.ci_upper,
        n_trials: est.n_trials,
        path_checks: PathCheckCounts::default(),
        verdict,
    })
}

/// Certify the final point of a finished run, reusing the run's proposal
/// distribution, tolerances, and seed. When the run recorded ascent paths
/// they are re-validated at rate (1 - 2 eta L) * eps_prime (or rate 0 when L
/// is unknown); the counts are informative and do not affect the verdict.
pub fn certify<F: Scalar>(
    o: &mut OracleSet<F>,
    run: &RunRecord<F>,
    n_trials: u64,
) -> CoreResult<Certificate<F>> {
    let params = CertifyParams {
        proposal: run.config.proposal.clone(),
        eps_star: run.final_eps,
        delta: run.config.delta,
        omega: run.config.omega,
        eta: run.config.eta,
        inner_cap: run.config.inner_cap,
        n_trials,
        seed: run.config.seed,
    };
    let mut cert = certify_point(o, &run.final_x, &run.final_y, &params)?;
    if let Some(paths) = &run.paths {
        let exact = o.objective.as_spec();
        let shrink = match run.config.lipschitz {
            Some(l) => F::one() - lit::<F>(2.0) * run.config.eta * l,
            None => F::zero(),
        };
        for path in paths {
            let rate = shrink * path.eps_prime;
            let (ok, _) = verify_increasing_path(&exact, path, rate)?;
            if ok {
                cert.path_checks.pass += 1;
            } else {
                cert.path_checks.fail += 1;
            }
        }
    }
    Ok(cert)
}

/// Convenience wrapper for asserting known local min-max points: certify the
/// given point with a small-support proposal and report whether the verdict
/// is Certified.
#[allow(clippy::too_many_arguments)]
pub fn local_minmax_sanity<F: Scalar>(
    o: &mut OracleSet<F>,
    x_star: &[F],
    y_star: &[F],
    proposal: &ProposalSpec<F>,
    eps: F,
    delta: F,
    omega: F,
    eta: F,
    n_trials: u64,
    seed: u64,
) -> CoreResult<bool> {
    let params = CertifyParams {
        proposal: proposal.clone(),
        eps_star: eps,
        delta,
        omega,
        eta,
        inner_cap: 100_000,
        n_trials,
        seed,
    };
    let cert = certify_point(o, x_star, y_star, &params)?;
    Ok(cert.verdict == Verdict::Certified)
}
