//! Annealed outer loop with greedy inner maximization.
//!
//! `run` treats the max-player as an oracle: each outer iteration proposes a
//! min-player move, lets the inner ascent respond from the current `y`, and
//! accepts or rejects the pair based on the measured objective change. The
//! compact-domain variant `run_compact` projects both players and uses the
//! projected-fixed-point ascent stopping rule.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ascent::{ascend, ascend_projected, AscentPath, AscentStatus};
use crate::error::{CoreError, CoreResult};
use crate::linalg::{add_scaled, norm, sub};
use crate::oracle::{streams, substream, OracleCounters, OracleSet};
use crate::scalar::{lit, Scalar};
use crate::trajectory::TrajectoryRow;

/// Distribution of min-player proposals Delta.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposalSpec<F> {
    /// Delta = sigma * xi with xi standard normal per coordinate.
    Gaussian { sigma2: F },
    /// Delta = -scale * G_x(x, y), a stochastic descent direction for the
    /// min-player.
    StochGrad { scale: F },
    /// Gaussian raw move, then Delta = P_X(x + raw) - x.
    ProjectedGaussian { sigma2: F },
    /// raw = -scale * G_x(x, y) + sigma * xi, then Delta = P_X(x + raw) - x.
    ProjectedStochGrad { scale: F, noise_sigma2: F },
}

impl<F: Scalar> ProposalSpec<F> {
    fn needs_projection(&self) -> bool {
        matches!(
            self,
            ProposalSpec::ProjectedGaussian { .. } | ProposalSpec::ProjectedStochGrad { .. }
        )
    }

    fn validate(&self) -> CoreResult<()> {
        let nonneg = |v: F, what: &str| {
            if !v.is_finite() || v < F::zero() {
                Err(CoreError::Config(format!("{what} must be finite and >= 0")))
            } else {
                Ok(())
            }
        };
        match self {
            ProposalSpec::Gaussian { sigma2 } | ProposalSpec::ProjectedGaussian { sigma2 } => {
                nonneg(*sigma2, "proposal sigma2")
            }
            ProposalSpec::StochGrad { scale } => nonneg(*scale, "proposal scale"),
            ProposalSpec::ProjectedStochGrad {
                scale,
                noise_sigma2,
            } => {
                nonneg(*scale, "proposal scale")?;
                nonneg(*noise_sigma2, "proposal noise_sigma2")
            }
        }
    }
}

/// Sample a min-player move Delta. Gradient kinds consume a stochastic x-gradient
/// from `o`; projected kinds guarantee `x + Delta` lies in `domain_x`.
pub fn propose<F: Scalar>(
    spec: &ProposalSpec<F>,
    o: &mut OracleSet<F>,
    x: &[F],
    y: &[F],
    rng: &mut ChaCha8Rng,
) -> CoreResult<Vec<F>> {
    spec.validate()?;
    o.counters.proposal_samples += 1;
    let gaussian = |sigma2: F, rng: &mut ChaCha8Rng| -> Vec<F> {
        let sigma = sigma2.sqrt();
        (0..x.len())
            .map(|_| sigma * F::standard_normal(rng))
            .collect()
    };
    let raw = match spec {
        ProposalSpec::Gaussian { sigma2 } | ProposalSpec::ProjectedGaussian { sigma2 } => {
            gaussian(*sigma2, rng)
        }
        ProposalSpec::StochGrad { scale } => {
            let g = o.grad_x(x, y)?;
            g.iter().map(|&v| -*scale * v).collect()
        }
        ProposalSpec::ProjectedStochGrad {
            scale,
            noise_sigma2,
        } => {
            let g = o.grad_x(x, y)?;
            let noise = gaussian(*noise_sigma2, rng);
            g.iter()
                .zip(&noise)
                .map(|(&gv, &nv)| -*scale * gv + nv)
                .collect()
        }
    };
    if spec.needs_projection() {
        let domain = o.objective.domain_x().clone();
        if !domain.is_bounded() {
            return Err(CoreError::Config(
                "projected proposal requires a bounded x-domain".into(),
            ));
        }
        let moved = add_scaled(x, F::one(), &raw);
        let projected = domain.project(&moved);
        Ok(sub(&projected, x))
    } else {
        Ok(raw)
    }
}

/// Acceptance policy for the outer loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AcceptMode<F> {
    /// Accept sufficient decrease; otherwise accept with probability
    /// e^{-i/tau1} (always, when tau1 is absent: fixed temperature).
    Annealed,
    /// Accept sufficient decrease only. Never draws randomness.
    Deterministic,
    /// Accept sufficient decrease; otherwise accept iff i is a multiple of
    /// ceil(1/p) (derandomized annealing at average rate p).
    FixedRate(F),
}

/// Decide whether to accept a proposed move given the measured objective
/// values. The sufficient-decrease threshold is delta/4, or delta/2 in compact mode.
/// The rng is consumed only when an Annealed decision actually needs a coin.
#[allow(clippy::too_many_arguments)]
pub fn accept_decision<F: Scalar>(
    f_new: F,
    f_old: F,
    delta: F,
    i: u64,
    tau1: Option<F>,
    rng: &mut ChaCha8Rng,
    mode: &AcceptMode<F>,
    compact: bool,
) -> bool {
    let threshold = if compact {
        delta / lit(2.0)
    } else {
        delta / lit(4.0)
    };
    if f_new <= f_old - threshold {
        return true;
    }
    match mode {
        AcceptMode::Deterministic => false,
        AcceptMode::Annealed => match tau1 {
            Some(tau) => {
                let p_accept = (-lit::<F>(i as f64) / tau).exp();
                let u = F::unit_uniform(rng);
                u < p_accept
            }
            // no cooling: e^{-i/tau1} -> 1 as tau1 -> infinity
            None => true,
        },
        AcceptMode::FixedRate(p) => {
            let p = *p;
            if p <= F::zero() {
                return false;
            }
            if p >= F::one() {
                return true;
            }
            let period = (F::one() / p).ceil().to_u64().unwrap_or(u64::MAX).max(1);
            i.is_multiple_of(period)
        }
    }
}

/// Advance the inner-tolerance schedule: acceptance multiplies eps_i by
/// (1 - 2 eta L)^{-2}, rejection leaves it unchanged. `l = None` disables the
/// schedule (factor 1).
pub fn epsilon_schedule_step<F: Scalar>(
    eps_i: F,
    eta: F,
    l: Option<F>,
    accepted: bool,
) -> CoreResult<F> {
    let Some(l) = l else {
        return Ok(eps_i);
    };
    let shrink = F::one() - lit::<F>(2.0) * eta * l;
    if shrink <= F::zero() {
        return Err(CoreError::Config(format!(
            "schedule requires 2*eta*L < 1, got eta={eta}, L={l}"
        )));
    }
    if accepted {
        Ok(eps_i / (shrink * shrink))
    } else {
        Ok(eps_i)
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// r_max + 1 consecutive rejections.
    RejectionLimit,
    /// Outer-iteration budget exhausted.
    Budget,
    /// An inner ascent hit its step cap and the config asked to abort.
    InnerCapAbort,
}

/// Outer-loop configuration. `lipschitz: None` turns the eps-schedule off and
/// runs every inner ascent at tolerance eps_i = eps/2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig<F> {
    pub epsilon: F,
    pub delta: F,
    pub omega: F,
    pub eta: F,
    pub tau1: Option<F>,
    pub r_max: u64,
    pub max_outer_iters: u64,
    pub proposal: ProposalSpec<F>,
    pub accept_mode: AcceptMode<F>,
    /// Inner ascent step cap per invocation.
    pub inner_cap: usize,
    pub lipschitz: Option<F>,
    /// Re-measure f_old at the top of each compact-mode iteration instead of
    /// keeping the stale acceptance-time measurement.
    pub remeasure_on_reject: bool,
    /// Stop the whole run when an inner ascent hits its cap.
    pub abort_on_hitcap: bool,
    /// Keep every inner ascent path in the record.
    pub record_paths: bool,
    pub seed: u64,
}

impl<F: Scalar> RunConfig<F> {
    pub fn validate(&self) -> CoreResult<()> {
        for (v, what) in [
            (self.epsilon, "epsilon"),
            (self.delta, "delta"),
            (self.omega, "omega"),
            (self.eta, "eta"),
        ] {
            if !v.is_finite() || v <= F::zero() {
                return Err(CoreError::Config(format!("{what} must be finite and > 0")));
            }
        }
        if let Some(t) = self.tau1 {
            if !t.is_finite() || t <= F::zero() {
                return Err(CoreError::Config("tau1 must be finite and > 0".into()));
            }
        }
        if self.r_max < 1 {
            return Err(CoreError::Config("r_max must be >= 1".into()));
        }
        if self.inner_cap == 0 {
            return Err(CoreError::Config("inner_cap must be >= 1".into()));
        }
        if let Some(l) = self.lipschitz {
            if !l.is_finite() || l <= F::zero() {
                return Err(CoreError::Config("lipschitz must be finite and > 0".into()));
            }
            if lit::<F>(2.0) * self.eta * l >= F::one() {
                return Err(CoreError::Config(format!(
                    "schedule requires 2*eta*L < 1, got eta={}, L={l}",
                    self.eta
                )));
            }
        }
        self.proposal.validate()
    }
}

/// Everything a finished run produced.
#[derive(Clone, Debug)]
pub struct RunRecord<F> {
    pub objective: String,
    pub rows: Vec<TrajectoryRow<F>>,
    pub final_x: Vec<F>,
    pub final_y: Vec<F>,
    pub termination: Termination,
    pub counters: OracleCounters,
    /// Schedule value eps_i after the last iteration.
    pub final_eps: F,
    /// Last accepted stochastic measurement (the value being defended).
    pub final_f: F,
    pub config: RunConfig<F>,
    pub paths: Option<Vec<AscentPath<F>>>,
}

impl<F: Scalar> RunRecord<F> {
    pub fn iterations(&self) -> u64 {
        self.rows.len() as u64
    }

    pub fn accept_count(&self) -> u64 {
        self.rows.iter().filter(|r| r.accepted).count() as u64
    }
}

struct LoopState<F> {
    x: Vec<F>,
    y: Vec<F>,
    f_old: F,
    eps_i: F,
    i: u64,
    r: u64,
    rows: Vec<TrajectoryRow<F>>,
    paths: Option<Vec<AscentPath<F>>>,
    rng_proposal: ChaCha8Rng,
    rng_accept: ChaCha8Rng,
}

impl<F: Scalar> LoopState<F> {
    fn new(x0: &[F], y0: &[F], f_old: F, eps_i: F, config: &RunConfig<F>) -> Self {
        LoopState {
            x: x0.to_vec(),
            y: y0.to_vec(),
            f_old,
            eps_i,
            i: 0,
            r: 0,
            rows: Vec::new(),
            paths: config.record_paths.then(Vec::new),
            rng_proposal: substream(config.seed, streams::PROPOSAL),
            rng_accept: substream(config.seed, streams::ACCEPT),
        }
    }

    // Row state: x/y are start-of-iteration, f_old is pre-decision, r is
    // post-decision. Callers must push before mutating x/y/f_old.
    fn push_row(&mut self, accepted: bool, f_new: F, eps_row: F, path: &AscentPath<F>) {
        self.rows.push(TrajectoryRow {
            iter: self.i,
            accepted,
            r: self.r,
            eps_i: eps_row,
            f_old: self.f_old,
            f_new,
            inner_steps: path.steps() as u64,
            inner_status: path.status.into(),
            x: self.x.clone(),
            y: self.y.clone(),
        });
        if let Some(paths) = &mut self.paths {
            paths.push(path.clone());
        }
    }
}

fn check_dims<F: Scalar>(o: &OracleSet<F>, x0: &[F], y0: &[F]) -> CoreResult<()> {
    if x0.len() != o.objective.dim_x() {
        return Err(CoreError::DimMismatch {
            expected: o.objective.dim_x(),
            got: x0.len(),
        });
    }
    if y0.len() != o.objective.dim_y() {
        return Err(CoreError::DimMismatch {
            expected: o.objective.dim_y(),
            got: y0.len(),
        });
    }
    Ok(())
}

fn finish<F: Scalar>(
    o: &OracleSet<F>,
    st: LoopState<F>,
    termination: Termination,
    config: &RunConfig<F>,
) -> RunRecord<F> {
    RunRecord {
        objective: o.objective.name().to_string(),
        final_x: st.x,
        final_y: st.y,
        termination,
        counters: o.counters,
        final_eps: st.eps_i,
        final_f: st.f_old,
        rows: st.rows,
        config: config.clone(),
        paths: st.paths,
    }
}

/// Run the annealed outer loop on an unconstrained objective.
///
/// f_old starts at +infinity so the first proposal is always accepted; thereafter
/// rejected iterations compare against the stale acceptance-time measurement.
/// Each iteration makes exactly one proposal sample, one stochastic value
/// call, and one inner-ascent invocation.
pub fn run<F: Scalar>(
    o: &mut OracleSet<F>,
    x0: &[F],
    y0: &[F],
    config: &RunConfig<F>,
) -> CoreResult<RunRecord<F>> {
    config.validate()?;
    check_dims(o, x0, y0)?;

    let mut st = LoopState::new(x0, y0, F::infinity(), config.epsilon / lit(2.0), config);

    while st.r <= config.r_max && st.i < config.max_outer_iters {
        let delta_x = propose(&config.proposal, o, &st.x, &st.y, &mut st.rng_proposal)?;
        let x_prop = add_scaled(&st.x, F::one(), &delta_x);

        let eps_prime = match config.lipschitz {
            Some(l) => st.eps_i / (F::one() - lit::<F>(2.0) * config.eta * l),
            None => st.eps_i,
        };
        let path = ascend(o, &x_prop, &st.y, eps_prime, config.eta, config.inner_cap)?;
        let y_prop = path.last().to_vec();
        let f_new = o.value(&x_prop, &y_prop)?;

        let hit_cap = path.status == AscentStatus::HitCap;
        let accepted = accept_decision(
            f_new,
            st.f_old,
            config.delta,
            st.i,
            config.tau1,
            &mut st.rng_accept,
            &config.accept_mode,
            false,
        );

        let eps_row = st.eps_i;
        if accepted {
            st.r = 0;
            st.eps_i = epsilon_schedule_step(st.eps_i, config.eta, config.lipschitz, true)?;
        } else {
            st.r += 1;
        }
        st.push_row(accepted, f_new, eps_row, &path);
        if accepted {
            st.x = x_prop;
            st.y = y_prop;
            st.f_old = f_new;
        }
        st.i += 1;

        if hit_cap && config.abort_on_hitcap {
            return Ok(finish(o, st, Termination::InnerCapAbort, config));
        }
    }

    let termination = if st.r > config.r_max {
        Termination::RejectionLimit
    } else {
        Termination::Budget
    };
    Ok(finish(o, st, termination, config))
}

/// Run the compact-domain variant: both players projected, inner ascent
/// stopped at a projected fixed point, fixed inner tolerance eps' = eps, and a
/// delta/2 acceptance threshold. f_old starts from a measurement at the initial
/// point rather than +infinity.
pub fn run_compact<F: Scalar>(
    o: &mut OracleSet<F>,
    x0: &[F],
    y0: &[F],
    config: &RunConfig<F>,
) -> CoreResult<RunRecord<F>> {
    config.validate()?;
    check_dims(o, x0, y0)?;
    let domain_x = o.objective.domain_x().clone();
    let domain_y = o.objective.domain_y().clone();
    if !domain_x.is_bounded() || !domain_y.is_bounded() {
        return Err(CoreError::Config(
            "compact mode requires bounded x and y domains".into(),
        ));
    }
    if !domain_x.contains(x0) || !domain_y.contains(y0) {
        return Err(CoreError::Config(
            "initial point lies outside the domain".into(),
        ));
    }

    let f_init = o.value(x0, y0)?;
    let mut st = LoopState::new(x0, y0, f_init, config.epsilon, config);

    while st.r <= config.r_max && st.i < config.max_outer_iters {
        if config.remeasure_on_reject {
            st.f_old = o.value(&st.x, &st.y)?;
        }
        let delta_x = propose(&config.proposal, o, &st.x, &st.y, &mut st.rng_proposal)?;
        let x_prop = domain_x.project(&add_scaled(&st.x, F::one(), &delta_x));

        let path = ascend_projected(
            o,
            &x_prop,
            &st.y,
            config.epsilon,
            config.eta,
            config.inner_cap,
            &domain_y,
        )?;
        let y_prop = path.last().to_vec();
        let f_new = o.value(&x_prop, &y_prop)?;

        let hit_cap = path.status == AscentStatus::HitCap;
        let accepted = accept_decision(
            f_new,
            st.f_old,
            config.delta,
            st.i,
            config.tau1,
            &mut st.rng_accept,
            &config.accept_mode,
            true,
        );

        let eps_row = st.eps_i;
        if accepted {
            st.r = 0;
        } else {
            st.r += 1;
        }
        st.push_row(accepted, f_new, eps_row, &path);
        if accepted {
            st.x = x_prop;
            st.y = y_prop;
            st.f_old = f_new;
        }
        st.i += 1;

        if hit_cap && config.abort_on_hitcap {
            return Ok(finish(o, st, Termination::InnerCapAbort, config));
        }
    }

    let termination = if st.r > config.r_max {
        Termination::RejectionLimit
    } else {
        Termination::Budget
    };
    Ok(finish(o, st, termination, config))
}

/// Stationarity of the min-player at a point: ||grad_x f(x, y)|| via the exact
/// gradient. Used by reporting and the certifier.
pub fn x_gradient_norm<F: Scalar>(o: &OracleSet<F>, x: &[F], y: &[F]) -> CoreResult<F> {
    let g = o.objective.as_spec().grad_x(x, y)?;
    Ok(norm(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Domain;
    use crate::oracle::OracleSet;
    use crate::testbed::make_function;
    use crate::trajectory::InnerStatus;

    fn base_config(seed: u64) -> RunConfig<f64> {
        RunConfig {
            epsilon: 0.05,
            delta: 0.05,
            omega: 0.5,
            eta: 0.05,
            tau1: Some(10.0),
            r_max: 50,
            max_outer_iters: 5000,
            proposal: ProposalSpec::Gaussian { sigma2: 0.25 },
            accept_mode: AcceptMode::Deterministic,
            inner_cap: 10_000,
            lipschitz: None,
            remeasure_on_reject: false,
            abort_on_hitcap: false,
            record_paths: false,
            seed,
        }
    }

    #[test]
    fn propose_zero_variance_is_zero() {
        let obj = make_function::<f64>("f1").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut rng = substream(0, streams::PROPOSAL);
        let spec = ProposalSpec::Gaussian { sigma2: 0.0 };
        let d = propose(&spec, &mut o, &[1.0], &[2.0], &mut rng).unwrap();
        assert_eq!(d, vec![0.0]);
        assert_eq!(o.counters.proposal_samples, 1);
    }

    #[test]
    fn propose_projected_clamps_to_box() {
        let obj = make_function::<f64>("bilinearcompact").unwrap();
        let mut o = OracleSet::deterministic(obj);
        // zero variance puts raw = 0; shift x outside manually via the
        // stochastic-gradient form instead: at (0.9, 1) grad_x = y = 1,
        // scale 5 moves to 0.9 - 5 = -4.1, clamped to -1.
        let mut rng = substream(0, streams::PROPOSAL);
        let spec = ProposalSpec::ProjectedStochGrad {
            scale: 5.0,
            noise_sigma2: 0.0,
        };
        let d = propose(&spec, &mut o, &[0.9], &[1.0], &mut rng).unwrap();
        assert!((d[0] - (-1.9)).abs() < 1e-12, "delta {d:?}");
    }

    #[test]
    fn propose_stoch_grad_matches_gradient() {
        let obj = make_function::<f64>("bilinearfree").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut rng = substream(0, streams::PROPOSAL);
        let spec = ProposalSpec::StochGrad { scale: 0.2 };
        let d = propose(&spec, &mut o, &[0.4], &[1.0], &mut rng).unwrap();
        // grad_x of x*y at y=1 is 1, so the move is -0.2
        assert!((d[0] + 0.2).abs() < 1e-15);
        assert_eq!(o.counters.grad_x_calls, 1);
    }

    #[test]
    fn accept_sufficient_decrease_in_every_mode() {
        let mut rng = substream(7, streams::ACCEPT);
        for mode in [
            AcceptMode::Annealed,
            AcceptMode::Deterministic,
            AcceptMode::FixedRate(0.1),
        ] {
            for i in [0u64, 3, 1000] {
                assert!(accept_decision(
                    -1.0f64,
                    0.0,
                    1.0,
                    i,
                    Some(5.0),
                    &mut rng,
                    &mode,
                    false
                ));
            }
        }
    }

    #[test]
    fn accept_annealed_always_accepts_at_i_zero() {
        // e^{-0/tau} = 1: the coin always lands accept
        for seed in 0..20 {
            let mut rng = substream(seed, streams::ACCEPT);
            assert!(accept_decision(
                1.0f64,
                0.0,
                1.0,
                0,
                Some(5.0),
                &mut rng,
                &AcceptMode::Annealed,
                false
            ));
        }
    }

    #[test]
    fn accept_annealed_rejects_when_cold() {
        // at i = 20*tau1 the accept probability is e^{-20} < 3e-9
        let mut accepted = 0;
        for seed in 0..50 {
            let mut rng = substream(seed, streams::ACCEPT);
            if accept_decision(
                1.0f64,
                0.0,
                1.0,
                200,
                Some(10.0),
                &mut rng,
                &AcceptMode::Annealed,
                false,
            ) {
                accepted += 1;
            }
        }
        assert_eq!(accepted, 0);
    }

    #[test]
    fn accept_threshold_uses_quarter_delta_free_half_compact() {
        let mut rng = substream(0, streams::ACCEPT);
        let det = AcceptMode::Deterministic;
        // decrease of 0.3 with delta = 1: passes delta/4 = 0.25, fails delta/2 = 0.5
        assert!(accept_decision(
            -0.3f64, 0.0, 1.0, 5, None, &mut rng, &det, false
        ));
        assert!(!accept_decision(
            -0.3f64, 0.0, 1.0, 5, None, &mut rng, &det, true
        ));
    }

    #[test]
    fn accept_fixed_rate_period() {
        let mut rng = substream(0, streams::ACCEPT);
        let mode = AcceptMode::FixedRate(0.25f64);
        // ceil(1/0.25) = 4: else-branch accepts at i = 0, 4, 8, ...
        let pattern: Vec<bool> = (0..9)
            .map(|i| accept_decision(1.0, 0.0, 1.0, i, None, &mut rng, &mode, false))
            .collect();
        assert_eq!(
            pattern,
            [true, false, false, false, true, false, false, false, true]
        );
    }

    #[test]
    fn schedule_initial_and_step() {
        // one accepted step at eta*L = 0.05 multiplies by 0.9^-2
        let eps1 = epsilon_schedule_step(0.05f64, 0.05, Some(1.0), true).unwrap();
        assert!((eps1 - 0.05 / 0.81).abs() < 1e-15);
        assert!((eps1 - 0.0617284).abs() < 1e-7);
        let same = epsilon_schedule_step(0.05f64, 0.05, Some(1.0), false).unwrap();
        assert_eq!(same, 0.05);
        // schedule off
        let off = epsilon_schedule_step(0.05f64, 0.5, None, true).unwrap();
        assert_eq!(off, 0.05);
    }

    #[test]
    fn schedule_rejects_large_eta_l() {
        assert!(matches!(
            epsilon_schedule_step(0.05f64, 0.5, Some(1.0), true),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn run_zero_variance_terminates_by_rejection_limit() {
        let obj = make_function::<f64>("f1").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(3);
        cfg.proposal = ProposalSpec::Gaussian { sigma2: 0.0 };
        cfg.r_max = 6;
        let rec = run(&mut o, &[1.0], &[1.0], &cfg).unwrap();
        assert_eq!(rec.termination, Termination::RejectionLimit);
        // first iteration accepts (f_old = +inf), then r_max + 1 identical
        // rejections
        assert_eq!(rec.iterations(), 1 + cfg.r_max + 1);
        assert!(rec.rows[0].accepted);
        assert!(rec.rows[1..].iter().all(|r| !r.accepted));
        assert_eq!(rec.rows.last().unwrap().r, cfg.r_max + 1);
    }

    #[test]
    fn run_unbounded_objective_reports_hitcap() {
        let obj = make_function::<f64>("f2").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(0);
        cfg.inner_cap = 500;
        cfg.max_outer_iters = 1;
        let rec = run(&mut o, &[1.0], &[1.0], &cfg).unwrap();
        assert_eq!(rec.rows[0].inner_status, InnerStatus::HitCap);
        assert_eq!(rec.termination, Termination::Budget);
    }

    #[test]
    fn run_abort_on_hitcap_stops_immediately() {
        let obj = make_function::<f64>("f2").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(0);
        cfg.inner_cap = 500;
        cfg.abort_on_hitcap = true;
        let rec = run(&mut o, &[1.0], &[1.0], &cfg).unwrap();
        assert_eq!(rec.termination, Termination::InnerCapAbort);
        assert_eq!(rec.iterations(), 1);
    }

    #[test]
    fn run_counter_shape_per_iteration() {
        let obj = make_function::<f64>("f1").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(11);
        cfg.max_outer_iters = 40;
        cfg.r_max = 1000;
        let rec = run(&mut o, &[2.0], &[1.0], &cfg).unwrap();
        let n = rec.iterations();
        assert_eq!(rec.counters.proposal_samples, n);
        assert_eq!(rec.counters.value_calls, n);
        assert_eq!(rec.counters.ascent_invocations, n);
        // Gaussian proposals never query grad_x
        assert_eq!(rec.counters.grad_x_calls, 0);
    }

    #[test]
    fn run_seed_determinism_bitwise() {
        let cfg = base_config(42);
        let mut recs = Vec::new();
        for _ in 0..2 {
            let obj = make_function::<f64>("f1").unwrap();
            let mut o = OracleSet::deterministic(obj);
            let mut c = cfg.clone();
            c.max_outer_iters = 60;
            c.accept_mode = AcceptMode::Annealed;
            recs.push(run(&mut o, &[5.5], &[5.5], &c).unwrap());
        }
        assert_eq!(recs[0].rows, recs[1].rows);
        assert_eq!(recs[0].final_x, recs[1].final_x);
        assert_eq!(recs[0].final_y, recs[1].final_y);
        assert_eq!(recs[0].final_f.to_bits(), recs[1].final_f.to_bits());
    }

    #[test]
    fn run_accepted_values_strictly_decrease() {
        let obj = make_function::<f64>("f1").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(5);
        cfg.max_outer_iters = 400;
        let rec = run(&mut o, &[5.5], &[5.5], &cfg).unwrap();
        let accepted: Vec<f64> = rec
            .rows
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.f_new)
            .collect();
        assert!(accepted.len() >= 2);
        for w in accepted.windows(2) {
            assert!(
                w[1] <= w[0] - cfg.delta / 4.0 + 1e-12,
                "accepted values must drop by >= delta/4: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn run_epsilon_stays_in_schedule_bounds() {
        let obj = make_function::<f64>("f1").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(9);
        cfg.eta = 0.01;
        cfg.lipschitz = Some(crate::testbed::quadratic_saddle_lipschitz::<f64>());
        cfg.max_outer_iters = 50;
        let rec = run(&mut o, &[5.5], &[5.5], &cfg).unwrap();
        let shrink = 1.0 - 2.0 * cfg.eta * cfg.lipschitz.unwrap();
        let accepts = rec.accept_count() as i32;
        let hi = (cfg.epsilon / 2.0) * shrink.powi(-2 * accepts);
        for row in &rec.rows {
            assert!(row.eps_i >= cfg.epsilon / 2.0 - 1e-15);
            assert!(row.eps_i <= hi + 1e-12);
        }
        assert!((rec.final_eps - hi).abs() <= 1e-12);
    }

    #[test]
    fn run_rejects_dim_mismatch() {
        let obj = make_function::<f64>("f1").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let cfg = base_config(0);
        assert!(matches!(
            run(&mut o, &[1.0, 2.0], &[1.0], &cfg),
            Err(CoreError::DimMismatch { .. })
        ));
    }

    #[test]
    fn compact_rejects_start_outside_domain() {
        let obj = make_function::<f64>("bilinearcompact").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(0);
        cfg.proposal = ProposalSpec::ProjectedGaussian { sigma2: 1.0 };
        assert!(matches!(
            run_compact(&mut o, &[2.0], &[0.0], &cfg),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn compact_rejects_unbounded_domain() {
        let obj = make_function::<f64>("bilinearfree").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let cfg = base_config(0);
        assert!(matches!(
            run_compact(&mut o, &[0.4], &[0.4], &cfg),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn compact_iterates_stay_inside_box() {
        let obj = make_function::<f64>("bilinearcompact").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(13);
        cfg.epsilon = 0.06;
        cfg.delta = 0.06;
        cfg.eta = 0.2;
        cfg.r_max = 5;
        cfg.proposal = ProposalSpec::ProjectedStochGrad {
            scale: 0.2,
            noise_sigma2: 1.0,
        };
        let rec = run_compact(&mut o, &[0.4], &[0.4], &cfg).unwrap();
        for row in &rec.rows {
            assert!(row.x[0].abs() <= 1.0 + 1e-12);
            assert!(row.y[0].abs() <= 1.0 + 1e-12);
        }
        assert!(rec.final_x[0].abs() <= 1.0 + 1e-12);
        assert!(rec.final_y[0].abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn compact_single_point_x_domain_pins_x() {
        use crate::objective::ObjectiveSpec;
        use std::sync::Arc;
        // bilinear with X = {0.3}: proposals project back to the point
        let spec = ObjectiveSpec::new(
            "pinned-bilinear",
            1,
            1,
            Arc::new(|x: &[f64], y: &[f64]| x[0] * y[0]),
            Arc::new(|_x: &[f64], y: &[f64]| vec![y[0]]),
            Arc::new(|x: &[f64], _y: &[f64]| vec![x[0]]),
            Domain::Box {
                lo: vec![0.3],
                hi: vec![0.3],
            },
            Domain::Box {
                lo: vec![-1.0],
                hi: vec![1.0],
            },
        )
        .unwrap()
        .with_bound(1.0)
        .with_lipschitz(1.0);
        let mut o = OracleSet::deterministic(crate::objective::Objective::Exact(spec));
        let mut cfg = base_config(17);
        cfg.epsilon = 0.06;
        cfg.delta = 0.06;
        cfg.eta = 0.2;
        cfg.r_max = 5;
        cfg.proposal = ProposalSpec::ProjectedGaussian { sigma2: 1.0 };
        let rec = run_compact(&mut o, &[0.3], &[0.0], &cfg).unwrap();
        // every trial ascent climbs to the boundary argmax y = 1, so every
        // candidate measures f = 0.3 > f_old = 0 and is rejected; the
        // accepted state never moves
        assert_eq!(rec.termination, Termination::RejectionLimit);
        assert_eq!(rec.final_x, vec![0.3]);
        assert_eq!(rec.final_y, vec![0.0]);
        assert_eq!(rec.final_f, 0.0);
        assert!(rec.rows.iter().all(|row| !row.accepted));
        assert!(rec.rows.iter().all(|row| row.f_new == 0.3));
        // starting ON the argmax instead: same rejections, but the returned
        // point is the equilibrium for the pinned x
        let rec = run_compact(&mut o, &[0.3], &[1.0], &cfg).unwrap();
        assert_eq!(rec.termination, Termination::RejectionLimit);
        assert_eq!(rec.final_y, vec![1.0]);
        assert_eq!(rec.final_f, 0.3);
    }

    #[test]
    fn compact_saddle_start_stays_near_init() {
        let obj = make_function::<f64>("bilinearcompact").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(23);
        cfg.epsilon = 0.06;
        cfg.delta = 0.06;
        cfg.eta = 0.2;
        cfg.r_max = 5;
        // tiny proposals cannot buy a delta/2 improvement at (0, -1)
        cfg.proposal = ProposalSpec::ProjectedGaussian { sigma2: 1e-6 };
        let rec = run_compact(&mut o, &[0.0], &[-1.0], &cfg).unwrap();
        assert_eq!(rec.termination, Termination::RejectionLimit);
        assert!(rec.final_x[0].abs() < 0.01);
        assert!((rec.final_y[0] + 1.0).abs() < 0.01);
    }

    #[test]
    fn compact_remeasure_flag_matches_exact_oracles() {
        // under deterministic oracles re-measuring changes nothing
        let mut finals = Vec::new();
        for remeasure in [false, true] {
            let obj = make_function::<f64>("bilinearcompact").unwrap();
            let mut o = OracleSet::deterministic(obj);
            let mut cfg = base_config(29);
            cfg.epsilon = 0.06;
            cfg.delta = 0.06;
            cfg.eta = 0.2;
            cfg.r_max = 5;
            cfg.remeasure_on_reject = remeasure;
            cfg.proposal = ProposalSpec::ProjectedStochGrad {
                scale: 0.2,
                noise_sigma2: 1.0,
            };
            let rec = run_compact(&mut o, &[0.4], &[0.4], &cfg).unwrap();
            finals.push((rec.final_x.clone(), rec.final_y.clone(), rec.rows.len()));
        }
        assert_eq!(finals[0].0, finals[1].0);
        assert_eq!(finals[0].1, finals[1].1);
        assert_eq!(finals[0].2, finals[1].2);
    }

    #[test]
    fn compact_rows_print_fixed_epsilon() {
        let obj = make_function::<f64>("bilinearcompact").unwrap();
        let mut o = OracleSet::deterministic(obj);
        let mut cfg = base_config(31);
        cfg.epsilon = 0.06;
        cfg.delta = 0.06;
        cfg.eta = 0.2;
        cfg.r_max = 5;
        cfg.proposal = ProposalSpec::ProjectedGaussian { sigma2: 1.0 };
        let rec = run_compact(&mut o, &[0.4], &[0.4], &cfg).unwrap();
        assert!(rec.rows.iter().all(|r| r.eps_i == 0.06));
        assert_eq!(rec.final_eps, 0.06);
    }
}
