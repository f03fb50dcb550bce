//! Reference first-order min-max dynamics: gradient descent-ascent,
//! optimistic mirror descent with past-gradient correction, and the
//! two-call extragradient method.
//!
//! All three are deterministic given deterministic oracles. A run that
//! produces a non-finite iterate (or a value/gradient overflow) stops with
//! `Diverged` and keeps the last finite point.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::linalg::{add_scaled, all_finite};
use crate::oracle::{OracleCounters, OracleSet};
use crate::scalar::Scalar;
use crate::trajectory::{InnerStatus, TrajectoryRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineStatus {
    /// Completed the requested number of iterations.
    Finished,
    /// Produced a non-finite iterate or evaluation; stopped early at the
    /// last finite point.
    Diverged,
}

/// Trajectory of one baseline run. Rows reuse the solver schema with
/// `accepted = true`, `r = 0`, `eps_i = 0`, and `inner_status = None`
/// (`inner_steps` holds the max-player substep count for GDA).
#[derive(Clone, Debug)]
pub struct BaselineRecord<F> {
    pub algorithm: String,
    pub rows: Vec<TrajectoryRow<F>>,
    pub final_x: Vec<F>,
    pub final_y: Vec<F>,
    pub status: BaselineStatus,
    pub counters: OracleCounters,
}

fn check_inputs<F: Scalar>(o: &OracleSet<F>, x0: &[F], y0: &[F], lr: F) -> CoreResult<()> {
    if !lr.is_finite() || lr <= F::zero() {
        return Err(CoreError::Config(
            "learning rate must be finite and > 0".into(),
        ));
    }
    if x0.len() != o.objective.dim_x() || y0.len() != o.objective.dim_y() {
        return Err(CoreError::DimMismatch {
            expected: o.objective.dim_x() + o.objective.dim_y(),
            got: x0.len() + y0.len(),
        });
    }
    Ok(())
}

/// Evaluate f for a trajectory row; a non-finite value signals divergence
/// rather than a hard error.
fn row_value<F: Scalar>(o: &mut OracleSet<F>, x: &[F], y: &[F]) -> CoreResult<Option<F>> {
    match o.value(x, y) {
        Ok(v) => Ok(Some(v)),
        Err(CoreError::Evaluation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn grad_or_diverged<F: Scalar>(res: CoreResult<Vec<F>>) -> CoreResult<Option<Vec<F>>> {
    match res {
        Ok(g) => Ok(Some(g)),
        Err(CoreError::Evaluation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

struct BaselineLoop<F> {
    x: Vec<F>,
    y: Vec<F>,
    rows: Vec<TrajectoryRow<F>>,
    status: BaselineStatus,
}

impl<F: Scalar> BaselineLoop<F> {
    fn new(x0: &[F], y0: &[F]) -> Self {
        BaselineLoop {
            x: x0.to_vec(),
            y: y0.to_vec(),
            rows: Vec::new(),
            status: BaselineStatus::Finished,
        }
    }

    fn push_row(&mut self, t: u64, f_here: Option<F>, f_next: Option<F>, substeps: u64) {
        let fill = |v: Option<F>| v.unwrap_or_else(F::infinity);
        self.rows.push(TrajectoryRow {
            iter: t,
            accepted: true,
            r: 0,
            eps_i: F::zero(),
            f_old: fill(f_here),
            f_new: fill(f_next),
            inner_steps: substeps,
            inner_status: InnerStatus::None,
            x: self.x.clone(),
            y: self.y.clone(),
        });
    }

    /// Adopt the next iterate unless it is non-finite.
    fn advance(&mut self, x_next: Vec<F>, y_next: Vec<F>) -> bool {
        if all_finite(&x_next) && all_finite(&y_next) {
            self.x = x_next;
            self.y = y_next;
            true
        } else {
            self.status = BaselineStatus::Diverged;
            false
        }
    }

    /// Record a row for an iteration whose gradients overflowed, and mark
    /// the run diverged at the current (still finite) point.
    fn diverge_row(&mut self, t: u64, f_here: Option<F>, substeps: u64) {
        self.push_row(t, f_here, None, substeps);
        self.status = BaselineStatus::Diverged;
    }

    fn finish(self, o: &OracleSet<F>, algorithm: &str) -> BaselineRecord<F> {
        BaselineRecord {
            algorithm: algorithm.to_string(),
            final_x: self.x,
            final_y: self.y,
            status: self.status,
            counters: o.counters,
            rows: self.rows,
        }
    }
}

/// Gradient descent-ascent: per iteration, `k` ascent substeps on y (each at
/// the current y), then one descent step on x using the min-player gradient
/// at the iteration-start point. With k = 1 this is the classic simultaneous
/// GDA update.
pub fn run_gda<F: Scalar>(
    o: &mut OracleSet<F>,
    x0: &[F],
    y0: &[F],
    lr: F,
    k: usize,
    iters: u64,
) -> CoreResult<BaselineRecord<F>> {
    check_inputs(o, x0, y0, lr)?;
    if k < 1 {
        return Err(CoreError::Config("k must be >= 1".into()));
    }
    let mut st = BaselineLoop::new(x0, y0);
    for t in 0..iters {
        let f_here = row_value(o, &st.x, &st.y)?;
        // x-gradient pinned at the iteration-start point
        let Some(gx) = grad_or_diverged(o.grad_x(&st.x, &st.y))? else {
            st.diverge_row(t, f_here, k as u64);
            break;
        };
        let mut y = st.y.clone();
        let mut y_ok = true;
        for _ in 0..k {
            let Some(gy) = grad_or_diverged(o.grad_y(&st.x, &y))? else {
                y_ok = false;
                break;
            };
            y = add_scaled(&y, lr, &gy);
        }
        if !y_ok {
            st.diverge_row(t, f_here, k as u64);
            break;
        }
        let x = add_scaled(&st.x, -lr, &gx);
        let f_next = if all_finite(&x) && all_finite(&y) {
            row_value(o, &x, &y)?
        } else {
            None
        };
        st.push_row(t, f_here, f_next, k as u64);
        if !st.advance(x, y) {
            break;
        }
    }
    Ok(st.finish(o, "gda"))
}

/// Optimistic mirror descent with the past-gradient correction:
/// x_{t+1} = x_t - 2*lr*gx(z_t) + lr*gx(z_{t-1}) and the mirrored ascent
/// update for y, warm-started with g(z_{-1}) = g(z_0).
pub fn run_omd<F: Scalar>(
    o: &mut OracleSet<F>,
    x0: &[F],
    y0: &[F],
    lr: F,
    iters: u64,
) -> CoreResult<BaselineRecord<F>> {
    check_inputs(o, x0, y0, lr)?;
    let mut st = BaselineLoop::new(x0, y0);
    let two = F::one() + F::one();
    let mut prev: Option<(Vec<F>, Vec<F>)> = None;
    for t in 0..iters {
        let f_here = row_value(o, &st.x, &st.y)?;
        let gx = grad_or_diverged(o.grad_x(&st.x, &st.y))?;
        let gy = grad_or_diverged(o.grad_y(&st.x, &st.y))?;
        let (Some(gx), Some(gy)) = (gx, gy) else {
            st.diverge_row(t, f_here, 0);
            break;
        };
        let (pgx, pgy) = prev.clone().unwrap_or_else(|| (gx.clone(), gy.clone()));
        let x = add_scaled(&add_scaled(&st.x, -two * lr, &gx), lr, &pgx);
        let y = add_scaled(&add_scaled(&st.y, two * lr, &gy), -lr, &pgy);
        prev = Some((gx, gy));
        let f_next = if all_finite(&x) && all_finite(&y) {
            row_value(o, &x, &y)?
        } else {
            None
        };
        st.push_row(t, f_here, f_next, 0);
        if !st.advance(x, y) {
            break;
        }
    }
    Ok(st.finish(o, "omd"))
}

/// Extragradient: a half-step z_h = z_t + lr*v(z_t) followed by the full
/// step z_{t+1} = z_t + lr*v(z_h), with v = (-grad_x f, +grad_y f).
pub fn run_eg<F: Scalar>(
    o: &mut OracleSet<F>,
    x0: &[F],
    y0: &[F],
    lr: F,
    iters: u64,
) -> CoreResult<BaselineRecord<F>> {
    check_inputs(o, x0, y0, lr)?;
    let mut st = BaselineLoop::new(x0, y0);
    for t in 0..iters {
        let f_here = row_value(o, &st.x, &st.y)?;
        let gx = grad_or_diverged(o.grad_x(&st.x, &st.y))?;
        let gy = grad_or_diverged(o.grad_y(&st.x, &st.y))?;
        let (Some(gx), Some(gy)) = (gx, gy) else {
            st.diverge_row(t, f_here, 0);
            break;
        };
        let xh = add_scaled(&st.x, -lr, &gx);
        let yh = add_scaled(&st.y, lr, &gy);
        if !(all_finite(&xh) && all_finite(&yh)) {
            st.diverge_row(t, f_here, 0);
            break;
        }
        let gxh = grad_or_diverged(o.grad_x(&xh, &yh))?;
        let gyh = grad_or_diverged(o.grad_y(&xh, &yh))?;
        let (Some(gxh), Some(gyh)) = (gxh, gyh) else {
            st.diverge_row(t, f_here, 0);
            break;
        };
        let x = add_scaled(&st.x, -lr, &gxh);
        let y = add_scaled(&st.y, lr, &gyh);
        let f_next = if all_finite(&x) && all_finite(&y) {
            row_value(o, &x, &y)?
        } else {
            None
        };
        st.push_row(t, f_here, f_next, 0);
        if !st.advance(x, y) {
            break;
        }
    }
    Ok(st.finish(o, "eg"))
}
