//! Max-player subroutine: gradient ascent in y to a first-order stationary
//! point, plus the projected variant for box-constrained y. Paths record
//! every iterate and the gradient used at each step.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::linalg;
use crate::objective::{Domain, ObjectiveSpec};
use crate::oracle::OracleSet;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AscentStatus {
    /// Gradient norm fell to the threshold (unconstrained variant).
    Converged,
    /// Step cap reached before the stationarity test passed.
    HitCap,
    /// Projected-gradient displacement fell to the threshold (projected
    /// variant).
    ProjectedFixedPoint,
}

/// Recorded ascent trajectory at a fixed x.
#[derive(Clone, Debug)]
pub struct AscentPath<F> {
    pub x_fixed: Vec<F>,
    /// y_0 .. y_J (J = points.len() - 1 steps were taken).
    pub points: Vec<Vec<F>>,
    /// Gradient used at each taken step; length = steps().
    pub step_grads: Vec<Vec<F>>,
    pub eta: F,
    pub eps_prime: F,
    pub status: AscentStatus,
}

impl<F: Scalar> AscentPath<F> {
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last(&self) -> &[F] {
        self.points.last().expect("paths hold at least y_0")
    }
}

/// Default step cap when the objective's bound b is finite: ceil of
/// 16 b / (eta * eps_prime^2), the worst-case step count for a b-bounded
/// objective (each step gains at least eta * eps_prime^2 / 8 and the total
/// gain is at most 2b).
pub fn default_cap<F: Scalar>(b: F, eta: F, eps_prime: F) -> usize {
    let sixteen = F::from_f64(16.0).unwrap();
    let j = sixteen * b / (eta * eps_prime * eps_prime);
    j.ceil().to_usize().unwrap_or(usize::MAX).max(1)
}

/// Gradient ascent on y at fixed x until the (stochastic) gradient norm is
/// at most `eps_prime`, or `cap` steps have been taken.
pub fn ascend<F: Scalar>(
    o: &mut OracleSet<F>,
    x: &[F],
    y0: &[F],
    eps_prime: F,
    eta: F,
    cap: usize,
) -> CoreResult<AscentPath<F>> {
    if cap < 1 {
        return Err(CoreError::Config("ascent cap must be >= 1".into()));
    }
    if eta <= F::zero() {
        return Err(CoreError::Config(
            "ascent step size must be positive".into(),
        ));
    }
    o.counters.ascent_invocations += 1;

    let mut points = vec![y0.to_vec()];
    let mut step_grads = Vec::new();
    let mut y = y0.to_vec();
    let status = loop {
        if points.len() - 1 == cap {
            break AscentStatus::HitCap;
        }
        let g = o.grad_y(x, &y)?;
        if linalg::norm(&g) <= eps_prime {
            break AscentStatus::Converged;
        }
        y = linalg::add_scaled(&y, eta, &g);
        if !linalg::all_finite(&y) {
            return Err(CoreError::Evaluation {
                context: "ascent iterate".into(),
            });
        }
        points.push(y.clone());
        step_grads.push(g);
    };
    Ok(AscentPath {
        x_fixed: x.to_vec(),
        points,
        step_grads,
        eta,
        eps_prime,
        status,
    })
}

/// Projected gradient ascent on y at fixed x: y <- P_Y(y + eta g), stopping
/// when the projected-gradient displacement (1/eta) ||y - P_Y(y + eta g)||
/// is at most `eps_prime` (status ProjectedFixedPoint), or after `cap` steps.
pub fn ascend_projected<F: Scalar>(
    o: &mut OracleSet<F>,
    x: &[F],
    y0: &[F],
    eps_prime: F,
    eta: F,
    cap: usize,
    proj_y: &Domain<F>,
) -> CoreResult<AscentPath<F>> {
    if cap < 1 {
        return Err(CoreError::Config("ascent cap must be >= 1".into()));
    }
    if eta <= F::zero() {
        return Err(CoreError::Config(
            "ascent step size must be positive".into(),
        ));
    }
    if !proj_y.contains(y0) {
        return Err(CoreError::OutsideDomain);
    }
    o.counters.ascent_invocations += 1;

    let mut points = vec![y0.to_vec()];
    let mut step_grads = Vec::new();
    let mut y = y0.to_vec();
    let status = loop {
        if points.len() - 1 == cap {
            break AscentStatus::HitCap;
        }
        let g = o.grad_y(x, &y)?;
        let candidate = proj_y.project(&linalg::add_scaled(&y, eta, &g));
        if linalg::dist(&y, &candidate) / eta <= eps_prime {
            break AscentStatus::ProjectedFixedPoint;
        }
        y = candidate;
        points.push(y.clone());
        step_grads.push(g);
    };
    Ok(AscentPath {
        x_fixed: x.to_vec(),
        points,
        step_grads,
        eta,
        eps_prime,
        status,
    })
}

/// Directional derivative of f(x, .) at the start of each path segment,
/// along the segment direction: grad_y f(x, y_j) . v_j / ||v_j|| with
/// v_j = y_{j+1} - y_j. Zero-length segments yield None.
pub fn path_directional_derivatives<F: Scalar>(
    obj: &ObjectiveSpec<F>,
    path: &AscentPath<F>,
) -> CoreResult<Vec<Option<F>>> {
    let mut out = Vec::with_capacity(path.steps());
    for j in 0..path.steps() {
        let v = linalg::sub(&path.points[j + 1], &path.points[j]);
        let n = linalg::norm(&v);
        if n == F::zero() {
            out.push(None);
            continue;
        }
        let g = obj.grad_y(&path.x_fixed, &path.points[j])?;
        out.push(Some(linalg::dot(&g, &v) / n));
    }
    Ok(out)
}
