//! Theoretical hyperparameter calculator: evaluates the eight-parameter
//! dependency chain nu -> r_max -> I -> eta -> J -> eps_hat1 -> batch sizes
//! from the constants (b, L, eps, delta, omega, tau1), checks the two derived
//! inequalities, and provides an empirical smoothness estimator for
//! objectives whose constants are undeclared.
//!
//! All logarithms are natural. The tightly nested formulas admit more than
//! one bracket reading; this implementation groups the r_max formula as
//! log^2(inner + log(1/nu)) and the nu formula as (A (B + C + 1))^-2 with
//!   A = 320 b (L+1) / eps^2
//!   B = tau1 log(128 / omega^2)
//!   C = (2048 b / (omega delta)) log^2((100/omega)(tau1+1)(8b/delta + 1)).
//! The two inequality checks are the behavioral contract for that choice.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult, TuningError};
use crate::linalg;
use crate::objective::ObjectiveSpec;
use crate::oracle::substream;
use crate::scalar::{lit, Scalar};

/// Output of [`theoretical_params`]: the eight derived quantities, the echoed
/// inputs, and the two inequality checks.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TheoreticalParams<F> {
    pub b: F,
    pub l: F,
    pub eps: F,
    pub delta: F,
    pub omega: F,
    pub tau1: F,
    /// Item 1: proposal-locality radius nu.
    pub nu: F,
    /// Item 2: rejection cutoff r_max (real-valued; ceil when used as a count).
    pub r_max: F,
    /// Item 3: outer-iteration bound I.
    pub cap_i: F,
    /// Item 4: learning rate eta = min(1/(10L), 1/(8 L I)).
    pub eta: F,
    /// Item 5: inner-iteration bound J = 16 b / (eta eps^2).
    pub cap_j: F,
    /// Item 6: oracle accuracy eps_hat1 = min(eps, eta L, delta/8).
    pub eps_hat1: F,
    /// Item 7: value-oracle batch size.
    pub batch_value: F,
    /// Item 8: y-gradient-oracle batch size.
    pub batch_grad_y: F,
    /// Value-Lipschitz constant L1 = sqrt(2 L b).
    pub l1: F,
    /// nu <= (1/10) (2 J I + 2 (r_max 8b/delta + 1))^-1
    pub nu_ineq_ok: bool,
    /// r_max >= (4/omega) log(100 I / omega)
    pub rmax_ineq_ok: bool,
}

fn item<F: Scalar>(idx: usize, v: F) -> Result<F, TuningError> {
    if v.is_finite() && v > F::zero() {
        Ok(v)
    } else {
        Err(TuningError {
            item: idx,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Evaluate the eight-parameter chain. Requires 0 < eps <= 1 and all other
/// inputs positive; any item that evaluates nonpositive or non-finite is
/// reported with its 1-based index.
pub fn theoretical_params<F: Scalar>(
    b: F,
    l: F,
    eps: F,
    delta: F,
    omega: F,
    tau1: F,
) -> CoreResult<TheoreticalParams<F>> {
    if !(eps > F::zero() && eps <= F::one()) {
        return Err(CoreError::Config("eps must lie in (0, 1]".into()));
    }
    for (name, v) in [
        ("b", b),
        ("L", l),
        ("delta", delta),
        ("omega", omega),
        ("tau1", tau1),
    ] {
        if !(v > F::zero() && v.is_finite()) {
            return Err(CoreError::Config(format!(
                "{name} must be positive and finite"
            )));
        }
    }

    let c100 = lit::<F>(100.0);
    let c128 = lit::<F>(128.0);
    let c320 = lit::<F>(320.0);
    let c2048 = lit::<F>(2048.0);
    let c8 = lit::<F>(8.0);
    let c10 = lit::<F>(10.0);
    let c16 = lit::<F>(16.0);
    let c140 = lit::<F>(140.0);
    let c4 = lit::<F>(4.0);
    let c2 = lit::<F>(2.0);

    let inner = c100 / omega * (tau1 + F::one()) * (c8 * b / delta + F::one());
    let a = c320 * b * (l + F::one()) / (eps * eps);
    let bb = tau1 * (c128 / (omega * omega)).ln();
    let cc = c2048 * b / (omega * delta) * inner.ln().powi(2);
    let nu = item(1, (a * (bb + cc + F::one())).powi(-2) / c10)?;

    let r_max = item(
        2,
        c128 / omega * (inner + (F::one() / nu).ln()).ln().powi(2),
    )?;
    let cap_i = item(
        3,
        tau1 * (r_max / nu).ln() + c8 * r_max * b / delta + F::one(),
    )?;
    let eta = item(4, (F::one() / (c10 * l)).min(F::one() / (c8 * l * cap_i)))?;
    let cap_j = item(5, c16 * b / (eta * eps * eps))?;
    let eps_hat1 = item(6, eps.min(eta * l).min(delta / c8))?;
    let log_inv_nu = (F::one() / nu).ln();
    let batch_value = item(7, c140 * c140 * b * b * log_inv_nu / (eps_hat1 * eps_hat1))?;
    let l1 = (c2 * l * b).sqrt();
    let batch_grad_y = item(
        8,
        c140 * c140 * l1 * l1 * log_inv_nu / (eps_hat1 * eps_hat1),
    )?;

    let nu_bound = (c2 * cap_j * cap_i + c2 * (r_max * c8 * b / delta + F::one())).recip() / c10;
    let rmax_bound = c4 / omega * (c100 * cap_i / omega).ln();

    Ok(TheoreticalParams {
        b,
        l,
        eps,
        delta,
        omega,
        tau1,
        nu,
        r_max,
        cap_i,
        eta,
        cap_j,
        eps_hat1,
        batch_value,
        batch_grad_y,
        l1,
        nu_ineq_ok: nu <= nu_bound,
        rmax_ineq_ok: r_max >= rmax_bound,
    })
}

/// Empirical smoothness estimation: samples the region uniformly and returns
/// (b_hat, L_hat) with b_hat the largest sampled |f| and L_hat the largest
/// sampled gradient difference quotient ||grad f(p) - grad f(q)|| / ||p - q||
/// over random pairs. Both are lower bounds on the true constants.
///
/// `region` is (lo, hi) over the concatenated (x, y) coordinates.
pub fn estimate_smoothness<F: Scalar>(
    obj: &ObjectiveSpec<F>,
    region: &(Vec<F>, Vec<F>),
    n_samples: usize,
    seed: u64,
) -> CoreResult<(F, F)> {
    let (lo, hi) = region;
    let dim = obj.dim_x + obj.dim_y;
    if lo.len() != dim || hi.len() != dim {
        return Err(CoreError::DimMismatch {
            expected: dim,
            got: lo.len().max(hi.len()),
        });
    }
    if n_samples < 2 {
        return Err(CoreError::Config("need n_samples >= 2".into()));
    }
    if lo
        .iter()
        .zip(hi)
        .any(|(l, h)| l > h || !l.is_finite() || !h.is_finite())
    {
        return Err(CoreError::BadBounds);
    }
    if lo.iter().zip(hi).all(|(l, h)| l == h) {
        return Err(CoreError::Config("degenerate region: zero width".into()));
    }

    let mut rng = substream(seed, crate::oracle::streams::SMOOTHNESS);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> (Vec<F>, Vec<F>) {
        let z: Vec<F> = lo
            .iter()
            .zip(hi)
            .map(|(&l, &h)| l + (h - l) * F::unit_uniform(rng))
            .collect();
        (z[..obj.dim_x].to_vec(), z[obj.dim_x..].to_vec())
    };

    let mut b_hat = F::zero();
    let mut l_hat = F::zero();
    for _ in 0..n_samples {
        let (px, py) = draw(&mut rng);
        let (qx, qy) = draw(&mut rng);
        b_hat = b_hat
            .max(obj.value(&px, &py)?.abs())
            .max(obj.value(&qx, &qy)?.abs());

        let mut gp = obj.grad_x(&px, &py)?;
        gp.extend(obj.grad_y(&px, &py)?);
        let mut gq = obj.grad_x(&qx, &qy)?;
        gq.extend(obj.grad_y(&qx, &qy)?);
        let mut p = px;
        p.extend(py);
        let mut q = qx;
        q.extend(qy);
        let d = linalg::dist(&p, &q);
        if d > F::zero() {
            l_hat = l_hat.max(linalg::dist(&gp, &gq) / d);
        }
    }
    Ok((b_hat, l_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Domain;
    use std::sync::Arc;

    #[test]
    fn reference_point_evaluates_and_passes_inequalities() {
        let p = theoretical_params(1.0f64, 1.0, 0.5, 0.5, 0.5, 1.0).unwrap();
        assert!(p.nu_ineq_ok && p.rmax_ineq_ok);
        // spot magnitudes: the chain is astronomically conservative
        assert!(p.nu < 1e-19 && p.nu > 1e-21);
        assert!(p.r_max > 1.9e4 && p.r_max < 2.1e4);
        assert!(p.eta < 1e-6);
        assert_eq!(p.eps_hat1, p.eta * p.l);
        assert!((p.l1 - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eps_hat1_min_selection() {
        // with delta = 8 and eps = 1, eta * L is the smallest of the three
        let p = theoretical_params(1.0f64, 1.0, 1.0, 8.0, 0.5, 1.0).unwrap();
        assert_eq!(p.eps_hat1, p.eta * p.l);
    }

    #[test]
    fn nu_strictly_decreases_in_b() {
        let p1 = theoretical_params(1.0f64, 1.0, 0.5, 0.5, 0.5, 1.0).unwrap();
        let p2 = theoretical_params(2.0f64, 1.0, 0.5, 0.5, 0.5, 1.0).unwrap();
        assert!(p2.nu < p1.nu);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(theoretical_params(1.0f64, 1.0, 1.5, 0.5, 0.5, 1.0).is_err());
        assert!(theoretical_params(-1.0f64, 1.0, 0.5, 0.5, 0.5, 1.0).is_err());
        assert!(theoretical_params(1.0f64, 1.0, 0.5, 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn inequalities_hold_across_a_grid() {
        for &eps in &[0.25f64, 0.5, 1.0] {
            for &delta in &[0.25f64, 0.5, 1.0] {
                for &omega in &[0.1f64, 0.5, 0.9] {
                    let p = theoretical_params(1.0, 1.0, eps, delta, omega, 1.0).unwrap();
                    assert!(p.nu_ineq_ok, "nu bound at ({eps},{delta},{omega})");
                    assert!(p.rmax_ineq_ok, "r_max bound at ({eps},{delta},{omega})");
                    assert!(p.nu > 0.0 && p.nu.is_finite());
                    assert!(p.batch_grad_y.is_finite());
                }
            }
        }
    }

    fn linear_obj() -> ObjectiveSpec<f64> {
        ObjectiveSpec::new(
            "linear",
            1,
            1,
            Arc::new(|x: &[f64], y: &[f64]| 2.0 * x[0] + 3.0 * y[0]),
            Arc::new(|_: &[f64], _: &[f64]| vec![2.0]),
            Arc::new(|_: &[f64], _: &[f64]| vec![3.0]),
            Domain::All,
            Domain::All,
        )
        .unwrap()
    }

    #[test]
    fn linear_objective_has_zero_curvature_estimate() {
        let region = (vec![-1.0, -1.0], vec![1.0, 1.0]);
        let (_, l_hat) = estimate_smoothness(&linear_obj(), &region, 200, 1).unwrap();
        assert_eq!(l_hat, 0.0);
    }

    #[test]
    fn constant_objective_estimates() {
        let c = ObjectiveSpec::new(
            "const",
            1,
            1,
            Arc::new(|_: &[f64], _: &[f64]| -2.5),
            Arc::new(|_: &[f64], _: &[f64]| vec![0.0]),
            Arc::new(|_: &[f64], _: &[f64]| vec![0.0]),
            Domain::All,
            Domain::All,
        )
        .unwrap();
        let region = (vec![-1.0, -1.0], vec![1.0, 1.0]);
        let (b_hat, l_hat) = estimate_smoothness(&c, &region, 100, 1).unwrap();
        assert_eq!(b_hat, 2.5);
        assert_eq!(l_hat, 0.0);
    }

    #[test]
    fn quadratic_curvature_estimate_bounded_by_hessian_norm() {
        let f1 = crate::testbed::make_function::<f64>("F1").unwrap();
        let region = (vec![-1.0, -1.0], vec![1.0, 1.0]);
        let (_, l_hat) = estimate_smoothness(&f1, &region, 500, 2).unwrap();
        let l_true = crate::testbed::quadratic_saddle_lipschitz::<f64>();
        assert!(l_hat <= l_true + 1e-9, "l_hat = {l_hat}");
        assert!(l_hat > 0.5 * l_true, "sampling should get close: {l_hat}");
    }

    #[test]
    fn degenerate_region_rejected() {
        let region = (vec![0.0, 0.0], vec![0.0, 0.0]);
        assert!(estimate_smoothness(&linear_obj(), &region, 10, 1).is_err());
    }
}
