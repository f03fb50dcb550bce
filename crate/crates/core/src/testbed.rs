//! Bundled benchmark objectives with analytic gradients and declared or
//! estimated smoothness constants, plus a synthetic finite-sum sine family
//! for stochastic-oracle tests.

use std::sync::Arc;

use crate::error::{CoreError, CoreResult};
use crate::linalg;
use crate::objective::{Component, Domain, EmpiricalObjective, GradFn, ObjectiveSpec, ValueFn};
use crate::oracle::{streams, substream};
use crate::scalar::{lit, Scalar};
use crate::tuning::estimate_smoothness;

/// Exact gradient-Lipschitz constant of the quadratic saddle F1 (and of F2):
/// the largest singular value of the constant Hessian, 4 + 2 sqrt(5).
pub fn quadratic_saddle_lipschitz<F: Scalar>() -> F {
    lit(4.0 + 2.0 * 5.0f64.sqrt())
}

fn f1<F: Scalar>() -> ObjectiveSpec<F> {
    // f(x, y) = -3 x^2 - y^2 + 4 x y
    ObjectiveSpec::new(
        "F1",
        1,
        1,
        Arc::new(|x: &[F], y: &[F]| {
            lit::<F>(-3.0) * x[0] * x[0] - y[0] * y[0] + lit::<F>(4.0) * x[0] * y[0]
        }) as ValueFn<F>,
        Arc::new(|x: &[F], y: &[F]| vec![lit::<F>(-6.0) * x[0] + lit::<F>(4.0) * y[0]])
            as GradFn<F>,
        Arc::new(|x: &[F], y: &[F]| vec![lit::<F>(-2.0) * y[0] + lit::<F>(4.0) * x[0]])
            as GradFn<F>,
        Domain::All,
        Domain::All,
    )
    .unwrap()
    .with_lipschitz(quadratic_saddle_lipschitz())
}

fn f2<F: Scalar>() -> ObjectiveSpec<F> {
    // f(x, y) = 3 x^2 + y^2 + 4 x y; unbounded in every direction
    ObjectiveSpec::new(
        "F2",
        1,
        1,
        Arc::new(|x: &[F], y: &[F]| {
            lit::<F>(3.0) * x[0] * x[0] + y[0] * y[0] + lit::<F>(4.0) * x[0] * y[0]
        }) as ValueFn<F>,
        Arc::new(|x: &[F], y: &[F]| vec![lit::<F>(6.0) * x[0] + lit::<F>(4.0) * y[0]]) as GradFn<F>,
        Arc::new(|x: &[F], y: &[F]| vec![lit::<F>(2.0) * y[0] + lit::<F>(4.0) * x[0]]) as GradFn<F>,
        Domain::All,
        Domain::All,
    )
    .unwrap()
    .with_lipschitz(quadratic_saddle_lipschitz())
}

/// f(x, y) = (4x^2 - (y - 3x + 0.05x^3)^2 - 0.1 y^4) exp(-0.01 (x^2 + y^2)).
/// Registered under two names (F3 and FIntro) that share this closed form.
fn damped_ridge<F: Scalar>(name: &str) -> ObjectiveSpec<F> {
    let value = Arc::new(|x: &[F], y: &[F]| {
        let (x, y) = (x[0], y[0]);
        let u = y - lit::<F>(3.0) * x + lit::<F>(0.05) * x * x * x;
        let p = lit::<F>(4.0) * x * x - u * u - lit::<F>(0.1) * y * y * y * y;
        let e = (lit::<F>(-0.01) * (x * x + y * y)).exp();
        p * e
    }) as ValueFn<F>;
    let grad_x = Arc::new(|x: &[F], y: &[F]| {
        let (x, y) = (x[0], y[0]);
        let u = y - lit::<F>(3.0) * x + lit::<F>(0.05) * x * x * x;
        let p = lit::<F>(4.0) * x * x - u * u - lit::<F>(0.1) * y * y * y * y;
        let e = (lit::<F>(-0.01) * (x * x + y * y)).exp();
        let du_dx = lit::<F>(-3.0) + lit::<F>(0.15) * x * x;
        let dp_dx = lit::<F>(8.0) * x - lit::<F>(2.0) * u * du_dx;
        vec![e * (dp_dx - lit::<F>(0.02) * x * p)]
    }) as GradFn<F>;
    let grad_y = Arc::new(|x: &[F], y: &[F]| {
        let (x, y) = (x[0], y[0]);
        let u = y - lit::<F>(3.0) * x + lit::<F>(0.05) * x * x * x;
        let p = lit::<F>(4.0) * x * x - u * u - lit::<F>(0.1) * y * y * y * y;
        let e = (lit::<F>(-0.01) * (x * x + y * y)).exp();
        let dp_dy = lit::<F>(-2.0) * u - lit::<F>(0.4) * y * y * y;
        vec![e * (dp_dy - lit::<F>(0.02) * y * p)]
    }) as GradFn<F>;

    let spec =
        ObjectiveSpec::new(name, 1, 1, value, grad_x, grad_y, Domain::All, Domain::All).unwrap();
    // The constants are not available in closed form; estimate over
    // [-10, 10]^2 and flag them as estimates.
    let region = (vec![lit::<F>(-10.0); 2], vec![lit::<F>(10.0); 2]);
    let (b_hat, l_hat) = estimate_smoothness(&spec, &region, 512, 0xF3).unwrap();
    spec.with_estimated_constants(b_hat, l_hat)
}

fn bilinear<F: Scalar>(name: &str, compact: bool) -> ObjectiveSpec<F> {
    let spec = ObjectiveSpec::new(
        name,
        1,
        1,
        Arc::new(|x: &[F], y: &[F]| x[0] * y[0]) as ValueFn<F>,
        Arc::new(|_x: &[F], y: &[F]| vec![y[0]]) as GradFn<F>,
        Arc::new(|x: &[F], _y: &[F]| vec![x[0]]) as GradFn<F>,
        if compact {
            Domain::Box {
                lo: vec![lit::<F>(-1.0)],
                hi: vec![lit::<F>(1.0)],
            }
        } else {
            Domain::All
        },
        if compact {
            Domain::Box {
                lo: vec![lit::<F>(-1.0)],
                hi: vec![lit::<F>(1.0)],
            }
        } else {
            Domain::All
        },
    )
    .unwrap()
    .with_lipschitz(F::one());
    if compact {
        // |xy| <= 1 on [-1,1]^2 exactly
        spec.with_bound(F::one())
    } else {
        spec
    }
}

/// Benchmark objective registry, addressable by name (case-insensitive).
pub fn make_function<F: Scalar>(name: &str) -> CoreResult<ObjectiveSpec<F>> {
    match name.to_ascii_lowercase().as_str() {
        "f1" => Ok(f1()),
        "f2" => Ok(f2()),
        "f3" => Ok(damped_ridge("F3")),
        "fintro" => Ok(damped_ridge("FIntro")),
        "bilinearcompact" | "bilinear-compact" => Ok(bilinear("BilinearCompact", true)),
        "bilinearfree" | "bilinear-free" => Ok(bilinear("BilinearFree", false)),
        other => Err(CoreError::UnknownObjective(other.to_string())),
    }
}

/// Names accepted by [`make_function`].
pub const FUNCTION_NAMES: [&str; 6] = [
    "F1",
    "F2",
    "F3",
    "FIntro",
    "BilinearCompact",
    "BilinearFree",
];

/// Coordinatewise clamp of z onto the box [lo, hi]; errors on malformed
/// bounds. Idempotent and nonexpansive.
pub fn box_project<F: Scalar>(z: &[F], lo: &[F], hi: &[F]) -> CoreResult<Vec<F>> {
    if lo.len() != z.len() || hi.len() != z.len() {
        return Err(CoreError::DimMismatch {
            expected: z.len(),
            got: lo.len().max(hi.len()),
        });
    }
    let dom = Domain::Box {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
    };
    dom.validate(z.len())?;
    Ok(dom.project(z))
}

/// Finite-sum family of sine waves f_i = c sin(u_i . x + v_i . y) with m
/// components in dimension `dim` per player.
///
/// When `frequencies` is None, each (u_i, v_i) is drawn uniformly on the unit
/// sphere of R^{2 dim} (seeded), which pins the constants exactly: every
/// component is bounded by |c| and has gradient-Lipschitz constant
/// |c| * ||(u_i, v_i)||^2 = |c|.
pub fn make_sine_family<F: Scalar>(
    m: usize,
    dim: usize,
    amplitude: F,
    frequencies: Option<Vec<(Vec<F>, Vec<F>)>>,
    seed: u64,
) -> CoreResult<EmpiricalObjective<F>> {
    if m < 1 {
        return Err(CoreError::Config("sine family needs m >= 1".into()));
    }
    let freqs: Vec<(Vec<F>, Vec<F>)> = match frequencies {
        Some(fs) => {
            if fs.len() != m {
                return Err(CoreError::Config(
                    "frequency list length must equal m".into(),
                ));
            }
            for (u, v) in &fs {
                if u.len() != dim || v.len() != dim {
                    return Err(CoreError::DimMismatch {
                        expected: dim,
                        got: u.len().max(v.len()),
                    });
                }
            }
            fs
        }
        None => {
            let mut rng = substream(seed, streams::FAMILY);
            (0..m)
                .map(|_| {
                    // uniform direction on the unit sphere of R^{2 dim}
                    loop {
                        let w: Vec<F> =
                            (0..2 * dim).map(|_| F::standard_normal(&mut rng)).collect();
                        let n = linalg::norm(&w);
                        if n > lit(1e-8) {
                            let w = linalg::scale(F::one() / n, &w);
                            break (w[..dim].to_vec(), w[dim..].to_vec());
                        }
                    }
                })
                .collect()
        }
    };

    let max_freq_norm2 = freqs
        .iter()
        .map(|(u, v)| linalg::dot(u, u) + linalg::dot(v, v))
        .fold(F::zero(), F::max);

    let components = freqs
        .into_iter()
        .map(|(u, v)| {
            let c = amplitude;
            let (u2, v2) = (u.clone(), v.clone());
            let (u3, v3) = (u.clone(), v.clone());
            Component {
                value: Arc::new(move |x: &[F], y: &[F]| {
                    c * (linalg::dot(&u, x) + linalg::dot(&v, y)).sin()
                }) as ValueFn<F>,
                grad_x: Arc::new(move |x: &[F], y: &[F]| {
                    let cosine = (linalg::dot(&u2, x) + linalg::dot(&v2, y)).cos();
                    linalg::scale(c * cosine, &u2)
                }) as GradFn<F>,
                grad_y: Arc::new(move |x: &[F], y: &[F]| {
                    let cosine = (linalg::dot(&u3, x) + linalg::dot(&v3, y)).cos();
                    linalg::scale(c * cosine, &v3)
                }) as GradFn<F>,
            }
        })
        .collect();

    Ok(EmpiricalObjective {
        name: format!("sine-family-m{m}"),
        dim_x: dim,
        dim_y: dim,
        components,
        bound_b: Some(amplitude.abs()),
        lip_grad: Some(amplitude.abs() * max_freq_norm2),
        domain_x: Domain::All,
        domain_y: Domain::All,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::finite_diff_check;
    use rand::Rng;

    #[test]
    fn registry_values_match_closed_forms() {
        let f1 = make_function::<f64>("F1").unwrap();
        assert_eq!(f1.value(&[0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(f1.value(&[1.0], &[1.0]).unwrap(), 0.0);
        assert_eq!(f1.grad_x(&[1.0], &[1.0]).unwrap(), vec![-2.0]);
        assert_eq!(f1.grad_y(&[1.0], &[1.0]).unwrap(), vec![2.0]);

        let f2 = make_function::<f64>("F2").unwrap();
        assert_eq!(f2.value(&[1.0], &[1.0]).unwrap(), 8.0);

        let f3 = make_function::<f64>("F3").unwrap();
        assert_eq!(f3.value(&[0.0], &[0.0]).unwrap(), 0.0);
        assert!(f3.constants_estimated);

        let b = make_function::<f64>("BilinearCompact").unwrap();
        assert_eq!(b.value(&[0.4], &[0.4]).unwrap(), 0.4 * 0.4);
        assert_eq!(b.bound_b, Some(1.0));

        assert!(matches!(
            make_function::<f64>("nope"),
            Err(CoreError::UnknownObjective(_))
        ));
    }

    #[test]
    fn fintro_and_f3_share_the_closed_form() {
        let a = make_function::<f64>("F3").unwrap();
        let b = make_function::<f64>("FIntro").unwrap();
        for &(x, y) in &[(0.3, -0.7), (5.5, 5.5), (-2.0, 1.0)] {
            assert_eq!(a.value(&[x], &[y]).unwrap(), b.value(&[x], &[y]).unwrap());
        }
    }

    #[test]
    fn all_bundled_gradients_pass_finite_differences() {
        let mut rng = substream(11, 9);
        for name in FUNCTION_NAMES {
            let f = make_function::<f64>(name).unwrap();
            for _ in 0..100 {
                let x = rng.gen_range(-0.9..0.9);
                let y = rng.gen_range(-0.9..0.9);
                let err = finite_diff_check(&f, &[x], &[y], 1e-5).unwrap();
                assert!(err < 1e-6, "{name} at ({x},{y}): err = {err}");
            }
        }
    }

    #[test]
    fn f1_argmax_identity() {
        // argmax_y F1(x, .) = 2x with maximized value x^2
        let f1 = make_function::<f64>("F1").unwrap();
        for &x in &[-2.0, 0.5, 3.0] {
            assert_eq!(f1.grad_y(&[x], &[2.0 * x]).unwrap()[0], 0.0);
            let val = f1.value(&[x], &[2.0 * x]).unwrap();
            assert!((val - x * x).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_hessian_norm_is_declared() {
        // Hessian [[-6, 4], [4, -2]] has eigenvalues -4 +/- 2 sqrt(5); the
        // larger magnitude is 4 + 2 sqrt(5).
        let l: f64 = quadratic_saddle_lipschitz();
        assert!((l - 8.47213595499958).abs() < 1e-12);
        assert_eq!(make_function::<f64>("F1").unwrap().lip_grad, Some(l));
    }

    #[test]
    fn box_project_clamps() {
        let p = box_project(&[5.0f64, -5.0], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(p, vec![1.0, -1.0]);
        assert!(box_project(&[0.0f64], &[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn sine_family_constants_and_identities() {
        let fam = make_sine_family::<f64>(64, 1, 1.0, None, 7).unwrap();
        assert_eq!(fam.m(), 64);
        assert_eq!(fam.bound_b, Some(1.0));
        let l = fam.lip_grad.unwrap();
        assert!((l - 1.0).abs() < 1e-12, "unit-norm frequencies give L = c");

        // full gradient equals the mean of component gradients exactly
        let x = [0.3];
        let y = [-0.8];
        let mut acc = 0.0;
        for c in &fam.components {
            acc += (c.grad_y)(&x, &y)[0];
        }
        let mean = acc / 64.0;
        assert!((fam.mean_grad_y(&x, &y)[0] - mean).abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude_family_is_identically_zero() {
        let fam = make_sine_family::<f64>(4, 1, 0.0, None, 7).unwrap();
        assert_eq!(fam.mean_value(&[0.4], &[0.2]), 0.0);
        assert_eq!(fam.mean_grad_y(&[0.4], &[0.2]), vec![0.0]);
        assert_eq!(fam.bound_b, Some(0.0));
    }

    #[test]
    fn bounded_specs_respect_declared_bound() {
        let b = make_function::<f64>("BilinearCompact").unwrap();
        let mut rng = substream(5, 9);
        for _ in 0..10_000 {
            let x = rng.gen_range(-1.0..=1.0);
            let y = rng.gen_range(-1.0..=1.0);
            assert!(b.value(&[x], &[y]).unwrap().abs() <= 1.0);
        }
        let fam = make_sine_family::<f64>(16, 1, 0.25, None, 3).unwrap();
        for _ in 0..10_000 {
            let x = rng.gen_range(-5.0..5.0);
            let y = rng.gen_range(-5.0..5.0);
            assert!(fam.mean_value(&[x], &[y]).abs() <= 0.25 + 1e-15);
        }
    }
}
