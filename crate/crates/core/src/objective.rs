//! Objective functions: closed-form value/gradient evaluators with declared
//! smoothness metadata, finite-sum (empirical-risk) objectives built from
//! component functions, and the finite-difference gradient checker used to
//! validate every bundled analytic gradient.

use std::sync::Arc;

use crate::error::{CoreError, CoreResult};
use crate::linalg;
use crate::scalar::Scalar;

pub type ValueFn<F> = Arc<dyn Fn(&[F], &[F]) -> F + Send + Sync>;
pub type GradFn<F> = Arc<dyn Fn(&[F], &[F]) -> Vec<F> + Send + Sync>;

/// Feasible set for one player's variable.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain<F> {
    /// All of Euclidean space.
    All,
    /// Axis-aligned box with per-coordinate bounds.
    Box { lo: Vec<F>, hi: Vec<F> },
}

impl<F: Scalar> Domain<F> {
    pub fn validate(&self, dim: usize) -> CoreResult<()> {
        match self {
            Domain::All => Ok(()),
            Domain::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(CoreError::DimMismatch {
                        expected: dim,
                        got: lo.len().max(hi.len()),
                    });
                }
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return Err(CoreError::BadBounds);
                }
                Ok(())
            }
        }
    }

    /// Euclidean projection onto the set. For a box this is the
    /// coordinatewise clamp; it is idempotent and nonexpansive.
    pub fn project(&self, z: &[F]) -> Vec<F> {
        match self {
            Domain::All => z.to_vec(),
            Domain::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| v.max(l).min(h))
                .collect(),
        }
    }

    pub fn contains(&self, z: &[F]) -> bool {
        match self {
            Domain::All => true,
            Domain::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l && v <= h),
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Domain::Box { .. })
    }
}

/// A two-player differentiable objective f(x, y) with analytic gradients.
///
/// `bound_b = None` declares the objective unbounded, `lip_grad = None`
/// declares the gradient-Lipschitz constant unknown. When
/// `constants_estimated` is true the declared constants are empirical
/// estimates over a sampling region, not certified values.
#[derive(Clone)]
pub struct ObjectiveSpec<F: Scalar> {
    pub name: String,
    pub dim_x: usize,
    pub dim_y: usize,
    value: ValueFn<F>,
    grad_x: GradFn<F>,
    grad_y: GradFn<F>,
    pub bound_b: Option<F>,
    pub lip_grad: Option<F>,
    pub constants_estimated: bool,
    pub domain_x: Domain<F>,
    pub domain_y: Domain<F>,
}

impl<F: Scalar> ObjectiveSpec<F> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim_x: usize,
        dim_y: usize,
        value: ValueFn<F>,
        grad_x: GradFn<F>,
        grad_y: GradFn<F>,
        domain_x: Domain<F>,
        domain_y: Domain<F>,
    ) -> CoreResult<Self> {
        domain_x.validate(dim_x)?;
        domain_y.validate(dim_y)?;
        Ok(Self {
            name: name.into(),
            dim_x,
            dim_y,
            value,
            grad_x,
            grad_y,
            bound_b: None,
            lip_grad: None,
            constants_estimated: false,
            domain_x,
            domain_y,
        })
    }

    pub fn with_bound(mut self, b: F) -> Self {
        self.bound_b = Some(b);
        self
    }

    pub fn with_lipschitz(mut self, l: F) -> Self {
        self.lip_grad = Some(l);
        self
    }

    pub fn with_estimated_constants(mut self, b: F, l: F) -> Self {
        self.bound_b = Some(b);
        self.lip_grad = Some(l);
        self.constants_estimated = true;
        self
    }

    fn check_dims(&self, x: &[F], y: &[F]) -> CoreResult<()> {
        if x.len() != self.dim_x {
            return Err(CoreError::DimMismatch {
                expected: self.dim_x,
                got: x.len(),
            });
        }
        if y.len() != self.dim_y {
            return Err(CoreError::DimMismatch {
                expected: self.dim_y,
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[F], y: &[F]) -> CoreResult<F> {
        self.check_dims(x, y)?;
        let v = (self.value)(x, y);
        if !v.is_finite() {
            return Err(CoreError::Evaluation {
                context: format!("{} value", self.name),
            });
        }
        Ok(v)
    }

    pub fn grad_x(&self, x: &[F], y: &[F]) -> CoreResult<Vec<F>> {
        self.check_dims(x, y)?;
        let g = (self.grad_x)(x, y);
        if !linalg::all_finite(&g) {
            return Err(CoreError::Evaluation {
                context: format!("{} grad_x", self.name),
            });
        }
        Ok(g)
    }

    pub fn grad_y(&self, x: &[F], y: &[F]) -> CoreResult<Vec<F>> {
        self.check_dims(x, y)?;
        let g = (self.grad_y)(x, y);
        if !linalg::all_finite(&g) {
            return Err(CoreError::Evaluation {
                context: format!("{} grad_y", self.name),
            });
        }
        Ok(g)
    }
}

/// One component f_i of a finite-sum objective.
#[derive(Clone)]
pub struct Component<F: Scalar> {
    pub value: ValueFn<F>,
    pub grad_x: GradFn<F>,
    pub grad_y: GradFn<F>,
}

/// Finite-sum objective f = (1/m) * sum_i f_i.
///
/// The full value and gradients are the exact means over components; the
/// stochastic oracle layer samples batches from `components`.
#[derive(Clone)]
pub struct EmpiricalObjective<F: Scalar> {
    pub name: String,
    pub dim_x: usize,
    pub dim_y: usize,
    pub components: Vec<Component<F>>,
    /// Uniform per-component bound: |f_i| <= b for every i.
    pub bound_b: Option<F>,
    /// Uniform per-component gradient-Lipschitz constant.
    pub lip_grad: Option<F>,
    pub domain_x: Domain<F>,
    pub domain_y: Domain<F>,
}

impl<F: Scalar> EmpiricalObjective<F> {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn mean_value(&self, x: &[F], y: &[F]) -> F {
        let sum = self
            .components
            .iter()
            .fold(F::zero(), |acc, c| acc + (c.value)(x, y));
        sum / F::from_usize(self.m()).unwrap()
    }

    pub fn mean_grad_x(&self, x: &[F], y: &[F]) -> Vec<F> {
        self.mean_grad(x, y, |c| &c.grad_x)
    }

    pub fn mean_grad_y(&self, x: &[F], y: &[F]) -> Vec<F> {
        self.mean_grad(x, y, |c| &c.grad_y)
    }

    fn mean_grad(&self, x: &[F], y: &[F], pick: impl Fn(&Component<F>) -> &GradFn<F>) -> Vec<F> {
        let mut acc = pick(&self.components[0])(x, y);
        for c in &self.components[1..] {
            let g = pick(c)(x, y);
            for (a, v) in acc.iter_mut().zip(g) {
                *a = *a + v;
            }
        }
        let inv_m = F::one() / F::from_usize(self.m()).unwrap();
        for a in acc.iter_mut() {
            *a = *a * inv_m;
        }
        acc
    }

    /// View the exact mean as a plain objective (value and gradients are the
    /// full-sum closed forms).
    pub fn to_spec(&self) -> ObjectiveSpec<F> {
        let me = self.clone();
        let me_gx = self.clone();
        let me_gy = self.clone();
        let mut spec = ObjectiveSpec::new(
            self.name.clone(),
            self.dim_x,
            self.dim_y,
            Arc::new(move |x: &[F], y: &[F]| me.mean_value(x, y)),
            Arc::new(move |x: &[F], y: &[F]| me_gx.mean_grad_x(x, y)),
            Arc::new(move |x: &[F], y: &[F]| me_gy.mean_grad_y(x, y)),
            self.domain_x.clone(),
            self.domain_y.clone(),
        )
        .expect("component dims already validated");
        spec.bound_b = self.bound_b;
        spec.lip_grad = self.lip_grad;
        spec
    }
}

/// Either a closed-form objective or a finite sum of components.
#[derive(Clone)]
pub enum Objective<F: Scalar> {
    Exact(ObjectiveSpec<F>),
    Empirical(EmpiricalObjective<F>),
}

impl<F: Scalar> From<ObjectiveSpec<F>> for Objective<F> {
    fn from(s: ObjectiveSpec<F>) -> Self {
        Objective::Exact(s)
    }
}

impl<F: Scalar> From<EmpiricalObjective<F>> for Objective<F> {
    fn from(e: EmpiricalObjective<F>) -> Self {
        Objective::Empirical(e)
    }
}

impl<F: Scalar> Objective<F> {
    pub fn name(&self) -> &str {
        match self {
            Objective::Exact(s) => &s.name,
            Objective::Empirical(e) => &e.name,
        }
    }

    pub fn dim_x(&self) -> usize {
        match self {
            Objective::Exact(s) => s.dim_x,
            Objective::Empirical(e) => e.dim_x,
        }
    }

    pub fn dim_y(&self) -> usize {
        match self {
            Objective::Exact(s) => s.dim_y,
            Objective::Empirical(e) => e.dim_y,
        }
    }

    pub fn bound_b(&self) -> Option<F> {
        match self {
            Objective::Exact(s) => s.bound_b,
            Objective::Empirical(e) => e.bound_b,
        }
    }

    pub fn lip_grad(&self) -> Option<F> {
        match self {
            Objective::Exact(s) => s.lip_grad,
            Objective::Empirical(e) => e.lip_grad,
        }
    }

    pub fn domain_x(&self) -> &Domain<F> {
        match self {
            Objective::Exact(s) => &s.domain_x,
            Objective::Empirical(e) => &e.domain_x,
        }
    }

    pub fn domain_y(&self) -> &Domain<F> {
        match self {
            Objective::Exact(s) => &s.domain_y,
            Objective::Empirical(e) => &e.domain_y,
        }
    }

    /// Exact objective view (for empirical objectives, the full mean).
    pub fn as_spec(&self) -> ObjectiveSpec<F> {
        match self {
            Objective::Exact(s) => s.clone(),
            Objective::Empirical(e) => e.to_spec(),
        }
    }
}

/// Maximum mixed relative error between analytic and central finite-difference
/// gradients at one point.
///
/// Per coordinate j the error is |analytic_j - fd_j| / max(1, |analytic_j|);
/// the unit floor keeps near-zero coordinates meaningful. Errors if the
/// central-difference stencil would leave a box domain.
pub fn finite_diff_check<F: Scalar>(
    obj: &ObjectiveSpec<F>,
    x: &[F],
    y: &[F],
    h: F,
) -> CoreResult<F> {
    if h <= F::zero() {
        return Err(CoreError::Config(
            "finite-difference step must be positive".into(),
        ));
    }
    let stencil_inside = |dom: &Domain<F>, z: &[F]| -> bool {
        match dom {
            Domain::All => true,
            Domain::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h2))| v - h >= l && v + h <= h2),
        }
    };
    if !stencil_inside(&obj.domain_x, x) || !stencil_inside(&obj.domain_y, y) {
        return Err(CoreError::OutsideDomain);
    }

    let two_h = h + h;
    let mut worst = F::zero();
    let gx = obj.grad_x(x, y)?;
    for j in 0..obj.dim_x {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] = xp[j] + h;
        xm[j] = xm[j] - h;
        let fd = (obj.value(&xp, y)? - obj.value(&xm, y)?) / two_h;
        let err = (gx[j] - fd).abs() / F::one().max(gx[j].abs());
        worst = worst.max(err);
    }
    let gy = obj.grad_y(x, y)?;
    for j in 0..obj.dim_y {
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[j] = yp[j] + h;
        ym[j] = ym[j] - h;
        let fd = (obj.value(x, &yp)? - obj.value(x, &ym)?) / two_h;
        let err = (gy[j] - fd).abs() / F::one().max(gy[j].abs());
        worst = worst.max(err);
    }
    Ok(worst)
}
