//! Value/gradient oracles over an objective: deterministic (exact closed
//! forms) or stochastic (means over batches of components sampled iid with
//! replacement). All randomness is ChaCha8 seeded from one 64-bit seed, with
//! one numbered substream per oracle so runs replay exactly and
//! component-level replay is possible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, CoreResult};
use crate::linalg;
use crate::objective::Objective;
use crate::scalar::Scalar;

/// Substream indices. Streams 0 (proposal noise) and 4 (acceptance coin) are
/// consumed by the solver layer, 1000+t by the certifier; they are listed
/// here so the whole map lives in one place.
pub mod streams {
    pub const PROPOSAL: u64 = 0;
    pub const BATCH_VALUE: u64 = 1;
    pub const BATCH_GRAD_Y: u64 = 2;
    pub const BATCH_GRAD_X: u64 = 3;
    pub const ACCEPT: u64 = 4;
    pub const FAMILY: u64 = 5;
    pub const SMOOTHNESS: u64 = 6;
    pub const CONCENTRATION: u64 = 7;
    pub const CERTIFY_TRIAL_BASE: u64 = 1000;
}

/// Construct the ChaCha8 generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    Deterministic,
    Stochastic,
}

/// Running tally of oracle work, for call accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounters {
    pub value_calls: u64,
    pub grad_x_calls: u64,
    pub grad_y_calls: u64,
    /// Proposal draws made by the solver layer.
    pub proposal_samples: u64,
    /// Individual component evaluations consumed by stochastic batches.
    pub component_samples: u64,
    /// Inner-ascent invocations made by the solver layer.
    pub ascent_invocations: u64,
}

/// Seeded value/gradient oracle set (F, G_x, G_y) over an objective.
pub struct OracleSet<F: Scalar> {
    pub objective: Objective<F>,
    pub mode: OracleMode,
    pub batch_value: usize,
    pub batch_grad_y: usize,
    pub batch_grad_x: usize,
    pub counters: OracleCounters,
    seed: u64,
    rng_value: ChaCha8Rng,
    rng_grad_y: ChaCha8Rng,
    rng_grad_x: ChaCha8Rng,
}

impl<F: Scalar> OracleSet<F> {
    /// Exact oracles; batch sizes are irrelevant and set to 1.
    pub fn deterministic(objective: impl Into<Objective<F>>) -> Self {
        Self {
            objective: objective.into(),
            mode: OracleMode::Deterministic,
            batch_value: 1,
            batch_grad_y: 1,
            batch_grad_x: 1,
            counters: OracleCounters::default(),
            seed: 0,
            rng_value: substream(0, streams::BATCH_VALUE),
            rng_grad_y: substream(0, streams::BATCH_GRAD_Y),
            rng_grad_x: substream(0, streams::BATCH_GRAD_X),
        }
    }

    /// Batched stochastic oracles. For a closed-form objective the component
    /// list is the objective itself (m = 1), so every batch returns the exact
    /// value; the interesting case is an empirical objective with m > 1.
    pub fn stochastic(
        objective: impl Into<Objective<F>>,
        batch_value: usize,
        batch_grad_y: usize,
        batch_grad_x: usize,
        seed: u64,
    ) -> CoreResult<Self> {
        if batch_value < 1 || batch_grad_y < 1 || batch_grad_x < 1 {
            return Err(CoreError::Config("batch sizes must be >= 1".into()));
        }
        Ok(Self {
            objective: objective.into(),
            mode: OracleMode::Stochastic,
            batch_value,
            batch_grad_y,
            batch_grad_x,
            counters: OracleCounters::default(),
            seed,
            rng_value: substream(seed, streams::BATCH_VALUE),
            rng_grad_y: substream(seed, streams::BATCH_GRAD_Y),
            rng_grad_x: substream(seed, streams::BATCH_GRAD_X),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn finite_or_err<T>(ok: bool, v: T, context: &str) -> CoreResult<T> {
        if ok {
            Ok(v)
        } else {
            Err(CoreError::Evaluation {
                context: context.to_string(),
            })
        }
    }

    fn check_emp_dims(
        emp: &crate::objective::EmpiricalObjective<F>,
        x: &[F],
        y: &[F],
    ) -> CoreResult<()> {
        if x.len() != emp.dim_x || y.len() != emp.dim_y {
            return Err(CoreError::DimMismatch {
                expected: emp.dim_x + emp.dim_y,
                got: x.len() + y.len(),
            });
        }
        Ok(())
    }

    /// F(x, y): exact value, or a batch mean in stochastic mode.
    pub fn value(&mut self, x: &[F], y: &[F]) -> CoreResult<F> {
        self.counters.value_calls += 1;
        match (&self.mode, &self.objective) {
            (OracleMode::Deterministic, Objective::Exact(spec)) => spec.value(x, y),
            (OracleMode::Deterministic, Objective::Empirical(emp)) => {
                Self::check_emp_dims(emp, x, y)?;
                let v = emp.mean_value(x, y);
                Self::finite_or_err(v.is_finite(), v, "mean value")
            }
            (OracleMode::Stochastic, Objective::Exact(spec)) => {
                self.counters.component_samples += self.batch_value as u64;
                spec.value(x, y)
            }
            (OracleMode::Stochastic, Objective::Empirical(emp)) => {
                Self::check_emp_dims(emp, x, y)?;
                let m = emp.m();
                let mut sum = F::zero();
                for _ in 0..self.batch_value {
                    let i = self.rng_value.gen_range(0..m);
                    sum = sum + (emp.components[i].value)(x, y);
                }
                self.counters.component_samples += self.batch_value as u64;
                let v = sum / F::from_usize(self.batch_value).unwrap();
                Self::finite_or_err(v.is_finite(), v, "stochastic value")
            }
        }
    }

    /// G_y(x, y): exact gradient, or a batch mean in stochastic mode.
    pub fn grad_y(&mut self, x: &[F], y: &[F]) -> CoreResult<Vec<F>> {
        self.counters.grad_y_calls += 1;
        match (&self.mode, &self.objective) {
            (OracleMode::Deterministic, Objective::Exact(spec)) => spec.grad_y(x, y),
            (OracleMode::Deterministic, Objective::Empirical(emp)) => {
                Self::check_emp_dims(emp, x, y)?;
                let g = emp.mean_grad_y(x, y);
                Self::finite_or_err(linalg::all_finite(&g), g, "mean grad_y")
            }
            (OracleMode::Stochastic, Objective::Exact(spec)) => {
                self.counters.component_samples += self.batch_grad_y as u64;
                spec.grad_y(x, y)
            }
            (OracleMode::Stochastic, Objective::Empirical(emp)) => {
                Self::check_emp_dims(emp, x, y)?;
                let g = Self::batch_mean_grad(
                    emp,
                    x,
                    y,
                    self.batch_grad_y,
                    &mut self.rng_grad_y,
                    false,
                );
                self.counters.component_samples += self.batch_grad_y as u64;
                Self::finite_or_err(linalg::all_finite(&g), g, "stochastic grad_y")
            }
        }
    }

    /// G_x(x, y): exact gradient, or a batch mean in stochastic mode.
    pub fn grad_x(&mut self, x: &[F], y: &[F]) -> CoreResult<Vec<F>> {
        self.counters.grad_x_calls += 1;
        match (&self.mode, &self.objective) {
            (OracleMode::Deterministic, Objective::Exact(spec)) => spec.grad_x(x, y),
            (OracleMode::Deterministic, Objective::Empirical(emp)) => {
                Self::check_emp_dims(emp, x, y)?;
                let g = emp.mean_grad_x(x, y);
                Self::finite_or_err(linalg::all_finite(&g), g, "mean grad_x")
            }
            (OracleMode::Stochastic, Objective::Exact(spec)) => {
                self.counters.component_samples += self.batch_grad_x as u64;
                spec.grad_x(x, y)
            }
            (OracleMode::Stochastic, Objective::Empirical(emp)) => {
                Self::check_emp_dims(emp, x, y)?;
                let g =
                    Self::batch_mean_grad(emp, x, y, self.batch_grad_x, &mut self.rng_grad_x, true);
                self.counters.component_samples += self.batch_grad_x as u64;
                Self::finite_or_err(linalg::all_finite(&g), g, "stochastic grad_x")
            }
        }
    }

    fn batch_mean_grad(
        emp: &crate::objective::EmpiricalObjective<F>,
        x: &[F],
        y: &[F],
        batch: usize,
        rng: &mut ChaCha8Rng,
        wrt_x: bool,
    ) -> Vec<F> {
        let m = emp.m();
        let dim = if wrt_x { emp.dim_x } else { emp.dim_y };
        let mut acc = vec![F::zero(); dim];
        for _ in 0..batch {
            let i = rng.gen_range(0..m);
            let g = if wrt_x {
                (emp.components[i].grad_x)(x, y)
            } else {
                (emp.components[i].grad_y)(x, y)
            };
            for (a, v) in acc.iter_mut().zip(g) {
                *a = *a + v;
            }
        }
        let inv = F::one() / F::from_usize(batch).unwrap();
        for a in acc.iter_mut() {
            *a = *a * inv;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Component, Domain, EmpiricalObjective, GradFn, ValueFn};
    use std::sync::Arc;

    fn two_constants() -> EmpiricalObjective<f64> {
        let constant = |c: f64| Component {
            value: Arc::new(move |_: &[f64], _: &[f64]| c) as ValueFn<f64>,
            grad_x: Arc::new(|_: &[f64], _: &[f64]| vec![0.0]) as GradFn<f64>,
            grad_y: Arc::new(|_: &[f64], _: &[f64]| vec![0.0]) as GradFn<f64>,
        };
        EmpiricalObjective {
            name: "two-constants".into(),
            dim_x: 1,
            dim_y: 1,
            components: vec![constant(1.0), constant(3.0)],
            bound_b: Some(3.0),
            lip_grad: Some(0.0),
            domain_x: Domain::All,
            domain_y: Domain::All,
        }
    }

    #[test]
    fn deterministic_mode_returns_exact_mean() {
        let mut o = OracleSet::deterministic(Objective::Empirical(two_constants()));
        assert_eq!(o.value(&[0.0], &[0.0]).unwrap(), 2.0);
        assert_eq!(o.counters.value_calls, 1);
        assert_eq!(o.counters.component_samples, 0);
    }

    #[test]
    fn single_component_stochastic_equals_exact() {
        let mut emp = two_constants();
        emp.components.truncate(1);
        let mut o = OracleSet::stochastic(Objective::Empirical(emp), 7, 7, 7, 99).unwrap();
        assert_eq!(o.value(&[0.0], &[0.0]).unwrap(), 1.0);
        assert_eq!(o.counters.component_samples, 7);
    }

    #[test]
    fn equal_seeds_replay_bitwise() {
        let mk =
            || OracleSet::stochastic(Objective::Empirical(two_constants()), 3, 3, 3, 42).unwrap();
        let mut a = mk();
        let mut b = mk();
        for _ in 0..20 {
            let va = a.value(&[0.0], &[0.0]).unwrap();
            let vb = b.value(&[0.0], &[0.0]).unwrap();
            assert_eq!(va.to_bits(), vb.to_bits());
        }
    }

    #[test]
    fn batch_sizes_must_be_positive() {
        let res = OracleSet::<f64>::stochastic(Objective::Empirical(two_constants()), 0, 1, 1, 0);
        assert!(matches!(res, Err(CoreError::Config(_))));
    }
}
