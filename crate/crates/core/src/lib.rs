//! Convergent first-order min-max optimization.
//!
//! The solver treats the min player as a greedy proposer and the max player
//! as an oracle answered by plain gradient ascent: each outer iteration
//! samples a candidate move for x, lets y ascend to approximate
//! stationarity at the new x, and accepts the move only if the measured
//! objective drops by a fixed margin. Repeated rejection is the stopping
//! signal, and the point returned is certifiable: x cannot be improved by
//! the proposal distribution even after the adversary responds.
//!
//! The crate provides:
//!
//! - [`minmax::run`] and [`minmax::run_compact`], the accept/reject outer
//!   loops for free and box-constrained domains;
//! - [`ascent`], the inner gradient-ascent best-response loop;
//! - [`oracle`], deterministic and mini-batch stochastic first-order
//!   oracles over a shared objective, with call counters and reproducible
//!   named RNG substreams;
//! - [`baselines`], gradient descent-ascent, optimistic mirror descent,
//!   and extragradient loops for comparison on the same oracle interface;
//! - [`tuning`], closed-form hyperparameter settings derived from problem
//!   constants (bound, smoothness, tolerances);
//! - [`certify`], post-hoc equilibrium checks: exact stationarity,
//!   Monte Carlo rejection-probability estimation with Wilson intervals,
//!   ascent-path validation, and oracle-concentration tests;
//! - [`testbed`], closed-form saddle objectives and randomized
//!   finite-sum families with known constants;
//! - [`trajectory`], a CSV schema for per-iteration run logs with exact
//!   float round-trip.
//!
//! Everything numeric is generic over [`Scalar`] (implemented for `f32`
//! and `f64`); the crate root exports `f64` aliases for the common types.
//!
//! # Example
//!
//! ```
//! use minmax_core::minmax::{run, AcceptMode, ProposalSpec, RunConfig};
//! use minmax_core::oracle::OracleSet;
//! use minmax_core::testbed::make_function;
//!
//! let mut oracle = OracleSet::deterministic(make_function::<f64>("f1").unwrap());
//! let config = RunConfig {
//!     epsilon: 0.05,
//!     delta: 0.05,
//!     omega: 0.1,
//!     eta: 0.05,
//!     tau1: None,
//!     r_max: 50,
//!     max_outer_iters: 5000,
//!     proposal: ProposalSpec::Gaussian { sigma2: 0.25 },
//!     accept_mode: AcceptMode::Deterministic,
//!     inner_cap: 10_000,
//!     lipschitz: None,
//!     remeasure_on_reject: false,
//!     abort_on_hitcap: false,
//!     record_paths: false,
//!     seed: 0,
//! };
//! let record = run(&mut oracle, &[5.5], &[5.5], &config).unwrap();
//! assert!(record.final_x[0].abs() < 5.5);
//! ```

pub mod ascent;
pub mod baselines;
pub mod certify;
pub mod error;
pub mod linalg;
pub mod minmax;
pub mod objective;
pub mod oracle;
pub mod scalar;
pub mod testbed;
pub mod trajectory;
pub mod tuning;

pub use error::{CoreError, CoreResult, TuningError};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the main library types.
pub type Objective = objective::Objective<f64>;
pub type ObjectiveSpec = objective::ObjectiveSpec<f64>;
pub type Domain = objective::Domain<f64>;
pub type OracleSet = oracle::OracleSet<f64>;
pub type AscentPath = ascent::AscentPath<f64>;
pub type RunConfig = minmax::RunConfig<f64>;
pub type RunRecord = minmax::RunRecord<f64>;
pub type ProposalSpec = minmax::ProposalSpec<f64>;
pub type AcceptMode = minmax::AcceptMode<f64>;
pub type TrajectoryRow = trajectory::TrajectoryRow<f64>;
pub type BaselineRecord = baselines::BaselineRecord<f64>;
pub type TheoreticalParams = tuning::TheoreticalParams<f64>;
pub type Certificate = certify::Certificate<f64>;
pub type CertifyParams = certify::CertifyParams<f64>;
