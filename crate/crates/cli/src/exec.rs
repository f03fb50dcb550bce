//! Dispatch one resolved Settings to the matching solver and normalize the
//! result into a single Outcome shape shared by `run` and `sweep`.

use minmax_core::baselines::{run_eg, run_gda, run_omd, BaselineRecord};
use minmax_core::minmax::{run, run_compact, RunRecord};
use minmax_core::oracle::{OracleCounters, OracleSet};
use minmax_core::testbed::make_function;
use minmax_core::trajectory::TrajectoryRow;

use crate::config::{Algorithm, CliError, Settings};

pub struct Outcome {
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    /// Last accepted measurement; None for baselines.
    pub final_f: Option<f64>,
    /// Schedule value after the last iteration; None for baselines.
    pub final_eps: Option<f64>,
    pub termination: String,
    pub iterations: u64,
    /// Accepted-step count; None for baselines.
    pub accepts: Option<u64>,
    pub counters: OracleCounters,
    pub rows: Vec<TrajectoryRow<f64>>,
}

impl Outcome {
    fn from_run(rec: RunRecord<f64>) -> Self {
        Outcome {
            iterations: rec.iterations(),
            accepts: Some(rec.accept_count()),
            final_x: rec.final_x,
            final_y: rec.final_y,
            final_f: Some(rec.final_f),
            final_eps: Some(rec.final_eps),
            termination: format!("{:?}", rec.termination),
            counters: rec.counters,
            rows: rec.rows,
        }
    }

    fn from_baseline(rec: BaselineRecord<f64>) -> Self {
        Outcome {
            iterations: rec.rows.len() as u64,
            accepts: None,
            final_x: rec.final_x,
            final_y: rec.final_y,
            final_f: None,
            final_eps: None,
            termination: format!("{:?}", rec.status),
            counters: rec.counters,
            rows: rec.rows,
        }
    }

    pub fn distance_to(&self, target: &[f64]) -> f64 {
        let point: Vec<f64> = self
            .final_x
            .iter()
            .chain(self.final_y.iter())
            .copied()
            .collect();
        point
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn execute(s: &Settings) -> Result<Outcome, CliError> {
    let spec = make_function::<f64>(&s.function)?;
    let mut o = OracleSet::deterministic(spec);
    let (x0, y0) = (&s.init_x, &s.init_y);
    let out = match s.algorithm {
        Algorithm::Greedy => Outcome::from_run(run(&mut o, x0, y0, &s.run)?),
        Algorithm::GreedyCompact => Outcome::from_run(run_compact(&mut o, x0, y0, &s.run)?),
        Algorithm::Gda => {
            Outcome::from_baseline(run_gda(&mut o, x0, y0, s.lr, s.substeps, s.iters)?)
        }
        Algorithm::Omd => Outcome::from_baseline(run_omd(&mut o, x0, y0, s.lr, s.iters)?),
        Algorithm::Eg => Outcome::from_baseline(run_eg(&mut o, x0, y0, s.lr, s.iters)?),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, FileConfig};

    fn base() -> FileConfig {
        FileConfig {
            function: Some("F1".into()),
            algorithm: Some("greedy".into()),
            init: Some("5.5,5.5".into()),
            budget: Some(50),
            seed: Some(3),
            ..FileConfig::default()
        }
    }

    #[test]
    fn greedy_outcome_carries_solver_fields() {
        let s = resolve(&base()).unwrap();
        let out = execute(&s).unwrap();
        assert!(out.final_f.is_some());
        assert!(out.final_eps.is_some());
        assert!(out.accepts.is_some());
        assert_eq!(out.iterations as usize, out.rows.len());
    }

    #[test]
    fn baseline_outcome_has_no_solver_fields() {
        let mut cfg = base();
        cfg.algorithm = Some("gda".into());
        cfg.iters = Some(40);
        let s = resolve(&cfg).unwrap();
        let out = execute(&s).unwrap();
        assert!(out.final_f.is_none());
        assert_eq!(out.termination, "Finished");
        assert_eq!(out.rows.len(), 40);
    }

    #[test]
    fn distance_concatenates_both_players() {
        let out = Outcome {
            final_x: vec![3.0],
            final_y: vec![4.0],
            final_f: None,
            final_eps: None,
            termination: "Finished".into(),
            iterations: 0,
            accepts: None,
            counters: OracleCounters::default(),
            rows: vec![],
        };
        assert!((out.distance_to(&[0.0, 0.0]) - 5.0).abs() < 1e-12);
    }
}
