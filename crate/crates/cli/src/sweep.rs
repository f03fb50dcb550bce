//! Grid sweeps: expand the config file's `grid` into cells (cartesian
//! product, keys sorted), run every seed of every cell on a worker pool, and
//! aggregate success statistics. Per-seed runs are independent and seeded,
//! so the aggregate is deterministic regardless of scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{config_err, resolve, CliError, FileConfig, Overrides, SCHEMA_VERSION};
use crate::exec::execute;

#[derive(Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    pub distance: f64,
    pub termination: String,
}

#[derive(Serialize)]
pub struct CellResult {
    /// The grid assignment this cell ran under.
    pub overrides: Map<String, Value>,
    pub success_fraction: f64,
    pub mean_final_distance: f64,
    pub terminations: BTreeMap<String, u64>,
    pub per_seed: Vec<SeedResult>,
}

#[derive(Serialize)]
pub struct Aggregate {
    pub schema_version: u32,
    pub function: String,
    pub algorithm: String,
    pub seeds: Vec<u64>,
    pub success_radius: f64,
    pub target: Vec<f64>,
    pub cells: Vec<CellResult>,
}

/// Expand `grid` into one map per cell. No grid means one base cell; an
/// empty grid or an empty value list is a config error.
pub fn expand_grid(grid: &Option<Map<String, Value>>) -> Result<Vec<Map<String, Value>>, CliError> {
    let Some(grid) = grid else {
        return Ok(vec![Map::new()]);
    };
    if grid.is_empty() {
        return Err(config_err("sweep grid has no keys"));
    }
    let mut keys: Vec<&String> = grid.keys().collect();
    keys.sort();
    let mut cells = vec![Map::new()];
    for key in keys {
        let values = grid[key]
            .as_array()
            .ok_or_else(|| config_err(format!("grid key '{key}' must hold a list of values")))?;
        if values.is_empty() {
            return Err(config_err(format!(
                "grid key '{key}' has an empty value list"
            )));
        }
        let mut next = Vec::with_capacity(cells.len() * values.len());
        for cell in &cells {
            for v in values {
                let mut c = cell.clone();
                c.insert(key.clone(), v.clone());
                next.push(c);
            }
        }
        cells = next;
    }
    Ok(cells)
}

fn num_f64(key: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64()
        .ok_or_else(|| config_err(format!("grid key '{key}' needs numeric values, got {v}")))
}

fn num_u64(key: &str, v: &Value) -> Result<u64, CliError> {
    v.as_u64().ok_or_else(|| {
        config_err(format!(
            "grid key '{key}' needs nonnegative integers, got {v}"
        ))
    })
}

fn text(key: &str, v: &Value) -> Result<String, CliError> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| config_err(format!("grid key '{key}' needs string values, got {v}")))
}

/// Convert one grid cell into typed overrides; unknown keys are rejected.
fn cell_overrides(cell: &Map<String, Value>) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    for (k, v) in cell {
        match k.as_str() {
            "eta" => o.eta = Some(num_f64(k, v)?),
            "eps" => o.eps = Some(num_f64(k, v)?),
            "delta" => o.delta = Some(num_f64(k, v)?),
            "omega" => o.omega = Some(num_f64(k, v)?),
            "tau1" => o.tau1 = Some(num_f64(k, v)?),
            "lipschitz" => o.lipschitz = Some(num_f64(k, v)?),
            "lr" => o.lr = Some(num_f64(k, v)?),
            "r_max" => o.r_max = Some(num_u64(k, v)?),
            "budget" => o.budget = Some(num_u64(k, v)?),
            "iters" => o.iters = Some(num_u64(k, v)?),
            "inner_cap" => o.inner_cap = Some(num_u64(k, v)? as usize),
            "substeps" => o.substeps = Some(num_u64(k, v)? as usize),
            "proposal" => o.proposal = Some(text(k, v)?),
            "accept" => o.accept = Some(text(k, v)?),
            other => {
                return Err(config_err(format!(
                    "grid key '{other}' is not sweepable (solver and step parameters only)"
                )))
            }
        }
    }
    Ok(o)
}

/// Run the sweep described by `file` with `flags` layered over it.
/// Precedence inside each cell: grid value > flag > file > default.
pub fn run_sweep(file: &FileConfig, flags: &Overrides) -> Result<Aggregate, CliError> {
    let seeds = match &file.seeds {
        Some(s) if !s.is_empty() => s.clone(),
        _ => {
            return Err(config_err(
                "sweep needs a non-empty 'seeds' list in the config file",
            ))
        }
    };
    let grid_cells = expand_grid(&file.grid)?;

    let mut base = file.clone();
    flags.apply(&mut base);
    let base_settings = resolve(&base)?;

    let dim = base_settings.dim_x + base_settings.dim_y;
    let target = match &base.target {
        Some(t) if t.len() == dim => t.clone(),
        Some(t) => {
            return Err(config_err(format!(
                "target has {} coordinates, {} needs {dim}",
                t.len(),
                base_settings.function
            )))
        }
        None => vec![0.0; dim],
    };
    let success_radius = base.success_radius.unwrap_or(0.2);
    if !(success_radius.is_finite() && success_radius > 0.0) {
        return Err(config_err("success_radius must be finite and > 0"));
    }

    let mut cells = Vec::with_capacity(grid_cells.len());
    for cell in grid_cells {
        let overrides = cell_overrides(&cell)?;
        let mut merged = base.clone();
        overrides.apply(&mut merged);
        let settings = resolve(&merged)?;

        let per_seed: Vec<SeedResult> = seeds
            .par_iter()
            .map(|&seed| {
                let mut s = settings.clone();
                s.run.seed = seed;
                let out = execute(&s)?;
                Ok(SeedResult {
                    seed,
                    distance: out.distance_to(&target),
                    final_x: out.final_x,
                    final_y: out.final_y,
                    termination: out.termination,
                })
            })
            .collect::<Result<_, CliError>>()?;

        let n = per_seed.len() as f64;
        let successes = per_seed
            .iter()
            .filter(|r| r.distance <= success_radius)
            .count();
        let mean = per_seed.iter().map(|r| r.distance).sum::<f64>() / n;
        let mut terminations = BTreeMap::new();
        for r in &per_seed {
            *terminations.entry(r.termination.clone()).or_insert(0) += 1;
        }
        cells.push(CellResult {
            overrides: cell,
            success_fraction: successes as f64 / n,
            mean_final_distance: mean,
            terminations,
            per_seed,
        });
    }

    Ok(Aggregate {
        schema_version: SCHEMA_VERSION,
        function: base_settings.function,
        algorithm: base_settings.algorithm.label().to_string(),
        seeds,
        success_radius,
        target,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn grid_of(v: Value) -> Option<Map<String, Value>> {
        match v {
            Value::Object(m) => Some(m),
            _ => unreachable!(),
        }
    }

    #[test]
    fn grid_expands_to_the_sorted_cartesian_product() {
        let grid = grid_of(json!({"eta": [0.1, 0.2], "accept": ["deterministic", "annealed"]}));
        let cells = expand_grid(&grid).unwrap();
        assert_eq!(cells.len(), 4);
        // "accept" sorts before "eta", so it varies slowest
        assert_eq!(cells[0]["accept"], json!("deterministic"));
        assert_eq!(cells[0]["eta"], json!(0.1));
        assert_eq!(cells[1]["eta"], json!(0.2));
        assert_eq!(cells[2]["accept"], json!("annealed"));
    }

    #[test]
    fn empty_grids_and_empty_lists_are_config_errors() {
        assert!(expand_grid(&grid_of(json!({}))).is_err());
        assert!(expand_grid(&grid_of(json!({"eta": []}))).is_err());
        assert_eq!(expand_grid(&None).unwrap().len(), 1);
    }

    #[test]
    fn unknown_grid_keys_are_rejected() {
        let mut cell = Map::new();
        cell.insert("function".into(), json!("F2"));
        assert!(cell_overrides(&cell).is_err());
    }

    #[test]
    fn sweep_aggregates_per_seed_runs() {
        let file = FileConfig {
            function: Some("F1".into()),
            algorithm: Some("greedy".into()),
            init: Some("5.5,5.5".into()),
            budget: Some(60),
            seeds: Some(vec![0, 1, 2]),
            grid: grid_of(json!({"eta": [0.05]})),
            ..FileConfig::default()
        };
        let agg = run_sweep(&file, &Overrides::default()).unwrap();
        assert_eq!(agg.cells.len(), 1);
        let cell = &agg.cells[0];
        assert_eq!(cell.per_seed.len(), 3);
        assert!((0.0..=1.0).contains(&cell.success_fraction));
        assert_eq!(cell.per_seed[0].seed, 0);
        let repeat = run_sweep(&file, &Overrides::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&agg).unwrap(),
            serde_json::to_string(&repeat).unwrap()
        );
    }
}
