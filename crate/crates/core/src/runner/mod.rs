//! Experiment protocol: every configuration on every problem, a fixed budget
//! of `budget_multiplier * D` evaluations per run, the lower median of the
//! final errors per cell, capped at `1e-9` and taken in `log10`.

mod dataset;
mod journal;
mod space;

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{make_problem, BenchmarkError, FunctionId, ProblemInstance, ProblemSpec};
use crate::rng::derive_seed;
use crate::swarm::{run, ConfigError, ModuleConfiguration, SwarmError};

pub use dataset::{DatasetMeta, DatasetRow, PerformanceDataset, HEADER as DATASET_HEADER};
pub use journal::Journal;
pub use space::{enumerate_configs, SpaceDescription};

/// Errors below this are reported as this value.
pub const ERROR_CAP: f64 = 1e-9;
/// Target of a cell whose median error reached the cap.
pub const TARGET_FLOOR: f64 = -9.0;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("module {0} has an empty option selection")]
    EmptySelection(&'static str),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Swarm(#[from] SwarmError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn default_runs() -> usize {
    10
}
fn default_multiplier() -> usize {
    5000
}

/// An experiment as stored in a plan file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub space: SpaceDescription,
    pub problems: Vec<FunctionId>,
    pub dimensions: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    #[serde(default = "default_multiplier")]
    pub budget_multiplier: usize,
    pub master_seed: u64,
    /// Seed of the problem transforms; defaults to `master_seed`.
    #[serde(default)]
    pub transform_seed: Option<u64>,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self, RunnerError> {
        let plan: ExperimentPlan = serde_json::from_str(text).map_err(|e| RunnerError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.runs_per_cell == 0 {
            return Err(RunnerError::Plan("runs_per_cell must be at least 1".into()));
        }
        if self.problems.is_empty() {
            return Err(RunnerError::Plan("no problems".into()));
        }
        if self.dimensions.is_empty() || self.dimensions.iter().any(|&d| d < 2) {
            return Err(RunnerError::Plan("dimensions must be nonempty and at least 2".into()));
        }
        if self.budget_multiplier == 0 {
            return Err(RunnerError::Plan("budget_multiplier must be positive".into()));
        }
        for &d in &self.dimensions {
            if self.budget_multiplier * d < crate::swarm::SWARM_SIZE {
                return Err(RunnerError::Plan(format!("budget {} below swarm size", self.budget_multiplier * d)));
            }
        }
        if enumerate_configs(&self.space)?.is_empty() {
            return Err(RunnerError::Plan("configuration space is empty".into()));
        }
        Ok(())
    }

    pub fn transform_seed(&self) -> u64 {
        self.transform_seed.unwrap_or(self.master_seed)
    }

    /// Digest of everything that influences results; keys journal entries.
    pub fn fingerprint(&self) -> String {
        let canon = serde_json::to_string(self).expect("plan serialises");
        format!("{:016x}", derive_seed([canon.as_bytes()]))
    }
}

/// Order statistic `ceil(n/2)` (1-based): an observed value, never an average.
pub fn lower_median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len().div_ceil(2) - 1]
}

/// `log10(max(error, 1e-9))`.
pub fn capped_log_error(error: f64) -> f64 {
    if error <= ERROR_CAP {
        TARGET_FLOOR
    } else {
        error.log10()
    }
}

/// Seed of one run of one cell.
pub fn run_seed(master_seed: u64, config: &ModuleConfiguration, function: FunctionId, dim: usize, run: usize) -> u64 {
    derive_seed([
        b"run".as_slice(),
        &master_seed.to_le_bytes(),
        config.to_string().as_bytes(),
        function.to_string().as_bytes(),
        &(dim as u64).to_le_bytes(),
        &(run as u64).to_le_bytes(),
    ])
}

/// Lower-median final error over `runs` independent runs of one cell.
pub fn run_cell(
    config: &ModuleConfiguration,
    problem: &ProblemInstance,
    runs: usize,
    budget: usize,
    master_seed: u64,
) -> Result<f64, RunnerError> {
    let errors = (0..runs)
        .map(|r| {
            let seed = run_seed(master_seed, config, problem.function(), problem.dimension(), r);
            run(config, problem, budget, seed).map(|res| res.final_error)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(lower_median(&errors))
}

pub fn cell_key(function: FunctionId, dim: usize, config: &ModuleConfiguration) -> String {
    format!("{function}|{dim}|{config}")
}

/// Knobs that do not change results.
#[derive(Default)]
pub struct ExecuteOptions<'a> {
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    pub journal: Option<&'a Path>,
    pub progress: Option<&'a (dyn Fn(usize, usize) + Sync)>,
}

/// Runs the whole plan and returns one dataset per (problem, dimension), in
/// plan order. Rows follow the canonical configuration order.
pub fn execute(plan: &ExperimentPlan, options: &ExecuteOptions<'_>) -> Result<Vec<PerformanceDataset>, RunnerError> {
    plan.validate()?;
    let configs = enumerate_configs(&plan.space)?;
    let tseed = plan.transform_seed();
    let problems: Vec<ProblemInstance> = plan
        .dimensions
        .iter()
        .flat_map(|&d| plan.problems.iter().map(move |&f| (f, d)))
        .map(|(f, d)| make_problem(&ProblemSpec::new(f, d, tseed)))
        .collect::<Result<_, _>>()?;

    let journal = match options.journal {
        Some(path) => Some(Journal::open(path, &plan.fingerprint())?),
        None => None,
    };
    let done: HashMap<String, f64> = journal.as_ref().map(|j| j.completed().clone()).unwrap_or_default();

    let cells: Vec<(usize, usize)> =
        (0..problems.len()).flat_map(|p| (0..configs.len()).map(move |c| (p, c))).collect();
    let total = cells.len();
    let finished = AtomicUsize::new(0);

    let work = || {
        cells
            .par_iter()
            .map(|&(p, c)| {
                let problem = &problems[p];
                let config = &configs[c];
                let key = cell_key(problem.function(), problem.dimension(), config);
                let median = match done.get(&key) {
                    Some(&m) => m,
                    None => {
                        let budget = plan.budget_multiplier * problem.dimension();
                        let m = run_cell(config, problem, plan.runs_per_cell, budget, plan.master_seed)?;
                        if let Some(j) = &journal {
                            j.record(&key, m)?;
                        }
                        m
                    }
                };
                let n = finished.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(cb) = options.progress {
                    cb(n, total);
                }
                Ok(median)
            })
            .collect::<Result<Vec<f64>, RunnerError>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| RunnerError::Pool(e.to_string()))?;
    let medians = pool.install(work)?;

    Ok(problems
        .iter()
        .enumerate()
        .map(|(p, problem)| PerformanceDataset {
            meta: DatasetMeta {
                function: problem.function(),
                dimension: problem.dimension(),
                runs_per_cell: plan.runs_per_cell,
                budget_multiplier: plan.budget_multiplier,
                master_seed: plan.master_seed,
                transform_seed: tseed,
            },
            rows: configs
                .iter()
                .enumerate()
                .map(|(c, config)| DatasetRow {
                    config: *config,
                    target: capped_log_error(medians[p * configs.len() + c]),
                })
                .collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_median_is_an_order_statistic() {
        assert_eq!(lower_median(&[3.0]), 3.0);
        assert_eq!(lower_median(&[4.0, 1.0]), 1.0);
        assert_eq!(lower_median(&[5.0, 1.0, 3.0]), 3.0);
        assert_eq!(lower_median(&[10.0, 2.0, 8.0, 4.0, 6.0, 1.0, 9.0, 3.0, 7.0, 5.0]), 5.0);
    }

    #[test]
    fn cap_and_log() {
        assert_eq!(capped_log_error(1e-12), -9.0);
        assert_eq!(capped_log_error(0.0), -9.0);
        assert_eq!(capped_log_error(1e-9), -9.0);
        assert_eq!(capped_log_error(100.0), 2.0);
    }

    #[test]
    fn plan_defaults_and_validation() {
        let plan = ExperimentPlan::from_json(r#"{"problems":["f1"],"dimensions":[10],"master_seed":1}"#).unwrap();
        assert_eq!(plan.runs_per_cell, 10);
        assert_eq!(plan.budget_multiplier, 5000);
        assert_eq!(plan.space, SpaceDescription::full());
        assert!(ExperimentPlan::from_json(r#"{"problems":["f1"],"dimensions":[10],"master_seed":1,"runs_per_cell":0}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"problems":["f1"],"dimensions":[10],"master_seed":1,"space":{"top":[]}}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"problems":["f99"],"dimensions":[10],"master_seed":1}"#).is_err());
    }
}
