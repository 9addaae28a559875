//! Repeated seeded runs, their statistics and the exported report files.

mod config;
mod output;
mod stats;

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use config::{parse_optimizers, ExperimentConfig, Profile, CONFIG_KEYS};
pub use output::{
    convergence_csv, fmt_num, iae_csv, iae_report, stats_csv, write_all, write_iae_csv, IaeRow,
};
pub use stats::{
    aggregate, average_ranks, mean_convergence, rank_optimizers, rank_values, RankMetric, Stats,
};

use crate::optimizer::{derive_seed, Bounds, OptimizerError, RunConfig, RunResult};
use crate::optimizers::OptimizerKind;
use crate::pv::{default_bounds, DatasetError, ModelError, ModelKind, PvDataset, PvObjective};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no values to aggregate")]
    Empty,
    #[error("traces differ in length: expected {expected}, found {found}")]
    Ragged { expected: usize, found: usize },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// How independent runs are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Up to `workers` runs at a time. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    Parallel {
        workers: usize,
    },
}

impl Execution {
    pub fn from_workers(workers: Option<usize>) -> Self {
        let workers = workers.unwrap_or_else(default_workers);
        if workers <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Maps `job` over `0..count` with the requested execution, keeping
/// index order in the output.
pub fn run_indexed<T, F>(count: usize, exec: Execution, job: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => Ok((0..count).map(job).collect()),
        #[cfg(feature = "parallel")]
        Execution::Parallel { workers } => {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            Ok(pool.install(|| (0..count).into_par_iter().map(job).collect()))
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel { .. } => Ok((0..count).map(job).collect()),
    }
}

/// `runs` runs of one optimizer; run `r` is seeded with
/// `derive_seed(base.seed, r)`.
pub fn run_many(
    optimizer: OptimizerKind,
    objective: &PvObjective<'_>,
    bounds: &Bounds,
    base: &RunConfig,
    runs: usize,
    exec: Execution,
) -> Result<Vec<RunResult>, HarnessError> {
    base.validate()?;
    let results = run_indexed(runs, exec, |r| {
        let cfg = RunConfig {
            seed: derive_seed(base.seed, r as u64),
            ..*base
        };
        optimizer.run(objective, bounds, &cfg)
    })?;
    Ok(results.into_iter().collect::<Result<_, _>>()?)
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerReport {
    pub optimizer: OptimizerKind,
    pub stats: Stats,
    /// Pointwise mean of the best-fitness traces, indexed by generation.
    pub mean_trace: Vec<f64>,
    pub runs: Vec<RunResult>,
}

impl OptimizerReport {
    pub fn from_runs(optimizer: OptimizerKind, runs: Vec<RunResult>) -> Result<Self, HarnessError> {
        let finals: Vec<f64> = runs.iter().map(|r| r.best_fitness).collect();
        let stats = aggregate(&finals)?;
        let traces: Vec<&[f64]> = runs.iter().map(|r| r.trace.as_slice()).collect();
        let mean_trace = mean_convergence(&traces)?;
        Ok(Self {
            optimizer,
            stats,
            mean_trace,
            runs,
        })
    }

    pub fn best_run(&self) -> &RunResult {
        self.runs
            .iter()
            .min_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness))
            .expect("report holds at least one run")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub model: ModelKind,
    pub run_config: RunConfig,
    pub bounds: Bounds,
    pub optimizers: Vec<OptimizerReport>,
    /// `ranks[metric][optimizer]`, metrics in `RankMetric::ALL` order.
    pub ranks: Vec<Vec<f64>>,
}

impl ExperimentReport {
    pub fn get(&self, kind: OptimizerKind) -> Option<&OptimizerReport> {
        self.optimizers.iter().find(|o| o.optimizer == kind)
    }

    /// Lowest-RMSE run over every optimizer.
    pub fn best_run(&self) -> &RunResult {
        self.optimizers
            .iter()
            .map(OptimizerReport::best_run)
            .min_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness))
            .expect("report holds at least one optimizer")
    }
}

/// Dataset with the config's operating-condition overrides applied.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<PvDataset, HarnessError> {
    let mut data = PvDataset::load(&cfg.dataset)?;
    if let Some(t) = cfg.temperature_c {
        data.cell =
            crate::pv::CellConfig::from_celsius(t, data.cell.series_cells, data.cell.irradiance);
    }
    if let Some(g) = cfg.irradiance {
        data.cell.irradiance = Some(g);
    }
    Ok(data)
}

/// Runs every configured optimizer, without touching the file system.
pub fn execute(
    cfg: &ExperimentConfig,
    data: &PvDataset,
    population: usize,
) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let bounds = default_bounds(cfg.system, cfg.model, &data.cell)?;
    let objective = PvObjective::new(cfg.model, data);
    let run_config = cfg.run_config_for(population);
    let exec = Execution::from_workers(cfg.workers);
    let mut optimizers = Vec::with_capacity(cfg.optimizers.len());
    for &kind in &cfg.optimizers {
        let runs = run_many(kind, &objective, &bounds, &run_config, cfg.runs, exec)?;
        optimizers.push(OptimizerReport::from_runs(kind, runs)?);
    }
    let stats: Vec<Stats> = optimizers.iter().map(|o| o.stats).collect();
    let ranks = RankMetric::ALL
        .iter()
        .map(|&m| rank_optimizers(&stats, m))
        .collect();
    Ok(ExperimentReport {
        dataset: data.name.clone(),
        model: cfg.model,
        run_config,
        bounds,
        optimizers,
        ranks,
    })
}

/// Loads the dataset, runs the experiment and writes `report.json`,
/// `stats.csv`, `convergence.csv` and `iae.csv` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let data = load_dataset(cfg)?;
    let report = execute(cfg, &data, cfg.population)?;
    output::write_all(cfg, &data, &report, &cfg.output_dir)?;
    Ok(report)
}

/// One experiment per entry of `sweep_populations`, each written to
/// `<output_dir>/pop_<N>`, plus `sweep.csv` with per-condition statistics
/// and mean ranks across conditions.
pub fn run_population_sweep(cfg: &ExperimentConfig) -> Result<Vec<ExperimentReport>, HarnessError> {
    if cfg.sweep_populations.is_empty() {
        return Err(HarnessError::Config("sweep_populations is empty".into()));
    }
    let data = load_dataset(cfg)?;
    let mut reports = Vec::new();
    for &n in &cfg.sweep_populations {
        let report = execute(cfg, &data, n)?;
        output::write_all(
            cfg,
            &data,
            &report,
            &cfg.output_dir.join(format!("pop_{n}")),
        )?;
        reports.push(report);
    }
    output::write_sweep_csv(&cfg.output_dir, &reports)?;
    Ok(reports)
}
