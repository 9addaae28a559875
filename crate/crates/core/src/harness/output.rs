use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::{average_ranks, ExperimentConfig, ExperimentReport, HarnessError, RankMetric};
use crate::pv::{predict_current, thermal_voltage, ModelKind, PvDataset};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IaeRow {
    pub voltage: f64,
    pub measured: f64,
    pub calculated: f64,
    pub iae: f64,
}

/// Per-point absolute error of `params` against the measurements. Points
/// where the model is undefined get NaN in the last two columns.
pub fn iae_report(kind: ModelKind, params: &[f64], data: &PvDataset) -> Vec<IaeRow> {
    let vt = thermal_voltage(&data.cell);
    data.points()
        .iter()
        .map(|p| {
            let calculated = predict_current(kind, params, p.voltage, vt).unwrap_or(f64::NAN);
            IaeRow {
                voltage: p.voltage,
                measured: p.current,
                calculated,
                iae: (calculated - p.current).abs(),
            }
        })
        .collect()
}

pub fn iae_csv(rows: &[IaeRow]) -> String {
    let mut out = String::from("voltage_V,current_measured_A,current_calculated_A,iae_A\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(r.voltage),
            fmt_num(r.measured),
            fmt_num(r.calculated),
            fmt_num(r.iae)
        );
    }
    out
}

pub fn write_iae_csv(path: &Path, rows: &[IaeRow]) -> Result<(), HarnessError> {
    write(path, &iae_csv(rows))
}

fn write(path: &Path, contents: &str) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

pub fn stats_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("optimizer,runs,min,mean,max,sd\n");
    for o in &report.optimizers {
        let s = o.stats;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            o.optimizer,
            s.count,
            fmt_num(s.min),
            fmt_num(s.mean),
            fmt_num(s.max),
            fmt_num(s.sd)
        );
    }
    out
}

/// Mean best RMSE every `every` generations, always including the last.
pub fn convergence_csv(report: &ExperimentReport, every: usize) -> String {
    let mut out = String::from("generation,evaluations");
    for o in &report.optimizers {
        let _ = write!(out, ",{}_mean_best_rmse", o.optimizer);
    }
    out.push('\n');
    let len = report.optimizers[0].mean_trace.len();
    let n = report.run_config.population as u64;
    for g in (0..len).filter(|&g| g % every == 0 || g + 1 == len) {
        let _ = write!(out, "{g},{}", n * (g as u64 + 1));
        for o in &report.optimizers {
            let _ = write!(out, ",{}", fmt_num(o.mean_trace[g]));
        }
        out.push('\n');
    }
    out
}

fn report_json(cfg: &ExperimentConfig, report: &ExperimentReport) -> serde_json::Value {
    let optimizers: Vec<_> = report
        .optimizers
        .iter()
        .map(|o| {
            let runs: Vec<_> = o
                .runs
                .iter()
                .enumerate()
                .map(|(r, run)| {
                    json!({
                        "run": r,
                        "seed": run.seed,
                        "best_rmse": run.best_fitness,
                        "best_position": run.best_position,
                        "evaluations": run.evaluations,
                    })
                })
                .collect();
            json!({ "optimizer": o.optimizer, "stats": o.stats, "runs": runs })
        })
        .collect();
    let ranks: serde_json::Map<_, _> = RankMetric::ALL
        .iter()
        .zip(&report.ranks)
        .map(|(m, r)| (format!("{m:?}").to_lowercase(), json!(r)))
        .collect();
    json!({
        "dataset": report.dataset,
        "model": report.model,
        "parameter_names": report.model.parameter_names(),
        "config": cfg,
        "run_config": report.run_config,
        "bounds": report.bounds,
        "seed_derivation": "run r uses splitmix64(master_seed ^ splitmix64(r))",
        "sd_divisor": "n - 1 (sample standard deviation); 0 when runs = 1",
        "optimizers": optimizers,
        "ranks": ranks,
    })
}

/// Writes `report.json`, `stats.csv`, `convergence.csv` and `iae.csv`.
pub fn write_all(
    cfg: &ExperimentConfig,
    data: &PvDataset,
    report: &ExperimentReport,
    dir: &Path,
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let json = serde_json::to_string_pretty(&report_json(cfg, report)).expect("report serializes");
    write(&dir.join("report.json"), &(json + "\n"))?;
    write(&dir.join("stats.csv"), &stats_csv(report))?;
    write(
        &dir.join("convergence.csv"),
        &convergence_csv(report, cfg.checkpoint_every),
    )?;
    let best = report.best_run();
    write_iae_csv(
        &dir.join("iae.csv"),
        &iae_report(report.model, &best.best_position, data),
    )
}

pub(crate) fn write_sweep_csv(
    dir: &Path,
    reports: &[ExperimentReport],
) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut out = String::from("population,optimizer,min,mean,max,sd,mean_rank\n");
    for rep in reports {
        let mean_rank = &rep.ranks[1];
        for (o, rank) in rep.optimizers.iter().zip(mean_rank) {
            let s = o.stats;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                rep.run_config.population,
                o.optimizer,
                fmt_num(s.min),
                fmt_num(s.mean),
                fmt_num(s.max),
                fmt_num(s.sd),
                rank
            );
        }
    }
    let per_condition: Vec<Vec<f64>> = reports.iter().map(|r| r.ranks[1].clone()).collect();
    let avg = average_ranks(&per_condition)?;
    for (o, a) in reports[0].optimizers.iter().zip(avg) {
        let _ = writeln!(out, "all,{},,,,,{}", o.optimizer, fmt_num(a));
    }
    write(&dir.join("sweep.csv"), &out)
}
