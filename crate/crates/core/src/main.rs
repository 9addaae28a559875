use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pvfit::harness::{
    self, convergence_csv, fmt_num, iae_report, load_dataset, parse_optimizers, write_iae_csv,
    ExperimentConfig, HarnessError, Profile,
};
use pvfit::optimizer::OptimizerError;
use pvfit::pv::{default_bounds, DatasetError, ModelError, PvObjective};
use pvfit::{ModelKind, PvDataset, PvSystem};

#[derive(Parser)]
#[command(
    name = "pvfit",
    version,
    about = "PV diode-model parameter extraction with TERIME and RIME"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model with a single optimizer run and write fit.json.
    Fit(RunArgs),
    /// Repeated runs of every configured optimizer; writes report.json,
    /// stats.csv, convergence.csv and iae.csv.
    Benchmark(RunArgs),
    /// Like benchmark, but only writes convergence.csv.
    Convergence(RunArgs),
    /// Per-point absolute errors of a fit.json against a dataset.
    Iae(IaeArgs),
    /// Check a dataset CSV and its metadata sidecar.
    ValidateDataset { path: PathBuf },
}

/// Every flag mirrors a config-file key and overrides it.
#[derive(Args)]
struct RunArgs {
    /// Dataset CSV (config key `dataset`).
    dataset: Option<PathBuf>,
    /// Flat `key = value` experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    system: Option<PvSystem>,
    /// Optimizer name, or a comma-separated list for benchmarks.
    #[arg(long, alias = "optimizers")]
    optimizer: Option<String>,
    /// Population size N.
    #[arg(long, alias = "population")]
    pop: Option<usize>,
    /// Generations T_max.
    #[arg(long, alias = "generations")]
    gens: Option<usize>,
    /// Total scalar evaluations; replaces --gens.
    #[arg(long)]
    max_evaluations: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    w_steps: Option<u32>,
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Irradiance override in W/m^2.
    #[arg(long)]
    irradiance: Option<f64>,
    /// Cell temperature override in degrees Celsius.
    #[arg(long)]
    temperature: Option<f64>,
    /// Output directory.
    #[arg(long, env = "PVT_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads for independent runs (default: available cores).
    #[arg(long, env = "PVT_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args)]
struct IaeArgs {
    dataset: PathBuf,
    /// fit.json produced by `pvfit fit`.
    #[arg(long)]
    fit: PathBuf,
    #[arg(long, env = "PVT_OUT_DIR")]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Dataset(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Dataset(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Dataset(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let msg = e.to_string();
        match e {
            HarnessError::Config(_)
            | HarnessError::Optimizer(
                OptimizerError::UnknownOptimizer(_) | OptimizerError::InvalidConfig(_),
            )
            | HarnessError::Model(
                ModelError::MissingCondition(_)
                | ModelError::UnknownModel(_)
                | ModelError::UnknownSystem(_),
            ) => Failure::Usage(msg),
            HarnessError::Dataset(_) => Failure::Dataset(msg),
            _ => Failure::Runtime(msg),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        Failure::Dataset(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Fit(args) => fit(&args),
        Command::Benchmark(args) => benchmark(&args, false),
        Command::Convergence(args) => benchmark(&args, true),
        Command::Iae(args) => iae(&args),
        Command::ValidateDataset { path } => validate(&path),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn experiment(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            if !path.is_file() {
                return Err(Failure::Usage(format!(
                    "config file {} not found",
                    path.display()
                )));
            }
            ExperimentConfig::from_file(path)?
        }
        None => {
            let (Some(dataset), Some(system), Some(model)) =
                (&args.dataset, args.system, args.model)
            else {
                return Err(Failure::Usage(
                    "without --config, a dataset path, --system and --model are required".into(),
                ));
            };
            ExperimentConfig::new(dataset, system, model)
        }
    };
    if let Some(profile) = args.profile {
        cfg.runs = profile.runs();
    }
    if let Some(d) = &args.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(m) = args.model {
        cfg.model = m;
    }
    if let Some(s) = args.system {
        cfg.system = s;
    }
    if let Some(list) = &args.optimizer {
        cfg.optimizers = parse_optimizers(list)?;
    }
    macro_rules! take {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag { cfg.$field = v; })*
        };
    }
    take!(pop => population, gens => generations, runs => runs, seed => seed, sigma => sigma,
          w_steps => w_steps, checkpoint_every => checkpoint_every);
    if args.max_evaluations.is_some() {
        cfg.max_evaluations = args.max_evaluations;
    } else if args.gens.is_some() {
        cfg.max_evaluations = None;
    }
    if args.irradiance.is_some() {
        cfg.irradiance = args.irradiance;
    }
    if args.temperature.is_some() {
        cfg.temperature_c = args.temperature;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn fit(args: &RunArgs) -> Result<(), Failure> {
    let cfg = experiment(args)?;
    let [optimizer] = cfg.optimizers[..] else {
        return Err(Failure::Usage("fit takes exactly one optimizer".into()));
    };
    let data = load_dataset(&cfg)?;
    let bounds = default_bounds(cfg.system, cfg.model, &data.cell).map_err(HarnessError::from)?;
    let objective = PvObjective::new(cfg.model, &data);
    let run_config = cfg.run_config();
    let started = Instant::now();
    let result = optimizer
        .run(&objective, &bounds, &run_config)
        .map_err(HarnessError::from)?;
    let doc = json!({
        "dataset": data.name,
        "system": cfg.system,
        "model": cfg.model,
        "optimizer": optimizer,
        "seed": result.seed,
        "population": run_config.population,
        "generations": run_config.generations,
        "evaluations": result.evaluations,
        "rmse": result.best_fitness,
        "parameter_names": cfg.model.parameter_names(),
        "saturation_current_unit": "uA",
        "parameters": result.best_position,
        "bounds": bounds,
    });
    create_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("fit.json");
    write_file(
        &path,
        &(serde_json::to_string_pretty(&doc).expect("fit serializes") + "\n"),
    )?;
    println!(
        "{} {} on {}: RMSE {}",
        optimizer,
        cfg.model,
        data.name,
        fmt_num(result.best_fitness)
    );
    for (name, value) in cfg
        .model
        .parameter_names()
        .iter()
        .zip(&result.best_position)
    {
        println!("  {name:>5} = {}", fmt_num(*value));
    }
    eprintln!("wrote {} in {:.2?}", path.display(), started.elapsed());
    Ok(())
}

fn benchmark(args: &RunArgs, convergence_only: bool) -> Result<(), Failure> {
    let cfg = experiment(args)?;
    let started = Instant::now();
    if convergence_only {
        let data = load_dataset(&cfg)?;
        let report = harness::execute(&cfg, &data, cfg.population)?;
        create_dir(&cfg.output_dir)?;
        let path = cfg.output_dir.join("convergence.csv");
        write_file(&path, &convergence_csv(&report, cfg.checkpoint_every))?;
        eprintln!("wrote {} in {:.2?}", path.display(), started.elapsed());
        return Ok(());
    }
    let reports = if cfg.sweep_populations.is_empty() {
        vec![harness::run_experiment(&cfg)?]
    } else {
        harness::run_population_sweep(&cfg)?
    };
    println!("population,optimizer,min,mean,max,sd");
    for rep in &reports {
        for o in &rep.optimizers {
            let s = o.stats;
            println!(
                "{},{},{},{},{},{}",
                rep.run_config.population,
                o.optimizer,
                fmt_num(s.min),
                fmt_num(s.mean),
                fmt_num(s.max),
                fmt_num(s.sd)
            );
        }
    }
    eprintln!(
        "wrote {} in {:.2?}",
        cfg.output_dir.display(),
        started.elapsed()
    );
    Ok(())
}

fn iae(args: &IaeArgs) -> Result<(), Failure> {
    let data = PvDataset::load(&args.dataset)?;
    let text = fs::read_to_string(&args.fit)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.fit.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.fit.display())))?;
    let model: ModelKind = doc["model"]
        .as_str()
        .ok_or_else(|| Failure::Usage("fit.json has no `model`".into()))?
        .parse()
        .map_err(|e: ModelError| Failure::Usage(e.to_string()))?;
    let params: Vec<f64> = serde_json::from_value(doc["parameters"].clone())
        .map_err(|e| Failure::Usage(format!("fit.json `parameters`: {e}")))?;
    if params.len() != model.dimension() {
        return Err(Failure::Usage(format!(
            "fit.json has {} parameters; {model} needs {}",
            params.len(),
            model.dimension()
        )));
    }
    let rows = iae_report(model, &params, &data);
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    create_dir(&out)?;
    let path = out.join("iae.csv");
    write_iae_csv(&path, &rows)?;
    let worst = rows.iter().map(|r| r.iae).fold(0.0, f64::max);
    println!("{} points, max IAE {}", rows.len(), fmt_num(worst));
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let data = PvDataset::load(path)?;
    let (lo, hi) = data.voltage_range();
    println!(
        "{}: {} points, voltage {lo} .. {hi} V",
        data.name,
        data.len()
    );
    println!(
        "N_m = {}, T = {} C, Ns = {}",
        data.len(),
        data.cell.temperature_celsius(),
        data.cell.series_cells
    );
    Ok(())
}
