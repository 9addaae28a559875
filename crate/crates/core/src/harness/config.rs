use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::HarnessError;
use crate::kv::KeyValues;
use crate::optimizer::RunConfig;
use crate::optimizers::{make_optimizer, OptimizerKind};
use crate::pv::{ModelKind, PvSystem};

/// Named defaults applied before individual keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 100 runs of N = 20, T_max = 100000.
    Paper,
    /// Same run settings with 10 runs.
    Desk,
}

impl Profile {
    pub fn runs(self) -> usize {
        match self {
            Profile::Paper => 100,
            Profile::Desk => 10,
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(format!(
                "unknown profile `{other}` (expected paper or desk)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub system: PvSystem,
    pub model: ModelKind,
    pub optimizers: Vec<OptimizerKind>,
    pub runs: usize,
    pub population: usize,
    pub generations: usize,
    /// When set, `generations` is derived so that `N * (T_max + 1)` fits.
    pub max_evaluations: Option<u64>,
    pub seed: u64,
    pub sigma: f64,
    pub w_steps: u32,
    pub output_dir: PathBuf,
    /// Worker threads; `None` means one per available core.
    pub workers: Option<usize>,
    /// Generation stride of the exported convergence table.
    pub checkpoint_every: usize,
    /// Operating-condition overrides for the dataset's metadata.
    pub irradiance: Option<f64>,
    pub temperature_c: Option<f64>,
    /// Populations of a size sweep; empty for a single experiment.
    pub sweep_populations: Vec<usize>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "profile",
    "dataset",
    "system",
    "model",
    "optimizers",
    "runs",
    "population",
    "generations",
    "max_evaluations",
    "seed",
    "sigma",
    "w_steps",
    "output_dir",
    "workers",
    "checkpoint_every",
    "irradiance_Wm2",
    "temperature_C",
    "sweep_populations",
];

impl ExperimentConfig {
    pub fn new(dataset: impl Into<PathBuf>, system: PvSystem, model: ModelKind) -> Self {
        let run = RunConfig::default();
        Self {
            dataset: dataset.into(),
            system,
            model,
            optimizers: vec![OptimizerKind::Terime],
            runs: Profile::Paper.runs(),
            population: run.population,
            generations: run.generations,
            max_evaluations: None,
            seed: run.seed,
            sigma: run.sigma,
            w_steps: run.w_steps,
            output_dir: PathBuf::from("results"),
            workers: None,
            checkpoint_every: 100,
            irradiance: None,
            temperature_c: None,
            sweep_populations: Vec::new(),
        }
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let kv = KeyValues::parse(&text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Self::from_kv(&kv, path.parent().unwrap_or(Path::new("")))
    }

    pub fn from_kv(kv: &KeyValues, base: &Path) -> Result<Self, HarnessError> {
        if let Some(bad) = kv.keys().find(|k| !CONFIG_KEYS.contains(k)) {
            return Err(HarnessError::Config(format!(
                "line {}: unknown key `{bad}`",
                kv.line_of(bad).unwrap_or(0)
            )));
        }
        let dataset = kv
            .get("dataset")
            .ok_or_else(|| HarnessError::Config("missing key `dataset`".into()))?;
        let system = parse_value(kv, "system", |s| {
            PvSystem::from_str(s).map_err(|e| e.to_string())
        })?
        .ok_or_else(|| HarnessError::Config("missing key `system`".into()))?;
        let model = parse_value(kv, "model", |s| {
            ModelKind::from_str(s).map_err(|e| e.to_string())
        })?
        .ok_or_else(|| HarnessError::Config("missing key `model`".into()))?;
        let mut cfg = Self::new(base.join(dataset), system, model);
        if let Some(profile) = parse_value(kv, "profile", Profile::from_str)? {
            cfg.runs = profile.runs();
        }
        cfg.apply(kv, base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, kv: &KeyValues, base: &Path) -> Result<(), HarnessError> {
        if let Some(list) = kv.get("optimizers") {
            self.optimizers = parse_optimizers(list)?;
        }
        set(kv, "runs", &mut self.runs)?;
        set(kv, "population", &mut self.population)?;
        set(kv, "generations", &mut self.generations)?;
        self.max_evaluations = parse_value(kv, "max_evaluations", number)?.or(self.max_evaluations);
        set(kv, "seed", &mut self.seed)?;
        set(kv, "sigma", &mut self.sigma)?;
        set(kv, "w_steps", &mut self.w_steps)?;
        if let Some(dir) = kv.get("output_dir") {
            self.output_dir = base.join(dir);
        }
        self.workers = parse_value(kv, "workers", number)?.or(self.workers);
        set(kv, "checkpoint_every", &mut self.checkpoint_every)?;
        self.irradiance = parse_value(kv, "irradiance_Wm2", number)?.or(self.irradiance);
        self.temperature_c = parse_value(kv, "temperature_C", number)?.or(self.temperature_c);
        if let Some(list) = kv.get("sweep_populations") {
            self.sweep_populations = list
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| {
                        HarnessError::Config(format!("sweep_populations: bad entry `{}`", s.trim()))
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.optimizers.is_empty() {
            return fail("at least one optimizer is required".into());
        }
        if self.checkpoint_every == 0 {
            return fail("checkpoint_every must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        if let Some(&n) = self.sweep_populations.iter().find(|&&n| n < 4) {
            return fail(format!("sweep population {n} is below 4"));
        }
        self.run_config().validate()?;
        Ok(())
    }

    /// Run settings for the master seed.
    pub fn run_config(&self) -> RunConfig {
        self.run_config_for(self.population)
    }

    pub fn run_config_for(&self, population: usize) -> RunConfig {
        let generations = match self.max_evaluations {
            Some(budget) => RunConfig::from_evaluation_budget(population, budget, 0).generations,
            None => self.generations,
        };
        RunConfig {
            population,
            generations,
            seed: self.seed,
            sigma: self.sigma,
            w_steps: self.w_steps,
        }
    }
}

pub fn parse_optimizers(list: &str) -> Result<Vec<OptimizerKind>, HarnessError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind = make_optimizer(name)?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

fn number<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a valid number"))
}

fn parse_value<T>(
    kv: &KeyValues,
    key: &str,
    parse: impl FnOnce(&str) -> Result<T, String>,
) -> Result<Option<T>, HarnessError> {
    kv.get(key)
        .map(|v| {
            parse(v).map_err(|m| {
                HarnessError::Config(format!("line {}: {key}: {m}", kv.line_of(key).unwrap_or(0)))
            })
        })
        .transpose()
}

fn set<T: FromStr>(kv: &KeyValues, key: &str, slot: &mut T) -> Result<(), HarnessError> {
    if let Some(v) = parse_value(kv, key, number)? {
        *slot = v;
    }
    Ok(())
}
