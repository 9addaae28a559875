//! Uniform entry point over the available optimizers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::optimizer::{Bounds, Objective, OptimizerError, RunConfig, RunObserver, RunResult};
use crate::rime::rime_run_observed;
use crate::terime::terime_run_observed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Rime,
    Terime,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 2] = [OptimizerKind::Terime, OptimizerKind::Rime];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Rime => "rime",
            OptimizerKind::Terime => "terime",
        }
    }

    pub fn run<O: Objective + ?Sized>(
        self,
        objective: &O,
        bounds: &Bounds,
        cfg: &RunConfig,
    ) -> Result<RunResult, OptimizerError> {
        self.run_observed(objective, bounds, cfg, &mut ())
    }

    pub fn run_observed<O, W>(
        self,
        objective: &O,
        bounds: &Bounds,
        cfg: &RunConfig,
        observer: &mut W,
    ) -> Result<RunResult, OptimizerError>
    where
        O: Objective + ?Sized,
        W: RunObserver + ?Sized,
    {
        match self {
            OptimizerKind::Rime => rime_run_observed(objective, bounds, cfg, observer),
            OptimizerKind::Terime => terime_run_observed(objective, bounds, cfg, observer),
        }
    }
}

/// Looks an optimizer up by name.
pub fn make_optimizer(name: &str) -> Result<OptimizerKind, OptimizerError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "rime" => Ok(OptimizerKind::Rime),
        "terime" => Ok(OptimizerKind::Terime),
        _ => Err(OptimizerError::UnknownOptimizer(name.trim().to_string())),
    }
}

impl FromStr for OptimizerKind {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        make_optimizer(s)
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
