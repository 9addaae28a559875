//! Photovoltaic equivalent-circuit parameter extraction with the RIME and
//! TERIME metaheuristics.
//!
//! The diode models are evaluated in closed form through the principal
//! branch of the Lambert W function ([`lambert_w`]), scored by RMSE
//! against a measured I-V curve ([`pv`]) and minimized by the population
//! optimizers in [`rime`] and [`terime`]. [`harness`] repeats seeded runs
//! and writes the statistics.

pub mod harness;
pub mod kv;
pub mod lambert_w;
pub mod optimizer;
pub mod optimizers;
pub mod pv;
pub mod rime;
pub mod terime;

pub use optimizer::{Bounds, Objective, RunConfig, RunResult};
pub use optimizers::{make_optimizer, OptimizerKind};
pub use pv::{ModelKind, PvDataset, PvSystem};
