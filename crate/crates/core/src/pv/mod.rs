//! Single, double and triple diode equivalent-circuit models.
//!
//! Currents are evaluated through the explicit Lambert-W forms. For the
//! single diode model this is the exact solution of the implicit circuit
//! equation. For two and three diodes each diode contributes its own
//! `n_k W(beta_k)` term, with `beta_k` built as if that diode were alone;
//! this is the usual explicit approximation used by the PV extraction
//! literature and is what the reference RMSE values are computed with.
//!
//! Search vectors hold saturation currents in microamperes so the bound
//! presets stay within a few orders of magnitude; they are converted to
//! amperes here.

mod dataset;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{DatasetError, IvPoint, PvDataset};

use crate::lambert_w::lambert_w0_exp;
use crate::optimizer::{Bounds, Objective, WORST_FITNESS};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN_K: f64 = 1.380_649e-23;
/// Elementary charge, C (exact SI value).
pub const ELECTRON_CHARGE_Q: f64 = 1.602_176_634e-19;
const ZERO_CELSIUS: f64 = 273.15;
const MICRO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub boltzmann_k: f64,
    pub electron_charge_q: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            boltzmann_k: BOLTZMANN_K,
            electron_charge_q: ELECTRON_CHARGE_Q,
        }
    }
}

/// Operating condition of the measured device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub temperature_kelvin: f64,
    pub series_cells: u32,
    /// W/m^2; only needed for S75 bounds.
    pub irradiance: Option<f64>,
}

impl CellConfig {
    pub fn from_celsius(temperature_c: f64, series_cells: u32, irradiance: Option<f64>) -> Self {
        Self {
            temperature_kelvin: temperature_c + ZERO_CELSIUS,
            series_cells,
            irradiance,
        }
    }

    pub fn temperature_celsius(&self) -> f64 {
        self.temperature_kelvin - ZERO_CELSIUS
    }
}

/// `Ns k T / q`.
pub fn thermal_voltage(cell: &CellConfig) -> f64 {
    let c = PhysicalConstants::default();
    cell.series_cells as f64 * c.boltzmann_k * cell.temperature_kelvin / c.electron_charge_q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sdm,
    Ddm,
    Tdm,
}

impl ModelKind {
    pub fn diodes(self) -> usize {
        match self {
            ModelKind::Sdm => 1,
            ModelKind::Ddm => 2,
            ModelKind::Tdm => 3,
        }
    }

    /// Length of the parameter vector: `I_ph`, one `I_o` and one `n` per
    /// diode, `R_s`, `R_sh`.
    pub fn dimension(self) -> usize {
        3 + 2 * self.diodes()
    }

    /// Parameter names in vector order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Sdm => &["I_ph", "I_o", "R_s", "R_sh", "n"],
            ModelKind::Ddm => &["I_ph", "I_o1", "I_o2", "R_s", "R_sh", "n_1", "n_2"],
            ModelKind::Tdm => &[
                "I_ph", "I_o1", "I_o2", "I_o3", "R_s", "R_sh", "n_1", "n_2", "n_3",
            ],
        }
    }

    fn rs_index(self) -> usize {
        1 + self.diodes()
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Sdm => "sdm",
            ModelKind::Ddm => "ddm",
            ModelKind::Tdm => "tdm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sdm" => Ok(ModelKind::Sdm),
            "ddm" => Ok(ModelKind::Ddm),
            "tdm" => Ok(ModelKind::Tdm),
            _ => Err(ModelError::UnknownModel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{kind} expects {expected} parameters, got {got}")]
    DimensionMismatch {
        kind: ModelKind,
        expected: usize,
        got: usize,
    },
    #[error("model current is not finite for these parameters")]
    NonFinite,
    #[error("unknown model `{0}` (expected sdm, ddm or tdm)")]
    UnknownModel(String),
    #[error("unknown PV system `{0}` (expected rtc, pwp201 or s75)")]
    UnknownSystem(String),
    #[error("S75 bounds need the operating {0}")]
    MissingCondition(&'static str),
}

/// Per-parameter-vector constants of the explicit current expression.
struct Prepared {
    /// `R_sh (I_ph + sum I_o)` and `R_s + R_sh`.
    base_num: f64,
    denom: f64,
    vt_over_rs: f64,
    diodes: [Diode; 3],
    count: usize,
}

#[derive(Clone, Copy, Default)]
struct Diode {
    n: f64,
    /// `ln(I_o R_s R_sh / (n V_t (R_s + R_sh)))`
    ln_prefactor: f64,
    /// `R_sh / (n V_t (R_s + R_sh))`
    slope: f64,
    /// `R_s (I_ph + I_o)`
    offset: f64,
}

impl Prepared {
    fn new(kind: ModelKind, params: &[f64], vt: f64) -> Result<Self, ModelError> {
        if params.len() != kind.dimension() {
            return Err(ModelError::DimensionMismatch {
                kind,
                expected: kind.dimension(),
                got: params.len(),
            });
        }
        if !params.iter().all(|p| p.is_finite()) || !(vt > 0.0) {
            return Err(ModelError::NonFinite);
        }
        let k = kind.diodes();
        let iph = params[0];
        let rs = params[kind.rs_index()];
        let rsh = params[kind.rs_index() + 1];
        if !(rs > 0.0 && rsh > 0.0) {
            return Err(ModelError::NonFinite);
        }
        let denom = rs + rsh;
        let mut io_sum = 0.0;
        let mut diodes = [Diode::default(); 3];
        let mut count = 0;
        for d in 0..k {
            let io = params[1 + d] * MICRO;
            let n = params[kind.rs_index() + 2 + d];
            if !(n > 0.0) || io < 0.0 {
                return Err(ModelError::NonFinite);
            }
            io_sum += io;
            if io == 0.0 {
                // W(0) = 0: this diode carries no current.
                continue;
            }
            let nvt = n * vt * denom;
            diodes[count] = Diode {
                n,
                ln_prefactor: (io * rs * rsh / nvt).ln(),
                slope: rsh / nvt,
                offset: rs * (iph + io),
            };
            count += 1;
        }
        Ok(Self {
            base_num: rsh * (iph + io_sum),
            denom,
            vt_over_rs: vt / rs,
            diodes,
            count,
        })
    }

    fn current(&self, v: f64) -> Result<f64, ModelError> {
        let mut w_sum = 0.0;
        for d in &self.diodes[..self.count] {
            let y = d.ln_prefactor + d.slope * (d.offset + v);
            let w = lambert_w0_exp(y).map_err(|_| ModelError::NonFinite)?;
            w_sum += d.n * w;
        }
        let i = (self.base_num - v) / self.denom - self.vt_over_rs * w_sum;
        if i.is_finite() {
            Ok(i)
        } else {
            Err(ModelError::NonFinite)
        }
    }
}

/// Model current at terminal voltage `v`.
pub fn predict_current(
    kind: ModelKind,
    params: &[f64],
    v: f64,
    vt: f64,
) -> Result<f64, ModelError> {
    Prepared::new(kind, params, vt)?.current(v)
}

/// Root-mean-square current residual over the dataset. Parameter vectors
/// the model cannot evaluate get [`WORST_FITNESS`].
pub fn rmse(kind: ModelKind, params: &[f64], data: &PvDataset) -> f64 {
    rmse_points(kind, params, data.points(), thermal_voltage(&data.cell))
}

fn rmse_points(kind: ModelKind, params: &[f64], points: &[IvPoint], vt: f64) -> f64 {
    let Ok(model) = Prepared::new(kind, params, vt) else {
        return WORST_FITNESS;
    };
    let mut sum = 0.0;
    for p in points {
        match model.current(p.voltage) {
            Ok(i) => {
                let r = i - p.current;
                sum += r * r;
            }
            Err(_) => return WORST_FITNESS,
        }
    }
    let value = (sum / points.len() as f64).sqrt();
    if value.is_finite() {
        value
    } else {
        WORST_FITNESS
    }
}

/// Per-point absolute error `|I_cal - I_meas|`, in dataset order. Points the
/// model cannot evaluate are reported as NaN.
pub fn iae_series(
    kind: ModelKind,
    params: &[f64],
    data: &PvDataset,
) -> Result<Vec<f64>, ModelError> {
    let model = match Prepared::new(kind, params, thermal_voltage(&data.cell)) {
        Ok(m) => m,
        Err(ModelError::NonFinite) => return Ok(vec![f64::NAN; data.len()]),
        Err(e) => return Err(e),
    };
    Ok(data
        .points()
        .iter()
        .map(|p| {
            model
                .current(p.voltage)
                .map(|i| (i - p.current).abs())
                .unwrap_or(f64::NAN)
        })
        .collect())
}

/// RMSE objective over a dataset, ready for the optimizers.
#[derive(Debug, Clone)]
pub struct PvObjective<'a> {
    kind: ModelKind,
    data: &'a PvDataset,
    vt: f64,
}

impl<'a> PvObjective<'a> {
    pub fn new(kind: ModelKind, data: &'a PvDataset) -> Self {
        Self {
            kind,
            data,
            vt: thermal_voltage(&data.cell),
        }
    }
}

impl Objective for PvObjective<'_> {
    fn dimension(&self) -> usize {
        self.kind.dimension()
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        rmse_points(self.kind, x, self.data.points(), self.vt)
    }
}

/// Datasheet values of the S75 module used for its short-circuit current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S75RefParams {
    pub isc_stc: f64,
    /// mA/°C
    pub kt_ma_per_c: f64,
    /// W/m^2
    pub g_stc: f64,
    /// °C
    pub t_stc: f64,
}

impl Default for S75RefParams {
    fn default() -> Self {
        Self {
            isc_stc: 4.7,
            kt_ma_per_c: 2.0,
            g_stc: 1000.0,
            t_stc: 25.0,
        }
    }
}

/// Short-circuit current at irradiance `g` (W/m^2) and temperature `t_c` (°C).
pub fn short_circuit_current(g: f64, t_c: f64, reference: &S75RefParams) -> f64 {
    reference.isc_stc * g / reference.g_stc + reference.kt_ma_per_c * 1e-3 * (t_c - reference.t_stc)
}

/// Measured devices with bound presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PvSystem {
    Rtc,
    Pwp201,
    S75,
}

impl fmt::Display for PvSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PvSystem::Rtc => "rtc",
            PvSystem::Pwp201 => "pwp201",
            PvSystem::S75 => "s75",
        })
    }
}

impl FromStr for PvSystem {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', '_', ' '], "")
            .as_str()
        {
            "rtc" | "rtcfrance" => Ok(PvSystem::Rtc),
            "pwp201" | "pwp" | "photowattpwp201" => Ok(PvSystem::Pwp201),
            "s75" => Ok(PvSystem::S75),
            _ => Err(ModelError::UnknownSystem(s.to_string())),
        }
    }
}

/// Search box of each system: `(I_ph, I_o [uA], R_s, R_sh, n)` limits.
pub fn default_bounds(
    system: PvSystem,
    kind: ModelKind,
    cell: &CellConfig,
) -> Result<Bounds, ModelError> {
    let (iph_ub, io_ub, rs_ub, rsh_ub, n_ub) = match system {
        PvSystem::Rtc => (1.0, 1.0, 0.5, 100.0, 2.0),
        PvSystem::Pwp201 => (2.0, 10.0, 2.0, 2000.0, 2.0),
        PvSystem::S75 => {
            let g = cell
                .irradiance
                .ok_or(ModelError::MissingCondition("irradiance"))?;
            let isc =
                short_circuit_current(g, cell.temperature_celsius(), &S75RefParams::default());
            (2.0 * isc, 1.0, 2.0, 5000.0, 4.0)
        }
    };
    let k = kind.diodes();
    let mut pairs = vec![(0.0, iph_ub)];
    pairs.extend(std::iter::repeat_n((0.0, io_ub), k));
    pairs.push((0.0, rs_ub));
    pairs.push((0.0, rsh_ub));
    pairs.extend(std::iter::repeat_n((1.0, n_ub), k));
    Ok(Bounds::from_pairs(&pairs).expect("preset bounds are ordered"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Bisection on the implicit multi-diode equation
    /// `I = I_ph - sum I_o (exp((V + I R_s) / (n V_t)) - 1) - (V + I R_s) / R_sh`.
    fn implicit_current(kind: ModelKind, p: &[f64], v: f64, vt: f64) -> f64 {
        let k = kind.diodes();
        let iph = p[0];
        let rs = p[1 + k];
        let rsh = p[2 + k];
        let f = |i: f64| {
            let a = v + i * rs;
            let mut diode = 0.0;
            for d in 0..k {
                diode += p[1 + d] * 1e-6 * ((a / (p[3 + k + d] * vt)).exp() - 1.0);
            }
            iph - diode - a / rsh - i
        };
        let (mut lo, mut hi) = (-2.0, 2.0);
        while f(lo) < 0.0 {
            lo *= 2.0;
        }
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn dataset(points: &[(f64, f64)]) -> PvDataset {
        PvDataset::new(
            "test",
            CellConfig::from_celsius(33.0, 1, None),
            points
                .iter()
                .map(|&(v, i)| IvPoint {
                    voltage: v,
                    current: i,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn thermal_voltage_values() {
        let one = CellConfig {
            temperature_kelvin: 306.15,
            series_cells: 1,
            irradiance: None,
        };
        // k T / q = 1.380649e-23 * 306.15 / 1.602176634e-19
        assert_relative_eq!(
            thermal_voltage(&one),
            0.026_381_965_782,
            max_relative = 1e-10
        );
        let module = CellConfig {
            series_cells: 36,
            ..one
        };
        assert_relative_eq!(
            thermal_voltage(&module),
            36.0 * thermal_voltage(&one),
            max_relative = 1e-15
        );
        let pwp = CellConfig::from_celsius(45.0, 36, None);
        assert_relative_eq!(
            thermal_voltage(&pwp),
            0.986_977_647_847,
            max_relative = 1e-10
        );
    }

    #[test]
    fn zero_photo_and_saturation_current_is_resistive() {
        let p = [0.0, 0.0, 0.05, 40.0, 1.3];
        for v in [-0.2, 0.0, 0.3, 0.6] {
            let i = predict_current(ModelKind::Sdm, &p, v, 0.0264).unwrap();
            assert_relative_eq!(i, -v / 40.05, max_relative = 1e-15);
        }
    }

    #[test]
    fn sdm_matches_implicit_solution() {
        let p = [0.7608, 0.3230, 0.0364, 53.72, 1.4811];
        let vt = thermal_voltage(&CellConfig::from_celsius(33.0, 1, None));
        let explicit = predict_current(ModelKind::Sdm, &p, 0.45, vt).unwrap();
        let oracle = implicit_current(ModelKind::Sdm, &p, 0.45, vt);
        assert!((explicit - oracle).abs() <= 1e-9, "{explicit} vs {oracle}");
    }

    #[test]
    fn nesting() {
        let vt = 0.0264;
        let sdm = [0.76, 0.31, 0.036, 52.9, 1.477];
        let ddm = [0.76, 0.31, 0.0, 0.036, 52.9, 1.477, 1.9];
        let tdm = [0.76, 0.31, 0.0, 0.0, 0.036, 52.9, 1.477, 1.2, 1.9];
        for v in [-0.2, 0.1, 0.4, 0.59] {
            let a = predict_current(ModelKind::Sdm, &sdm, v, vt).unwrap();
            let b = predict_current(ModelKind::Ddm, &ddm, v, vt).unwrap();
            let c = predict_current(ModelKind::Tdm, &tdm, v, vt).unwrap();
            assert!((a - b).abs() <= 1e-12 && (a - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_resistances_are_non_finite() {
        let vt = 0.0264;
        assert_eq!(
            predict_current(ModelKind::Sdm, &[0.7, 0.3, 0.0, 50.0, 1.5], 0.3, vt),
            Err(ModelError::NonFinite)
        );
        assert_eq!(
            predict_current(ModelKind::Sdm, &[0.7, 0.3, 0.03, 0.0, 1.5], 0.3, vt),
            Err(ModelError::NonFinite)
        );
        assert!(matches!(
            predict_current(ModelKind::Ddm, &[0.7, 0.3, 0.03, 50.0, 1.5], 0.3, vt),
            Err(ModelError::DimensionMismatch { expected: 7, .. })
        ));
        let d = dataset(&[(0.1, 0.7), (0.5, 0.1)]);
        assert_eq!(
            rmse(ModelKind::Sdm, &[0.7, 0.3, 0.0, 50.0, 1.5], &d),
            WORST_FITNESS
        );
        assert!(iae_series(ModelKind::Sdm, &[0.7, 0.3, 0.0, 50.0, 1.5], &d)
            .unwrap()
            .iter()
            .all(|v| v.is_nan()));
    }

    #[test]
    fn rmse_examples() {
        let p = [0.7, 0.3, 0.04, 50.0, 1.5];
        let vt = thermal_voltage(&CellConfig::from_celsius(33.0, 1, None));
        let vs = [0.0, 0.2, 0.5];
        let exact: Vec<(f64, f64)> = vs
            .iter()
            .map(|&v| (v, predict_current(ModelKind::Sdm, &p, v, vt).unwrap()))
            .collect();
        assert_eq!(rmse(ModelKind::Sdm, &p, &dataset(&exact)), 0.0);
        assert!(iae_series(ModelKind::Sdm, &p, &dataset(&exact))
            .unwrap()
            .iter()
            .all(|&e| e == 0.0));

        let shifted: Vec<(f64, f64)> = exact.iter().map(|&(v, i)| (v, i - 0.01)).collect();
        assert_relative_eq!(
            rmse(ModelKind::Sdm, &p, &dataset(&shifted)),
            0.01,
            max_relative = 1e-9
        );

        let two = dataset(&[
            (exact[0].0, exact[0].1 - 0.3),
            (exact[1].0, exact[1].1 + 0.4),
        ]);
        assert_relative_eq!(
            rmse(ModelKind::Sdm, &p, &two),
            0.353_553_390_593_273_8,
            max_relative = 1e-9
        );

        let one = dataset(&[(exact[0].0, exact[0].1 + 0.002), (exact[1].0, exact[1].1)]);
        assert_relative_eq!(
            iae_series(ModelKind::Sdm, &p, &one).unwrap()[0],
            0.002,
            max_relative = 1e-9
        );
    }

    #[test]
    fn s75_short_circuit_current() {
        let r = S75RefParams::default();
        assert_relative_eq!(short_circuit_current(1000.0, 25.0, &r), 4.7);
        assert_eq!(short_circuit_current(0.0, 25.0, &r), 0.0);
        assert_relative_eq!(
            short_circuit_current(200.0, 25.0, &r),
            0.94,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            short_circuit_current(1000.0, 60.0, &r),
            4.77,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bound_presets() {
        let rtc = CellConfig::from_celsius(33.0, 1, None);
        let b = default_bounds(PvSystem::Rtc, ModelKind::Sdm, &rtc).unwrap();
        assert_eq!(b.lower(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(b.upper(), &[1.0, 1.0, 0.5, 100.0, 2.0]);

        let b = default_bounds(PvSystem::Pwp201, ModelKind::Ddm, &rtc).unwrap();
        assert_eq!(b.lower(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(b.upper(), &[2.0, 10.0, 10.0, 2.0, 2000.0, 2.0, 2.0]);

        let stc = CellConfig::from_celsius(25.0, 36, Some(1000.0));
        let b = default_bounds(PvSystem::S75, ModelKind::Tdm, &stc).unwrap();
        assert_eq!(b.upper(), &[9.4, 1.0, 1.0, 1.0, 2.0, 5000.0, 4.0, 4.0, 4.0]);
        assert_eq!(b.lower()[6..], [1.0, 1.0, 1.0]);

        let g800 = CellConfig::from_celsius(25.0, 36, Some(800.0));
        let b = default_bounds(PvSystem::S75, ModelKind::Ddm, &g800).unwrap();
        assert_relative_eq!(b.upper()[0], 7.52, max_relative = 1e-15);

        assert_eq!(
            default_bounds(PvSystem::S75, ModelKind::Sdm, &rtc),
            Err(ModelError::MissingCondition("irradiance"))
        );
        assert!(matches!(
            "mrime-pv".parse::<PvSystem>(),
            Err(ModelError::UnknownSystem(_))
        ));
        assert_eq!("RTC France".parse::<PvSystem>().unwrap(), PvSystem::Rtc);
    }

    fn in_bounds(b: &Bounds) -> impl Strategy<Value = Vec<f64>> {
        let strategies: Vec<_> = b
            .lower()
            .iter()
            .zip(b.upper())
            .map(|(&lo, &hi)| (lo.max(1e-6))..=hi)
            .collect();
        strategies
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn sdm_oracle_equivalence(p in in_bounds(&default_bounds(PvSystem::Rtc, ModelKind::Sdm, &CellConfig::from_celsius(33.0, 1, None)).unwrap()), v in -0.2f64..0.6) {
            let vt = thermal_voltage(&CellConfig::from_celsius(33.0, 1, None));
            let explicit = predict_current(ModelKind::Sdm, &p, v, vt).unwrap();
            let oracle = implicit_current(ModelKind::Sdm, &p, v, vt);
            prop_assert!((explicit - oracle).abs() <= 1e-9, "{} vs {}", explicit, oracle);
        }

        #[test]
        fn rmse_permutation_invariant(seed in any::<u64>()) {
            use crate::optimizer::{RandomSource, RunRng};
            let mut rng = RunRng::new(seed);
            let pts: Vec<(f64, f64)> = (0..12).map(|_| (rng.uniform() * 0.6, rng.uniform())).collect();
            let p = [0.76, 0.31, 0.036, 52.9, 1.477];
            let d = dataset(&pts);
            let mut rev = pts.clone();
            rev.reverse();
            let a = rmse(ModelKind::Sdm, &p, &d);
            let b = rmse(ModelKind::Sdm, &p, &dataset(&rev));
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-15 * a.max(1.0));
            let iae = iae_series(ModelKind::Sdm, &p, &d).unwrap();
            let mean_sq = iae.iter().map(|e| e * e).sum::<f64>() / iae.len() as f64;
            prop_assert!(iae.iter().all(|&e| e >= 0.0));
            prop_assert!((a * a - mean_sq).abs() <= 1e-15 * mean_sq.max(1e-300) * 4.0);
        }
    }
}
