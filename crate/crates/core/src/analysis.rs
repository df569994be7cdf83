// SPDX-License-Identifier: Apache-2.0

//! Device-level analyses over steady-state currents: valve working points,
//! the equilibrium thermometer, the amplification factor, sweeps and phase
//! maps.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BathLabel, DeviceConfig};
use crate::observables::{evaluate, CurrentReport};
use crate::output::{format_float, format_optional};

/// Relative bisection tolerance in `Tw`.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// `|Jc| < VALVE_TOLERANCE * scale` classifies as a valve.
pub const VALVE_TOLERANCE: f64 = 1e-9;
/// Default relative finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// `|Delta Jw|` below this fraction of the current scale is noise.
pub const AMPLIFIER_NOISE_FLOOR: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "Tw")]
    Tw,
    #[serde(rename = "g")]
    G,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepVariable::Tw => f.write_str("Tw"),
            SweepVariable::G => f.write_str("g"),
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Tw" | "tw" => Ok(SweepVariable::Tw),
            "g" => Ok(SweepVariable::G),
            other => Err(format!(
                "unknown sweep variable `{other}` (expected Tw or g)"
            )),
        }
    }
}

impl SweepVariable {
    pub fn apply(self, config: &DeviceConfig, value: f64) -> Result<DeviceConfig> {
        match self {
            SweepVariable::Tw => config.with_temperature(BathLabel::Work, value),
            SweepVariable::G => config.with_g(value),
        }
    }
}

/// Linearly spaced values of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepGrid {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, points: usize) -> Result<Self> {
        let grid = Self {
            variable,
            start,
            stop,
            points,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite range [{}, {}]",
                self.start, self.stop
            )));
        }
        if !(self.start < self.stop) {
            return Err(Error::InvalidGrid(format!(
                "start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Grid values; the last one equals `stop` exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// One grid point of a sweep. Failed points keep their error.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub tw: f64,
    pub g: f64,
    pub result: Result<CurrentReport>,
}

impl SweepRow {
    pub const STATUS_COLUMN: &'static str = "status";

    pub fn csv_record(&self) -> Vec<String> {
        match &self.result {
            Ok(r) => {
                let mut rec = r.csv_record();
                rec.push("ok".into());
                rec
            }
            Err(e) => error_record(self.tw, self.g, CurrentReport::CSV_HEADER.len(), e),
        }
    }
}

fn error_record(tw: f64, g: f64, columns: usize, e: &Error) -> Vec<String> {
    let mut rec = vec![format_float(tw), format_float(g)];
    rec.resize(columns, String::new());
    rec.push(format!("error: {e}"));
    rec
}

fn evaluate_point(config: &DeviceConfig, points: &[(SweepVariable, f64)]) -> SweepRow {
    let mut tw = config.temperature(BathLabel::Work);
    let mut g = config.system().g;
    for (var, v) in points {
        match var {
            SweepVariable::Tw => tw = *v,
            SweepVariable::G => g = *v,
        }
    }
    let result = points
        .iter()
        .try_fold(*config, |c, (var, v)| var.apply(&c, *v))
        .and_then(|c| evaluate(&c))
        .map(|ev| ev.report);
    SweepRow { tw, g, result }
}

/// Steady-state currents along one grid. Points are evaluated in parallel
/// on the current rayon pool; rows come back in grid order.
pub fn sweep(config: &DeviceConfig, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    Ok(grid
        .values()
        .into_par_iter()
        .map(|v| evaluate_point(config, &[(grid.variable, v)]))
        .collect())
}

/// Cartesian sweep, `outer` varying slowest.
pub fn sweep_nested(
    config: &DeviceConfig,
    outer: &SweepGrid,
    inner: &SweepGrid,
) -> Result<Vec<SweepRow>> {
    outer.validate()?;
    inner.validate()?;
    if outer.variable == inner.variable {
        return Err(Error::InvalidGrid(format!(
            "nested sweep needs two different variables, got {} twice",
            outer.variable
        )));
    }
    let points: Vec<(f64, f64)> = outer
        .values()
        .into_iter()
        .flat_map(|o| inner.values().into_iter().map(move |i| (o, i)))
        .collect();
    Ok(points
        .into_par_iter()
        .map(|(o, i)| evaluate_point(config, &[(outer.variable, o), (inner.variable, i)]))
        .collect())
}

fn current_at(config: &DeviceConfig, which: BathLabel, tw: f64) -> Result<(f64, f64)> {
    let report = evaluate(&config.with_temperature(BathLabel::Work, tw)?)?.report;
    Ok((report.current(which), report.scale()))
}

/// Work-bath temperature at which the current of bath `which` vanishes.
pub fn find_current_zero(
    config: &DeviceConfig,
    which: BathLabel,
    bracket: (f64, f64),
) -> Result<f64> {
    find_current_zero_with(config, which, bracket, ROOT_TOLERANCE)
}

/// Bisection on `Tw` to relative width `tolerance`; every evaluation solves
/// a fresh steady state. Only a sign change between the bracket ends is
/// checked.
pub fn find_current_zero_with(
    config: &DeviceConfig,
    which: BathLabel,
    bracket: (f64, f64),
    tolerance: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "bracket [{lo}, {hi}] must lie in (0, inf)"
        )));
    }
    if !(tolerance > 0.0) {
        return Err(Error::NonPositive {
            name: "tolerance",
            value: tolerance,
        });
    }
    let (f_lo, _) = current_at(config, which, lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let (f_hi, _) = current_at(config, which, hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoWorkingPoint { lo, hi });
    }
    let lo_sign = f_lo.signum();
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tolerance * mid {
            return Ok(mid);
        }
        let (f_mid, _) = current_at(config, which, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Tw` solving `omega_a / Th = Delta / Tw + omega_b / Tc`.
pub fn equilibrium_tw(omega_a: f64, omega_b: f64, t_h: f64, t_c: f64) -> Result<f64> {
    let den = omega_a / t_h - omega_b / t_c;
    if !(den > 0.0) {
        return Err(Error::NoEquilibrium);
    }
    Ok((omega_a - omega_b) / den)
}

/// Sample temperature read off the balancing control temperature.
pub fn tc_from_tw(t_w: f64, t_h: f64, xi: f64) -> Result<f64> {
    let den = t_w - (1.0 - xi) * t_h;
    if !(den > 0.0) {
        return Err(Error::Domain(format!(
            "Tw = {t_w} must exceed (1 - xi) Th = {}",
            (1.0 - xi) * t_h
        )));
    }
    Ok(t_h * t_w * xi / den)
}

/// `|dTw/dTc|` of the equilibrium condition.
pub fn sensitivity(t_c: f64, t_h: f64, xi: f64) -> Result<f64> {
    let gap = xi * t_h - t_c;
    if !(t_c > xi * t_h) {
        return Err(Error::Domain(format!(
            "Tc = {t_c} must exceed xi Th = {}",
            xi * t_h
        )));
    }
    Ok(xi * (1.0 - xi) * t_h * t_h / (gap * gap))
}

/// Sample temperature above which the sensitivity drops below `alpha_t`.
pub fn critical_tc(alpha_t: f64, t_h: f64, xi: f64) -> Result<f64> {
    if !(alpha_t > 0.0) {
        return Err(Error::NonPositive {
            name: "alpha_T",
            value: alpha_t,
        });
    }
    Ok(xi * t_h + (xi * (1.0 - xi) * t_h * t_h / alpha_t).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermometerSettings {
    /// Multiplicative step of the upward `Tw` scan.
    pub stride: f64,
    /// Scan limit in units of `Th`.
    pub tw_max_factor: f64,
    pub tolerance: f64,
}

impl Default for ThermometerSettings {
    fn default() -> Self {
        Self {
            stride: 1.1,
            tw_max_factor: 1e3,
            tolerance: ROOT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermometerReading {
    pub tw_star: f64,
    pub tc_estimate: f64,
    pub sensitivity: Option<f64>,
    pub in_range: bool,
}

/// Simulated measurement: raise `Tw` from `Th` until the hot current changes
/// sign, locate the balance point and invert the equilibrium condition.
///
/// Only `Th`, `xi = omega_b / omega_a` and the device response are used;
/// the cold temperature in `config` plays the unknown sample.
pub fn measure_temperature(
    config: &DeviceConfig,
    settings: &ThermometerSettings,
) -> Result<ThermometerReading> {
    let g = config.system().g;
    if g != 0.0 {
        return Err(Error::RequiresUncoupled(g));
    }
    if !(settings.stride > 1.0) {
        return Err(Error::Domain(format!(
            "scan stride {} must exceed 1",
            settings.stride
        )));
    }
    let t_h = config.temperature(BathLabel::Hot);
    let xi = config.system().xi();
    let tw_max = settings.tw_max_factor * t_h;

    let mut lo = t_h;
    let (mut f_lo, _) = current_at(config, BathLabel::Hot, lo)?;
    let tw_star = if f_lo == 0.0 {
        lo
    } else {
        loop {
            let hi = (lo * settings.stride).min(tw_max);
            let (f_hi, _) = current_at(config, BathLabel::Hot, hi)?;
            if f_hi == 0.0 || f_hi.signum() != f_lo.signum() {
                break find_current_zero_with(
                    config,
                    BathLabel::Hot,
                    (lo, hi),
                    settings.tolerance,
                )?;
            }
            if hi >= tw_max {
                return Err(Error::BelowMeasurableRange { tw_max });
            }
            lo = hi;
            f_lo = f_hi;
        }
    };
    let tc_estimate = tc_from_tw(tw_star, t_h, xi)?;
    let in_range = tc_estimate > xi * t_h;
    Ok(ThermometerReading {
        tw_star,
        tc_estimate,
        sensitivity: sensitivity(tc_estimate, t_h, xi).ok(),
        in_range,
    })
}

/// `|dJc/dJw|` by central differences in `Tw` with step `step * max(1, Tw)`.
pub fn amplification_factor(config: &DeviceConfig, t_w: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::NonPositive {
            name: "step",
            value: step,
        });
    }
    let h = step * t_w.max(1.0);
    if !(t_w - h > 0.0) {
        return Err(Error::Domain(format!(
            "finite-difference step {h} too large at Tw = {t_w}"
        )));
    }
    let at = |tw: f64| -> Result<CurrentReport> {
        Ok(evaluate(&config.with_temperature(BathLabel::Work, tw)?)?.report)
    };
    let (plus, minus) = (at(t_w + h)?, at(t_w - h)?);
    let d_jc = plus.j_c - minus.j_c;
    let d_jw = plus.j_w - minus.j_w;
    let scale = plus.scale().max(minus.scale());
    if !(d_jw.abs() > AMPLIFIER_NOISE_FLOOR * scale) {
        return Err(Error::AmplifierUndefined(d_jw));
    }
    Ok((d_jc / d_jw).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalFunction {
    /// `Jc < 0`: heat flows into the cold bath.
    Heater,
    /// `Jc = 0` within tolerance.
    Valve,
    /// `Jc > 0`: heat is extracted from the cold bath.
    Refrigerator,
}

impl ThermalFunction {
    pub fn classify(report: &CurrentReport, tolerance: f64) -> Self {
        if report.j_c.abs() < tolerance * report.scale() {
            ThermalFunction::Valve
        } else if report.j_c > 0.0 {
            ThermalFunction::Refrigerator
        } else {
            ThermalFunction::Heater
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ThermalFunction::Heater => "heater",
            ThermalFunction::Valve => "valve",
            ThermalFunction::Refrigerator => "refrigerator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplifierClass {
    Amplifier,
    Contraction,
}

impl AmplifierClass {
    pub fn classify(alpha_j: f64) -> Self {
        if alpha_j > 1.0 {
            AmplifierClass::Amplifier
        } else {
            AmplifierClass::Contraction
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AmplifierClass::Amplifier => "amplifier",
            AmplifierClass::Contraction => "contraction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub report: CurrentReport,
    /// `None` where the amplification factor is undefined.
    pub alpha_j: Option<f64>,
    pub function: ThermalFunction,
    pub amplifier: Option<AmplifierClass>,
}

#[derive(Debug, Clone)]
pub struct PhaseMapRow {
    pub tw: f64,
    pub g: f64,
    pub result: Result<PhasePoint>,
}

impl PhaseMapRow {
    pub fn csv_header() -> Vec<&'static str> {
        let mut h = CurrentReport::CSV_HEADER.to_vec();
        h.extend(["alpha_J", "thermal_function", "amplifier_class", "status"]);
        h
    }

    pub fn csv_record(&self) -> Vec<String> {
        match &self.result {
            Ok(p) => {
                let mut rec = p.report.csv_record();
                rec.push(format_optional(p.alpha_j));
                rec.push(p.function.as_str().into());
                rec.push(
                    p.amplifier
                        .map(|a| a.as_str())
                        .unwrap_or("undefined")
                        .into(),
                );
                rec.push("ok".into());
                rec
            }
            Err(e) => error_record(self.tw, self.g, CurrentReport::CSV_HEADER.len() + 3, e),
        }
    }
}

fn phase_point(config: &DeviceConfig, tw: f64, g: f64, step: f64) -> Result<PhasePoint> {
    let c = config.with_g(g)?.with_temperature(BathLabel::Work, tw)?;
    let report = evaluate(&c)?.report;
    let alpha_j = match amplification_factor(&c, tw, step) {
        Ok(a) => Some(a),
        Err(Error::AmplifierUndefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(PhasePoint {
        report,
        alpha_j,
        function: ThermalFunction::classify(&report, VALVE_TOLERANCE),
        amplifier: alpha_j.map(AmplifierClass::classify),
    })
}

/// Classified currents over the `(g, Tw)` grid; rows grouped by `g` with
/// `Tw` varying fastest. Per-point failures are kept in the row.
pub fn phase_map(
    config: &DeviceConfig,
    tw_grid: &SweepGrid,
    g_grid: &SweepGrid,
    step: f64,
) -> Result<Vec<PhaseMapRow>> {
    tw_grid.validate()?;
    g_grid.validate()?;
    if tw_grid.variable != SweepVariable::Tw || g_grid.variable != SweepVariable::G {
        return Err(Error::InvalidGrid(
            "phase map needs a Tw grid and a g grid".into(),
        ));
    }
    let points: Vec<(f64, f64)> = g_grid
        .values()
        .into_iter()
        .flat_map(|g| tw_grid.values().into_iter().map(move |tw| (g, tw)))
        .collect();
    Ok(points
        .into_par_iter()
        .map(|(g, tw)| PhaseMapRow {
            tw,
            g,
            result: phase_point(config, tw, g, step),
        })
        .collect())
}
