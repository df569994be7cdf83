// SPDX-License-Identifier: Apache-2.0

use qthermal_core::output::{format_float, format_optional, write_table};
use qthermal_core::prelude::*;
use rayon::prelude::*;

use crate::config::{GeneratorKind, InitialState, RootBlock, RunConfig};
use crate::error::{CliError, CliResult};

/// CSV body plus the one-line summary for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub csv: Vec<u8>,
    pub summary: String,
    pub failed_rows: usize,
    pub total_rows: usize,
}

impl Outcome {
    fn new(csv: Vec<u8>, summary: String) -> Self {
        Self {
            csv,
            summary,
            failed_rows: 0,
            total_rows: 1,
        }
    }
}

/// Per-command overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid: Option<(f64, f64, usize)>,
    pub bracket: Option<(f64, f64)>,
    pub tolerance: Option<f64>,
}

fn regrid(grid: SweepGrid, over: Option<(f64, f64, usize)>) -> CliResult<SweepGrid> {
    let grid = match over {
        Some((start, stop, points)) => SweepGrid {
            start,
            stop,
            points,
            ..grid
        },
        None => grid,
    };
    grid.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(grid)
}

fn missing(block: &str, flag: &str) -> CliError {
    CliError::Config(format!("missing `{block}` block (or pass {flag})"))
}

pub fn sweep(run: &RunConfig, over: Overrides) -> CliResult<Outcome> {
    let (grid, inner) = match (run.sweep, over.grid) {
        (Some(b), _) => (regrid(b.grid, over.grid)?, b.inner),
        (None, Some((start, stop, points))) => (
            regrid(
                SweepGrid {
                    variable: SweepVariable::Tw,
                    start,
                    stop,
                    points,
                },
                None,
            )?,
            None,
        ),
        (None, None) => return Err(missing("sweep", "--grid")),
    };
    let rows = match inner {
        Some(inner) => {
            let inner = regrid(inner, None)?;
            sweep_nested(&run.device, &grid, &inner)?
        }
        None => qthermal_core::analysis::sweep(&run.device, &grid)?,
    };
    let mut header = CurrentReport::CSV_HEADER.to_vec();
    header.push(SweepRow::STATUS_COLUMN);
    let mut csv = Vec::new();
    write_table(&mut csv, &header, rows.iter().map(SweepRow::csv_record))?;

    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    let peak = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok())
        .max_by(|a, b| a.coherence_abs.total_cmp(&b.coherence_abs));
    let mut summary = format!("sweep: {} points over {}", rows.len(), grid.variable);
    if let Some(inner) = inner {
        summary.push_str(&format!(" x {}", inner.variable));
    }
    if let Some(p) = peak {
        summary.push_str(&format!(
            ", max |rho23| = {:.4e} at Tw = {:.4}, g = {:.4}",
            p.coherence_abs, p.tw, p.g
        ));
    }
    if failed > 0 {
        summary.push_str(&format!(", {failed} failed"));
    }
    Ok(Outcome {
        csv,
        summary,
        failed_rows: failed,
        total_rows: rows.len(),
    })
}

fn root_block(
    block: Option<RootBlock>,
    over: Overrides,
    name: &str,
) -> CliResult<((f64, f64), f64)> {
    let bracket = match (over.bracket, block) {
        (Some(b), _) => b,
        (None, Some(b)) => (b.bracket[0], b.bracket[1]),
        (None, None) => return Err(missing(name, "--bracket")),
    };
    let tolerance = over
        .tolerance
        .or(block.map(|b| b.tolerance))
        .unwrap_or(qthermal_core::analysis::ROOT_TOLERANCE);
    Ok((bracket, tolerance))
}

fn report_at(config: &DeviceConfig, tw: f64) -> CliResult<(CurrentReport, Vec<u8>)> {
    let report = evaluate(&config.with_temperature(BathLabel::Work, tw)?)?.report;
    let mut csv = Vec::new();
    write_table(&mut csv, &CurrentReport::CSV_HEADER, [report.csv_record()])?;
    Ok((report, csv))
}

/// Heat valve: the hot-bath current vanishes.
pub fn valve(run: &RunConfig, over: Overrides) -> CliResult<Outcome> {
    let (bracket, tol) = root_block(run.valve, over, "valve")?;
    let tw = find_current_zero_with(&run.device, BathLabel::Hot, bracket, tol)?;
    let (report, csv) = report_at(&run.device, tw)?;
    let summary = format!(
        "valve: Jh = 0 at Tw = {:.6} (Jc = {:.4e}, Jw = {:.4e})",
        tw, report.j_c, report.j_w
    );
    Ok(Outcome::new(csv, summary))
}

/// Cooling onset: the cold-bath current changes sign.
pub fn refrigerator(run: &RunConfig, over: Overrides) -> CliResult<Outcome> {
    let (bracket, tol) = root_block(run.refrigerator, over, "refrigerator")?;
    let tw = find_current_zero_with(&run.device, BathLabel::Cold, bracket, tol)?;
    let (report, csv) = report_at(&run.device, tw)?;
    let summary = format!(
        "refrigerator: Jc = 0 at Tw = {:.6}, COP = {}, Carnot COP = {}",
        tw,
        report
            .cop
            .map_or("undefined".into(), |c| format!("{c:.3e}")),
        report
            .carnot_cop
            .map_or("undefined".into(), |c| format!("{c:.6}")),
    );
    Ok(Outcome::new(csv, summary))
}

pub fn amplifier(run: &RunConfig, over: Overrides) -> CliResult<Outcome> {
    let block = run
        .amplifier
        .ok_or_else(|| missing("amplifier", "an amplifier block"))?;
    let grid = regrid(block.grid, over.grid)?;
    let rows: Vec<(f64, f64, qthermal_core::Result<f64>)> = grid
        .values()
        .into_par_iter()
        .map(|v| {
            let config = grid.variable.apply(&run.device, v);
            let tw = config
                .as_ref()
                .map_or(f64::NAN, |c| c.temperature(BathLabel::Work));
            let g = config.as_ref().map_or(f64::NAN, |c| c.system().g);
            (
                tw,
                g,
                config.and_then(|c| amplification_factor(&c, tw, block.step)),
            )
        })
        .collect();
    let mut csv = Vec::new();
    let records = rows.iter().map(|(tw, g, alpha)| {
        let (value, class, status) = match alpha {
            Ok(a) => (
                Some(*a),
                AmplifierClass::classify(*a).as_str(),
                "ok".to_string(),
            ),
            Err(qthermal_core::Error::AmplifierUndefined(_)) => {
                (None, "undefined", "ok".to_string())
            }
            Err(e) => (None, "", format!("error: {e}")),
        };
        vec![
            format_float(*tw),
            format_float(*g),
            format_optional(value),
            class.into(),
            status,
        ]
    });
    write_table(
        &mut csv,
        &["Tw", "g", "alpha_J", "amplifier_class", "status"],
        records,
    )?;
    let failed = rows
        .iter()
        .filter(
            |r| matches!(&r.2, Err(e) if !matches!(e, qthermal_core::Error::AmplifierUndefined(_))),
        )
        .count();
    let amplifying = rows
        .iter()
        .filter(|r| matches!(r.2, Ok(a) if a > 1.0))
        .count();
    let summary = format!(
        "amplifier: alpha_J > 1 at {amplifying} of {} points{}",
        rows.len(),
        if failed > 0 {
            format!(", {failed} failed")
        } else {
            String::new()
        }
    );
    Ok(Outcome {
        csv,
        summary,
        failed_rows: failed,
        total_rows: rows.len(),
    })
}

pub fn thermometer(run: &RunConfig, over: Overrides) -> CliResult<Outcome> {
    let mut settings = run.thermometer.unwrap_or_default();
    if let Some(t) = over.tolerance {
        settings.tolerance = t;
    }
    let reading = measure_temperature(&run.device, &settings)?;
    let mut csv = Vec::new();
    write_table(
        &mut csv,
        &["tw_star", "tc_estimate", "sensitivity", "in_range"],
        [vec![
            format_float(reading.tw_star),
            format_float(reading.tc_estimate),
            format_optional(reading.sensitivity),
            reading.in_range.to_string(),
        ]],
    )?;
    let summary = format!(
        "thermometer: Tw*={:.6}, Tc={:.6}{}",
        reading.tw_star,
        reading.tc_estimate,
        if reading.in_range {
            ""
        } else {
            " (outside calibrated range)"
        }
    );
    Ok(Outcome::new(csv, summary))
}

fn initial_state(initial: InitialState) -> CliResult<DensityMatrix> {
    match initial {
        InitialState::Level(k @ 1..=3) => Ok(DensityMatrix::pure_level(Basis::Eigen, k - 1)),
        InitialState::Level(k) => Err(CliError::Config(format!(
            "initial level must be 1, 2 or 3, got {k}"
        ))),
        InitialState::Populations(p) => Ok(DensityMatrix::diagonal(Basis::Eigen, p)?),
        InitialState::MaximallyMixed => Ok(DensityMatrix::maximally_mixed(Basis::Eigen)),
    }
}

pub fn dynamics(run: &RunConfig, _over: Overrides) -> CliResult<Outcome> {
    let block = run.dynamics.unwrap_or_default();
    if block.stride == 0 {
        return Err(CliError::Config(
            "dynamics stride must be at least 1".into(),
        ));
    }
    let gen = build_partial_secular_with(&run.device, block.rotation)?;
    let rho0 = initial_state(block.initial)?;
    let t_final = match block.t_final {
        Some(t) => t,
        None => block.relaxation_times * relaxation_time(&gen)?,
    };
    let dt = block.dt.unwrap_or_else(|| default_time_step(&gen));
    let traj = evolve_sampled(&gen, &rho0, t_final, dt, block.stride)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    let last = traj.last();
    let summary = format!(
        "dynamics: {} samples to t = {:.4}, lowest eigenvalue {:.3e}, final |rho23| = {:.4e}",
        traj.samples.len(),
        last.time,
        traj.lowest_eigenvalue,
        last.state.entry(1, 2).norm()
    );
    Ok(Outcome::new(csv, summary))
}

pub fn phase_map(run: &RunConfig, over: Overrides) -> CliResult<Outcome> {
    let block = run
        .phase_map
        .ok_or_else(|| missing("phase_map", "a phase_map block"))?;
    let tw = regrid(block.tw, over.grid)?;
    let g = regrid(block.g, None)?;
    let rows = qthermal_core::analysis::phase_map(&run.device, &tw, &g, block.step)?;
    let mut csv = Vec::new();
    write_table(
        &mut csv,
        &PhaseMapRow::csv_header(),
        rows.iter().map(PhaseMapRow::csv_record),
    )?;
    let points: Vec<&PhasePoint> = rows.iter().filter_map(|r| r.result.as_ref().ok()).collect();
    let count = |f: ThermalFunction| points.iter().filter(|p| p.function == f).count();
    let failed = rows.len() - points.len();
    let summary = format!(
        "phase map: {} points, {} refrigerator, {} valve, {} heater, {} amplifier{}",
        rows.len(),
        count(ThermalFunction::Refrigerator),
        count(ThermalFunction::Valve),
        count(ThermalFunction::Heater),
        points
            .iter()
            .filter(|p| p.amplifier == Some(AmplifierClass::Amplifier))
            .count(),
        if failed > 0 {
            format!(", {failed} failed")
        } else {
            String::new()
        }
    );
    Ok(Outcome {
        csv,
        summary,
        failed_rows: failed,
        total_rows: rows.len(),
    })
}

pub fn generator(run: &RunConfig, _over: Overrides) -> CliResult<Outcome> {
    let block = run.generator.unwrap_or_default();
    let gen = match block.kind {
        GeneratorKind::PartialSecular => build_partial_secular_with(&run.device, block.rotation)?,
        GeneratorKind::FullSecular => build_full_secular(&run.device)?,
    };
    let mut csv = Vec::new();
    gen.write_csv(&mut csv)?;
    let summary = format!(
        "generator: {:?} in the {} basis, frequency scale {:.4e}",
        gen.mode(),
        gen.basis(),
        gen.frequency_scale()
    );
    Ok(Outcome::new(csv, summary))
}
