// SPDX-License-Identifier: Apache-2.0

//! Steady-state heat currents and the figures of merit derived from them.
//!
//! Sign convention: `J_mu > 0` when heat flows from bath `mu` into the system.

use crate::compensated::{Dot2, DoubleDouble};
use crate::error::{Error, Result};
use crate::generator::{
    build_partial_secular_with, terminal_weights, vec_index, CoherentRotation, Generator,
};
use crate::model::{diagonalize, Basis, BathLabel, DensityMatrix, DeviceConfig, SystemParams};
use crate::output::{format_float, format_optional};
use crate::rates::DeviceRates;
use crate::solver::steady_state;

/// Floor of [`CurrentReport::scale`].
pub const SCALE_FLOOR: f64 = 1e-300;
/// `|J_w|` below this fraction of the current scale leaves the COP undefined.
pub const COP_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Temperatures {
    pub hot: f64,
    pub cold: f64,
    pub work: f64,
}

impl Temperatures {
    pub fn of(config: &DeviceConfig) -> Self {
        Self {
            hot: config.temperature(BathLabel::Hot),
            cold: config.temperature(BathLabel::Cold),
            work: config.temperature(BathLabel::Work),
        }
    }

    pub fn get(&self, label: BathLabel) -> f64 {
        match label {
            BathLabel::Hot => self.hot,
            BathLabel::Cold => self.cold,
            BathLabel::Work => self.work,
        }
    }

    /// `(beta_h - beta_w) / (beta_c - beta_h)`, `None` when `Tc = Th`.
    pub fn carnot_cop(&self) -> Option<f64> {
        let (bh, bc, bw) = (1.0 / self.hot, 1.0 / self.cold, 1.0 / self.work);
        let den = bc - bh;
        (den != 0.0).then(|| (bh - bw) / den)
    }
}

/// Steady-state currents of one device configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentReport {
    pub tw: f64,
    pub g: f64,
    pub j_h: f64,
    pub j_c: f64,
    pub j_w: f64,
    /// Part of `j_c` exchanged on the `1<->2` transition.
    pub j_c12: f64,
    /// Part of `j_c` exchanged on the `1<->3` transition.
    pub j_c13: f64,
    /// `|rho23|`
    pub coherence_abs: f64,
    pub cop: Option<f64>,
    pub carnot_cop: Option<f64>,
    pub entropy_rate: f64,
}

impl CurrentReport {
    pub const CSV_HEADER: [&'static str; 11] = [
        "Tw",
        "g",
        "j_h",
        "j_c",
        "j_w",
        "j_c12",
        "j_c13",
        "coherence_abs",
        "cop",
        "carnot_cop",
        "entropy_rate",
    ];

    fn assemble(
        config: &DeviceConfig,
        currents: [f64; 3],
        cold_parts: (f64, f64),
        coherence_abs: f64,
    ) -> Self {
        let temps = Temperatures::of(config);
        let [j_h, j_c, j_w] = currents;
        let mut report = Self {
            tw: temps.work,
            g: config.system().g,
            j_h,
            j_c,
            j_w,
            j_c12: cold_parts.0,
            j_c13: cold_parts.1,
            coherence_abs,
            cop: None,
            carnot_cop: temps.carnot_cop(),
            entropy_rate: 0.0,
        };
        report.entropy_rate = entropy_production(&report, &temps);
        if j_w.abs() > COP_FLOOR * report.scale() {
            report.cop = Some(j_c / j_w);
        }
        report
    }

    pub fn current(&self, label: BathLabel) -> f64 {
        match label {
            BathLabel::Hot => self.j_h,
            BathLabel::Cold => self.j_c,
            BathLabel::Work => self.j_w,
        }
    }

    /// Largest current magnitude, floored at [`SCALE_FLOOR`].
    pub fn scale(&self) -> f64 {
        self.j_h
            .abs()
            .max(self.j_c.abs())
            .max(self.j_w.abs())
            .max(SCALE_FLOOR)
    }

    /// `J_h + J_c + J_w`, summed without cancellation loss.
    pub fn first_law_residual(&self) -> f64 {
        crate::compensated::sum2(&[self.j_h, self.j_c, self.j_w])
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            format_float(self.tw),
            format_float(self.g),
            format_float(self.j_h),
            format_float(self.j_c),
            format_float(self.j_w),
            format_float(self.j_c12),
            format_float(self.j_c13),
            format_float(self.coherence_abs),
            format_optional(self.cop),
            format_optional(self.carnot_cop),
            format_float(self.entropy_rate),
        ]
    }
}

/// `(D_mu rho)_ii` for the three levels, in doubled precision.
fn level_flows(
    gen: &Generator,
    rho: &DensityMatrix,
    label: BathLabel,
) -> Result<[DoubleDouble; 3]> {
    rho.ensure_basis(gen.basis())?;
    let block = gen.dissipator(label);
    let (hi, lo) = rho.matrix_parts();
    Ok([0, 1, 2].map(|i| {
        let row = vec_index(i, i);
        let mut acc = Dot2::new();
        for c in 0..9 {
            let a = block[(row, c)];
            let (x_hi, x_lo) = (hi[(c % 3, c / 3)], lo[(c % 3, c / 3)]);
            acc.add_product(a.re, x_hi.re);
            acc.add_product(a.re, x_lo.re);
            acc.add_product(-a.im, x_hi.im);
            acc.add_product(-a.im, x_lo.im);
        }
        acc.finish()
    }))
}

fn energy_weighted(energies: [f64; 3], flows: &[DoubleDouble; 3]) -> f64 {
    let mut acc = Dot2::new();
    for (e, f) in energies.iter().zip(flows) {
        acc.add_product_dd(*e, *f);
    }
    acc.value()
}

/// `Tr[H_S D_mu(rho)]` with `H_S` in the generator's basis.
pub fn heat_current_trace(gen: &Generator, rho: &DensityMatrix, label: BathLabel) -> Result<f64> {
    let flows = level_flows(gen, rho, label)?;
    Ok(energy_weighted(gen.energies(), &flows))
}

/// Currents of `rho` under `gen` from the trace formula; `j_c` is split
/// into its two level-pair contributions.
pub fn report_for_state(gen: &Generator, rho: &DensityMatrix) -> Result<CurrentReport> {
    let e = gen.energies();
    let mut currents = [0.0; 3];
    let mut cold_parts = (0.0, 0.0);
    for label in BathLabel::ALL {
        let flows = level_flows(gen, rho, label)?;
        currents[label.index()] = energy_weighted(e, &flows);
        if label == BathLabel::Cold {
            cold_parts = (e[1] * flows[1].value(), e[2] * flows[2].value());
        }
    }
    Ok(CurrentReport::assemble(
        gen.config(),
        currents,
        cold_parts,
        rho.entry(1, 2).norm(),
    ))
}

/// Interference-term coefficients inside `2 omega_l [ ... ]` for the hot and
/// cold baths.
#[derive(Debug, Clone, Copy)]
struct CrossCoefficients {
    hot: f64,
    cold: f64,
}

/// Coefficients implied by the generator: the trace formula reduces to them.
const GENERATOR_CROSS: CrossCoefficients = CrossCoefficients {
    hot: -0.5,
    cold: 0.5,
};
/// Coefficients as printed alongside the closed-form currents.
const PRINTED_CROSS: CrossCoefficients = CrossCoefficients {
    hot: -2.0,
    cold: 1.0,
};

fn closed_form_with(
    config: &DeviceConfig,
    rho: &DensityMatrix,
    cross: CrossCoefficients,
) -> Result<CurrentReport> {
    rho.ensure_basis(Basis::Eigen)?;
    let eig = diagonalize(config.system());
    let rates = DeviceRates::new(config, &eig)?;
    let [p1, p2, p3] = populations(rho);
    let (hi, lo) = rho.matrix_parts();
    let coherence_sum = DoubleDouble::new(2.0 * hi[(1, 2)].re, 2.0 * lo[(1, 2)].re);

    let terminal = |label: BathLabel, coefficient: f64| -> (f64, f64) {
        let (lower, upper) = rates.terminal(label);
        let (w_lower, w_upper, _) = terminal_weights(label, &eig);
        let f1 = eig.f1;
        let j12 = 2.0
            * eig.omega_2
            * balance(&[
                (w_lower * lower.up, p1),
                (-w_lower * lower.down, p2),
                (coefficient * f1 * upper.down, coherence_sum),
            ]);
        let j13 = 2.0
            * eig.omega_3
            * balance(&[
                (w_upper * upper.up, p1),
                (-w_upper * upper.down, p3),
                (coefficient * f1 * lower.down, coherence_sum),
            ]);
        (j12, j13)
    };
    let (h12, h13) = terminal(BathLabel::Hot, cross.hot);
    let (c12, c13) = terminal(BathLabel::Cold, cross.cold);
    let j_w = 2.0 * eig.capital_omega * balance(&[(rates.work.up, p2), (-rates.work.down, p3)]);
    Ok(CurrentReport::assemble(
        config,
        [h12 + h13, c12 + c13, j_w],
        (c12, c13),
        rho.entry(1, 2).norm(),
    ))
}

/// Closed-form currents of an eigenbasis steady state.
///
/// The interference terms enter with `+1/2 Gamma^+_{c1}` (cold) and
/// `-1/2 Gamma^+_{h1}` (hot) inside `2 omega_l [...]`, which is what the
/// generator's population equations imply; see [`printed_form_currents`].
pub fn closed_form_currents(config: &DeviceConfig, rho: &DensityMatrix) -> Result<CurrentReport> {
    closed_form_with(config, rho, GENERATOR_CROSS)
}

/// Closed-form currents with the interference coefficients `+1` (cold) and
/// `-2` (hot) taken verbatim. They do not conserve energy at `g > 0`.
pub fn printed_form_currents(config: &DeviceConfig, rho: &DensityMatrix) -> Result<CurrentReport> {
    closed_form_with(config, rho, PRINTED_CROSS)
}

/// Populations at the stored (possibly refined) precision.
fn populations(rho: &DensityMatrix) -> [DoubleDouble; 3] {
    let (hi, lo) = rho.matrix_parts();
    [0, 1, 2].map(|i| DoubleDouble::new(hi[(i, i)].re, lo[(i, i)].re))
}

/// `sum_k rate_k * x_k` without cancellation loss.
fn balance(terms: &[(f64, DoubleDouble)]) -> f64 {
    let mut acc = Dot2::new();
    for (rate, x) in terms {
        acc.add_product_dd(*rate, *x);
    }
    acc.value()
}

fn require_diagonal(rho: &DensityMatrix) -> Result<()> {
    let coherence = rho.max_coherence();
    if coherence > 1e-10 {
        Err(Error::NotDiagonal(coherence))
    } else {
        Ok(())
    }
}

/// Currents of a diagonal `g = 0` state with populations `(rho11, rhobb, rhoaa)`.
pub fn uncoupled_currents(config: &DeviceConfig, rho: &DensityMatrix) -> Result<CurrentReport> {
    let system = config.system();
    if system.g != 0.0 {
        return Err(Error::RequiresUncoupled(system.g));
    }
    require_diagonal(rho)?;
    let rates = DeviceRates::new(config, &diagonalize(system))?;
    let [p1, pb, pa] = populations(rho);
    let (wa, wb) = (system.omega_a, system.omega_b);
    let (h, c, w) = (rates.hot_upper, rates.cold_lower, rates.work);
    let j_c = 2.0 * wb * balance(&[(c.up, p1), (-c.down, pb)]);
    let j_h = 2.0 * wa * balance(&[(h.up, p1), (-h.down, pa)]);
    let j_w = 2.0 * (wa - wb) * balance(&[(w.up, pb), (-w.down, pa)]);
    Ok(CurrentReport::assemble(
        config,
        [j_h, j_c, j_w],
        (j_c, 0.0),
        0.0,
    ))
}

/// Level-pair temperatures from Boltzmann ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTemperatures {
    /// `omega_a / ln(rho11 / rhoaa)`
    pub upper: f64,
    /// `omega_b / ln(rho11 / rhobb)`
    pub lower: f64,
}

pub fn effective_temperatures(
    rho: &DensityMatrix,
    system: &SystemParams,
) -> Result<EffectiveTemperatures> {
    if system.g != 0.0 {
        return Err(Error::RequiresUncoupled(system.g));
    }
    require_diagonal(rho)?;
    let (p1, pb, pa) = (rho.population(0), rho.population(1), rho.population(2));
    let temperature = |omega: f64, p: f64, level: &'static str| {
        if p >= p1 {
            Err(Error::NegativeEffectiveTemperature(level))
        } else {
            Ok(omega / (p1 / p).ln())
        }
    };
    Ok(EffectiveTemperatures {
        upper: temperature(system.omega_a, pa, "a")?,
        lower: temperature(system.omega_b, pb, "b")?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopBounds {
    /// `J_c / J_w`
    pub cop: f64,
    pub carnot: f64,
    /// `carnot - cop`
    pub margin: f64,
}

pub fn cop_and_bounds(report: &CurrentReport, temperatures: &Temperatures) -> Result<CopBounds> {
    if report.j_w.abs() <= COP_FLOOR * report.scale() {
        return Err(Error::UndefinedCop(report.j_w));
    }
    let carnot = temperatures
        .carnot_cop()
        .ok_or_else(|| Error::Domain("Carnot COP undefined for Tc = Th".into()))?;
    let cop = report.j_c / report.j_w;
    Ok(CopBounds {
        cop,
        carnot,
        margin: carnot - cop,
    })
}

/// `sum_mu J_mu / T_mu`; non-positive at any steady state.
pub fn entropy_production(report: &CurrentReport, temperatures: &Temperatures) -> f64 {
    let mut acc = Dot2::new();
    for label in BathLabel::ALL {
        acc.add(report.current(label) / temperatures.get(label));
    }
    acc.value()
}

/// Generator, steady state and currents of one configuration.
#[derive(Debug, Clone)]
pub struct SteadyEvaluation {
    pub generator: Generator,
    pub state: DensityMatrix,
    pub report: CurrentReport,
}

/// Steady state of the partial-secular generator and its currents.
pub fn evaluate(config: &DeviceConfig) -> Result<SteadyEvaluation> {
    evaluate_with(config, CoherentRotation::default())
}

pub fn evaluate_with(
    config: &DeviceConfig,
    rotation: CoherentRotation,
) -> Result<SteadyEvaluation> {
    evaluate_generator(build_partial_secular_with(config, rotation)?)
}

pub fn evaluate_generator(generator: Generator) -> Result<SteadyEvaluation> {
    let state = steady_state(&generator)?;
    let report = report_for_state(&generator, &state)?;
    Ok(SteadyEvaluation {
        generator,
        state,
        report,
    })
}
