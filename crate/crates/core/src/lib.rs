// SPDX-License-Identifier: Apache-2.0

//! Simulator for a three-level quantum system coupled to three thermal baths
//! (hot `h`, cold `c`, work `w`).
//!
//! The crate builds the time-independent generator of the reduced dynamics
//! (partial-secular Redfield for any inner coupling `g`, full-secular Lindblad
//! for `g = 0`), extracts steady states, evaluates the steady-state heat
//! currents, and implements the device-level analyses built on top of them:
//! thermal valve working points, refrigerator windows and coefficient of
//! performance, the amplification factor, phase maps, and the equilibrium
//! thermometer for the cold terminal.
//!
//! Units: `hbar = k_B = 1`; every frequency and temperature is expressed in
//! units of the upper bare level `omega_a` once a configuration has been
//! [normalized](model::DeviceConfig::normalized).
//!
//! ```
//! use qthermal_core::prelude::*;
//!
//! let config = DeviceConfig::three_terminal(
//!     SystemParams::new(1.0, 0.8, 0.02),
//!     [1.0, 0.85, 3.0],
//!     0.008,
//!     50.0,
//! )
//! .unwrap();
//! let state = evaluate(&config).unwrap();
//! let r = &state.report;
//! assert!((r.j_h + r.j_c + r.j_w).abs() <= 1e-12 * r.scale());
//! ```

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod compensated;
pub mod error;
pub mod generator;
pub mod model;
pub mod observables;
pub mod output;
pub mod rates;
pub mod solver;

pub use error::{Error, Result};

/// Re-exports of the types most callers need.
pub mod prelude {
    pub use crate::analysis::{
        amplification_factor, critical_tc, equilibrium_tw, find_current_zero,
        find_current_zero_with, measure_temperature, phase_map, sensitivity, sweep, sweep_nested,
        tc_from_tw, AmplifierClass, PhaseMapRow, PhasePoint, SweepGrid, SweepRow, SweepVariable,
        ThermalFunction, ThermometerReading, ThermometerSettings,
    };
    pub use crate::error::{Error, Result};
    pub use crate::generator::{
        build_full_secular, build_partial_secular, build_partial_secular_with, CoherentRotation,
        Generator, SecularMode,
    };
    pub use crate::model::{
        diagonalize, Basis, BathLabel, BathSpec, DensityMatrix, DeviceConfig, EigenSystem,
        SystemParams,
    };
    pub use crate::observables::{
        closed_form_currents, cop_and_bounds, effective_temperatures, entropy_production, evaluate,
        evaluate_generator, evaluate_with, heat_current_trace, printed_form_currents,
        report_for_state, uncoupled_currents, CopBounds, CurrentReport, EffectiveTemperatures,
        SteadyEvaluation, Temperatures,
    };
    pub use crate::rates::{
        bose_occupation, dressed_rates, ohmic_spectral_density, transition_rates, DeviceRates,
        DressedRates, RatePair,
    };
    pub use crate::solver::{
        analytic_diagonal_steady_state, default_time_step, detailed_balance_residual, evolve,
        evolve_sampled, relaxation_time, steady_state, Trajectory, TrajectorySample,
    };
}
