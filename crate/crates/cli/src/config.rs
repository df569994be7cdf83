// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration. Unknown keys are rejected at every level.

use std::path::Path;

use qthermal_core::analysis::{FD_STEP, ROOT_TOLERANCE};
use qthermal_core::prelude::*;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub sweep: Option<SweepBlock>,
    pub valve: Option<RootBlock>,
    pub refrigerator: Option<RootBlock>,
    pub amplifier: Option<AmplifierBlock>,
    pub thermometer: Option<ThermometerSettings>,
    pub dynamics: Option<DynamicsBlock>,
    pub phase_map: Option<PhaseMapBlock>,
    pub generator: Option<GeneratorBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub grid: SweepGrid,
    /// Second grid for a Cartesian sweep; varies fastest.
    pub inner: Option<SweepGrid>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootBlock {
    /// Work-bath temperature interval `[lo, hi]`.
    pub bracket: [f64; 2],
    #[serde(default = "root_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierBlock {
    pub grid: SweepGrid,
    #[serde(default = "fd_step")]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMapBlock {
    pub tw: SweepGrid,
    pub g: SweepGrid,
    #[serde(default = "fd_step")]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Eigenbasis level, 1 to 3.
    Level(usize),
    Populations([f64; 3]),
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsBlock {
    pub initial: InitialState,
    /// End time; defaults to `relaxation_times` relaxation times.
    pub t_final: Option<f64>,
    pub relaxation_times: f64,
    /// Defaults to `0.01 / frequency scale`.
    pub dt: Option<f64>,
    pub stride: usize,
    pub rotation: CoherentRotation,
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        Self {
            initial: InitialState::Level(2),
            t_final: None,
            relaxation_times: 10.0,
            dt: None,
            stride: 1,
            rotation: CoherentRotation::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    #[default]
    PartialSecular,
    FullSecular,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorBlock {
    pub kind: GeneratorKind,
    pub rotation: CoherentRotation,
}

fn root_tolerance() -> f64 {
    ROOT_TOLERANCE
}

fn fd_step() -> f64 {
    FD_STEP
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }
}
