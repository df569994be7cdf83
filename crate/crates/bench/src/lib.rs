// SPDX-License-Identifier: Apache-2.0

//! Reference configurations shared by the benchmarks.

use qthermal_core::model::{DeviceConfig, SystemParams};

/// `omega_b = 0.8`, `gamma = 0.008`, `omega_c = 50`, `Th = 1`, `Tc = 0.85`.
pub fn valve_device(g: f64, tw: f64) -> DeviceConfig {
    DeviceConfig::three_terminal(SystemParams::new(1.0, 0.8, g), [1.0, 0.85, tw], 0.008, 50.0)
        .expect("reference parameters are valid")
}

/// `omega_b = 0.95`, `Th = 1`, `Tc = 0.1`.
pub fn coherence_device(g: f64, tw: f64) -> DeviceConfig {
    DeviceConfig::three_terminal(SystemParams::new(1.0, 0.95, g), [1.0, 0.1, tw], 0.008, 50.0)
        .expect("reference parameters are valid")
}
