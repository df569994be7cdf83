// SPDX-License-Identifier: Apache-2.0

//! Ohmic spectral densities, Bose-Einstein occupations and transition rates.
//!
//! `G(w) = gamma * w * exp(-w / w_c)`, `n(w) = 1 / (exp(w / T) - 1)`,
//! `down = G (n + 1)` (emission into the bath), `up = G n` (absorption).

use crate::error::{Error, Result};
use crate::model::{BathLabel, BathSpec, DeviceConfig, EigenSystem};

/// Below `SMALL_FREQUENCY_THRESHOLD * T` the rates switch to the series form
/// of `G(w) n(w)` around `w = 0`.
pub const SMALL_FREQUENCY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatePair {
    /// Emission into the bath.
    pub down: f64,
    /// Absorption from the bath.
    pub up: f64,
}

impl RatePair {
    pub const ZERO: RatePair = RatePair { down: 0.0, up: 0.0 };

    pub fn scaled(self, factor: f64) -> RatePair {
        RatePair {
            down: factor * self.down,
            up: factor * self.up,
        }
    }

    pub fn max(self) -> f64 {
        self.down.max(self.up)
    }
}

pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "Bose occupation needs omega > 0, got {omega}"
        )));
    }
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "Bose occupation needs T > 0, got {temperature}"
        )));
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

pub fn ohmic_spectral_density(omega: f64, gamma: f64, cutoff: f64) -> f64 {
    gamma * omega * (-omega / cutoff).exp()
}

pub fn transition_rates(omega: f64, bath: &BathSpec) -> Result<RatePair> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!(
            "transition rates need omega >= 0, got {omega}"
        )));
    }
    let t = bath.temperature;
    let g = ohmic_spectral_density(omega, bath.gamma, bath.cutoff);
    let x = omega / t;
    let up = if x <= SMALL_FREQUENCY_THRESHOLD {
        // G n = gamma T exp(-w/w_c) x / (e^x - 1), series to O(x^2)
        bath.gamma * t * (-omega / bath.cutoff).exp() * (1.0 - 0.5 * x + x * x / 12.0)
    } else {
        g / x.exp_m1()
    };
    Ok(RatePair { down: up + g, up })
}

/// Rates weighted by the eigenbasis factors `f1, f2, f3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedRates {
    pub l1: RatePair,
    pub l2: RatePair,
    pub l3: RatePair,
}

pub fn dressed_rates(omega: f64, bath: &BathSpec, eig: &EigenSystem) -> Result<DressedRates> {
    let bare = transition_rates(omega, bath)?;
    Ok(DressedRates {
        l1: bare.scaled(eig.f1),
        l2: bare.scaled(eig.f2),
        l3: bare.scaled(eig.f3),
    })
}

/// Bare rates of every bath at the transition frequencies the device uses.
///
/// For the hot and cold baths `at_lower` is evaluated at `omega_2` and
/// `at_upper` at `omega_3`; the work bath only acts at `Omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceRates {
    pub hot_lower: RatePair,
    pub hot_upper: RatePair,
    pub cold_lower: RatePair,
    pub cold_upper: RatePair,
    pub work: RatePair,
}

impl DeviceRates {
    pub fn new(config: &DeviceConfig, eig: &EigenSystem) -> Result<Self> {
        if eig.capital_omega == 0.0 {
            return Err(Error::DegenerateLevels);
        }
        let h = config.bath(BathLabel::Hot);
        let c = config.bath(BathLabel::Cold);
        Ok(Self {
            hot_lower: transition_rates(eig.omega_2, h)?,
            hot_upper: transition_rates(eig.omega_3, h)?,
            cold_lower: transition_rates(eig.omega_2, c)?,
            cold_upper: transition_rates(eig.omega_3, c)?,
            work: transition_rates(eig.capital_omega, config.bath(BathLabel::Work))?,
        })
    }

    /// `(lower, upper)` rates of a terminal bath.
    pub fn terminal(&self, label: BathLabel) -> (RatePair, RatePair) {
        match label {
            BathLabel::Hot => (self.hot_lower, self.hot_upper),
            BathLabel::Cold => (self.cold_lower, self.cold_upper),
            BathLabel::Work => (self.work, self.work),
        }
    }

    pub fn max_rate(&self) -> f64 {
        [
            self.hot_lower,
            self.hot_upper,
            self.cold_lower,
            self.cold_upper,
            self.work,
        ]
        .iter()
        .map(|r| r.max())
        .fold(0.0, f64::max)
    }
}
