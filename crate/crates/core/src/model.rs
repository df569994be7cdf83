// SPDX-License-Identifier: Apache-2.0

//! Parameter records, validation, and the eigenbasis of the system Hamiltonian
//!
//! `H_S = omega_a |a><a| + omega_b |b><b| + g (|a><b| + |b><a|)`, ground level
//! `|1>` at zero energy. For `g > 0` the excited block is rotated into
//! `|2>` (energy `omega_2`, lower) and `|3>` (energy `omega_3`, upper):
//!
//! ```text
//! |2> = sin(phi/2)|a> - cos(phi/2)|b>
//! |3> = cos(phi/2)|a> + sin(phi/2)|b>        tan(phi) = 2g / (omega_a - omega_b)
//! ```
//!
//! so that `|2> -> -|b>` and `|3> -> |a>` as `g -> 0`. The phase of `|2>` is
//! chosen such that the hot-bath interference terms carry weight `+f1` and the
//! cold-bath ones `-f1`.

use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on Hermiticity and unit trace of a [`DensityMatrix`].
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Smallest eigenvalue accepted as numerically non-negative.
pub const POSITIVITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub omega_a: f64,
    pub omega_b: f64,
    /// Inner coupling between the two excited bare levels.
    pub g: f64,
}

impl SystemParams {
    pub fn new(omega_a: f64, omega_b: f64, g: f64) -> Self {
        Self {
            omega_a,
            omega_b,
            g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        finite("omega_a", self.omega_a)?;
        finite("omega_b", self.omega_b)?;
        finite("g", self.g)?;
        if self.omega_a <= 0.0 {
            return Err(Error::NonPositive {
                name: "omega_a",
                value: self.omega_a,
            });
        }
        if self.omega_b <= 0.0 {
            return Err(Error::NonPositive {
                name: "omega_b",
                value: self.omega_b,
            });
        }
        if self.omega_b > self.omega_a {
            return Err(Error::LevelOrdering {
                omega_a: self.omega_a,
                omega_b: self.omega_b,
            });
        }
        if self.g < 0.0 {
            return Err(Error::Negative {
                name: "g",
                value: self.g,
            });
        }
        Ok(())
    }

    /// `xi = omega_b / omega_a`.
    pub fn xi(&self) -> f64 {
        self.omega_b / self.omega_a
    }

    pub fn is_uncoupled(&self) -> bool {
        self.g == 0.0
    }
}

/// Eigen-decomposition of the excited block of `H_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub omega_2: f64,
    pub omega_3: f64,
    /// `omega_a - omega_b`
    pub delta: f64,
    /// `omega_3 - omega_2 = sqrt(4 g^2 + delta^2)`
    pub capital_omega: f64,
    /// Mixing angle in `[0, pi/2]`.
    pub phi: f64,
    /// `sin(phi/2) cos(phi/2)`
    pub f1: f64,
    /// `cos^2(phi/2)`
    pub f2: f64,
    /// `sin^2(phi/2)`
    pub f3: f64,
}

impl EigenSystem {
    /// Energies of `|1>, |2>, |3>`.
    pub fn energies(&self) -> [f64; 3] {
        [0.0, self.omega_2, self.omega_3]
    }
}

pub fn diagonalize(system: &SystemParams) -> EigenSystem {
    let delta = system.omega_a - system.omega_b;
    let two_g = 2.0 * system.g;
    let capital_omega = two_g.hypot(delta);
    let sum = system.omega_a + system.omega_b;
    // atan2 keeps the degenerate case delta = 0 at phi = pi/2
    let phi = two_g.atan2(delta);
    let (s, c) = (0.5 * phi).sin_cos();
    EigenSystem {
        omega_2: 0.5 * (sum - capital_omega),
        omega_3: 0.5 * (sum + capital_omega),
        delta,
        capital_omega,
        phi,
        f1: s * c,
        f2: c * c,
        f3: s * s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BathLabel {
    #[serde(rename = "h")]
    Hot,
    #[serde(rename = "c")]
    Cold,
    #[serde(rename = "w")]
    Work,
}

impl BathLabel {
    pub const ALL: [BathLabel; 3] = [BathLabel::Hot, BathLabel::Cold, BathLabel::Work];

    pub fn index(self) -> usize {
        match self {
            BathLabel::Hot => 0,
            BathLabel::Cold => 1,
            BathLabel::Work => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BathLabel::Hot => "h",
            BathLabel::Cold => "c",
            BathLabel::Work => "w",
        }
    }
}

impl fmt::Display for BathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BathLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "h" | "hot" => Ok(BathLabel::Hot),
            "c" | "cold" => Ok(BathLabel::Cold),
            "w" | "work" => Ok(BathLabel::Work),
            other => Err(format!("unknown bath label `{other}` (expected h, c or w)")),
        }
    }
}

/// One thermal terminal with an Ohmic, exponentially cut-off spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub label: BathLabel,
    pub temperature: f64,
    /// Dimensionless system-bath coupling.
    pub gamma: f64,
    pub cutoff: f64,
}

impl BathSpec {
    pub fn new(label: BathLabel, temperature: f64, gamma: f64, cutoff: f64) -> Self {
        Self {
            label,
            temperature,
            gamma,
            cutoff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        finite("temperature", self.temperature)?;
        finite("gamma", self.gamma)?;
        finite("cutoff", self.cutoff)?;
        if self.temperature <= 0.0 {
            return Err(Error::NonPositive {
                name: "temperature",
                value: self.temperature,
            });
        }
        if self.gamma < 0.0 {
            return Err(Error::Negative {
                name: "gamma",
                value: self.gamma,
            });
        }
        if self.cutoff <= 0.0 {
            return Err(Error::NonPositive {
                name: "cutoff",
                value: self.cutoff,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeviceConfig {
    system: SystemParams,
    baths: Vec<BathSpec>,
}

/// System parameters plus exactly one bath per label. Always validated.
///
/// The usual ordering `Tc < Th < Tw` is not enforced; sweeps cross it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDeviceConfig")]
pub struct DeviceConfig {
    system: SystemParams,
    /// Stored in `BathLabel::index` order.
    baths: [BathSpec; 3],
}

impl TryFrom<RawDeviceConfig> for DeviceConfig {
    type Error = Error;

    fn try_from(raw: RawDeviceConfig) -> Result<Self> {
        DeviceConfig::new(raw.system, &raw.baths)
    }
}

impl DeviceConfig {
    /// Validates and returns the configuration; reports the first violated
    /// invariant.
    pub fn new(system: SystemParams, baths: &[BathSpec]) -> Result<Self> {
        system.validate()?;
        let mut slots: [Option<BathSpec>; 3] = [None; 3];
        for bath in baths {
            let slot = &mut slots[bath.label.index()];
            if slot.is_some() {
                return Err(Error::DuplicateBath(bath.label));
            }
            *slot = Some(*bath);
        }
        for label in BathLabel::ALL {
            if slots[label.index()].is_none() {
                return Err(Error::MissingBath(label));
            }
        }
        let baths = slots.map(|b| b.expect("checked above"));
        for bath in &baths {
            bath.validate()?;
        }
        Ok(Self { system, baths })
    }

    /// Three baths sharing coupling and cutoff; temperatures in `[h, c, w]` order.
    pub fn three_terminal(
        system: SystemParams,
        temperatures: [f64; 3],
        gamma: f64,
        cutoff: f64,
    ) -> Result<Self> {
        let baths =
            BathLabel::ALL.map(|l| BathSpec::new(l, temperatures[l.index()], gamma, cutoff));
        Self::new(system, &baths)
    }

    /// Re-checks every invariant.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.system, &self.baths).map(|_| ())
    }

    pub fn system(&self) -> &SystemParams {
        &self.system
    }

    pub fn bath(&self, label: BathLabel) -> &BathSpec {
        &self.baths[label.index()]
    }

    pub fn baths(&self) -> &[BathSpec; 3] {
        &self.baths
    }

    pub fn temperature(&self, label: BathLabel) -> f64 {
        self.bath(label).temperature
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        let mut system = self.system;
        system.g = g;
        Self::new(system, &self.baths)
    }

    pub fn with_temperature(&self, label: BathLabel, temperature: f64) -> Result<Self> {
        let mut baths = self.baths;
        baths[label.index()].temperature = temperature;
        Self::new(self.system, &baths)
    }

    pub fn with_gamma(&self, label: BathLabel, gamma: f64) -> Result<Self> {
        let mut baths = self.baths;
        baths[label.index()].gamma = gamma;
        Self::new(self.system, &baths)
    }

    /// Expresses every frequency and temperature in units of `omega_a`.
    pub fn normalized(&self) -> Self {
        let scale = self.system.omega_a;
        let system = SystemParams::new(1.0, self.system.omega_b / scale, self.system.g / scale);
        let baths = self.baths.map(|b| BathSpec {
            temperature: b.temperature / scale,
            cutoff: b.cutoff / scale,
            ..b
        });
        Self { system, baths }
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name, value })
    }
}

/// Representation a density matrix (or a generator) is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// `{|1>, |2>, |3>}` eigenbasis of `H_S`.
    Eigen,
    /// `{|1>, |b>, |a>}` bare basis; only used for `g = 0`.
    Bare,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Eigen => f.write_str("eigen {1,2,3}"),
            Basis::Bare => f.write_str("bare {1,b,a}"),
        }
    }
}

/// 3x3 Hermitian, unit-trace, positive state tagged with its basis.
///
/// Entries are stored as an unevaluated sum `hi + lo`; `lo` is zero except for
/// steady states refined beyond working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: Basis,
    hi: Matrix3<Complex64>,
    lo: Matrix3<Complex64>,
}

impl DensityMatrix {
    pub fn new(basis: Basis, matrix: Matrix3<Complex64>) -> Result<Self> {
        let state = Self::from_parts_unchecked(basis, matrix, Matrix3::zeros());
        state.check(STATE_TOLERANCE)?;
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(
        basis: Basis,
        hi: Matrix3<Complex64>,
        lo: Matrix3<Complex64>,
    ) -> Self {
        Self { basis, hi, lo }
    }

    /// `|k><k|` for `k` in `0..3`.
    pub fn pure_level(basis: Basis, k: usize) -> Self {
        assert!(k < 3, "level index out of range");
        let mut m = Matrix3::zeros();
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Self::from_parts_unchecked(basis, m, Matrix3::zeros())
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        let m = Matrix3::from_diagonal_element(Complex64::new(1.0 / 3.0, 0.0));
        Self::from_parts_unchecked(basis, m, Matrix3::zeros())
    }

    /// Diagonal state from populations.
    pub fn diagonal(basis: Basis, populations: [f64; 3]) -> Result<Self> {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::from(
            populations.map(|p| Complex64::new(p, 0.0)),
        ));
        Self::new(basis, m)
    }

    pub(crate) fn check(&self, trace_tolerance: f64) -> Result<()> {
        let m = self.matrix();
        let herm = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > STATE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > trace_tolerance {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// The state rounded to working precision.
    pub fn matrix(&self) -> Matrix3<Complex64> {
        self.hi + self.lo
    }

    pub fn matrix_parts(&self) -> (&Matrix3<Complex64>, &Matrix3<Complex64>) {
        (&self.hi, &self.lo)
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.hi[(i, j)] + self.lo[(i, j)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.entry(i, i).re
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.population(i)).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.matrix();
        let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().min()
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> f64 {
        let m = self.matrix();
        let mut max = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    max = max.max(m[(i, j)].norm());
                }
            }
        }
        max
    }

    /// Reinterprets the state in the other basis without transforming it.
    ///
    /// Valid only at `g = 0`, where `|2> = -|b>` and `|3> = |a>`; the sign of
    /// `|2>` only flips coherences, which are zero in both steady states.
    pub fn relabeled(&self, basis: Basis) -> Self {
        Self {
            basis,
            ..self.clone()
        }
    }

    pub fn ensure_basis(&self, expected: Basis) -> Result<()> {
        if self.basis == expected {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                expected,
                found: self.basis,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig4_config() -> DeviceConfig {
        DeviceConfig::three_terminal(
            SystemParams::new(1.0, 0.8, 0.02),
            [1.0, 0.85, 3.0],
            0.008,
            50.0,
        )
        .unwrap()
    }

    #[test]
    fn accepts_fig4_parameters() {
        let c = fig4_config();
        assert_eq!(c.temperature(BathLabel::Cold), 0.85);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_level_ordering() {
        let err =
            DeviceConfig::three_terminal(SystemParams::new(1.0, 1.1, 0.0), [1.0; 3], 0.008, 50.0)
                .unwrap_err();
        assert!(matches!(err, Error::LevelOrdering { .. }));
        assert!(err.to_string().contains("level ordering violated"));
    }

    #[test]
    fn rejects_duplicate_and_missing_labels() {
        let sys = SystemParams::new(1.0, 0.8, 0.0);
        let h = BathSpec::new(BathLabel::Hot, 1.0, 0.008, 50.0);
        let c = BathSpec::new(BathLabel::Cold, 0.5, 0.008, 50.0);
        let err = DeviceConfig::new(sys, &[h, h, c]).unwrap_err();
        assert_eq!(err, Error::DuplicateBath(BathLabel::Hot));
        assert!(err.to_string().contains("duplicate bath label"));
        let err = DeviceConfig::new(sys, &[h, c]).unwrap_err();
        assert_eq!(err, Error::MissingBath(BathLabel::Work));
    }

    #[test]
    fn rejects_bad_bath_values() {
        let c = fig4_config();
        assert!(matches!(
            c.with_temperature(BathLabel::Work, 0.0),
            Err(Error::NonPositive {
                name: "temperature",
                ..
            })
        ));
        assert!(matches!(
            c.with_gamma(BathLabel::Hot, -1e-3),
            Err(Error::Negative { name: "gamma", .. })
        ));
        assert!(matches!(
            c.with_g(-0.1),
            Err(Error::Negative { name: "g", .. })
        ));
        assert!(c.with_temperature(BathLabel::Hot, f64::NAN).is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let json = r#"{"system":{"omega_a":1.0,"omega_b":0.8,"g":0.02},
            "baths":[{"label":"h","temperature":1.0,"gamma":0.008,"cutoff":50.0},
                     {"label":"c","temperature":0.85,"gamma":0.008,"cutoff":50.0},
                     {"label":"w","temperature":3.0,"gamma":0.008,"cutoff":50.0}]}"#;
        let c: DeviceConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c, fig4_config());
        let back: DeviceConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let bad = json.replace("\"g\":0.02", "\"g\":0.02,\"extra\":1");
        assert!(serde_json::from_str::<DeviceConfig>(&bad).is_err());
        let invalid = json.replace("\"omega_b\":0.8", "\"omega_b\":1.5");
        assert!(serde_json::from_str::<DeviceConfig>(&invalid).is_err());
    }

    #[test]
    fn normalization_scales_frequencies() {
        let c = DeviceConfig::three_terminal(
            SystemParams::new(2.0, 1.6, 0.04),
            [2.0, 1.7, 6.0],
            0.008,
            100.0,
        )
        .unwrap()
        .normalized();
        assert_eq!(*c.system(), SystemParams::new(1.0, 0.8, 0.02));
        assert_eq!(c.temperature(BathLabel::Cold), 0.85);
        assert_eq!(c.bath(BathLabel::Hot).cutoff, 50.0);
        assert_eq!(c.bath(BathLabel::Hot).gamma, 0.008);
    }

    #[test]
    fn diagonalize_uncoupled_limit() {
        let e = diagonalize(&SystemParams::new(1.0, 0.8, 0.0));
        assert_eq!(e.omega_2, 0.8);
        assert_eq!(e.omega_3, 1.0);
        assert_eq!(e.phi, 0.0);
        assert_eq!(e.f1, 0.0);
        assert_eq!(e.f2, 1.0);
        assert_eq!(e.f3, 0.0);
    }

    #[test]
    fn diagonalize_degenerate_case() {
        let e = diagonalize(&SystemParams::new(1.0, 1.0, 0.1));
        assert_relative_eq!(e.omega_2, 0.9, epsilon = 1e-15);
        assert_relative_eq!(e.omega_3, 1.1, epsilon = 1e-15);
        assert_relative_eq!(e.phi, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(e.f1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.f2, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.f3, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn diagonalize_fig4_splitting() {
        let e = diagonalize(&SystemParams::new(1.0, 0.8, 0.02));
        assert_relative_eq!(e.capital_omega, 0.0416_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(e.capital_omega, 0.203961, epsilon = 1e-6);
    }

    #[test]
    fn eigenvectors_diagonalize_the_hamiltonian() {
        // basis order (a, b); rows of the rotation are <2| and <3|
        let sys = SystemParams::new(1.0, 0.7, 0.13);
        let e = diagonalize(&sys);
        let (s, c) = (0.5 * e.phi).sin_cos();
        let h = nalgebra::Matrix2::new(sys.omega_a, sys.g, sys.g, sys.omega_b);
        let v2 = nalgebra::Vector2::new(s, -c);
        let v3 = nalgebra::Vector2::new(c, s);
        assert!((h * v2 - v2 * e.omega_2).norm() < 1e-14);
        assert!((h * v3 - v3 * e.omega_3).norm() < 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::diagonal(Basis::Eigen, [0.5, 0.3, 0.2]).is_ok());
        assert!(DensityMatrix::diagonal(Basis::Eigen, [0.5, 0.3, 0.3]).is_err());
        assert!(DensityMatrix::diagonal(Basis::Eigen, [1.1, 0.0, -0.1]).is_err());
        let mut m = Matrix3::from_diagonal_element(Complex64::new(1.0 / 3.0, 0.0));
        m[(1, 2)] = Complex64::new(0.1, 0.1);
        assert!(DensityMatrix::new(Basis::Eigen, m).is_err());
        m[(2, 1)] = Complex64::new(0.1, -0.1);
        assert!(DensityMatrix::new(Basis::Eigen, m).is_ok());
        let mm = DensityMatrix::maximally_mixed(Basis::Bare);
        assert_relative_eq!(mm.min_eigenvalue(), 1.0 / 3.0, epsilon = 1e-15);
        assert!(mm.ensure_basis(Basis::Eigen).is_err());
    }

    proptest! {
        #[test]
        fn eigen_invariants(wb in 0.05f64..1.0, g in 0.0f64..0.5) {
            let sys = SystemParams::new(1.0, wb, g);
            let e = diagonalize(&sys);
            prop_assert!(e.omega_3 >= e.omega_2);
            prop_assert!((e.omega_2 + e.omega_3 - (sys.omega_a + sys.omega_b)).abs() <= 1e-12);
            prop_assert!((e.f2 + e.f3 - 1.0).abs() <= 1e-15);
            prop_assert!((e.f1 * e.f1 - e.f2 * e.f3).abs() <= 1e-15);
            prop_assert!((e.f1 - (e.f2 * e.f3).sqrt()).abs() <= 1e-12);
            let om2 = 4.0 * g * g + e.delta * e.delta;
            prop_assert!((e.capital_omega.powi(2) - om2).abs() <= 1e-12 * om2.max(f64::MIN_POSITIVE));
            prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&e.phi));
        }

        #[test]
        fn diagonalize_is_continuous_at_zero_coupling(wb in 0.1f64..0.95, k in 4i32..12) {
            let eps = 10f64.powi(-k);
            let a = diagonalize(&SystemParams::new(1.0, wb, eps));
            let b = diagonalize(&SystemParams::new(1.0, wb, 0.0));
            let d = [a.omega_2 - b.omega_2, a.omega_3 - b.omega_3, a.phi - b.phi, a.f1 - b.f1, a.f2 - b.f2, a.f3 - b.f3]
                .iter().fold(0.0f64, |m, x| m.max(x.abs()));
            // phi ~ 2 eps / delta
            prop_assert!(d <= 10.0 * eps / (1.0 - wb));
        }
    }
}
