// SPDX-License-Identifier: Apache-2.0

//! Liouvillian superoperators acting on the column-stacked density matrix.
//!
//! `vec(rho)[i + 3 j] = rho[(i, j)]`. Two constructions are provided:
//!
//! * [`build_partial_secular`]: Redfield generator in the eigenbasis
//!   `{|1>,|2>,|3>}` with the slow interference terms between the `1<->2` and
//!   `1<->3` channels retained. It is assembled coefficient by coefficient
//!   from the dynamical equations for `rho11, rho22, rho33, rho23, rho32`,
//!   plus pure decay (and free rotation) for `rho12, rho13, rho21, rho31`.
//! * [`build_full_secular`]: Lindblad generator in the bare basis
//!   `{|1>,|b>,|a>}`, valid only for `g = 0`, built from jump operators.
//!
//! Dissipators use `L_X(rho) = 2 X rho X^+ - X^+ X rho - rho X^+ X`, i.e. the
//! population transfer rate for a rate `Gamma` is `2 Gamma`.

use std::io::Write;

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{diagonalize, Basis, BathLabel, DensityMatrix, DeviceConfig, EigenSystem};
use crate::output::format_float;
use crate::rates::{DeviceRates, RatePair};

pub type Superop = SMatrix<Complex64, 9, 9>;
pub type StateVector = SVector<Complex64, 9>;

/// Column-stacking index of `rho[(i, j)]`.
#[inline]
pub const fn vec_index(i: usize, j: usize) -> usize {
    i + 3 * j
}

pub fn vectorize(m: &Matrix3<Complex64>) -> StateVector {
    StateVector::from_fn(|k, _| m[(k % 3, k / 3)])
}

pub fn unvectorize(v: &StateVector) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| v[vec_index(i, j)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecularMode {
    PartialSecular,
    FullSecular,
}

/// Free rotation frequency of the `rho23` coherence in the partial-secular
/// generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherentRotation {
    /// `d rho23/dt = +2 i Omega rho23 + ...`, the coefficient listed in the
    /// element-wise dynamical equations. Default. Not positivity preserving
    /// for states that also carry `rho12` or `rho13` coherences.
    #[default]
    Doubled,
    /// `d rho23/dt = +i Omega rho23 + ...`, i.e. exactly `-i [H_S, rho]`.
    Commutator,
}

/// Time-independent generator `L = L_0 + L_h + L_c + L_w`.
#[derive(Debug, Clone)]
pub struct Generator {
    mode: SecularMode,
    rotation: CoherentRotation,
    basis: Basis,
    config: DeviceConfig,
    eig: EigenSystem,
    rates: DeviceRates,
    energies: [f64; 3],
    unitary: Superop,
    dissipators: [Superop; 3],
    total: Superop,
}

impl Generator {
    pub fn mode(&self) -> SecularMode {
        self.mode
    }

    pub fn rotation(&self) -> CoherentRotation {
        self.rotation
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.config
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn rates(&self) -> &DeviceRates {
        &self.rates
    }

    /// Diagonal of `H_S` in the generator's basis.
    pub fn energies(&self) -> [f64; 3] {
        self.energies
    }

    pub fn hamiltonian(&self) -> Matrix3<Complex64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::from(
            self.energies.map(|e| Complex64::new(e, 0.0)),
        ))
    }

    pub fn matrix(&self) -> &Superop {
        &self.total
    }

    pub fn unitary(&self) -> &Superop {
        &self.unitary
    }

    pub fn dissipator(&self, label: BathLabel) -> &Superop {
        &self.dissipators[label.index()]
    }

    /// Every block that sums to the full generator, unitary first.
    pub fn blocks(&self) -> [&Superop; 4] {
        [
            &self.unitary,
            &self.dissipators[0],
            &self.dissipators[1],
            &self.dissipators[2],
        ]
    }

    /// Largest rate or frequency that sets the fastest dynamics: all bath
    /// rates, `Omega` and the transition frequencies of the ground-state
    /// coherences.
    pub fn frequency_scale(&self) -> f64 {
        self.rates
            .max_rate()
            .max(self.eig.capital_omega)
            .max(self.energies[1].abs())
            .max(self.energies[2].abs())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<Matrix3<Complex64>> {
        self.apply_block(&self.total, rho)
    }

    pub fn unitary_apply(&self, rho: &DensityMatrix) -> Result<Matrix3<Complex64>> {
        self.apply_block(&self.unitary, rho)
    }

    pub fn dissipator_apply(
        &self,
        label: BathLabel,
        rho: &DensityMatrix,
    ) -> Result<Matrix3<Complex64>> {
        self.apply_block(self.dissipator(label), rho)
    }

    fn apply_block(&self, block: &Superop, rho: &DensityMatrix) -> Result<Matrix3<Complex64>> {
        rho.ensure_basis(self.basis)?;
        Ok(unvectorize(&(block * vectorize(&rho.matrix()))))
    }

    /// Writes `L` as nine CSV rows of `re,im` pairs (row-major).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (0..9)
            .flat_map(|k| [format!("c{k}_re"), format!("c{k}_im")])
            .collect();
        w.write_record(&header)?;
        for r in 0..9 {
            let row: Vec<String> = (0..9)
                .flat_map(|c| {
                    let z = self.total[(r, c)];
                    [format_float(z.re), format_float(z.im)]
                })
                .collect();
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

pub fn dissipator_apply(
    generator: &Generator,
    label: BathLabel,
    rho: &DensityMatrix,
) -> Result<Matrix3<Complex64>> {
    generator.dissipator_apply(label, rho)
}

pub fn build_partial_secular(config: &DeviceConfig) -> Result<Generator> {
    build_partial_secular_with(config, CoherentRotation::default())
}

/// Eigenbasis weights of one terminal bath: `(lower, upper, interference)`.
///
/// `S_h = sin(phi/2) (|1><2| + h.c.) + cos(phi/2) (|1><3| + h.c.)` and
/// `S_c = -cos(phi/2) (|1><2| + h.c.) + sin(phi/2) (|1><3| + h.c.)`.
pub(crate) fn terminal_weights(label: BathLabel, eig: &EigenSystem) -> (f64, f64, f64) {
    match label {
        BathLabel::Hot => (eig.f3, eig.f2, eig.f1),
        BathLabel::Cold => (eig.f2, eig.f3, -eig.f1),
        BathLabel::Work => unreachable!("work bath acts on the 2<->3 transition"),
    }
}

const P1: usize = vec_index(0, 0);
const P2: usize = vec_index(1, 1);
const P3: usize = vec_index(2, 2);
const C23: usize = vec_index(1, 2);
const C32: usize = vec_index(2, 1);
const C12: usize = vec_index(0, 1);
const C21: usize = vec_index(1, 0);
const C13: usize = vec_index(0, 2);
const C31: usize = vec_index(2, 0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn terminal_block(
    label: BathLabel,
    lower: RatePair,
    upper: RatePair,
    eig: &EigenSystem,
) -> Superop {
    let (w_lower, w_upper, f) = terminal_weights(label, eig);
    let (d2, u2) = (w_lower * lower.down, w_lower * lower.up);
    let (d3, u3) = (w_upper * upper.down, w_upper * upper.up);
    // signed interference rates Gamma^{+/-}_{mu 1}(omega_m)
    let x_down3 = f * upper.down;
    let x_down2 = f * lower.down;
    let x_up = f * (upper.up + lower.up);

    let mut m = Superop::zeros();
    let mut add = |r: usize, c: usize, v: f64| m[(r, c)] += re(v);

    add(P1, P1, -2.0 * (u2 + u3));
    add(P2, P1, 2.0 * u2);
    add(P3, P1, 2.0 * u3);
    add(P1, P2, 2.0 * d2);
    add(P2, P2, -2.0 * d2);
    add(P1, P3, 2.0 * d3);
    add(P3, P3, -2.0 * d3);

    for coh in [C23, C32] {
        add(P1, coh, x_down3 + x_down2);
        add(P2, coh, -x_down3);
        add(P3, coh, -x_down2);

        add(coh, coh, -(d2 + d3));
        add(coh, P1, x_up);
        add(coh, P2, -x_down2);
        add(coh, P3, -x_down3);
    }

    // ground-excited coherences: half the summed outgoing population rates
    for coh in [C12, C21] {
        add(coh, coh, -(u2 + u3 + d2));
    }
    for coh in [C13, C31] {
        add(coh, coh, -(u2 + u3 + d3));
    }
    m
}

fn work_block(work: RatePair) -> Superop {
    let (d, u) = (work.down, work.up);
    let mut m = Superop::zeros();
    let mut add = |r: usize, c: usize, v: f64| m[(r, c)] += re(v);
    add(P2, P2, -2.0 * u);
    add(P3, P2, 2.0 * u);
    add(P3, P3, -2.0 * d);
    add(P2, P3, 2.0 * d);
    for coh in [C23, C32] {
        add(coh, coh, -(d + u));
    }
    for coh in [C12, C21] {
        add(coh, coh, -u);
    }
    for coh in [C13, C31] {
        add(coh, coh, -d);
    }
    m
}

fn sum_blocks(unitary: &Superop, dissipators: &[Superop; 3]) -> Superop {
    unitary + dissipators[0] + dissipators[1] + dissipators[2]
}

pub fn build_partial_secular_with(
    config: &DeviceConfig,
    rotation: CoherentRotation,
) -> Result<Generator> {
    config.validate()?;
    let eig = diagonalize(config.system());
    let rates = DeviceRates::new(config, &eig)?;
    let energies = eig.energies();

    let mut unitary = Superop::zeros();
    for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0)] {
        let k = vec_index(i, j);
        unitary[(k, k)] = Complex64::new(0.0, -(energies[i] - energies[j]));
    }
    let factor = match rotation {
        CoherentRotation::Doubled => 2.0,
        CoherentRotation::Commutator => 1.0,
    };
    unitary[(C23, C23)] = Complex64::new(0.0, factor * eig.capital_omega);
    unitary[(C32, C32)] = Complex64::new(0.0, -factor * eig.capital_omega);

    let dissipators = [
        terminal_block(BathLabel::Hot, rates.hot_lower, rates.hot_upper, &eig),
        terminal_block(BathLabel::Cold, rates.cold_lower, rates.cold_upper, &eig),
        work_block(rates.work),
    ];
    let total = sum_blocks(&unitary, &dissipators);
    Ok(Generator {
        mode: SecularMode::PartialSecular,
        rotation,
        basis: Basis::Eigen,
        config: *config,
        eig,
        rates,
        energies,
        unitary,
        dissipators,
        total,
    })
}

/// `kron(a, b)[(3 r1 + r2, 3 c1 + c2)] = a[(r1, c1)] b[(r2, c2)]`
fn kron(a: &Matrix3<Complex64>, b: &Matrix3<Complex64>) -> Superop {
    Superop::from_fn(|r, c| a[(r / 3, c / 3)] * b[(r % 3, c % 3)])
}

/// Superoperator of `rho -> left * rho * right`.
pub fn sandwich(left: &Matrix3<Complex64>, right: &Matrix3<Complex64>) -> Superop {
    kron(&right.transpose(), left)
}

/// `rate * (2 X rho X^+ - X^+ X rho - rho X^+ X)`
pub fn lindblad_superop(x: &Matrix3<Complex64>, rate: f64) -> Superop {
    let id = Matrix3::identity();
    let xdx = x.adjoint() * x;
    (sandwich(x, &x.adjoint()) * re(2.0) - sandwich(&xdx, &id) - sandwich(&id, &xdx)) * re(rate)
}

/// `rho -> -i [H, rho]`
pub fn commutator_superop(h: &Matrix3<Complex64>) -> Superop {
    let id = Matrix3::identity();
    (sandwich(h, &id) - sandwich(&id, h)) * Complex64::new(0.0, -1.0)
}

/// `|i><j|`
pub fn transition(i: usize, j: usize) -> Matrix3<Complex64> {
    let mut m = Matrix3::zeros();
    m[(i, j)] = re(1.0);
    m
}

pub fn build_full_secular(config: &DeviceConfig) -> Result<Generator> {
    config.validate()?;
    let g = config.system().g;
    if g != 0.0 {
        return Err(Error::RequiresUncoupled(g));
    }
    let eig = diagonalize(config.system());
    let rates = DeviceRates::new(config, &eig)?;
    // bare basis {|1>, |b>, |a>}
    let (ground, b, a) = (0, 1, 2);
    let energies = [0.0, config.system().omega_b, config.system().omega_a];

    let h = Matrix3::from_diagonal(&nalgebra::Vector3::from(energies.map(re)));
    let unitary = commutator_superop(&h);
    let hot = rates.hot_upper;
    let cold = rates.cold_lower;
    let work = rates.work;
    let dissipators = [
        lindblad_superop(&transition(ground, a), hot.down)
            + lindblad_superop(&transition(a, ground), hot.up),
        lindblad_superop(&transition(ground, b), cold.down)
            + lindblad_superop(&transition(b, ground), cold.up),
        lindblad_superop(&transition(b, a), work.down)
            + lindblad_superop(&transition(a, b), work.up),
    ];
    let total = sum_blocks(&unitary, &dissipators);
    Ok(Generator {
        mode: SecularMode::FullSecular,
        rotation: CoherentRotation::Commutator,
        basis: Basis::Bare,
        config: *config,
        eig,
        rates,
        energies,
        unitary,
        dissipators,
        total,
    })
}
