// SPDX-License-Identifier: Apache-2.0

//! Steady states, time evolution and the closed-form uncoupled steady state.

use std::io::Write;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::compensated::{two_sum, Dot2};
use crate::error::{Error, Result};
use crate::generator::{
    unvectorize, vec_index, vectorize, Generator, SecularMode, StateVector, Superop,
};
use crate::model::{diagonalize, Basis, DensityMatrix, DeviceConfig, POSITIVITY_TOLERANCE};
use crate::output::format_float;
use crate::rates::DeviceRates;

/// Singular values below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-13;
const REFINEMENT_STEPS: usize = 3;
/// Allowed drift of `Tr rho` (and of `|rho_ij| <= 1`) along a trajectory.
const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Off-diagonal magnitude below which a state counts as diagonal.
const DIAGONAL_TOLERANCE: f64 = 1e-10;

/// `L` with the `rho11` row replaced by the trace functional.
fn trace_constrained(l: &Superop) -> Superop {
    let mut a = *l;
    let row = vec_index(0, 0);
    for c in 0..9 {
        a[(row, c)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..3 {
        a[(row, vec_index(i, i))] = Complex64::new(1.0, 0.0);
    }
    a
}

/// Residual `b - A x` with `A` the trace-constrained sum of the generator
/// blocks, evaluated in doubled precision on `x = hi + lo`.
fn refined_residual(gen: &Generator, hi: &StateVector, lo: &StateVector) -> StateVector {
    let blocks = gen.blocks();
    let row0 = vec_index(0, 0);
    StateVector::from_fn(|r, _| {
        let mut re = Dot2::new();
        let mut im = Dot2::new();
        if r == row0 {
            re.add(1.0);
            for i in 0..3 {
                let k = vec_index(i, i);
                re.add(-hi[k].re);
                re.add(-lo[k].re);
                im.add(-hi[k].im);
                im.add(-lo[k].im);
            }
        } else {
            for block in blocks {
                for c in 0..9 {
                    let a = block[(r, c)];
                    if a.re == 0.0 && a.im == 0.0 {
                        continue;
                    }
                    for x in [hi[c], lo[c]] {
                        re.add_product(-a.re, x.re);
                        re.add_product(a.im, x.im);
                        im.add_product(-a.re, x.im);
                        im.add_product(-a.im, x.re);
                    }
                }
            }
        }
        Complex64::new(re.value(), im.value())
    })
}

fn inf_norm(m: &Superop) -> f64 {
    (0..9)
        .map(|r| (0..9).map(|c| m[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dimension of the numerical null space of `L`.
pub fn null_space_dimension(gen: &Generator) -> usize {
    let sv = gen.matrix().singular_values();
    let max = sv.max();
    sv.iter().filter(|&&s| s <= RANK_TOLERANCE * max).count()
}

/// Unique unit-trace solution of `L vec(rho) = 0`.
///
/// Solved once by LU in working precision, then refined against the exact
/// sum of the generator blocks with compensated residuals. The result keeps
/// the refined low-order part so that currents evaluated on it inherit the
/// extra precision.
pub fn steady_state(gen: &Generator) -> Result<DensityMatrix> {
    let nullity = null_space_dimension(gen);
    if nullity != 1 {
        return Err(Error::DegenerateSteadyState(nullity));
    }
    let a = trace_constrained(gen.matrix());
    let lu = a.lu();
    let mut rhs = StateVector::zeros();
    rhs[vec_index(0, 0)] = Complex64::new(1.0, 0.0);
    let mut hi = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    if hi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let mut lo = StateVector::zeros();
    for _ in 0..REFINEMENT_STEPS {
        let r = refined_residual(gen, &hi, &lo);
        let delta = lu.solve(&r).ok_or(Error::SingularSystem)?;
        for k in 0..9 {
            let (re_hi, re_lo) = add_dd(hi[k].re, lo[k].re, delta[k].re);
            let (im_hi, im_lo) = add_dd(hi[k].im, lo[k].im, delta[k].im);
            hi[k] = Complex64::new(re_hi, im_hi);
            lo[k] = Complex64::new(re_lo, im_lo);
        }
    }

    let (hi_m, lo_m) = hermitize_parts(&unvectorize(&hi), &unvectorize(&lo));
    let rho_vec = vectorize(&(hi_m + lo_m));
    let residual = (gen.matrix() * rho_vec)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let bound = 1e-12 * inf_norm(gen.matrix());
    if !(residual < bound) {
        return Err(Error::SteadyStateResidual { residual, bound });
    }
    let state = DensityMatrix::from_parts_unchecked(gen.basis(), hi_m, lo_m);
    state.check(1e-12)?;
    Ok(state)
}

/// `(hi + lo) + delta` renormalized to a double-double.
fn add_dd(hi: f64, lo: f64, delta: f64) -> (f64, f64) {
    let (s, e) = two_sum(hi, delta);
    two_sum(s, e + lo)
}

fn hermitize_parts(
    hi: &Matrix3<Complex64>,
    lo: &Matrix3<Complex64>,
) -> (Matrix3<Complex64>, Matrix3<Complex64>) {
    let half = Complex64::new(0.5, 0.0);
    ((hi + hi.adjoint()) * half, (lo + lo.adjoint()) * half)
}

fn hermitize(m: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `0.01 / s` with `s` the generator's [frequency scale](Generator::frequency_scale).
pub fn default_time_step(gen: &Generator) -> f64 {
    0.01 / gen.frequency_scale()
}

/// `1 / min |Re lambda|` over the non-zero eigenvalues of `L`.
pub fn relaxation_time(gen: &Generator) -> Result<f64> {
    let eigenvalues = gen
        .matrix()
        .schur()
        .eigenvalues()
        .ok_or(Error::SingularSystem)?;
    let scale = inf_norm(gen.matrix());
    let slowest = eigenvalues
        .iter()
        .filter(|z| z.norm() > 1e-12 * scale)
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    if slowest.is_finite() && slowest > 0.0 {
        Ok(1.0 / slowest)
    } else {
        Err(Error::DegenerateSteadyState(0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub time: f64,
    pub state: DensityMatrix,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Minimum eigenvalue over every integration step, stored or not.
    pub lowest_eigenvalue: f64,
    pub dt: f64,
    pub mode: SecularMode,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn csv_header() -> Vec<String> {
        let mut h = vec!["t".to_string()];
        for i in 1..=3 {
            for j in 1..=3 {
                h.push(format!("rho{i}{j}_re"));
                h.push(format!("rho{i}{j}_im"));
            }
        }
        h.push("min_eigenvalue".into());
        h.push("trace".into());
        h
    }

    /// Columns: `t`, re/im of all nine entries in row-major order, minimum
    /// eigenvalue, trace.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::csv_header())?;
        for s in &self.samples {
            let m = s.state.matrix();
            let mut row = vec![format_float(s.time)];
            for i in 0..3 {
                for j in 0..3 {
                    row.push(format_float(m[(i, j)].re));
                    row.push(format_float(m[(i, j)].im));
                }
            }
            row.push(format_float(s.min_eigenvalue));
            row.push(format_float(s.trace));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Fixed-step RK4 integration keeping every step.
pub fn evolve(gen: &Generator, rho0: &DensityMatrix, t_final: f64, dt: f64) -> Result<Trajectory> {
    evolve_sampled(gen, rho0, t_final, dt, 1)
}

/// Fixed-step RK4 integration storing every `stride`-th step (and the last).
///
/// Every step is checked for trace drift and positivity, stored or not. The
/// trace is never renormalized.
pub fn evolve_sampled(
    gen: &Generator,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    rho0.ensure_basis(gen.basis())?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Negative {
            name: "t_final",
            value: t_final,
        });
    }
    let stride = stride.max(1);
    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let l = gen.matrix();
    let two = Complex64::new(2.0, 0.0);

    let sample = |time: f64, m: &Matrix3<Complex64>| -> Result<TrajectorySample> {
        let m = hermitize(m);
        let state = DensityMatrix::from_parts_unchecked(gen.basis(), m, Matrix3::zeros());
        let trace = state.trace();
        let overshoot = m.iter().map(|z| z.norm()).fold(0.0, f64::max) - 1.0;
        let drift = (trace - 1.0).abs().max(overshoot);
        if !drift.is_finite() || drift > TRACE_DRIFT_LIMIT {
            return Err(Error::StepTooLarge {
                drift,
                time,
                suggested_dt: 0.5 * dt.min(default_time_step(gen)),
            });
        }
        let min_eigenvalue = state.min_eigenvalue();
        if min_eigenvalue < -POSITIVITY_TOLERANCE {
            return Err(Error::PositivityLost {
                time,
                min_eigenvalue,
            });
        }
        Ok(TrajectorySample {
            time,
            state,
            min_eigenvalue,
            trace,
        })
    };

    let mut v = vectorize(&rho0.matrix());
    let mut samples = vec![sample(0.0, &rho0.matrix())?];
    let mut lowest_eigenvalue = samples[0].min_eigenvalue;
    for n in 1..=steps {
        // the last step is shortened to land on t_final
        let time = if n == steps { t_final } else { n as f64 * dt };
        let step = time - (n - 1) as f64 * dt;
        let (h, half, sixth) = (
            Complex64::new(step, 0.0),
            Complex64::new(0.5 * step, 0.0),
            Complex64::new(step / 6.0, 0.0),
        );
        let k1 = l * v;
        let k2 = l * (v + k1 * half);
        let k3 = l * (v + k2 * half);
        let k4 = l * (v + k3 * h);
        v += (k1 + k2 * two + k3 * two + k4) * sixth;
        let s = sample(time, &unvectorize(&v))?;
        lowest_eigenvalue = lowest_eigenvalue.min(s.min_eigenvalue);
        if n % stride == 0 || n == steps {
            samples.push(s);
        }
    }
    Ok(Trajectory {
        samples,
        lowest_eigenvalue,
        dt,
        mode: gen.mode(),
    })
}

/// Rates entering the uncoupled closed form: `(hot at omega_a, cold at
/// omega_b, work at Delta)`.
fn uncoupled_rates(config: &DeviceConfig) -> Result<DeviceRates> {
    let g = config.system().g;
    if g != 0.0 {
        return Err(Error::RequiresUncoupled(g));
    }
    DeviceRates::new(config, &diagonalize(config.system()))
}

/// Diagonal steady state at `g = 0` from the closed-form populations, in the
/// bare basis `{|1>, |b>, |a>}`.
pub fn analytic_diagonal_steady_state(config: &DeviceConfig) -> Result<DensityMatrix> {
    config.validate()?;
    let r = uncoupled_rates(config)?;
    let (hd, hu) = (r.hot_upper.down, r.hot_upper.up);
    let (cd, cu) = (r.cold_lower.down, r.cold_lower.up);
    let (wd, wu) = (r.work.down, r.work.up);

    let lambda =
        hd * cd + cd * wd + hd * wu + hd * cu + cu * wd + hu * wd + hu * cd + cu * wu + hu * wu;
    let ground = (cd * (hd + wd) + hd * wu) / lambda;
    let lower = (cu * (hd + wd) + hu * wd) / lambda;
    let upper = (hu * (cd + wu) + cu * wu) / lambda;
    let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        Complex64::new(ground, 0.0),
        Complex64::new(lower, 0.0),
        Complex64::new(upper, 0.0),
    ));
    let state = DensityMatrix::from_parts_unchecked(Basis::Bare, m, Matrix3::zeros());
    state.check(1e-12)?;
    Ok(state)
}

/// Gain minus loss of the three level populations at `g = 0`:
/// `[ground, b, a]`.
pub fn detailed_balance_residual(config: &DeviceConfig, rho: &DensityMatrix) -> Result<[f64; 3]> {
    let r = uncoupled_rates(config)?;
    let coherence = rho.max_coherence();
    if coherence > DIAGONAL_TOLERANCE {
        return Err(Error::NotDiagonal(coherence));
    }
    let (p1, pb, pa) = (rho.population(0), rho.population(1), rho.population(2));
    let (hd, hu) = (r.hot_upper.down, r.hot_upper.up);
    let (cd, cu) = (r.cold_lower.down, r.cold_lower.up);
    let (wd, wu) = (r.work.down, r.work.up);
    Ok([
        cd * pb + hd * pa - (cu + hu) * p1,
        cu * p1 + wd * pa - (wu + cd) * pb,
        hu * p1 + wu * pb - (hd + wd) * pa,
    ])
}
