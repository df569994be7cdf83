// SPDX-License-Identifier: Apache-2.0

//! Property tests for the invariants every steady state and generator must
//! satisfy.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use qthermal_core::generator::CoherentRotation;
use qthermal_core::prelude::*;
use qthermal_core::solver::null_space_dimension;

fn bath() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.1f64..5.0, 0.001f64..0.02, 10.0f64..100.0)
}

prop_compose! {
    fn device(max_g: f64)(
        omega_b in 0.3f64..0.99,
        g in 0.0..max_g,
        h in bath(),
        c in bath(),
        w in bath(),
    ) -> DeviceConfig {
        let spec = |label, (t, gamma, cutoff): (f64, f64, f64)| BathSpec::new(label, t, gamma, cutoff);
        DeviceConfig::new(
            SystemParams::new(1.0, omega_b, g),
            &[spec(BathLabel::Hot, h), spec(BathLabel::Cold, c), spec(BathLabel::Work, w)],
        )
        .unwrap()
    }
}

prop_compose! {
    fn uncoupled()(d in device(1e-300)) -> DeviceConfig {
        d.with_g(0.0).unwrap()
    }
}

prop_compose! {
    /// Device in the parameter window of the valve and amplifier studies.
    fn reference_window()(
        omega_b in prop::sample::select(vec![0.8, 0.95]),
        g in 0.0f64..0.2,
        tc in 0.1f64..0.9,
        tw in 0.5f64..10.0,
    ) -> DeviceConfig {
        DeviceConfig::three_terminal(SystemParams::new(1.0, omega_b, g), [1.0, tc, tw], 0.008, 50.0).unwrap()
    }
}

prop_compose! {
    fn pure_state()(re in prop::array::uniform3(-1.0f64..1.0), im in prop::array::uniform3(-1.0f64..1.0)) -> Matrix3<Complex64> {
        let v = Vector3::from_fn(|i, _| Complex64::new(re[i], im[i]));
        let v = if v.norm() < 1e-3 { Vector3::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)) } else { v.normalize() };
        v * v.adjoint()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn laws_of_thermodynamics(config in device(0.3)) {
        let r = evaluate(&config).unwrap().report;
        prop_assert!(r.first_law_residual().abs() <= 1e-12 * r.scale(), "{r:?}");
        prop_assert!(r.entropy_rate <= 1e-12, "{r:?}");
        prop_assert!((r.j_c12 + r.j_c13 - r.j_c).abs() <= 1e-12 * r.scale());
    }

    #[test]
    fn trace_formula_equals_closed_form(config in device(0.3)) {
        let ev = evaluate(&config).unwrap();
        let closed = closed_form_currents(&config, &ev.state).unwrap();
        let scale = ev.report.scale();
        for label in BathLabel::ALL {
            prop_assert!((closed.current(label) - ev.report.current(label)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn uncoupled_trace_formula_equals_closed_form(config in uncoupled()) {
        let gen = build_full_secular(&config).unwrap();
        let rho = steady_state(&gen).unwrap();
        let traced = qthermal_core::observables::report_for_state(&gen, &rho).unwrap();
        let closed = uncoupled_currents(&config, &rho).unwrap();
        for label in BathLabel::ALL {
            prop_assert!((closed.current(label) - traced.current(label)).abs() <= 1e-12 * traced.scale());
        }
    }

    #[test]
    fn steady_state_is_unique(config in device(0.3)) {
        let gen = build_partial_secular(&config).unwrap();
        prop_assert_eq!(null_space_dimension(&gen), 1);
        let rho = steady_state(&gen).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
            prop_assert!(rho.entry(i, j).norm() <= 1e-12);
        }
    }

    #[test]
    fn bases_agree_without_coupling(config in uncoupled()) {
        let full = steady_state(&build_full_secular(&config).unwrap()).unwrap();
        for rotation in [CoherentRotation::Doubled, CoherentRotation::Commutator] {
            let partial = steady_state(&build_partial_secular_with(&config, rotation).unwrap()).unwrap();
            let diff = (partial.relabeled(Basis::Bare).matrix() - full.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(diff < 1e-10);
        }
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(config in device(0.3), m in pure_state()) {
        let gen = build_partial_secular(&config).unwrap();
        let rho = DensityMatrix::new(Basis::Eigen, m).unwrap();
        let d = gen.apply(&rho).unwrap();
        let tr: Complex64 = (0..3).map(|i| d[(i, i)]).sum();
        prop_assert!(tr.norm() < 1e-15);
        prop_assert!((d - d.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
    }

    #[test]
    fn refrigerator_condition_at_zero_coupling(config in uncoupled()) {
        let s = config.system();
        let t = |l| config.temperature(l);
        let r = evaluate(&config).unwrap().report;
        let predicate = (s.omega_a / t(BathLabel::Hot)).exp()
            >= (s.omega_b / t(BathLabel::Cold)).exp() * ((s.omega_a - s.omega_b) / t(BathLabel::Work)).exp();
        prop_assert_eq!(r.j_c >= 0.0, predicate);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relaxation_operates_below_the_stiffness_limit(config in device(0.3)) {
        let gen = build_partial_secular(&config).unwrap();
        let dt = default_time_step(&gen);
        prop_assert!(dt * gen.frequency_scale() <= 0.01 + 1e-15);
    }
}

fn lowest_eigenvalue_along(
    config: &DeviceConfig,
    rotation: CoherentRotation,
    m: Matrix3<Complex64>,
) -> f64 {
    let gen = build_partial_secular_with(config, rotation).unwrap();
    let tau = relaxation_time(&gen).unwrap();
    let rho0 = DensityMatrix::new(Basis::Eigen, m).unwrap();
    match evolve_sampled(&gen, &rho0, 3.0 * tau, default_time_step(&gen), 10_000) {
        Ok(traj) => {
            assert!((traj.last().trace - 1.0).abs() < 1e-10);
            traj.lowest_eigenvalue
        }
        Err(Error::PositivityLost { min_eigenvalue, .. }) => min_eigenvalue,
        Err(e) => panic!("{e}"),
    }
}

fn drop_ground_coherences(mut m: Matrix3<Complex64>) -> Matrix3<Complex64> {
    for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0)] {
        m[(i, j)] = Complex64::new(0.0, 0.0);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn commutator_rotation_keeps_every_state_positive(config in reference_window(), m in pure_state()) {
        prop_assert!(lowest_eigenvalue_along(&config, CoherentRotation::Commutator, m) >= -1e-8);
    }

    #[test]
    fn default_rotation_keeps_block_states_positive(config in reference_window(), m in pure_state()) {
        let m = drop_ground_coherences(m);
        prop_assert!(lowest_eigenvalue_along(&config, CoherentRotation::Doubled, m) >= -1e-8);
    }
}

/// The doubled rotation on the excited-pair coherence is out of phase with
/// the ground coherences, so a pure state carrying all three goes negative.
#[test]
fn default_rotation_loses_positivity_with_ground_coherences() {
    let config = DeviceConfig::three_terminal(
        SystemParams::new(1.0, 0.8, 0.02),
        [1.0, 0.85, 3.42],
        0.008,
        50.0,
    )
    .unwrap();
    let v = Vector3::from_element(Complex64::new(1.0 / 3f64.sqrt(), 0.0));
    let m = v * v.adjoint();
    assert!(lowest_eigenvalue_along(&config, CoherentRotation::Doubled, m) < -1e-6);
    assert!(lowest_eigenvalue_along(&config, CoherentRotation::Commutator, m) >= -1e-8);
}
