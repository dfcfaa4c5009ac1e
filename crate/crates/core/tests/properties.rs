use darkcool::basis::{build_grid, harmonic_eigenbasis, TrapBasis};
use darkcool::engine::{Simulation, TsepSampler};
use darkcool::linalg::is_psd_within;
use darkcool::model::{
    AngularDistribution, DensityMatrix, GridSpec, SimulationConfig, TrapKind, TsepPolicy,
};
use darkcool::pulsemap::{
    apply_cycle, cosine_operator, doughnut_profile, thermal_state, CycleOperators, PulseProfile,
};
use darkcool::Error;
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn small_basis() -> &'static TrapBasis {
    static BASIS: OnceLock<TrapBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let spec = GridSpec::default_for(40);
        harmonic_eigenbasis(&build_grid(spec.half_width, 1024).unwrap(), 40).unwrap()
    })
}

fn density_from(entries: &[(f64, f64)], n: usize) -> DensityMatrix {
    let a = Array2::from_shape_fn((n, n), |(i, j)| {
        let (re, im) = entries[(i * n + j) % entries.len()];
        Complex64::new(re + 0.1 * (i as f64 - j as f64), im)
    });
    let m = a.dot(&a.t().mapv(|z| z.conj()));
    let tr: f64 = (0..n).map(|i| m[[i, i]].re).sum();
    DensityMatrix::from_matrix(m.mapv(|z| z / tr)).unwrap()
}

fn identity_minus(c: &Array2<f64>, sign: f64) -> Array2<Complex64> {
    Array2::from_shape_fn(c.dim(), |(i, j)| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id - sign * c[[i, j]], 0.0)
    })
}

fn physical_ops(order: u32, width: f64, peak: f64, eta: f64, quanta: f64) -> CycleOperators {
    let basis = small_basis();
    let profile = doughnut_profile(basis.grid(), order, width, peak).unwrap();
    CycleOperators::build(profile, basis, quanta, eta, AngularDistribution::Dipole, 16).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cycle_preserves_trace_hermiticity_and_positivity(
        order in 0u32..4,
        width in 1.0f64..4.0,
        peak in 0.0f64..std::f64::consts::PI,
        eta in 0.0f64..1.2,
        quanta in 0.0f64..2.0,
        tsep in 0.0f64..7.0,
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let ops = physical_ops(order, width, peak, eta, quanta);
        let mut rho = density_from(&entries, ops.dim());
        for _ in 0..5 {
            let (next, zeta) = apply_cycle(&rho, &ops, tsep).unwrap();
            prop_assert!((-1e-8..=1.0 + 1e-8).contains(&zeta));
            prop_assert!((next.trace() - 1.0).abs() < 1e-10);
            prop_assert!(next.hermiticity_error() < 1e-8);
            prop_assert!(next.is_positive_semidefinite(1e-8));
            rho = next;
        }
    }

    #[test]
    fn operators_satisfy_their_invariants(
        order in 0u32..4,
        width in 1.0f64..4.0,
        peak in 0.0f64..std::f64::consts::PI,
        eta in 0.0f64..1.2,
        quanta in 0.0f64..2.0,
    ) {
        let ops = physical_ops(order, width, peak, eta, quanta);
        let c = ops.cosine();
        for i in 0..ops.dim() {
            for j in 0..ops.dim() {
                prop_assert_eq!(c[[i, j]], c[[j, i]]);
            }
        }
        // Spectrum of C inside [−1, 1].
        prop_assert!(is_psd_within(&identity_minus(c, 1.0), 1e-8));
        prop_assert!(is_psd_within(&identity_minus(c, -1.0), 1e-8));
        let f = ops.feeding();
        let trace: f64 = (0..ops.dim()).map(|i| f[[i, i]].re).sum();
        prop_assert!((trace - 1.0).abs() < 1e-8);
        prop_assert!(is_psd_within(f, 1e-8));
        let p = ops.thermal();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn weaker_pulses_excite_less(
        a in prop::collection::vec(0.0f64..1.0, 8),
        b in prop::collection::vec(0.0f64..1.0, 8),
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let basis = small_basis();
        let grid = basis.grid();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let xs = grid.points();
        let shape = |coef: &[f64], x: f64| {
            coef.iter().enumerate().map(|(k, c)| c * (0.3 * k as f64 * x).cos().abs()).sum::<f64>()
                / coef.len() as f64
        };
        let strong: Vec<f64> = xs.iter().map(|&x| half_pi * shape(&b, x)).collect();
        let weak: Vec<f64> =
            xs.iter().zip(&strong).map(|(&x, &s)| s * shape(&a, x)).collect();
        let ops_for = |areas: Vec<f64>| {
            let profile = PulseProfile::from_areas(grid, areas).unwrap();
            let c = cosine_operator(&profile, basis).unwrap();
            let n = basis.dim();
            CycleOperators::from_parts(
                c,
                basis.energies().to_vec(),
                Array2::from_diag(&ndarray::Array1::from_elem(n, Complex64::new(1.0 / n as f64, 0.0))),
                vec![1.0 / n as f64; n],
            )
            .unwrap()
        };
        let rho = density_from(&entries, basis.dim());
        let (_, zeta_weak) = apply_cycle(&rho, &ops_for(weak), 0.4).unwrap();
        let (_, zeta_strong) = apply_cycle(&rho, &ops_for(strong), 0.4).unwrap();
        prop_assert!(zeta_weak <= zeta_strong + 1e-12, "{} > {}", zeta_weak, zeta_strong);
    }

    #[test]
    fn validation_is_pure_and_idempotent(
        eta in -1.0f64..6.0,
        quanta in -1.0f64..30.0,
        order in 0u32..5,
        width in -1.0f64..10.0,
        peak in -1.0f64..4.0,
        lo in -0.5f64..2.0,
        span in -0.5f64..2.0,
        basis_size in 0usize..600,
        points in 0usize..3000,
        quadrature in 0usize..40,
    ) {
        let config = SimulationConfig {
            lamb_dicke: eta,
            thermal_quanta: quanta,
            doughnut_order: order,
            doughnut_width: width,
            peak_pulse_area: peak,
            tsep_policy: TsepPolicy::RandomUniform { lo, hi: lo + span },
            basis_size,
            grid: Some(GridSpec { half_width: 30.0, points }),
            quadrature_order: quadrature,
            ..SimulationConfig::reference_harmonic()
        };
        let before = config.clone();
        let first = config.validate();
        prop_assert_eq!(&config, &before);
        prop_assert_eq!(first, config.validate());
    }

    #[test]
    fn sampler_stays_in_bounds_and_replays(
        lo in 0.0f64..5.0,
        span in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let policy = TsepPolicy::RandomUniform { lo, hi: lo + span };
        let mut a = TsepSampler::new(policy, seed);
        let mut b = TsepSampler::new(policy, seed);
        for _ in 0..200 {
            let x = a.draw();
            prop_assert!(x >= lo && x <= lo + span);
            prop_assert_eq!(x.to_bits(), b.draw().to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // A config that validates must build; only numerical guards may refuse it.
    #[test]
    fn valid_configs_build_without_range_errors(
        eta in 0.0f64..1.5,
        quanta in 0.0f64..3.0,
        order in 0u32..4,
        width in 0.5f64..4.0,
        peak in 0.0f64..3.0,
        basis_size in 8usize..48,
        perturbed in any::<bool>(),
    ) {
        let config = SimulationConfig {
            lamb_dicke: eta,
            thermal_quanta: quanta,
            doughnut_order: order,
            doughnut_width: width,
            peak_pulse_area: peak,
            basis_size,
            trap: if perturbed { TrapKind::Perturbed { epsilon: 4.0, g: 0.1 } } else { TrapKind::Harmonic },
            num_pulses: 3,
            ..SimulationConfig::reference_harmonic()
        };
        prop_assume!(config.validate().is_valid());
        match Simulation::new(&config) {
            Ok(sim) => prop_assert_eq!(sim.run().unwrap().records.len(), 4),
            Err(e) => prop_assert!(e.is_numerical_guard(), "{e}"),
        }
    }
}

#[test]
fn thermal_state_sums_to_one() {
    for quanta in [0.0, 0.3, 1.0, 25.0, 1e3] {
        let p = thermal_state(quanta, 100);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
    }
    assert!(matches!(
        Simulation::new(&SimulationConfig { basis_size: 0, ..SimulationConfig::reference_harmonic() }),
        Err(Error::InvalidConfig(_))
    ));
}
