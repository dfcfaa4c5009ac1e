use darkcool::engine::{
    child_seed, commensurability_experiment, perturbed_trap_run, propagate, run_sequence,
    sweep_order, sweep_width, Simulation, TsepSampler,
};
use darkcool::model::{GridSpec, SimulationConfig, TrapKind, TsepPolicy};
use darkcool::Error;

fn light_config() -> SimulationConfig {
    SimulationConfig {
        lamb_dicke: 1.0,
        thermal_quanta: 4.0,
        doughnut_order: 1,
        doughnut_width: 10.0,
        basis_size: 160,
        num_pulses: 60,
        ..SimulationConfig::reference_harmonic()
    }
}

#[test]
fn identical_seeds_give_identical_trajectories() {
    let config = light_config();
    let a = run_sequence(&config).unwrap();
    let b = run_sequence(&config).unwrap();
    assert_eq!(a, b);
    let c = run_sequence(&SimulationConfig { rng_seed: 2, ..config }).unwrap();
    assert_ne!(a.final_ground_population(), c.final_ground_population());
}

#[test]
fn every_state_along_a_run_is_physical() {
    let config = light_config();
    let sim = Simulation::new(&config).unwrap();
    let mut sampler = TsepSampler::new(config.tsep_policy, config.rng_seed);
    let mut problems = Vec::new();
    propagate(sim.operators(), sim.initial_state(), &mut sampler, 40, |pulse, rho, zeta| {
        if !(-1e-8..=1.0 + 1e-8).contains(&zeta) {
            problems.push(format!("pulse {pulse}: zeta {zeta}"));
        }
        for v in rho.invariant_violations() {
            problems.push(format!("pulse {pulse}: {v}"));
        }
    })
    .unwrap();
    assert!(problems.is_empty(), "{problems:?}");
}

#[test]
fn initial_ground_population_is_thermal() {
    let t = run_sequence(&SimulationConfig { num_pulses: 0, ..light_config() }).unwrap();
    assert_eq!(t.records.len(), 1);
    assert!((t.final_ground_population() - 0.22119921692859513).abs() < 1e-10);

    let t = run_sequence(&SimulationConfig { num_pulses: 0, ..SimulationConfig::reference_harmonic() })
        .unwrap();
    assert!((t.final_ground_population() - 0.039210560847676791).abs() < 1e-8);
}

#[test]
fn dark_pulses_leave_populations_alone() {
    let t = run_sequence(&SimulationConfig { peak_pulse_area: 0.0, ..light_config() }).unwrap();
    let p0 = t.records[0].ground_population;
    assert!(t.records.iter().all(|r| (r.ground_population - p0).abs() < 1e-12));
    assert!(t.records.iter().skip(1).all(|r| r.zeta.abs() < 1e-12));
}

#[test]
fn harmonic_companion_run_cools_on_coarse_windows() {
    let t = run_sequence(&SimulationConfig { num_pulses: 2500, ..light_config() }).unwrap();
    let pg0 = t.ground_populations();
    assert!((pg0[0] - 0.221).abs() < 0.01);
    let means: Vec<f64> =
        pg0[1..].chunks(500).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
    assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
    assert!(t.final_ground_population() > 0.221);
}

#[test]
fn vanishing_perturbation_is_the_harmonic_trap() {
    let harmonic = light_config();
    let perturbed = SimulationConfig {
        trap: TrapKind::Perturbed { epsilon: 0.0, g: 2000.0 },
        ..harmonic.clone()
    };
    assert_eq!(run_sequence(&harmonic).unwrap(), perturbed_trap_run(&perturbed).unwrap());
    assert!(matches!(perturbed_trap_run(&harmonic), Err(Error::InvalidArgument(_))));
}

#[test]
fn sweeps_have_one_point_per_parameter() {
    let config = light_config();
    let widths = [6.0, 8.0, 10.0, 12.0, 14.0];
    let result = sweep_width(&config, &widths, &[10, 30], 1).unwrap();
    assert_eq!(result.points.len(), 5);
    assert_eq!(result.checkpoints, vec![10, 30]);
    for (point, w) in result.points.iter().zip(widths) {
        assert_eq!(point.param_name, "alpha");
        assert_eq!(point.param_value, w);
        assert_eq!(point.ground_populations.len(), 2);
        assert!(point.ground_populations.iter().all(|p| (0.0..=1.0).contains(p)));
    }
    let parallel = sweep_width(&config, &widths, &[10, 30], 3).unwrap();
    assert_eq!(result, parallel);

    assert!(sweep_width(&config, &[], &[10], 1).unwrap().points.is_empty());
    assert!(sweep_width(&config, &[4.0], &[30, 10], 1).is_err());
    assert!(sweep_width(&config, &[-1.0], &[10], 1).is_err());
}

#[test]
fn single_pair_sweep_equals_direct_run() {
    let config = light_config();
    let result = sweep_order(&config, &[(4, 7.0)], &[config.num_pulses], 1).unwrap();
    let point = &result.points[0];
    assert_eq!(point.doughnut_order, 2);
    assert_eq!(point.seed, child_seed(config.rng_seed, 0));
    let direct = run_sequence(&SimulationConfig {
        doughnut_order: 2,
        doughnut_width: 7.0,
        rng_seed: point.seed,
        ..config
    })
    .unwrap();
    assert_eq!(point.ground_populations, vec![direct.final_ground_population()]);
    assert!(sweep_order(&light_config(), &[(3, 4.0)], &[10], 1).is_err());
}

#[test]
fn commensurability_reports_baseline_then_fixed_values() {
    let config = light_config();
    let rows = commensurability_experiment(&config, &[2.0 * std::f64::consts::PI, 1.0], 1).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].policy, TsepPolicy::DEFAULT_RANDOM);
    assert_eq!(rows[1].policy, TsepPolicy::Fixed { value: 2.0 * std::f64::consts::PI });
    assert_eq!(rows[0].final_ground_population, run_sequence(&config).unwrap().final_ground_population());

    let fixed = SimulationConfig { tsep_policy: TsepPolicy::Fixed { value: 0.5 }, ..config };
    let rows = commensurability_experiment(&fixed, &[], 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].policy, TsepPolicy::DEFAULT_RANDOM);
}

#[test]
fn grid_that_misses_the_ring_is_rejected() {
    let config = SimulationConfig {
        doughnut_width: 30.0,
        grid: Some(GridSpec { half_width: 40.0, points: 2048 }),
        ..light_config()
    };
    assert!(matches!(Simulation::new(&config), Err(Error::EmptyProfile { .. })));
}
