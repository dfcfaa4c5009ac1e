//! Pulse sequences, parameter sweeps and the commensurability experiment.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::TrapBasis;
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, PulseRecord, SimulationConfig, Trajectory, TrapKind, TsepPolicy};
use crate::pulsemap::{apply_cycle, doughnut_profile, CycleOperators};

/// Checkpoints recorded by sweeps when none are given.
pub const DEFAULT_CHECKPOINTS: [usize; 2] = [1500, 2500];

/// Draws νT_sep for successive cycles.
#[derive(Debug, Clone)]
pub struct TsepSampler {
    policy: TsepPolicy,
    rng: ChaCha8Rng,
}

impl TsepSampler {
    pub fn new(policy: TsepPolicy, seed: u64) -> Self {
        TsepSampler { policy, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn policy(&self) -> TsepPolicy {
        self.policy
    }

    pub fn draw(&mut self) -> f64 {
        match self.policy {
            TsepPolicy::RandomUniform { lo, hi } => {
                let u: f64 = self.rng.random();
                (lo + (hi - lo) * u).clamp(lo, hi)
            }
            TsepPolicy::Fixed { value } => value,
        }
    }
}

/// Seed of the `index`-th independent run derived from `seed` (splitmix64 finalizer).
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Iterates the cycle map `num_pulses` times from `initial`. The observer sees
/// the initial state as pulse 0 with ζ = 0, then every subsequent state.
pub fn propagate<F>(
    ops: &CycleOperators,
    initial: DensityMatrix,
    sampler: &mut TsepSampler,
    num_pulses: usize,
    mut observe: F,
) -> Result<DensityMatrix>
where
    F: FnMut(usize, &DensityMatrix, f64),
{
    let mut rho = initial;
    observe(0, &rho, 0.0);
    for pulse in 1..=num_pulses {
        let tsep = sampler.draw();
        let (next, zeta) = apply_cycle(&rho, ops, tsep)?;
        rho = next;
        observe(pulse, &rho, zeta);
    }
    Ok(rho)
}

/// A validated configuration with its basis and cycle operators built.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    basis: Arc<TrapBasis>,
    operators: CycleOperators,
}

impl Simulation {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate().into_result()?;
        let basis = Arc::new(TrapBasis::for_config(config)?);
        let operators = build_operators(config, &basis)?;
        Ok(Simulation { config: config.resolved(), basis, operators })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn basis(&self) -> &TrapBasis {
        &self.basis
    }

    pub fn operators(&self) -> &CycleOperators {
        &self.operators
    }

    pub fn initial_state(&self) -> DensityMatrix {
        DensityMatrix::from_populations(self.operators.thermal())
    }

    /// Same basis and feeding matrix, different doughnut profile.
    pub fn with_profile(&self, order: u32, width: f64) -> Result<Self> {
        let config = SimulationConfig {
            doughnut_order: order,
            doughnut_width: width,
            ..self.config.clone()
        };
        config.validate().into_result()?;
        let profile = doughnut_profile(self.basis.grid(), order, width, config.peak_pulse_area)?;
        let operators = self.operators.with_profile(profile, &self.basis)?;
        Ok(Simulation { config, basis: Arc::clone(&self.basis), operators })
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_with(self.config.tsep_policy, self.config.rng_seed, self.config.num_pulses)
    }

    pub fn run_with(&self, policy: TsepPolicy, seed: u64, num_pulses: usize) -> Result<Trajectory> {
        let mut sampler = TsepSampler::new(policy, seed);
        let mut records = Vec::with_capacity(num_pulses + 1);
        let final_state = propagate(
            &self.operators,
            self.initial_state(),
            &mut sampler,
            num_pulses,
            |pulse, rho, zeta| records.push(PulseRecord::observe(pulse, rho, zeta)),
        )?;
        Ok(Trajectory { records, final_state })
    }

    /// Ground-state population at each checkpoint (ascending pulse counts).
    pub fn checkpoint_populations(
        &self,
        policy: TsepPolicy,
        seed: u64,
        checkpoints: &[usize],
    ) -> Result<Vec<f64>> {
        check_checkpoints(checkpoints)?;
        let Some(&last) = checkpoints.last() else {
            return Ok(Vec::new());
        };
        let mut sampler = TsepSampler::new(policy, seed);
        let mut values = Vec::with_capacity(checkpoints.len());
        let mut next = 0;
        propagate(&self.operators, self.initial_state(), &mut sampler, last, |pulse, rho, _| {
            while next < checkpoints.len() && checkpoints[next] == pulse {
                values.push(rho.ground_population());
                next += 1;
            }
        })?;
        Ok(values)
    }
}

fn build_operators(config: &SimulationConfig, basis: &TrapBasis) -> Result<CycleOperators> {
    let profile = doughnut_profile(
        basis.grid(),
        config.doughnut_order,
        config.doughnut_width,
        config.peak_pulse_area,
    )?;
    CycleOperators::build(
        profile,
        basis,
        config.thermal_quanta,
        config.lamb_dicke,
        config.angular_distribution,
        config.quadrature_order,
    )
}

fn check_checkpoints(checkpoints: &[usize]) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly ascending".into()));
    }
    Ok(())
}

/// Builds the operators once and runs `num_pulses` cycles.
pub fn run_sequence(config: &SimulationConfig) -> Result<Trajectory> {
    Simulation::new(config)?.run()
}

/// Like [`run_sequence`] but insists on a perturbed trap.
pub fn perturbed_trap_run(config: &SimulationConfig) -> Result<Trajectory> {
    if !matches!(config.trap, TrapKind::Perturbed { .. }) {
        return Err(Error::InvalidArgument("perturbed_trap_run needs a perturbed trap".into()));
    }
    run_sequence(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param_name: String,
    pub param_value: f64,
    pub doughnut_order: u32,
    pub doughnut_width: f64,
    pub seed: u64,
    /// P_g⁰ at each checkpoint.
    pub ground_populations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub checkpoints: Vec<usize>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// P_g⁰ of every point at `checkpoint`, if it was recorded.
    pub fn at_checkpoint(&self, checkpoint: usize) -> Option<Vec<f64>> {
        let k = self.checkpoints.iter().position(|&c| c == checkpoint)?;
        Some(self.points.iter().map(|p| p.ground_populations[k]).collect())
    }
}

/// One run per width at fixed doughnut order.
pub fn sweep_width(
    config: &SimulationConfig,
    widths: &[f64],
    checkpoints: &[usize],
    jobs: usize,
) -> Result<SweepResult> {
    let pairs: Vec<(u32, f64)> = widths.iter().map(|&a| (config.doughnut_order, a)).collect();
    sweep(config, &pairs, checkpoints, jobs, |_, a| ("alpha".to_string(), a))
}

/// One run per (order, width) pair. Pairs are given as (2n, α).
pub fn sweep_order(
    config: &SimulationConfig,
    pairs: &[(u32, f64)],
    checkpoints: &[usize],
    jobs: usize,
) -> Result<SweepResult> {
    let mut orders = Vec::with_capacity(pairs.len());
    for &(exponent, width) in pairs {
        if exponent % 2 != 0 {
            return Err(Error::InvalidArgument(format!("profile exponent {exponent} is odd")));
        }
        orders.push((exponent / 2, width));
    }
    sweep(config, &orders, checkpoints, jobs, |order, a| {
        (format!("exponent(alpha={a})"), f64::from(2 * order))
    })
}

fn sweep<L>(
    config: &SimulationConfig,
    pairs: &[(u32, f64)],
    checkpoints: &[usize],
    jobs: usize,
    label: L,
) -> Result<SweepResult>
where
    L: Fn(u32, f64) -> (String, f64) + Sync,
{
    check_checkpoints(checkpoints)?;
    let result = SweepResult { checkpoints: checkpoints.to_vec(), points: Vec::new() };
    if pairs.is_empty() {
        return Ok(result);
    }
    for &(order, width) in pairs {
        let point = SimulationConfig { doughnut_order: order, doughnut_width: width, ..config.clone() };
        point.validate().into_result()?;
    }
    let (order0, width0) = pairs[0];
    let base = Simulation::new(&SimulationConfig {
        doughnut_order: order0,
        doughnut_width: width0,
        ..config.clone()
    })?;
    let run_point = |(index, &(order, width)): (usize, &(u32, f64))| -> Result<SweepPoint> {
        let sim = base.with_profile(order, width)?;
        let seed = child_seed(config.rng_seed, index as u64);
        let ground_populations =
            sim.checkpoint_populations(config.tsep_policy, seed, checkpoints)?;
        let (param_name, param_value) = label(order, width);
        Ok(SweepPoint {
            param_name,
            param_value,
            doughnut_order: order,
            doughnut_width: width,
            seed,
            ground_populations,
        })
    };
    let points = in_pool(jobs, || pairs.par_iter().enumerate().map(run_point).collect())?;
    Ok(SweepResult { points, ..result })
}

fn in_pool<T, F>(jobs: usize, work: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(work)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommensurabilityRow {
    pub policy: TsepPolicy,
    pub final_ground_population: f64,
}

/// The configuration rerun with each fixed νT_sep and with a random policy.
/// The random baseline comes first; it is the configured policy when that is
/// random and U[0.1, 1.1] otherwise.
pub fn commensurability_experiment(
    config: &SimulationConfig,
    fixed: &[f64],
    jobs: usize,
) -> Result<Vec<CommensurabilityRow>> {
    for &value in fixed {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!("fixed separation {value} is not >= 0")));
        }
    }
    let sim = Simulation::new(config)?;
    let baseline =
        if config.tsep_policy.is_random() { config.tsep_policy } else { TsepPolicy::DEFAULT_RANDOM };
    let mut policies = vec![baseline];
    policies.extend(fixed.iter().map(|&value| TsepPolicy::Fixed { value }));
    let checkpoint = [config.num_pulses];
    in_pool(jobs, || {
        policies
            .par_iter()
            .map(|&policy| {
                let pg0 = sim.checkpoint_populations(policy, config.rng_seed, &checkpoint)?;
                Ok(CommensurabilityRow { policy, final_ground_population: pg0[0] })
            })
            .collect()
    })
}
