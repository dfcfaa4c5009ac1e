//! `darkcool`: runs cooling simulations from a JSON config and writes CSV data.

mod output;
mod sweep_spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use darkcool::basis::{eigenstate_widths, TrapBasis};
use darkcool::engine::{sweep_order, sweep_width, Simulation, SweepResult};
use darkcool::model::SimulationConfig;
use darkcool::pulsemap::{cosine_operator, dark_state_residual, doughnut_profile, excitation_probabilities};
use num_complex::Complex64;
use serde_json::json;

use output::{error_json, float, OutputBundle, Table};
use sweep_spec::SweepSpec;

#[derive(Parser, Debug)]
#[command(name = "darkcool", version, about = "Dark-state laser cooling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON simulation config
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's rng_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pulse sequence: trajectory.csv, populations.csv, spatial.csv
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the final density matrix to final_state.csv
        #[arg(long)]
        dump_state: bool,
    },
    /// Width or order sweep: sweep.csv
    Sweep {
        #[command(flatten)]
        common: Common,
        /// JSON sweep spec
        #[arg(long)]
        sweep: PathBuf,
    },
    /// Trap eigenstate widths: widths.csv
    Eigen {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 12)]
        count: usize,
        /// Also write eigenpairs.csv and wavefunctions.csv
        #[arg(long)]
        export_basis: bool,
    },
    /// Dark-state residuals and re-excitation rates: darkstate.csv
    Darkstate {
        #[command(flatten)]
        common: Common,
        /// Highest state index reported
        #[arg(long)]
        state: usize,
        /// νT_sep used in the dark-state condition
        #[arg(long, default_value_t = 0.0)]
        tsep: f64,
    },
}

enum Failure {
    Config(String, String),
    Numerical(String, String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(..) => 2,
            Failure::Numerical(..) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn report(&self) -> String {
        match self {
            Failure::Config(kind, msg) | Failure::Numerical(kind, msg) => error_json(kind, msg),
            Failure::Io(msg) => error_json("io", msg),
        }
    }
}

impl From<darkcool::Error> for Failure {
    fn from(e: darkcool::Error) -> Self {
        if e.is_numerical_guard() {
            Failure::Numerical(e.kind().to_string(), e.to_string())
        } else {
            Failure::Config(e.kind().to_string(), e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load_config(common: &Common) -> Result<SimulationConfig, Failure> {
    let text = fs::read_to_string(&common.config).map_err(|e| io_failure(&common.config, e))?;
    let mut config = SimulationConfig::from_json(&text)?;
    if let Some(seed) = common.seed {
        config.rng_seed = seed;
    }
    config.validate().into_result()?;
    Ok(config)
}

fn cmd_run(common: &Common, dump_state: bool) -> Result<OutputBundle, Failure> {
    let config = load_config(common)?;
    let sim = Simulation::new(&config)?;
    let trajectory = sim.run()?;

    let mut traj = Table::new("trajectory", &["pulse", "Pg0", "zeta", "purity"]);
    for r in &trajectory.records {
        traj.push(vec![
            r.pulse.to_string(),
            float(r.ground_population),
            float(r.zeta),
            float(r.purity),
        ]);
    }
    let mut pops = Table::new("populations", &["n", "Pn"]);
    for (n, p) in trajectory.final_state.populations().iter().enumerate() {
        pops.push(vec![n.to_string(), float(*p)]);
    }
    let density = sim.basis().spatial_density(&trajectory.final_state)?;
    let cosines = sim.operators().profile().map(|p| p.cosines()).unwrap_or_default();
    let mut spatial = Table::new("spatial", &["x", "density", "cos_profile"]);
    for ((x, d), c) in sim.basis().grid().points().iter().zip(&density).zip(&cosines) {
        spatial.push(vec![float(*x), float(*d), float(*c)]);
    }
    let mut tables = vec![traj, pops, spatial];
    if dump_state {
        let mut state = Table::new("final_state", &["m", "n", "re", "im"]);
        for ((m, n), z) in trajectory.final_state.matrix().indexed_iter() {
            state.push(vec![m.to_string(), n.to_string(), float(z.re), float(z.im)]);
        }
        tables.push(state);
    }
    Ok(OutputBundle::new("run", &config, json!({ "dump_state": dump_state }), tables))
}

fn cmd_sweep(common: &Common, spec_path: &Path) -> Result<OutputBundle, Failure> {
    let text = fs::read_to_string(spec_path).map_err(|e| io_failure(spec_path, e))?;
    let spec = SweepSpec::from_json(&text)
        .map_err(|e| Failure::Config("sweep_spec".to_string(), e))?;
    let config = load_config(common)?;
    let result: SweepResult = match &spec {
        SweepSpec::Width { values, checkpoints } => {
            sweep_width(&config, values, checkpoints, common.jobs)?
        }
        SweepSpec::Order { pairs, checkpoints } => {
            sweep_order(&config, pairs, checkpoints, common.jobs)?
        }
    };
    let mut table = Table::new("sweep", &["param_name", "param_value", "checkpoint", "Pg0"]);
    for point in &result.points {
        for (checkpoint, pg0) in result.checkpoints.iter().zip(&point.ground_populations) {
            table.push(vec![
                point.param_name.clone(),
                float(point.param_value),
                checkpoint.to_string(),
                float(*pg0),
            ]);
        }
    }
    let parameters = serde_json::to_value(&spec).expect("spec serializes");
    Ok(OutputBundle::new("sweep", &config, json!({ "sweep": parameters }), vec![table]))
}

fn cmd_eigen(common: &Common, count: usize, export_basis: bool) -> Result<OutputBundle, Failure> {
    let config = load_config(common)?;
    let mut widths_table = Table::new("widths", &["n", "width_trap", "width_harmonic"]);
    let mut pairs = Table::new("eigenpairs", &["n", "energy", "width"]);
    let mut header = vec!["x".to_string()];
    header.extend((0..count).map(|n| format!("psi_{n}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut wavefunctions = Table::new("wavefunctions", &header);
    if count > 0 {
        let basis = TrapBasis::for_config(&SimulationConfig { basis_size: count, ..config.clone() })?;
        let widths = eigenstate_widths(&basis, count)?;
        for (n, w) in widths.iter().enumerate() {
            let harmonic = ((2 * n + 1) as f64).sqrt();
            widths_table.push(vec![n.to_string(), float(*w), float(harmonic)]);
            pairs.push(vec![n.to_string(), float(basis.energies()[n]), float(*w)]);
        }
        if export_basis {
            let psi = basis.wavefunctions();
            for (j, x) in basis.grid().points().iter().enumerate() {
                let mut row = vec![float(*x)];
                row.extend(psi.row(j).iter().map(|v| float(*v)));
                wavefunctions.push(row);
            }
        }
    }
    let mut tables = vec![widths_table];
    if export_basis {
        tables.push(pairs);
        tables.push(wavefunctions);
    }
    let parameters = json!({ "count": count, "export_basis": export_basis });
    Ok(OutputBundle::new("eigen", &config, parameters, tables))
}

fn cmd_darkstate(common: &Common, state: usize, tsep: f64) -> Result<OutputBundle, Failure> {
    let config = load_config(common)?;
    if state >= config.basis_size {
        return Err(Failure::Config(
            "invalid_argument".to_string(),
            format!("state index {state} must be below basis_size {}", config.basis_size),
        ));
    }
    if !tsep.is_finite() {
        return Err(Failure::Config("invalid_argument".to_string(), "tsep must be finite".into()));
    }
    let basis = TrapBasis::for_config(&config)?;
    let profile = doughnut_profile(
        basis.grid(),
        config.doughnut_order,
        config.doughnut_width,
        config.peak_pulse_area,
    )?;
    let cosine = cosine_operator(&profile, &basis)?;
    let zetas = excitation_probabilities(&cosine, state + 1)?;
    let mut table = Table::new("darkstate", &["n", "residual", "zeta_n"]);
    for (n, zeta) in zetas.iter().enumerate() {
        let mut f = vec![Complex64::new(0.0, 0.0); basis.dim()];
        f[n] = Complex64::new(1.0, 0.0);
        let residual = dark_state_residual(&f, &profile, &basis, tsep)?;
        table.push(vec![n.to_string(), float(residual), float(*zeta)]);
    }
    let parameters = json!({ "state": state, "tsep": tsep });
    Ok(OutputBundle::new("darkstate", &config, parameters, vec![table]))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let (bundle, out) = match &cli.command {
        Command::Run { common, dump_state } => (cmd_run(common, *dump_state)?, &common.out),
        Command::Sweep { common, sweep } => (cmd_sweep(common, sweep)?, &common.out),
        Command::Eigen { common, count, export_basis } => {
            (cmd_eigen(common, *count, *export_basis)?, &common.out)
        }
        Command::Darkstate { common, state, tsep } => {
            (cmd_darkstate(common, *state, *tsep)?, &common.out)
        }
    };
    bundle.write(out).map_err(|e| io_failure(out, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.report());
            ExitCode::from(failure.exit_code())
        }
    }
}
