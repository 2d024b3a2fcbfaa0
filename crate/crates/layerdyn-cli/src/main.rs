//! Command-line front end: every subcommand reads one JSON config, runs the
//! corresponding library operation, writes CSV/JSON outputs into `--out-dir`,
//! and prints a short summary.
//!
//! Exit codes: 0 on success (a collision stop is a successful, flagged
//! outcome), 1 on domain errors (quadrature/shooting failures, instability,
//! mismatched comparison windows, I/O), 2 on config errors (bad JSON,
//! unknown keys, inconsistent fields).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use layerdyn::config::{parse_config, ConfigError, RunConfig, SweepMethodName};
use layerdyn::experiments::{
    compare_pde_ode, metastability_sweep, tau_limit_study, CompareConfig, ExperimentError,
    MetastabilityConfig, TauStudyConfig,
};
use layerdyn::layer_ode::{integrate_layers, lengths_lpm, IntegrateOptions, OdeError, OdeStop};
use layerdyn::numerics::quad::QuadratureFailure;
use layerdyn::pde::{run_simulation, Grid, PdeError, SimOptions, StopReason};
use layerdyn::potential::{damping_average, transition_energy, wave_constants, ModelParams};
use layerdyn::profile::{
    barrier_psi, build_profile, renormalized_energy, LayerVector, ProfileError,
};
use layerdyn::report::{
    diagnostics_csv, format_number, render_table, state_csv, trajectory_csv, write_csv,
    write_json,
};

#[derive(Parser)]
#[command(
    name = "layerdyn",
    version,
    about = "Metastable layer dynamics in 1D phase-field models: profiles, simulations, layer ODEs, and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scalar constants of the configured potential and damping.
    Constants(CommonArgs),
    /// Build the layered profile and write it as CSV.
    Profile(CommonArgs),
    /// Simulate the field equation; write diagnostics and the final state.
    Simulate(CommonArgs),
    /// Integrate the reduced layer ODEs; write the trajectory.
    Layers(CommonArgs),
    /// Run the PDE and the layer ODEs side by side and report the error.
    Compare(CommonArgs),
    /// Fit the exponential speed law over a list of epsilons.
    SweepMetastability(SweepArgs),
    /// Tabulate exact vs asymptotic interaction quantities over ratios.
    SweepAsymptotics(SweepArgs),
    /// Measure the distance of inertial trajectories from the first-order
    /// limit over a list of relaxation times.
    SweepTau(SweepArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Directory for output files (created if missing).
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

enum CliError {
    Config(ConfigError),
    Domain(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Domain(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> CliError {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e)
    }
}

macro_rules! domain_error {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::Domain(e.to_string())
            }
        }
    )*};
}

domain_error!(PdeError, OdeError, ProfileError, ExperimentError, QuadratureFailure);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Constants(args) => cmd_constants(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Layers(args) => cmd_layers(args),
        Command::Compare(args) => cmd_compare(args),
        Command::SweepMetastability(args) => cmd_sweep_metastability(args),
        Command::SweepAsymptotics(args) => cmd_sweep_asymptotics(args),
        Command::SweepTau(args) => cmd_sweep_tau(args),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let document = fs::read_to_string(path)?;
    Ok(parse_config(&document)?)
}

/// Resolve an output file: explicit paths land relative to `--out-dir`
/// (absolute ones stand), defaults are named after the subcommand.
fn out_path(out_dir: &Path, explicit: Option<&String>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => out_dir.join(p),
        None => out_dir.join(default_name),
    }
}

fn require<T>(field: Option<T>, key: &'static str) -> Result<T, CliError> {
    field.ok_or_else(|| {
        CliError::Config(ConfigError::Consistency {
            key,
            reason: "required by this operation".into(),
        })
    })
}

fn config_value(config: &RunConfig) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

fn cmd_constants(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let potential = config.potential.build()?;
    let damping = config.damping.build(&potential)?;
    let c_f = transition_energy(&potential)?;
    let constants = wave_constants(&potential)?;
    let gamma = damping_average(&potential, &damping)?;
    for (name, value) in [
        ("c_F", c_f),
        ("A_plus", constants.a_plus),
        ("A_minus", constants.a_minus),
        ("K_plus", constants.k_plus),
        ("K_minus", constants.k_minus),
        ("gamma", gamma),
    ] {
        println!("{name:<8} = {}", format_number(value));
    }
    Ok(())
}

fn cmd_profile(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let potential = config.potential.build()?;
    let epsilon = config.epsilon()?;
    let layers = config.initial_layers(&potential)?;
    let profile = build_profile(&layers, epsilon, &potential, config.n)?;
    let zeros = vec![0.0; profile.u.len()];
    let energy = renormalized_energy(&profile.u, &zeros, epsilon, 0.0, &potential);

    let header = ["x", "u"].map(String::from);
    let rows: Vec<Vec<f64>> = profile
        .u
        .iter()
        .enumerate()
        .map(|(i, &u)| vec![i as f64 / config.n as f64, u])
        .collect();
    let csv_path = out_path(&args.out_dir, config.state_path.as_ref(), "profile.csv");
    write_csv(&csv_path, &header, &rows)?;

    let report_path = out_path(&args.out_dir, config.report_path.as_ref(), "report.json");
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "profile",
            "layer_count": layers.len(),
            "mass": profile.mass,
            "barrier_psi": profile.psi,
            "renormalized_energy": energy,
            "profile_csv": csv_path.display().to_string(),
        }),
    )?;
    println!(
        "profile with {} layers: mass {}, barrier {}, energy {}",
        layers.len(),
        format_number(profile.mass),
        format_number(profile.psi),
        format_number(energy),
    );
    println!("wrote {} and {}", csv_path.display(), report_path.display());
    Ok(())
}

fn cmd_simulate(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let model = config.pde_model()?;
    config.require_rest_start()?;
    let potential = config.potential.build()?;
    let damping = config.damping.build(&potential)?;
    let epsilon = config.epsilon()?;
    let layers = config.initial_layers(&potential)?;
    let profile = build_profile(&layers, epsilon, &potential, config.n)?;
    let params = ModelParams {
        epsilon,
        tau: config.tau,
        potential,
        damping,
    };
    let grid = Grid::new(config.n)?;
    let result = run_simulation(
        grid,
        model,
        &params,
        &profile.u,
        None,
        &SimOptions {
            t_end: config.t_end()?,
            record_dt: config.record_dt()?,
            dt: None,
        },
    )?;

    let diagnostics_path = out_path(
        &args.out_dir,
        config.diagnostics_path.as_ref(),
        "diagnostics.csv",
    );
    fs::create_dir_all(&args.out_dir)?;
    fs::write(&diagnostics_path, diagnostics_csv(&result.diagnostics))?;
    let state_path = out_path(&args.out_dir, config.state_path.as_ref(), "final_state.csv");
    fs::write(&state_path, state_csv(&result.state, grid))?;

    let diag = &result.diagnostics;
    let mass_drift = diag.mass.last().unwrap() - diag.mass[0];
    let report_path = out_path(&args.out_dir, config.report_path.as_ref(), "report.json");
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "simulate",
            "stopped": stop_label(&result.stop),
            "collision_t": collision_t(&result.stop),
            "t_final": result.state.t,
            "mass_drift": mass_drift,
            "final_energy": diag.energy.last(),
            "cumulative_dissipation": diag.cum_dissipation.last(),
            "diagnostics_csv": diagnostics_path.display().to_string(),
            "final_state_csv": state_path.display().to_string(),
        }),
    )?;
    match result.stop {
        StopReason::Completed => println!(
            "completed t = {} (mass drift {})",
            format_number(result.state.t),
            format_number(mass_drift),
        ),
        StopReason::Collision { t } => println!(
            "collision at t = {} (run stopped early; flagged in the report)",
            format_number(t),
        ),
    }
    println!(
        "wrote {}, {}, {}",
        diagnostics_path.display(),
        state_path.display(),
        report_path.display()
    );
    Ok(())
}

fn stop_label(stop: &StopReason) -> &'static str {
    match stop {
        StopReason::Completed => "completed",
        StopReason::Collision { .. } => "collision",
    }
}

fn collision_t(stop: &StopReason) -> Option<f64> {
    match stop {
        StopReason::Completed => None,
        StopReason::Collision { t } => Some(*t),
    }
}

fn ode_stop_label(stop: &OdeStop) -> &'static str {
    match stop {
        OdeStop::Completed => "completed",
        OdeStop::Collision { .. } => "collision",
    }
}

fn ode_collision_t(stop: &OdeStop) -> Option<f64> {
    match stop {
        OdeStop::Completed => None,
        OdeStop::Collision { t } => Some(*t),
    }
}

fn cmd_layers(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let model = config.ode_model()?;
    let potential = config.potential.build()?;
    let damping = config.damping.build(&potential)?;
    let epsilon = config.epsilon()?;
    let mut params =
        layerdyn::layer_ode::OdeParams::new(epsilon, config.tau, potential.clone(), &damping)?;
    params.alpha_mode = config.alpha_mode.into();
    let h0 = config.initial_layers(&potential)?;
    let hdot0 = config.ode_hdot0(h0.len())?;
    let trajectory = integrate_layers(
        model,
        &params,
        &h0,
        hdot0.as_deref(),
        &IntegrateOptions {
            t_end: config.t_end()?,
            record_dt: config.record_dt()?,
            rtol: config.rtol,
            rho: config.rho,
        },
    )?;

    // Phase lengths and the barrier value per record; NaN where a record
    // is no longer a valid layer vector (the appended collision row can
    // sit outside the admissible set).
    let lengths_psi: Vec<(f64, f64, f64)> = trajectory
        .h
        .iter()
        .map(|h| match LayerVector::new(h.clone()) {
            Ok(vector) => {
                let (plus, minus) = lengths_lpm(&vector);
                let psi = barrier_psi(&vector, epsilon, &potential, params.alpha_mode)
                    .unwrap_or(f64::NAN);
                (plus, minus, psi)
            }
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        })
        .collect();
    let csv = trajectory_csv(&trajectory, &lengths_psi);
    let trajectory_path = out_path(
        &args.out_dir,
        config.trajectory_path.as_ref(),
        "trajectory.csv",
    );
    fs::create_dir_all(&args.out_dir)?;
    fs::write(&trajectory_path, csv)?;

    let report_path = out_path(&args.out_dir, config.report_path.as_ref(), "report.json");
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "layers",
            "stopped": ode_stop_label(&trajectory.stop),
            "collision_t": ode_collision_t(&trajectory.stop),
            "t_final": trajectory.t.last(),
            "final_layers": trajectory.h.last(),
            "trajectory_csv": trajectory_path.display().to_string(),
        }),
    )?;
    match trajectory.stop {
        OdeStop::Completed => println!(
            "completed t = {}",
            format_number(*trajectory.t.last().unwrap())
        ),
        OdeStop::Collision { t } => println!(
            "collision at t = {} (run stopped early; flagged in the report)",
            format_number(t),
        ),
    }
    println!(
        "wrote {} and {}",
        trajectory_path.display(),
        report_path.display()
    );
    Ok(())
}

fn cmd_compare(args: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let model = config.pde_model()?;
    let potential = config.potential.build()?;
    let damping = config.damping.build(&potential)?;
    let epsilon = config.epsilon()?;
    let h0 = config.initial_layers(&potential)?;
    let report = compare_pde_ode(&CompareConfig {
        model,
        params: ModelParams {
            epsilon,
            tau: config.tau,
            potential,
            damping,
        },
        h0,
        n: config.n,
        t_end: config.t_end()?,
        record_dt: config.record_dt()?,
        rtol: config.rtol,
        rho: config.rho,
    })?;

    let mut header = vec!["t".to_string()];
    for j in 1..=report.layer_count {
        header.push(format!("pde_h_{j}"));
    }
    for j in 1..=report.layer_count {
        header.push(format!("ode_h_{j}"));
    }
    let rows: Vec<Vec<f64>> = (0..report.t.len())
        .map(|k| {
            let mut row = vec![report.t[k]];
            row.extend_from_slice(&report.pde_h[k]);
            row.extend_from_slice(&report.ode_h[k]);
            row
        })
        .collect();
    let csv_path = out_path(
        &args.out_dir,
        config.trajectory_path.as_ref(),
        "comparison.csv",
    );
    write_csv(&csv_path, &header, &rows)?;

    let report_path = out_path(&args.out_dir, config.report_path.as_ref(), "report.json");
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "compare",
            "per_layer_sup_error": report.per_layer_sup_error,
            "t_common": report.t.last(),
            "pde_collision_t": report.pde_collision,
            "ode_collision_t": report.ode_collision,
            "comparison_csv": csv_path.display().to_string(),
        }),
    )?;
    let worst = report
        .per_layer_sup_error
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b));
    println!(
        "compared {} layers over t in [0, {}]: worst sup error {}",
        report.layer_count,
        format_number(*report.t.last().unwrap()),
        format_number(worst),
    );
    println!("wrote {} and {}", csv_path.display(), report_path.display());
    Ok(())
}

fn cmd_sweep_metastability(args: &SweepArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let potential = config.potential.build()?;
    let epsilons = require(config.epsilons.clone(), "epsilons")?;
    let h0 = config.initial_layers(&potential)?;
    let method = config.method.unwrap_or(SweepMethodName::Ode);
    let fit = metastability_sweep(&MetastabilityConfig {
        epsilons,
        h0,
        potential,
        method: method.into(),
        n: config.n,
        t_end: config.t_end()?,
        record_dt: config.record_dt()?,
        rtol: config.rtol,
        rho: config.rho,
        threads: args.threads,
    })?;

    let header = ["epsilon", "inv_epsilon", "speed", "log_speed_over_eps"].map(String::from);
    let rows: Vec<Vec<f64>> = fit
        .samples
        .iter()
        .map(|s| vec![s.epsilon, s.inv_epsilon, s.speed, s.log_speed])
        .collect();
    let csv_path = out_path(
        &args.common.out_dir,
        config.trajectory_path.as_ref(),
        "metastability.csv",
    );
    write_csv(&csv_path, &header, &rows)?;
    let report_path = out_path(
        &args.common.out_dir,
        config.report_path.as_ref(),
        "report.json",
    );
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "sweep-metastability",
            "slope": fit.slope,
            "intercept": fit.intercept,
            "predicted_slope": fit.predicted_slope,
            "relative_deviation": fit.relative_deviation,
            "min_gap": fit.min_gap,
            "samples_csv": csv_path.display().to_string(),
        }),
    )?;
    print!("{}", render_table(&header, &rows));
    println!(
        "fitted slope {} vs predicted {} (relative deviation {})",
        format_number(fit.slope),
        format_number(fit.predicted_slope),
        format_number(fit.relative_deviation),
    );
    println!("wrote {} and {}", csv_path.display(), report_path.display());
    Ok(())
}

fn cmd_sweep_asymptotics(args: &SweepArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let potential = config.potential.build()?;
    let ratios = require(config.ratios.clone(), "ratios")?;
    let sign = config.sign.unwrap_or(1.0);
    let rows = layerdyn::experiments::asymptotics_sweep(&ratios, &potential, sign, args.threads)?;

    let header = [
        "r",
        "beta_exact",
        "beta_asymptotic",
        "beta_rel_error",
        "alpha_exact",
        "alpha_asymptotic",
        "alpha_rel_error",
    ]
    .map(String::from);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            vec![
                row.r,
                row.beta_exact,
                row.beta_asymptotic,
                row.beta_rel_error,
                row.alpha_exact,
                row.alpha_asymptotic,
                row.alpha_rel_error,
            ]
        })
        .collect();
    let csv_path = out_path(
        &args.common.out_dir,
        config.trajectory_path.as_ref(),
        "asymptotics.csv",
    );
    write_csv(&csv_path, &header, &table)?;
    let report_path = out_path(
        &args.common.out_dir,
        config.report_path.as_ref(),
        "report.json",
    );
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "sweep-asymptotics",
            "sign": sign,
            "rows": table,
            "rows_csv": csv_path.display().to_string(),
        }),
    )?;
    print!("{}", render_table(&header, &table));
    println!("wrote {} and {}", csv_path.display(), report_path.display());
    Ok(())
}

fn cmd_sweep_tau(args: &SweepArgs) -> Result<(), CliError> {
    let config = load_config(&args.common.config)?;
    let potential = config.potential.build()?;
    let damping = config.damping.build(&potential)?;
    let taus = require(config.taus.clone(), "taus")?;
    let h0 = config.initial_layers(&potential)?;
    let rows = tau_limit_study(&TauStudyConfig {
        taus,
        epsilon: config.epsilon()?,
        h0,
        potential,
        damping,
        t_end: config.t_end()?,
        record_dt: config.record_dt()?,
        rtol: config.rtol,
        rho: config.rho,
        threads: args.threads,
    })?;

    let header = ["tau", "distance", "halving_ratio"].map(String::from);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| vec![row.tau, row.distance, row.ratio.unwrap_or(f64::NAN)])
        .collect();
    let csv_path = out_path(
        &args.common.out_dir,
        config.trajectory_path.as_ref(),
        "tau_study.csv",
    );
    write_csv(&csv_path, &header, &table)?;
    let report_path = out_path(
        &args.common.out_dir,
        config.report_path.as_ref(),
        "report.json",
    );
    write_json(
        &report_path,
        &serde_json::json!({
            "config": config_value(&config),
            "operation": "sweep-tau",
            "rows": table,
            "rows_csv": csv_path.display().to_string(),
        }),
    )?;
    print!("{}", render_table(&header, &table));
    println!("wrote {} and {}", csv_path.display(), report_path.display());
    Ok(())
}
