use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sarrus_core::analysis::{
    find_equilibria, identify_coulomb, phase_portrait, proportion_grid, sensitivity, Equilibrium, PortraitSpec,
    SensitivityParameter,
};
use sarrus_core::config::RunConfig;
use sarrus_core::dynamics::{JumpSummary, Termination};
use sarrus_core::elastic::{fit_gaussian, fit_mooney};
use sarrus_core::geometry::LegAngleInterval;
use sarrus_core::io::{
    read_force_stretch_csv, to_json_string, write_portrait_csv, write_sensitivity_csv, write_thrust_csv,
    write_trajectory_csv,
};
use sarrus_core::screws::{build_sarrus, mobility_report, Joint};
use sarrus_core::thrust::thrust_profile;
use sarrus_core::Error;

/// Legs per robot; per-leg results are tripled for whole-robot totals.
const LEGS: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(name = "sarrus", version, about = "Simulation and design analysis for a Sarrus-linkage jumping robot")]
struct Cli {
    /// JSON run configuration; the laboratory demonstrator is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` from the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set masses.mu_C=0`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one jump: trajectory.csv and summary.json.
    Simulate,
    /// Release trajectories in the (theta, theta_dot) plane: portrait_NNN.csv and portrait_index.json.
    PhasePortrait(PortraitArgs),
    /// Undamped efficiency against scaled parameters: sensitivity.csv.
    Sensitivity(SensitivityArgs),
    /// Fit a drive law to `lambda,force_N` data: fit.json.
    Fit(FitArgs),
    /// Coulomb coefficient reproducing a measured take-off velocity: identify_mu.json.
    IdentifyMu(IdentifyArgs),
    /// Thrust against leg angle: thrust_profile.csv.
    ThrustProfile(ThrustArgs),
    /// Screw-theory mobility of an n-sided Sarrus mechanism: mobility.json.
    Mobility(MobilityArgs),
}

#[derive(Args, Debug)]
struct PortraitArgs {
    /// Release angles [rad], comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = PortraitSpec::default().release_angles)]
    angles: Vec<f64>,
    /// Span integrated in each time direction [s].
    #[arg(long, default_value_t = 0.3)]
    duration: f64,
    #[arg(long, default_value_t = 1e-5)]
    step: f64,
    /// Include joint friction (forward time only).
    #[arg(long)]
    damped: bool,
}

#[derive(Args, Debug)]
struct SensitivityArgs {
    /// Parameter to scale (g, m1..m5, I1, I2, a, p, q, theta0) or `all`. Repeatable.
    #[arg(long = "parameter", default_value = "all")]
    parameters: Vec<String>,
    /// Proportions evenly spaced on [0, 1].
    #[arg(long, default_value_t = 51)]
    points: usize,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FitModel {
    MooneyRivlin,
    Gaussian,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV file with header `lambda,force_N`.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = FitModel::MooneyRivlin)]
    model: FitModel,
    /// Temperature for the Gaussian law [K].
    #[arg(long, default_value_t = 296.0)]
    temperature: f64,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    /// Measured take-off velocity [m/s].
    #[arg(long)]
    target: f64,
}

#[derive(Args, Debug)]
struct ThrustArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0.01)]
    theta_min: f64,
    #[arg(long, default_value_t = 1.56)]
    theta_max: f64,
}

#[derive(Args, Debug)]
struct MobilityArgs {
    /// Number of chains.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Chain-plane azimuths [deg], comma separated; evenly spaced when omitted (0 and 90 for n = 2).
    #[arg(long, value_delimiter = ',')]
    azimuths: Vec<f64>,
    /// Leg angle [rad].
    #[arg(long, default_value_t = 0.8)]
    theta: f64,
    /// Link length [m]; defaults to the configured leg segment.
    #[arg(long)]
    link: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    radius: f64,
    /// Joint set to lock, e.g. `0:B` or `0:B,1:B`. Repeatable; defaults to `0:B`.
    #[arg(long = "lock")]
    locks: Vec<String>,
}

/// Failure that maps to exit code 2.
#[derive(Debug)]
struct Terminal(String);

impl std::fmt::Display for Terminal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Terminal {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Terminal>().is_some() => {
            eprintln!("sarrus: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("sarrus: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path, &cli.set)?,
        None => RunConfig::demonstrator_with(&cli.set)?,
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.output_dir));
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;

    match cli.command {
        Command::Simulate => simulate(&config, &out),
        Command::PhasePortrait(args) => portrait(&config, &out, args),
        Command::Sensitivity(args) => sweep(&config, &out, args),
        Command::Fit(args) => fit(&config, &out, args),
        Command::IdentifyMu(args) => identify(&config, &out, args),
        Command::ThrustProfile(args) => thrust(&config, &out, args),
        Command::Mobility(args) => mobility(&config, &out, args),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, to_json_string(value)?).with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Serialize)]
struct SummaryFile {
    #[serde(flatten)]
    summary: JumpSummary,
    legs: u32,
    robot_mass_kg: f64,
    #[serde(rename = "robot_E_P0_J")]
    robot_e_p0: f64,
    #[serde(rename = "robot_E_K_J")]
    robot_e_k: Option<f64>,
    #[serde(rename = "robot_friction_work_J")]
    robot_friction_work: f64,
}

fn simulate(config: &RunConfig, out: &Path) -> Result<()> {
    let d = config.dynamics();
    let trajectory = d.integrate(&config.options)?;
    let summary = sarrus_core::dynamics::summarise(&d, &trajectory);
    write_trajectory_csv(create(out, "trajectory.csv")?, &trajectory.rows)?;
    write_json(
        out,
        "summary.json",
        &SummaryFile {
            summary,
            legs: LEGS as u32,
            robot_mass_kg: LEGS * config.masses.total_mass(),
            robot_e_p0: LEGS * summary.e_p0,
            robot_e_k: summary.e_k.map(|e| LEGS * e),
            robot_friction_work: LEGS * summary.friction_work,
        },
    )?;
    match summary.termination {
        Termination::TakeOff => {
            println!(
                "take-off at {:.4} s, v0 = {:.4} m/s, eta = {:.2} %",
                summary.t_off.unwrap_or_default(),
                summary.v0.unwrap_or_default(),
                summary.eta.unwrap_or_default()
            );
            Ok(())
        }
        other => Err(Terminal(format!("no take-off: {}", other.as_str())).into()),
    }
}

#[derive(Serialize)]
struct PortraitEntry {
    file: String,
    theta0: f64,
    damped: bool,
    status: sarrus_core::analysis::PortraitStatus,
    points: usize,
}

#[derive(Serialize)]
struct PortraitIndex {
    equilibria: Vec<Equilibrium>,
    trajectories: Vec<PortraitEntry>,
}

fn portrait(config: &RunConfig, out: &Path, args: PortraitArgs) -> Result<()> {
    let d = config.dynamics();
    let spec = PortraitSpec {
        release_angles: args.angles,
        duration: args.duration,
        step: args.step,
        damped: args.damped,
    };
    let trajectories = phase_portrait(&d, &spec)?;
    let mut entries = Vec::with_capacity(trajectories.len());
    for (i, t) in trajectories.iter().enumerate() {
        let file = format!("portrait_{i:03}.csv");
        write_portrait_csv(create(out, &file)?, t)?;
        entries.push(PortraitEntry {
            file,
            theta0: t.theta0,
            damped: t.damped,
            status: t.status,
            points: t.points.len(),
        });
    }
    write_json(
        out,
        "portrait_index.json",
        &PortraitIndex {
            equilibria: find_equilibria(&d, &LegAngleInterval::full()),
            trajectories: entries,
        },
    )
}

fn sweep(config: &RunConfig, out: &Path, args: SensitivityArgs) -> Result<()> {
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    let mut params = Vec::new();
    for p in &args.parameters {
        if p == "all" {
            params.extend(SensitivityParameter::ALL);
        } else {
            params.push(p.parse::<SensitivityParameter>()?);
        }
    }
    let grid = proportion_grid(args.points);
    let d = config.dynamics();
    let curves = params
        .into_iter()
        .map(|p| sensitivity(&d, &config.options, p, &grid))
        .collect::<Result<Vec<_>, Error>>()?;
    write_sensitivity_csv(create(out, "sensitivity.csv")?, &curves)?;
    Ok(())
}

fn fit(config: &RunConfig, out: &Path, args: FitArgs) -> Result<()> {
    let file = File::open(&args.data).with_context(|| format!("cannot read {}", args.data.display()))?;
    let data = read_force_stretch_csv(file)?;
    let value = match args.model {
        FitModel::MooneyRivlin => {
            let f = fit_mooney(&data, config.geometry.area, config.geometry.l0)?;
            serde_json::json!({
                "model": "mooney_rivlin",
                "C1": f.c1,
                "C2": f.c2,
                "rmse": f.quality.rmse,
                "r_squared": f.quality.r_squared,
                "samples": data.len(),
            })
        }
        FitModel::Gaussian => {
            let f = fit_gaussian(&data, args.temperature)?;
            serde_json::json!({
                "model": "gaussian",
                "C0": f.c0,
                "T": args.temperature,
                "rmse": f.quality.rmse,
                "r_squared": f.quality.r_squared,
                "samples": data.len(),
            })
        }
    };
    write_json(out, "fit.json", &value)
}

fn identify(config: &RunConfig, out: &Path, args: IdentifyArgs) -> Result<()> {
    match identify_coulomb(&config.dynamics(), &config.options, args.target) {
        Ok(id) => {
            println!("mu_C = {:.6e}", id.coulomb);
            write_json(out, "identify_mu.json", &id)
        }
        Err(Error::NoSolution(msg)) => Err(Terminal(msg).into()),
        Err(e) => Err(e.into()),
    }
}

fn thrust(config: &RunConfig, out: &Path, args: ThrustArgs) -> Result<()> {
    let interval = LegAngleInterval::new(args.theta_min, args.theta_max)?;
    let profile = thrust_profile(
        &config.geometry,
        &config.model(),
        &interval,
        args.samples,
        config.options.derivative,
    )?;
    write_thrust_csv(create(out, "thrust_profile.csv")?, &profile)?;
    Ok(())
}

fn parse_locks(spec: &str) -> Result<Vec<(usize, Joint)>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (chain, joint) = item
                .trim()
                .split_once(':')
                .with_context(|| format!("lock `{item}` is not of the form CHAIN:JOINT"))?;
            Ok((chain.parse::<usize>()?, joint.parse::<Joint>()?))
        })
        .collect()
}

fn mobility(config: &RunConfig, out: &Path, args: MobilityArgs) -> Result<()> {
    let azimuths: Vec<f64> = if args.azimuths.is_empty() {
        if args.n == 2 {
            vec![0.0, 90.0]
        } else {
            (0..args.n).map(|i| 360.0 * i as f64 / args.n as f64).collect()
        }
    } else {
        args.azimuths.clone()
    };
    let radians: Vec<f64> = azimuths.iter().map(|d| d.to_radians()).collect();
    let mech = build_sarrus(
        args.n,
        &radians,
        args.link.unwrap_or(config.geometry.a),
        args.theta,
        args.radius,
    )?;
    let mut lock_sets = vec![Vec::new()];
    if args.locks.is_empty() {
        lock_sets.push(vec![(0, Joint::B)]);
    } else {
        for l in &args.locks {
            lock_sets.push(parse_locks(l)?);
        }
    }
    let report = mobility_report(&mech, &lock_sets)?;
    println!(
        "n = {}, constraint rank = {}, dof = {}",
        report.n, report.constraint_rank, report.dof
    );
    write_json(out, "mobility.json", &report)
}
