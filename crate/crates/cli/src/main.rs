//! Scenario runner CLI.
//!
//! Exit codes: 0 success, 1 run finished but failed (violations or the
//! final position missed the last waypoint), 2 bad config or I/O, 3 the
//! simulation itself broke down numerically.

use clap::{Parser, Subcommand};
use lbf_control::attitude::AttitudeStrategy;
use lbf_control::scenario::{
    compare_strategies, parse_config_with_overrides, run_scenario, ConfigError, RunError,
    RunSummary, ScenarioConfig, COMPARE_HEADER,
};
use lbf_control::thrust::ThrustStrategy;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_FAILED_RUN: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lbf-sim",
    version,
    about = "Closed-loop multirotor scenarios with lateral-thrust-aware attitude control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write telemetry CSV.
    Run {
        /// Scenario TOML file.
        config: PathBuf,
        /// Telemetry CSV path (default: output_path from the config, else
        /// the config file name with a .csv extension, in the current dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config value by dotted path, e.g.
        /// `limits.f_lmax=2.5` or `waypoints.0.yaw_deg=45`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the mission under all five attitude strategies and compare.
    Compare {
        config: PathBuf,
        /// Comparison CSV path (default: config name with _compare.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Parse and validate a scenario, printing what it resolves to.
    Check {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the vehicle's lateral thrust capacity around the compass.
    Fmax {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            out,
            overrides,
        } => cmd_run(&config, out.as_deref(), &overrides),
        Command::Compare {
            config,
            out,
            overrides,
        } => cmd_compare(&config, out.as_deref(), &overrides),
        Command::Check { config, overrides } => cmd_check(&config, &overrides),
        Command::Fmax { config, overrides } => cmd_fmax(&config, &overrides),
    };
    match code {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Io(std::io::Error),
    Run(RunError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Run(RunError::Sim(_)) => EXIT_NUMERICAL,
            CliError::Run(RunError::Controller(_)) => EXIT_CONFIG,
            CliError::Run(RunError::Io(_)) => EXIT_CONFIG,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        CliError::Run(e)
    }
}

fn load(config_path: &Path, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(config_path)?;
    let mut pairs = Vec::with_capacity(overrides.len());
    for item in overrides {
        let Some((key, value)) = item.split_once('=') else {
            return Err(CliError::Config(ConfigError::Validation {
                field: item.clone(),
                message: "override must look like key.path=value".to_string(),
            }));
        };
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(parse_config_with_overrides(&text, &pairs)?)
}

/// Default output file: the config file's name with a new extension, in
/// the current directory (not next to the config).
fn default_out(config_path: &Path, suffix: &str) -> PathBuf {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    PathBuf::from(format!("{stem}{suffix}"))
}

fn create_output(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn describe_attitude(strategy: &AttitudeStrategy) -> String {
    match *strategy {
        AttitudeStrategy::ZeroTilt => "zero_tilt".to_string(),
        AttitudeStrategy::FullTilt => "full_tilt".to_string(),
        AttitudeStrategy::MinimumTilt { f_lmax } => {
            format!("minimum_tilt (f_lmax {f_lmax:.3} N)")
        }
        AttitudeStrategy::FixedTilt {
            lambda_des,
            kappa_des,
        } => format!(
            "fixed_tilt (tilt {:.2} deg, azimuth {:.2} deg)",
            lambda_des.to_degrees(),
            kappa_des.to_degrees()
        ),
        AttitudeStrategy::FixedAttitude { phi_des, theta_des } => format!(
            "fixed_attitude (roll {:.2} deg, pitch {:.2} deg)",
            phi_des.to_degrees(),
            theta_des.to_degrees()
        ),
    }
}

fn describe_thrust(strategy: ThrustStrategy) -> &'static str {
    match strategy {
        ThrustStrategy::Passthrough => "passthrough",
        ThrustStrategy::KeepVertical => "keep_vertical",
        ThrustStrategy::KeepAccelDirection => "keep_accel_direction",
    }
}

fn print_summary(cfg: &ScenarioConfig, summary: &RunSummary, out_path: &Path) {
    println!(
        "strategy: {} + {}",
        describe_attitude(&cfg.attitude_strategy),
        describe_thrust(cfg.thrust_strategy)
    );
    println!(
        "telemetry: {} ({} rows)",
        out_path.display(),
        summary.rows_written
    );
    let times: Vec<String> = summary
        .capture_times
        .iter()
        .map(|t| format!("{t:.2} s"))
        .collect();
    println!(
        "waypoints captured: {}/{}{}",
        summary.capture_times.len(),
        cfg.mission.len(),
        if times.is_empty() {
            String::new()
        } else {
            format!(" at {}", times.join(", "))
        }
    );
    println!(
        "final error: {:.3} m (capture radius {:.3} m)",
        summary.final_error, summary.final_capture_radius
    );
    println!("max tilt: {:.2} deg", summary.max_tilt_deg);
    println!("rms position error: {:.3} m", summary.rms_pos_error);
    println!("energy: {:.1} N^2 s", summary.energy);
    println!("violations: {}", summary.violation_count);
    for v in &summary.violations {
        println!("  t={:.3}: {}", v.time, v.message);
    }
    if summary.violations.len() < summary.violation_count {
        println!(
            "  ... and {} more",
            summary.violation_count - summary.violations.len()
        );
    }
}

fn cmd_run(
    config_path: &Path,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<ExitCode, CliError> {
    let cfg = load(config_path, overrides)?;
    let out_path = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| default_out(config_path, ".csv"));
    let mut writer = create_output(&out_path)?;
    let summary = run_scenario(&cfg, &mut writer)?;
    writer.flush()?;
    print_summary(&cfg, &summary, &out_path);
    if summary.success() {
        println!("result: OK");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("result: FAILED");
        Ok(ExitCode::from(EXIT_FAILED_RUN))
    }
}

fn cmd_compare(
    config_path: &Path,
    out: Option<&Path>,
    overrides: &[String],
) -> Result<ExitCode, CliError> {
    let cfg = load(config_path, overrides)?;
    let rows = compare_strategies(&cfg)?;
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_out(config_path, "_compare.csv"));
    let mut writer = create_output(&out_path)?;
    writeln!(writer, "{COMPARE_HEADER}").map_err(CliError::Io)?;
    for row in &rows {
        row.write_csv(&mut writer).map_err(CliError::Io)?;
    }
    writer.flush()?;

    println!(
        "{:<15} {:>12} {:>14} {:>14} {:>12} {:>10}",
        "strategy", "max_tilt_deg", "rms_error_m", "energy_N^2s", "final_err_m", "completed"
    );
    for row in &rows {
        println!(
            "{:<15} {:>12.3} {:>14.4} {:>14.1} {:>12.4} {:>10}",
            row.label,
            row.max_tilt_deg,
            row.rms_pos_error,
            row.energy,
            row.final_error,
            row.completed
        );
    }
    println!("comparison written to {}", out_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(config_path: &Path, overrides: &[String]) -> Result<ExitCode, CliError> {
    let cfg = load(config_path, overrides)?;
    println!("config OK: {}", config_path.display());
    println!(
        "  strategy: {} + {}",
        describe_attitude(&cfg.attitude_strategy),
        describe_thrust(cfg.thrust_strategy)
    );
    println!(
        "  vehicle: mass {:.3} kg, u_max {:.2} N, hover {:.2} N",
        cfg.vehicle.mass,
        cfg.vehicle.u_max,
        cfg.vehicle.mass * cfg.vehicle.gravity
    );
    println!(
        "  limits: f_lmax {:.3} N, f_hover {:.3} N",
        cfg.limits.f_lmax, cfg.limits.f_hover
    );
    println!(
        "  mission: {} waypoint(s) over {:.1} s (dt_plant {} s, dt_control {} s)",
        cfg.mission.len(),
        cfg.duration,
        cfg.dt_plant,
        cfg.dt_control
    );
    for (i, leg) in cfg.mission.iter().enumerate() {
        let p = &leg.waypoint.position;
        println!(
            "    {}: [{:.2}, {:.2}, {:.2}] yaw {:.1} deg{}",
            i,
            p.x(),
            p.y(),
            p.z(),
            leg.waypoint.yaw.to_degrees(),
            if leg.attitude_override.is_some() {
                " (attitude override)"
            } else {
                ""
            }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fmax(config_path: &Path, overrides: &[String]) -> Result<ExitCode, CliError> {
    let cfg = load(config_path, overrides)?;
    let hover_fz = -cfg.vehicle.mass * cfg.vehicle.gravity;
    println!(
        "lateral thrust capacity at hover (u_max {:.2} N):",
        cfg.vehicle.u_max
    );
    println!("{:>11} {:>12}", "azimuth_deg", "capacity_N");
    let samples = 36;
    let mut min_capacity = f64::INFINITY;
    let mut max_capacity = 0.0f64;
    for i in 0..samples {
        let angle = (i as f64) / (samples as f64) * std::f64::consts::TAU;
        let dir = nalgebra::Vector2::new(angle.cos(), angle.sin());
        let capacity = lbf_control::allocation::max_lateral_thrust(
            &cfg.vehicle.geom,
            cfg.vehicle.u_max,
            hover_fz,
            &dir,
        );
        min_capacity = min_capacity.min(capacity);
        max_capacity = max_capacity.max(capacity);
        println!("{:>11.1} {:>12.4}", angle.to_degrees(), capacity);
    }
    println!("min capacity: {min_capacity:.4} N");
    println!("max capacity: {max_capacity:.4} N");
    println!(
        "suggested f_lmax (90% of min): {:.4} N",
        lbf_control::scenario::derived_f_lmax(&cfg.vehicle)
    );
    Ok(ExitCode::SUCCESS)
}
