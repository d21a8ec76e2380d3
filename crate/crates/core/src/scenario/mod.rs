//! Scenario execution: closed-loop missions driven by config files.
//!
//! A scenario runs the cascade controller against the rigid-body plant at
//! two rates: the plant integrates every `dt_plant`, the controller runs
//! every `dt_control` (an integer multiple) with its motor command held
//! between updates. One telemetry row is logged per control step. The
//! mission is a waypoint list; a waypoint is captured once the vehicle
//! stays inside its capture radius for its hold time, and the run then
//! moves to the next one.

pub mod config;
pub mod telemetry;

pub use config::{
    apply_override, derived_f_lmax, load_config, parse_config, parse_config_with_overrides,
    ConfigError, MissionLeg, ScenarioConfig,
};
pub use telemetry::{TelemetryRow, CSV_HEADER};

use crate::attitude::AttitudeStrategy;
use crate::controller::{CascadeController, ControllerError, FullPoseSetpoint};
use crate::sim::{SimError, Simulator};
use crate::thrust::ThrustStrategy;
use std::io::{self, Write};
use thiserror::Error;

/// Logged lateral norms may exceed the bound by at most this much (N);
/// anything larger is a violation.
pub const LATERAL_TOLERANCE: f64 = 1e-9;

/// Attitude matrices logged to telemetry must be orthonormal within this
/// defect.
pub const ATTITUDE_DEFECT_LIMIT: f64 = 1e-9;

/// Violations are counted exactly but only this many are kept verbatim.
const MAX_RECORDED_VIOLATIONS: usize = 100;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error("cannot write telemetry: {0}")]
    Io(#[from] io::Error),
}

/// One broken runtime invariant, stamped with simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub time: f64,
    pub message: String,
}

/// What a run did, for reporting and exit-code decisions.
#[derive(Debug, Clone)]
pub struct RunSummary {
    /// Distance from the final state to the last waypoint, m.
    pub final_error: f64,
    /// Largest vehicle tilt seen at any control step, deg.
    pub max_tilt_deg: f64,
    pub rows_written: usize,
    /// First [`MAX_RECORDED_VIOLATIONS`] violations, in time order.
    pub violations: Vec<Violation>,
    /// Total violations, including ones not recorded verbatim.
    pub violation_count: usize,
    /// Capture time of each waypoint reached, s.
    pub capture_times: Vec<f64>,
    /// True when every waypoint was captured.
    pub completed: bool,
    /// RMS distance to the active waypoint over all control steps, m.
    pub rms_pos_error: f64,
    /// Sum of squared motor thrusts integrated over time, N^2 s.
    pub energy: f64,
    /// Capture radius of the last waypoint, m (the success threshold).
    pub final_capture_radius: f64,
}

impl RunSummary {
    /// Success means no violations and a final position inside the last
    /// waypoint's capture radius.
    pub fn success(&self) -> bool {
        self.violation_count == 0 && self.final_error < self.final_capture_radius
    }
}

/// Runs one scenario, streaming telemetry CSV (header plus one row per
/// control step) into `out`. Pass [`io::sink()`] to discard telemetry.
pub fn run_scenario(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<RunSummary, RunError> {
    let sim = Simulator::new(cfg.vehicle.clone())?;
    let mut controller = CascadeController::new(
        cfg.gains.clone(),
        cfg.attitude_strategy,
        cfg.thrust_strategy,
        cfg.limits,
    )?;
    let (mut state, mut command, _) = sim.trim_hover();

    writeln!(out, "{CSV_HEADER}")?;

    let steps_per_control = cfg.steps_per_control();
    let total_steps = (cfg.duration / cfg.dt_plant).round() as usize;
    let bounding_active = cfg.thrust_strategy != ThrustStrategy::Passthrough;

    let mut leg = 0usize;
    let mut inside_since: Option<f64> = None;
    let mut capture_times = Vec::new();
    let mut completed = false;

    let mut rows_written = 0usize;
    let mut violations = Vec::new();
    let mut violation_count = 0usize;
    let mut max_tilt = 0.0f64;
    let mut error_sq_sum = 0.0f64;
    let mut control_steps = 0usize;
    let mut energy = 0.0f64;

    let record = |violations: &mut Vec<Violation>,
                  violation_count: &mut usize,
                  time: f64,
                  message: String| {
        *violation_count += 1;
        if violations.len() < MAX_RECORDED_VIOLATIONS {
            violations.push(Violation { time, message });
        }
    };

    for step in 0..total_steps {
        if step % steps_per_control == 0 {
            let target = &cfg.mission[leg];
            let setpoint = FullPoseSetpoint {
                position: target.waypoint.position,
                yaw: target.waypoint.yaw,
                attitude_override: target.attitude_override,
            };
            let output = controller.control_step(
                &state,
                &setpoint,
                &cfg.vehicle,
                sim.allocation(),
                cfg.dt_control,
            );

            if bounding_active && output.thrust.lateral_norm > cfg.limits.f_lmax + LATERAL_TOLERANCE
            {
                record(
                    &mut violations,
                    &mut violation_count,
                    state.time,
                    format!(
                        "lateral thrust {:.9} N exceeds bound {:.9} N",
                        output.thrust.lateral_norm, cfg.limits.f_lmax
                    ),
                );
            }

            let defect = state.attitude_body_to_inertial().orthonormality_defect();
            if defect > ATTITUDE_DEFECT_LIMIT {
                // Never log a row whose attitude is not a rotation.
                record(
                    &mut violations,
                    &mut violation_count,
                    state.time,
                    format!("attitude orthonormality defect {defect:.3e}"),
                );
            } else {
                TelemetryRow::from_control_step(&state, &output).write_csv(&mut *out)?;
                rows_written += 1;
            }

            max_tilt = max_tilt.max(state.tilt());
            let error = (state.position - target.waypoint.position).norm();
            error_sq_sum += error * error;
            control_steps += 1;
            energy += output
                .motors
                .command
                .thrusts
                .iter()
                .map(|u| u * u)
                .sum::<f64>()
                * cfg.dt_control;

            // Capture bookkeeping runs at the control rate: the vehicle
            // must stay inside the radius for the full hold time.
            if !(completed && leg + 1 == cfg.mission.len()) {
                if error <= target.waypoint.capture_radius {
                    let since = *inside_since.get_or_insert(state.time);
                    if state.time - since >= target.waypoint.hold_time {
                        capture_times.push(state.time);
                        inside_since = None;
                        if leg + 1 < cfg.mission.len() {
                            leg += 1;
                        } else {
                            completed = true;
                        }
                    }
                } else {
                    inside_since = None;
                }
            }

            command = output.motors.command;
        }
        state = sim.step(&state, &command, &cfg.disturbance, cfg.dt_plant)?;
    }

    let last = cfg.mission.last().expect("validated config has waypoints");
    Ok(RunSummary {
        final_error: (state.position - last.waypoint.position).norm(),
        max_tilt_deg: max_tilt.to_degrees(),
        rows_written,
        violations,
        violation_count,
        capture_times,
        completed,
        rms_pos_error: (error_sq_sum / control_steps.max(1) as f64).sqrt(),
        energy,
        final_capture_radius: last.waypoint.capture_radius,
    })
}

/// One strategy's results in a comparison sweep.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub label: &'static str,
    pub max_tilt_deg: f64,
    pub rms_pos_error: f64,
    pub energy: f64,
    pub final_error: f64,
    pub completed: bool,
}

pub const COMPARE_HEADER: &str = "strategy,max_tilt_deg,rms_pos_error,energy,final_error,completed";

impl CompareRow {
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            self.label,
            self.max_tilt_deg,
            self.rms_pos_error,
            self.energy,
            self.final_error,
            u8::from(self.completed),
        )
    }
}

/// The five attitude strategies compared on a common mission. Fixed-tilt
/// and fixed-attitude parameters come from the base config when it already
/// uses that kind, and default to zero otherwise.
fn compare_strategy_set(cfg: &ScenarioConfig) -> [(&'static str, AttitudeStrategy); 5] {
    let fixed_tilt = match cfg.attitude_strategy {
        s @ AttitudeStrategy::FixedTilt { .. } => s,
        _ => AttitudeStrategy::FixedTilt {
            lambda_des: 0.0,
            kappa_des: 0.0,
        },
    };
    let fixed_attitude = match cfg.attitude_strategy {
        s @ AttitudeStrategy::FixedAttitude { .. } => s,
        _ => AttitudeStrategy::FixedAttitude {
            phi_des: 0.0,
            theta_des: 0.0,
        },
    };
    [
        ("zero_tilt", AttitudeStrategy::ZeroTilt),
        ("full_tilt", AttitudeStrategy::FullTilt),
        (
            "minimum_tilt",
            AttitudeStrategy::MinimumTilt {
                f_lmax: cfg.limits.f_lmax,
            },
        ),
        ("fixed_tilt", fixed_tilt),
        ("fixed_attitude", fixed_attitude),
    ]
}

/// Runs the same mission under each of the five attitude strategies and
/// collects per-strategy statistics. Telemetry is discarded; runs execute
/// sequentially so results are deterministic.
pub fn compare_strategies(cfg: &ScenarioConfig) -> Result<Vec<CompareRow>, RunError> {
    let mut rows = Vec::with_capacity(5);
    for (label, strategy) in compare_strategy_set(cfg) {
        let mut run_cfg = cfg.clone();
        run_cfg.attitude_strategy = strategy;
        let summary = run_scenario(&run_cfg, &mut io::sink())?;
        rows.push(CompareRow {
            label,
            max_tilt_deg: summary.max_tilt_deg,
            rms_pos_error: summary.rms_pos_error,
            energy: summary.energy,
            final_error: summary.final_error,
            completed: summary.completed,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    /// Two close waypoints and a short horizon keep runner tests fast.
    const SHORT_MISSION: &str = r#"
        thrust_strategy = "keep_vertical"
        duration = 8.0

        [limits]
        f_lmax = 8.0

        [attitude_strategy]
        kind = "zero_tilt"

        [[waypoints]]
        position = [0.6, 0.0, -1.2]
        hold_time = 0.3

        [[waypoints]]
        position = [0.6, 0.5, -1.0]
        hold_time = 0.3
    "#;

    #[test]
    fn short_mission_captures_both_waypoints() {
        let cfg = parse_config(SHORT_MISSION).unwrap();
        let summary = run_scenario(&cfg, &mut io::sink()).unwrap();
        assert!(
            summary.completed,
            "capture_times={:?}",
            summary.capture_times
        );
        assert_eq!(summary.capture_times.len(), 2);
        assert!(summary.capture_times[0] < summary.capture_times[1]);
        assert_eq!(summary.violation_count, 0);
        assert!(summary.success());
        assert!(summary.final_error < 0.1);
        assert!(summary.energy > 0.0);
    }

    #[test]
    fn one_row_per_control_step_plus_header() {
        let cfg = parse_config(SHORT_MISSION).unwrap();
        let mut buf = Vec::new();
        let summary = run_scenario(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let expected_rows = (8.0f64 / 0.004).round() as usize;
        assert_eq!(lines.len(), expected_rows + 1);
        assert_eq!(summary.rows_written, expected_rows);
        assert_eq!(lines[0], CSV_HEADER);
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 29);
        }
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let cfg = parse_config(SHORT_MISSION).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_scenario(&cfg, &mut a).unwrap();
        run_scenario(&cfg, &mut b).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }

    #[test]
    fn compare_covers_all_five_strategies() {
        let mut cfg = parse_config(SHORT_MISSION).unwrap();
        cfg.duration = 6.0;
        cfg.mission.truncate(1);
        let rows = compare_strategies(&cfg).unwrap();
        let labels: Vec<_> = rows.iter().map(|r| r.label).collect();
        assert_eq!(
            labels,
            [
                "zero_tilt",
                "full_tilt",
                "minimum_tilt",
                "fixed_tilt",
                "fixed_attitude"
            ]
        );
        // Parameter-free fixed strategies hold level flight, like zero-tilt.
        let by_label = |l: &str| rows.iter().find(|r| r.label == l).unwrap();
        let zero = by_label("zero_tilt");
        let fixed_att = by_label("fixed_attitude");
        assert!((zero.max_tilt_deg - fixed_att.max_tilt_deg).abs() < 1e-6);
        for row in &rows {
            assert!(row.completed, "{} did not finish: {row:?}", row.label);
        }
    }
}
