//! Scenario configuration: TOML parsing, validation, and CLI overrides.
//!
//! Files use degrees for angles (fields end in `_deg`) and SI units
//! elsewhere; everything is converted to radians on the way in. Unknown
//! keys are rejected so typos fail loudly. Most sections are optional and
//! fall back to the default desk-scale vehicle; the strategy tables and
//! waypoint list are the only parts a scenario must spell out.

use crate::allocation::max_lateral_thrust;
use crate::attitude::AttitudeStrategy;
use crate::controller::{AttitudeOverride, ControllerGains, Waypoint};
use crate::frames::{FrameId, FrameVector};
use crate::sim::{Disturbance, VehicleParams};
use crate::thrust::{ThrustLimits, ThrustStrategy};
use nalgebra::{Matrix3, Vector2, Vector3};
use serde::Deserialize;
use thiserror::Error;

/// Directions sampled when deriving the lateral bound from the geometry.
const F_LMAX_SAMPLES: usize = 36;

/// Safety factor applied to the sampled capacity minimum.
const F_LMAX_SAFETY: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// One mission leg: the waypoint plus an optional full-pose attitude
/// override that replaces the configured strategy while the leg is active.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionLeg {
    pub waypoint: Waypoint,
    pub attitude_override: Option<AttitudeOverride>,
}

/// A fully validated scenario, radians and SI throughout.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub vehicle: VehicleParams,
    pub gains: ControllerGains,
    pub limits: ThrustLimits,
    pub attitude_strategy: AttitudeStrategy,
    pub thrust_strategy: ThrustStrategy,
    pub mission: Vec<MissionLeg>,
    pub disturbance: Disturbance,
    pub duration: f64,
    pub dt_plant: f64,
    pub dt_control: f64,
    /// Reserved for future stochastic disturbances; parsed, never read.
    pub seed: u64,
    pub output_path: Option<String>,
}

impl ScenarioConfig {
    pub fn steps_per_control(&self) -> usize {
        (self.dt_control / self.dt_plant).round() as usize
    }
}

// --- raw (serde) layer ------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    duration: Option<f64>,
    dt_plant: Option<f64>,
    dt_control: Option<f64>,
    seed: Option<u64>,
    output_path: Option<String>,
    vehicle: Option<RawVehicle>,
    gains: Option<RawGains>,
    limits: Option<RawLimits>,
    attitude_strategy: RawAttitudeStrategy,
    thrust_strategy: String,
    disturbance: Option<RawDisturbance>,
    #[serde(default)]
    waypoints: Vec<RawWaypoint>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    mass: Option<f64>,
    arm_length: Option<f64>,
    rotor_tilt_deg: Option<f64>,
    inertia: Option<[f64; 3]>,
    u_max: Option<f64>,
    motor_tau: Option<f64>,
    gravity: Option<f64>,
    k_f: Option<f64>,
    k_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    pos_p: Option<[f64; 3]>,
    vel_p: Option<[f64; 3]>,
    vel_i: Option<[f64; 3]>,
    vel_d: Option<[f64; 3]>,
    vel_i_limit: Option<[f64; 3]>,
    accel_limit: Option<[f64; 3]>,
    att_p: Option<[f64; 3]>,
    rate_p: Option<[f64; 3]>,
    rate_i: Option<[f64; 3]>,
    rate_d: Option<[f64; 3]>,
    rate_i_limit: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    f_lmax: Option<f64>,
    f_hover: Option<f64>,
}

/// Strategy tables carry a `kind` plus kind-specific parameters. Serde
/// cannot combine internally-tagged enums with unknown-key rejection, so
/// the dispatch and the stray-parameter checks are manual.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttitudeStrategy {
    kind: String,
    tilt_deg: Option<f64>,
    azimuth_deg: Option<f64>,
    roll_deg: Option<f64>,
    pitch_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisturbance {
    force: Option<[f64; 3]>,
    torque: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaypoint {
    position: [f64; 3],
    yaw_deg: Option<f64>,
    hold_time: Option<f64>,
    capture_radius: Option<f64>,
    attitude_override: Option<RawOverride>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverride {
    kind: String,
    roll_deg: Option<f64>,
    pitch_deg: Option<f64>,
    tilt_deg: Option<f64>,
    azimuth_deg: Option<f64>,
}

// --- parsing ----------------------------------------------------------------

/// Parses and fully validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    validate(raw)
}

/// [`parse_config`] plus CLI-style `key.path=value` overrides applied to
/// the document tree before validation.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ScenarioConfig, ConfigError> {
    let mut doc: toml::Value = toml::from_str(text)?;
    for (path, value) in overrides {
        apply_override(&mut doc, path, value)?;
    }
    let raw: RawConfig = doc.try_into().map_err(ConfigError::Parse)?;
    validate(raw)
}

pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Sets one value in the document tree. Paths are dot-separated with
/// numeric segments indexing arrays (`waypoints.1.yaw_deg`); missing
/// tables along the way are created, missing array slots are not. Values
/// parse as TOML scalars, falling back to a plain string.
pub fn apply_override(
    doc: &mut toml::Value,
    path: &str,
    raw_value: &str,
) -> Result<(), ConfigError> {
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(invalid(path, "override path has an empty segment"));
    }
    let value = parse_scalar(raw_value);
    let mut node = doc;
    for (i, segment) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(index) = segment.parse::<usize>() {
            let Some(array) = node.as_array_mut() else {
                return Err(invalid(
                    path,
                    format!("segment '{segment}' indexes a non-array"),
                ));
            };
            let len = array.len();
            let Some(slot) = array.get_mut(index) else {
                return Err(invalid(
                    path,
                    format!("index {index} is out of bounds ({len} elements)"),
                ));
            };
            if last {
                *slot = value;
                return Ok(());
            }
            node = slot;
        } else {
            let Some(table) = node.as_table_mut() else {
                return Err(invalid(
                    path,
                    format!("segment '{segment}' indexes a non-table"),
                ));
            };
            if last {
                table.insert(segment.to_string(), value);
                return Ok(());
            }
            node = table
                .entry(segment.to_string())
                .or_insert_with(|| toml::Value::Table(Default::default()));
        }
    }
    unreachable!("loop returns on the last segment");
}

fn parse_scalar(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Lateral bound derived from the hardware: the capacity envelope minimum
/// over sampled directions at hover load, derated by a safety factor.
pub fn derived_f_lmax(vehicle: &VehicleParams) -> f64 {
    let hover_fz = -vehicle.mass * vehicle.gravity;
    let mut min_capacity = f64::INFINITY;
    for i in 0..F_LMAX_SAMPLES {
        let angle = (i as f64) / (F_LMAX_SAMPLES as f64) * std::f64::consts::TAU;
        let dir = Vector2::new(angle.cos(), angle.sin());
        let c = max_lateral_thrust(&vehicle.geom, vehicle.u_max, hover_fz, &dir);
        min_capacity = min_capacity.min(c);
    }
    F_LMAX_SAFETY * min_capacity
}

// --- validation -------------------------------------------------------------

fn validate(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let vehicle = validate_vehicle(raw.vehicle)?;
    let gains = validate_gains(raw.gains)?;
    let limits = validate_limits(raw.limits, &vehicle)?;
    let attitude_strategy = validate_attitude_strategy(&raw.attitude_strategy, limits.f_lmax)?;
    let thrust_strategy = validate_thrust_strategy(&raw.thrust_strategy)?;
    let disturbance = validate_disturbance(raw.disturbance)?;
    let mission = validate_mission(raw.waypoints)?;

    let duration = raw.duration.unwrap_or(30.0);
    if !(duration.is_finite() && duration > 0.0) {
        return Err(invalid("duration", format!("must be > 0, got {duration}")));
    }
    let dt_plant = raw.dt_plant.unwrap_or(0.001);
    if !(dt_plant.is_finite() && dt_plant > 0.0 && dt_plant <= 0.01) {
        return Err(invalid(
            "dt_plant",
            format!("must be in (0, 0.01], got {dt_plant}"),
        ));
    }
    let dt_control = raw.dt_control.unwrap_or(0.004);
    if !(dt_control.is_finite() && dt_control > 0.0) {
        return Err(invalid(
            "dt_control",
            format!("must be > 0, got {dt_control}"),
        ));
    }
    let ratio = dt_control / dt_plant;
    if (ratio - ratio.round()).abs() > 1e-6 || ratio.round() < 1.0 {
        return Err(invalid(
            "dt_control",
            format!("must be an integer multiple of dt_plant, got ratio {ratio}"),
        ));
    }

    Ok(ScenarioConfig {
        vehicle,
        gains,
        limits,
        attitude_strategy,
        thrust_strategy,
        mission,
        disturbance,
        duration,
        dt_plant,
        dt_control,
        seed: raw.seed.unwrap_or(0),
        output_path: raw.output_path,
    })
}

fn validate_vehicle(raw: Option<RawVehicle>) -> Result<VehicleParams, ConfigError> {
    let defaults = VehicleParams::default_hexarotor();
    let Some(raw) = raw else { return Ok(defaults) };
    let arm = raw.arm_length.unwrap_or(0.48);
    let tilt_deg = raw.rotor_tilt_deg.unwrap_or(30.0);
    let k_f = raw.k_f.unwrap_or(1.0);
    let k_m = raw.k_m.unwrap_or(0.016);
    let inertia = raw.inertia.unwrap_or([0.08, 0.08, 0.14]);
    let params = VehicleParams {
        mass: raw.mass.unwrap_or(defaults.mass),
        inertia: Matrix3::from_diagonal(&Vector3::new(inertia[0], inertia[1], inertia[2])),
        geom: crate::allocation::RotorGeometry::standard_hexarotor(
            arm,
            tilt_deg.to_radians(),
            k_f,
            k_m,
        ),
        u_max: raw.u_max.unwrap_or(defaults.u_max),
        motor_tau: raw.motor_tau.unwrap_or(defaults.motor_tau),
        gravity: raw.gravity.unwrap_or(defaults.gravity),
    };
    params
        .validate()
        .map_err(|e| invalid("vehicle", e.to_string()))?;
    Ok(params)
}

fn validate_gains(raw: Option<RawGains>) -> Result<ControllerGains, ConfigError> {
    let mut gains = ControllerGains::default();
    if let Some(raw) = raw {
        let assign = |field: Option<[f64; 3]>, slot: &mut Vector3<f64>| {
            if let Some(v) = field {
                *slot = Vector3::new(v[0], v[1], v[2]);
            }
        };
        assign(raw.pos_p, &mut gains.pos_p);
        assign(raw.vel_p, &mut gains.vel_p);
        assign(raw.vel_i, &mut gains.vel_i);
        assign(raw.vel_d, &mut gains.vel_d);
        assign(raw.vel_i_limit, &mut gains.vel_i_limit);
        assign(raw.accel_limit, &mut gains.accel_limit);
        assign(raw.att_p, &mut gains.att_p);
        assign(raw.rate_p, &mut gains.rate_p);
        assign(raw.rate_i, &mut gains.rate_i);
        assign(raw.rate_d, &mut gains.rate_d);
        assign(raw.rate_i_limit, &mut gains.rate_i_limit);
    }
    gains
        .validate()
        .map_err(|e| invalid("gains", e.to_string()))?;
    Ok(gains)
}

fn validate_limits(
    raw: Option<RawLimits>,
    vehicle: &VehicleParams,
) -> Result<ThrustLimits, ConfigError> {
    let raw = raw.unwrap_or(RawLimits {
        f_lmax: None,
        f_hover: None,
    });
    let f_lmax = raw.f_lmax.unwrap_or_else(|| derived_f_lmax(vehicle));
    let f_hover = raw.f_hover.unwrap_or(vehicle.mass * vehicle.gravity);
    let limits = ThrustLimits::new(f_lmax, f_hover);
    limits
        .validate()
        .map_err(|e| invalid("limits", e.to_string()))?;
    Ok(limits)
}

fn reject_strays(
    table: &str,
    kind: &str,
    strays: &[(&str, Option<f64>)],
) -> Result<(), ConfigError> {
    for (name, value) in strays {
        if value.is_some() {
            return Err(invalid(
                &format!("{table}.{name}"),
                format!("not a parameter of kind \"{kind}\""),
            ));
        }
    }
    Ok(())
}

fn validate_attitude_strategy(
    raw: &RawAttitudeStrategy,
    f_lmax: f64,
) -> Result<AttitudeStrategy, ConfigError> {
    let table = "attitude_strategy";
    let strategy = match raw.kind.as_str() {
        "zero_tilt" | "full_tilt" | "minimum_tilt" => {
            reject_strays(
                table,
                &raw.kind,
                &[
                    ("tilt_deg", raw.tilt_deg),
                    ("azimuth_deg", raw.azimuth_deg),
                    ("roll_deg", raw.roll_deg),
                    ("pitch_deg", raw.pitch_deg),
                ],
            )?;
            match raw.kind.as_str() {
                "zero_tilt" => AttitudeStrategy::ZeroTilt,
                "full_tilt" => AttitudeStrategy::FullTilt,
                // The bound is single-sourced from [limits].
                _ => AttitudeStrategy::MinimumTilt { f_lmax },
            }
        }
        "fixed_tilt" => {
            reject_strays(
                table,
                &raw.kind,
                &[("roll_deg", raw.roll_deg), ("pitch_deg", raw.pitch_deg)],
            )?;
            AttitudeStrategy::FixedTilt {
                lambda_des: raw.tilt_deg.unwrap_or(0.0).to_radians(),
                kappa_des: raw.azimuth_deg.unwrap_or(0.0).to_radians(),
            }
        }
        "fixed_attitude" => {
            reject_strays(
                table,
                &raw.kind,
                &[("tilt_deg", raw.tilt_deg), ("azimuth_deg", raw.azimuth_deg)],
            )?;
            AttitudeStrategy::FixedAttitude {
                phi_des: raw.roll_deg.unwrap_or(0.0).to_radians(),
                theta_des: raw.pitch_deg.unwrap_or(0.0).to_radians(),
            }
        }
        other => {
            return Err(invalid(
                "attitude_strategy.kind",
                format!(
                    "unknown kind \"{other}\" (expected zero_tilt, full_tilt, \
                     minimum_tilt, fixed_tilt, or fixed_attitude)"
                ),
            ));
        }
    };
    strategy
        .validate()
        .map_err(|e| invalid(table, e.to_string()))?;
    Ok(strategy)
}

fn validate_thrust_strategy(kind: &str) -> Result<ThrustStrategy, ConfigError> {
    match kind {
        "passthrough" => Ok(ThrustStrategy::Passthrough),
        "keep_vertical" => Ok(ThrustStrategy::KeepVertical),
        "keep_accel_direction" => Ok(ThrustStrategy::KeepAccelDirection),
        other => Err(invalid(
            "thrust_strategy",
            format!(
                "unknown kind \"{other}\" (expected passthrough, keep_vertical, \
                 or keep_accel_direction)"
            ),
        )),
    }
}

fn validate_disturbance(raw: Option<RawDisturbance>) -> Result<Disturbance, ConfigError> {
    let Some(raw) = raw else {
        return Ok(Disturbance::none());
    };
    let force = raw.force.unwrap_or([0.0; 3]);
    let torque = raw.torque.unwrap_or([0.0; 3]);
    let disturbance = Disturbance {
        force: FrameVector::new(force[0], force[1], force[2], FrameId::Inertial),
        torque: Vector3::new(torque[0], torque[1], torque[2]),
    };
    if !disturbance.validate() {
        return Err(invalid("disturbance", "must be finite"));
    }
    Ok(disturbance)
}

fn validate_mission(raw: Vec<RawWaypoint>) -> Result<Vec<MissionLeg>, ConfigError> {
    if raw.is_empty() {
        return Err(invalid("waypoints", "at least one waypoint is required"));
    }
    let mut mission = Vec::with_capacity(raw.len());
    for (i, wp) in raw.into_iter().enumerate() {
        let field = |name: &str| format!("waypoints.{i}.{name}");
        if wp.position.iter().any(|v| !v.is_finite()) {
            return Err(invalid(&field("position"), "must be finite"));
        }
        let yaw_deg = wp.yaw_deg.unwrap_or(0.0);
        if !yaw_deg.is_finite() {
            return Err(invalid(&field("yaw_deg"), "must be finite"));
        }
        let hold_time = wp.hold_time.unwrap_or(0.5);
        if !(hold_time.is_finite() && hold_time >= 0.0) {
            return Err(invalid(
                &field("hold_time"),
                format!("must be >= 0, got {hold_time}"),
            ));
        }
        let capture_radius = wp.capture_radius.unwrap_or(0.1);
        if !(capture_radius.is_finite() && capture_radius > 0.0) {
            return Err(invalid(
                &field("capture_radius"),
                format!("must be > 0, got {capture_radius}"),
            ));
        }
        let attitude_override = match wp.attitude_override {
            None => None,
            Some(o) => Some(validate_override(&o, i)?),
        };
        mission.push(MissionLeg {
            waypoint: Waypoint {
                position: FrameVector::new(
                    wp.position[0],
                    wp.position[1],
                    wp.position[2],
                    FrameId::Inertial,
                ),
                yaw: yaw_deg.to_radians(),
                hold_time,
                capture_radius,
            },
            attitude_override,
        });
    }
    Ok(mission)
}

fn validate_override(raw: &RawOverride, index: usize) -> Result<AttitudeOverride, ConfigError> {
    let table = format!("waypoints.{index}.attitude_override");
    match raw.kind.as_str() {
        "fixed_angles" => {
            reject_strays(
                &table,
                &raw.kind,
                &[("tilt_deg", raw.tilt_deg), ("azimuth_deg", raw.azimuth_deg)],
            )?;
            let roll = raw.roll_deg.unwrap_or(0.0).to_radians();
            let pitch = raw.pitch_deg.unwrap_or(0.0).to_radians();
            AttitudeStrategy::FixedAttitude {
                phi_des: roll,
                theta_des: pitch,
            }
            .validate()
            .map_err(|e| invalid(&table, e.to_string()))?;
            Ok(AttitudeOverride::FixedAngles { roll, pitch })
        }
        "fixed_tilt" => {
            reject_strays(
                &table,
                &raw.kind,
                &[("roll_deg", raw.roll_deg), ("pitch_deg", raw.pitch_deg)],
            )?;
            let tilt = raw.tilt_deg.unwrap_or(0.0).to_radians();
            let azimuth = raw.azimuth_deg.unwrap_or(0.0).to_radians();
            AttitudeStrategy::FixedTilt {
                lambda_des: tilt,
                kappa_des: azimuth,
            }
            .validate()
            .map_err(|e| invalid(&table, e.to_string()))?;
            Ok(AttitudeOverride::FixedTilt { tilt, azimuth })
        }
        other => Err(invalid(
            &format!("{table}.kind"),
            format!("unknown kind \"{other}\" (expected fixed_angles or fixed_tilt)"),
        )),
    }
}

// ---------------------------------------------------------------------------
