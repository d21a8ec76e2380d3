//! Cascaded flight controller: position and velocity loops produce an
//! inertial force demand, the attitude strategy turns it into an
//! orientation setpoint, the thrust strategy bounds it in the body frame,
//! and attitude/rate loops plus allocation turn both into motor commands.
//!
//! The wiring mirrors a conventional multirotor autopilot with two
//! deliberate differences: the attitude setpoint comes from a pluggable
//! strategy instead of always tilting into the force demand, and the force
//! demand is re-expressed in the measured (current) body frame and bounded
//! laterally before allocation. The position loops neither know nor care
//! which strategy is active; they always emit the same force demand for
//! the same state.

use crate::allocation::{allocate, AllocationMatrix, AllocationOutcome};
use crate::attitude::{AttitudeGenerator, AttitudeSetpoint, AttitudeStrategy};
use crate::frames::{FrameId, FrameVector};
use crate::sim::{SimState, VehicleParams};
use crate::thrust::{generate_thrust, ThrustLimits, ThrustSetpoint, ThrustStrategy};
use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("{name} must be finite and {requirement}, got {value}")]
    InvalidGain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Per-axis gains for the full cascade. Integral terms accumulate
/// pre-multiplied by their gain and are clamped to the matching limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGains {
    /// Position error -> velocity setpoint, 1/s.
    pub pos_p: Vector3<f64>,
    /// Velocity PID -> acceleration, 1/s.
    pub vel_p: Vector3<f64>,
    pub vel_i: Vector3<f64>,
    pub vel_d: Vector3<f64>,
    /// Cap on the velocity integral's acceleration contribution, m/s^2.
    pub vel_i_limit: Vector3<f64>,
    /// Cap on commanded acceleration per axis, m/s^2.
    pub accel_limit: Vector3<f64>,
    /// Attitude error -> body rate setpoint, 1/s.
    pub att_p: Vector3<f64>,
    /// Rate PID -> angular acceleration, 1/s.
    pub rate_p: Vector3<f64>,
    pub rate_i: Vector3<f64>,
    pub rate_d: Vector3<f64>,
    /// Cap on the rate integral's angular-acceleration contribution,
    /// rad/s^2.
    pub rate_i_limit: Vector3<f64>,
}

impl ControllerGains {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let nonnegative = [
            ("pos_p", &self.pos_p),
            ("vel_p", &self.vel_p),
            ("vel_i", &self.vel_i),
            ("vel_d", &self.vel_d),
            ("att_p", &self.att_p),
            ("rate_p", &self.rate_p),
            ("rate_i", &self.rate_i),
            ("rate_d", &self.rate_d),
        ];
        for (name, v) in nonnegative {
            for value in v.iter() {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(ControllerError::InvalidGain {
                        name,
                        requirement: ">= 0",
                        value: *value,
                    });
                }
            }
        }
        let positive = [
            ("vel_i_limit", &self.vel_i_limit),
            ("accel_limit", &self.accel_limit),
            ("rate_i_limit", &self.rate_i_limit),
        ];
        for (name, v) in positive {
            for value in v.iter() {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(ControllerError::InvalidGain {
                        name,
                        requirement: "> 0",
                        value: *value,
                    });
                }
            }
        }
        Ok(())
    }
}

impl Default for ControllerGains {
    /// Hand-tuned against the default vehicle at 250 Hz control.
    fn default() -> Self {
        Self {
            pos_p: Vector3::new(1.1, 1.1, 1.2),
            vel_p: Vector3::new(2.6, 2.6, 3.0),
            vel_i: Vector3::new(0.6, 0.6, 0.8),
            vel_d: Vector3::new(0.0, 0.0, 0.0),
            vel_i_limit: Vector3::new(3.0, 3.0, 3.0),
            accel_limit: Vector3::new(6.0, 6.0, 5.0),
            att_p: Vector3::new(6.0, 6.0, 4.0),
            rate_p: Vector3::new(12.0, 12.0, 8.0),
            rate_i: Vector3::new(1.0, 1.0, 0.5),
            rate_d: Vector3::new(0.0, 0.0, 0.0),
            rate_i_limit: Vector3::new(2.0, 2.0, 1.0),
        }
    }
}

/// A mission point: fly to `position` holding `yaw`, captured once inside
/// `capture_radius` for `hold_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub position: FrameVector,
    pub yaw: f64,
    pub hold_time: f64,
    pub capture_radius: f64,
}

/// Per-step attitude override: a full 6-D pose command replacing the
/// configured strategy for this setpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttitudeOverride {
    /// Hold these roll/pitch angles, rad.
    FixedAngles { roll: f64, pitch: f64 },
    /// Hold this tilt at this compass direction, rad.
    FixedTilt { tilt: f64, azimuth: f64 },
}

/// What the controller is asked to do right now.
#[derive(Debug, Clone, PartialEq)]
pub struct FullPoseSetpoint {
    pub position: FrameVector,
    pub yaw: f64,
    pub attitude_override: Option<AttitudeOverride>,
}

impl From<&Waypoint> for FullPoseSetpoint {
    fn from(wp: &Waypoint) -> Self {
        Self {
            position: wp.position,
            yaw: wp.yaw,
            attitude_override: None,
        }
    }
}

/// Everything one control step produced, for logging and the plant.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    /// Unbounded inertial force demand from the position loops, N.
    pub f_des_inertial: FrameVector,
    pub thrust: ThrustSetpoint,
    pub attitude: AttitudeSetpoint,
    /// Angular acceleration setpoint, body frame, rad/s^2.
    pub omega_dot_sp: Vector3<f64>,
    pub motors: AllocationOutcome,
}

/// The cascade with its integrator state. One controller per vehicle.
#[derive(Debug, Clone)]
pub struct CascadeController {
    gains: ControllerGains,
    attitude_strategy: AttitudeStrategy,
    thrust_strategy: ThrustStrategy,
    limits: ThrustLimits,
    attitude_gen: AttitudeGenerator,
    vel_integral: Vector3<f64>,
    prev_vel_error: Option<Vector3<f64>>,
    rate_integral: Vector3<f64>,
    prev_rate_error: Option<Vector3<f64>>,
}

impl CascadeController {
    pub fn new(
        gains: ControllerGains,
        attitude_strategy: AttitudeStrategy,
        thrust_strategy: ThrustStrategy,
        limits: ThrustLimits,
    ) -> Result<Self, ControllerError> {
        gains.validate()?;
        Ok(Self {
            gains,
            attitude_strategy,
            thrust_strategy,
            limits,
            attitude_gen: AttitudeGenerator::new(),
            vel_integral: Vector3::zeros(),
            prev_vel_error: None,
            rate_integral: Vector3::zeros(),
            prev_rate_error: None,
        })
    }

    pub fn attitude_strategy(&self) -> &AttitudeStrategy {
        &self.attitude_strategy
    }

    pub fn thrust_strategy(&self) -> ThrustStrategy {
        self.thrust_strategy
    }

    pub fn limits(&self) -> &ThrustLimits {
        &self.limits
    }

    /// Clears integrators and strategy history (e.g. between runs).
    pub fn reset(&mut self) {
        self.attitude_gen.reset();
        self.vel_integral = Vector3::zeros();
        self.prev_vel_error = None;
        self.rate_integral = Vector3::zeros();
        self.prev_rate_error = None;
    }

    /// Position P -> velocity PID -> acceleration, gravity-compensated
    /// into an inertial force demand. Strategy-agnostic by construction.
    pub fn position_loop(
        &mut self,
        state: &SimState,
        target: &FrameVector,
        params: &VehicleParams,
        dt: f64,
    ) -> FrameVector {
        assert_eq!(target.frame(), FrameId::Inertial, "target must be inertial");
        assert!(dt > 0.0, "dt must be positive");
        let pos_error = (*target - state.position).coords();
        let vel_sp = self.gains.pos_p.component_mul(&pos_error);
        let vel_error = vel_sp - state.velocity.coords();

        self.vel_integral += self.gains.vel_i.component_mul(&vel_error) * dt;
        self.vel_integral = clamp_per_axis(&self.vel_integral, &self.gains.vel_i_limit);
        let derivative = match self.prev_vel_error {
            Some(prev) => (vel_error - prev) / dt,
            None => Vector3::zeros(),
        };
        self.prev_vel_error = Some(vel_error);

        let accel = self.gains.vel_p.component_mul(&vel_error)
            + self.vel_integral
            + self.gains.vel_d.component_mul(&derivative);
        let accel = clamp_per_axis(&accel, &self.gains.accel_limit);

        let f = params.mass * accel + Vector3::new(0.0, 0.0, -params.mass * params.gravity);
        FrameVector::from_vector(f, FrameId::Inertial)
    }

    /// Attitude P (quaternion error, scaled axis) cascaded into a rate
    /// PID, returning the angular acceleration setpoint in the body frame.
    pub fn attitude_rate_loops(
        &mut self,
        state: &SimState,
        attitude_sp: &AttitudeSetpoint,
        dt: f64,
    ) -> Vector3<f64> {
        assert!(dt > 0.0, "dt must be positive");
        let q_sp = attitude_sp.rotation.to_unit_quaternion();
        let q_err = state.attitude.inverse() * q_sp;
        // Shortest rotation: scaled_axis of the canonical (w >= 0) error.
        let q_err = if q_err.w < 0.0 {
            nalgebra::UnitQuaternion::from_quaternion(-q_err.into_inner())
        } else {
            q_err
        };
        let att_error = q_err.scaled_axis();
        let rate_sp = self.gains.att_p.component_mul(&att_error);
        let rate_error = rate_sp - state.angular_velocity;

        self.rate_integral += self.gains.rate_i.component_mul(&rate_error) * dt;
        self.rate_integral = clamp_per_axis(&self.rate_integral, &self.gains.rate_i_limit);
        let derivative = match self.prev_rate_error {
            Some(prev) => (rate_error - prev) / dt,
            None => Vector3::zeros(),
        };
        self.prev_rate_error = Some(rate_error);

        self.gains.rate_p.component_mul(&rate_error)
            + self.rate_integral
            + self.gains.rate_d.component_mul(&derivative)
    }

    /// One full control step: force demand, attitude setpoint, bounded
    /// body thrust (against the CURRENT attitude, so saturation during
    /// attitude transients is visible), torque, motors.
    pub fn control_step(
        &mut self,
        state: &SimState,
        setpoint: &FullPoseSetpoint,
        params: &VehicleParams,
        alloc: &AllocationMatrix,
        dt: f64,
    ) -> ControlOutput {
        let f_des = self.position_loop(state, &setpoint.position, params, dt);

        let strategy = match setpoint.attitude_override {
            Some(AttitudeOverride::FixedAngles { roll, pitch }) => {
                AttitudeStrategy::FixedAttitude {
                    phi_des: roll,
                    theta_des: pitch,
                }
            }
            Some(AttitudeOverride::FixedTilt { tilt, azimuth }) => AttitudeStrategy::FixedTilt {
                lambda_des: tilt,
                kappa_des: azimuth,
            },
            None => self.attitude_strategy,
        };
        let attitude = self.attitude_gen.generate(&strategy, &f_des, setpoint.yaw);

        let to_body = state.attitude_inertial_to_body();
        let thrust = generate_thrust(self.thrust_strategy, &f_des, &to_body, &self.limits);

        let omega_dot_sp = self.attitude_rate_loops(state, &attitude, dt);
        let omega = state.angular_velocity;
        let torque = params.inertia * omega_dot_sp + omega.cross(&(params.inertia * omega));

        let motors = allocate(&thrust.force, &torque, alloc, params.u_max);
        ControlOutput {
            f_des_inertial: f_des,
            thrust,
            attitude,
            omega_dot_sp,
            motors,
        }
    }
}

fn clamp_per_axis(v: &Vector3<f64>, limit: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(
        v.x.clamp(-limit.x, limit.x),
        v.y.clamp(-limit.y, limit.y),
        v.z.clamp(-limit.z, limit.z),
    )
}

// ---------------------------------------------------------------------------
