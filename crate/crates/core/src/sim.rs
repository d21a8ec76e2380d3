//! Rigid-body hexarotor plant: Newton-Euler dynamics with first-order
//! motor lag, integrated with RK4, for closed-loop testing of the control
//! stack.
//!
//! The translational state lives in the inertial NED frame (gravity +z),
//! the rotational state in the body FRD frame. Attitude is a unit
//! quaternion (Body -> Inertial), renormalized after every step so
//! orthonormality cannot drift over long runs. A constant external wrench
//! models wind; there is no aerodynamic drag model beyond it.

use crate::allocation::{
    build_allocation_matrix, AllocationError, AllocationMatrix, MotorCommand, RotorGeometry,
};
use crate::frames::{FrameId, FrameVector, Rotation};
use nalgebra::{Matrix3, Quaternion, SVector, UnitQuaternion, Vector3};
use thiserror::Error;

/// Any state magnitude beyond this is treated as divergence.
const BLOWUP_LIMIT: f64 = 1e6;

/// Step sizes above this (seconds) are outside the integrator's validated
/// regime.
const MAX_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{name} must be finite and > 0, got {value}")]
    InvalidParams { name: &'static str, value: f64 },
    #[error("inertia matrix must be positive definite")]
    IndefiniteInertia,
    #[error(transparent)]
    Geometry(#[from] AllocationError),
    #[error("state diverged (magnitude > 1e6) at t = {time:.3} s")]
    NumericalBlowup { time: f64 },
}

/// Physical description of the vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// Body-frame inertia tensor, kg m^2.
    pub inertia: Matrix3<f64>,
    pub geom: RotorGeometry,
    /// Per-motor thrust ceiling, N.
    pub u_max: f64,
    /// Motor first-order lag time constant, s.
    pub motor_tau: f64,
    /// m/s^2, positive down (NED).
    pub gravity: f64,
}

impl VehicleParams {
    /// A 4 kg desk-scale hexarotor with 0.48 m arms and 30 degree rotor
    /// tilt. These are plausible bench values, not measurements.
    pub fn default_hexarotor() -> Self {
        Self {
            mass: 4.0,
            inertia: Matrix3::from_diagonal(&Vector3::new(0.08, 0.08, 0.14)),
            geom: RotorGeometry::standard_hexarotor(0.48, 30f64.to_radians(), 1.0, 0.016),
            u_max: 25.0,
            motor_tau: 0.05,
            gravity: 9.81,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positives = [
            ("mass", self.mass),
            ("u_max", self.u_max),
            ("motor_tau", self.motor_tau),
            ("gravity", self.gravity),
        ];
        for (name, value) in positives {
            if !(value.is_finite() && value > 0.0) {
                return Err(SimError::InvalidParams { name, value });
            }
        }
        if self.inertia.iter().any(|v| !v.is_finite()) || self.inertia.cholesky().is_none() {
            return Err(SimError::IndefiniteInertia);
        }
        self.geom.validate()?;
        Ok(())
    }
}

/// Constant external wrench: force in the inertial frame (wind pushes the
/// same way regardless of heading), torque in the body frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    pub force: FrameVector,
    pub torque: Vector3<f64>,
}

impl Disturbance {
    pub fn none() -> Self {
        Self {
            force: FrameVector::zero(FrameId::Inertial),
            torque: Vector3::zeros(),
        }
    }

    pub fn validate(&self) -> bool {
        self.force.frame() == FrameId::Inertial
            && self.force.is_finite()
            && self.torque.iter().all(|v| v.is_finite())
    }
}

/// Full plant state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Inertial, m.
    pub position: FrameVector,
    /// Inertial, m/s.
    pub velocity: FrameVector,
    /// Body -> Inertial.
    pub attitude: UnitQuaternion<f64>,
    /// Body frame, rad/s.
    pub angular_velocity: Vector3<f64>,
    /// Current (lagged) thrusts, N.
    pub motor_thrusts: [f64; 6],
    /// s
    pub time: f64,
}

impl SimState {
    pub fn attitude_body_to_inertial(&self) -> Rotation {
        Rotation::from_unit_quaternion(self.attitude, FrameId::Body, FrameId::Inertial)
    }

    pub fn attitude_inertial_to_body(&self) -> Rotation {
        self.attitude_body_to_inertial().inverse()
    }

    /// Angle between the body z-axis and the inertial z-axis, rad.
    pub fn tilt(&self) -> f64 {
        crate::frames::tilt_angle(&self.attitude_body_to_inertial())
    }

    fn magnitude(&self) -> f64 {
        let motor_max = self
            .motor_thrusts
            .iter()
            .fold(0.0f64, |m, t| m.max(t.abs()));
        self.position
            .norm()
            .max(self.velocity.norm())
            .max(self.angular_velocity.norm())
            .max(motor_max)
    }
}

/// The plant: immutable parameters plus the prebuilt wrench map.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: VehicleParams,
    alloc: AllocationMatrix,
    inertia_inv: Matrix3<f64>,
}

/// Integration state vector: position, velocity, quaternion (w,x,y,z),
/// angular velocity, motor thrusts.
type StateVector = SVector<f64, 19>;

impl Simulator {
    pub fn new(params: VehicleParams) -> Result<Self, SimError> {
        params.validate()?;
        let alloc = build_allocation_matrix(&params.geom)?;
        let inertia_inv = params
            .inertia
            .try_inverse()
            .ok_or(SimError::IndefiniteInertia)?;
        Ok(Self {
            params,
            alloc,
            inertia_inv,
        })
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn allocation(&self) -> &AllocationMatrix {
        &self.alloc
    }

    /// Hover equilibrium at the origin: level attitude, motors preloaded
    /// to the hover command so the lag starts settled. Also returns the
    /// command holding it there and the hover thrust m*g.
    pub fn trim_hover(&self) -> (SimState, MotorCommand, f64) {
        let f_hover = self.params.mass * self.params.gravity;
        let wrench = SVector::<f64, 6>::new(0.0, 0.0, -f_hover, 0.0, 0.0, 0.0);
        let u = self.alloc.inverse() * wrench;
        let command = MotorCommand {
            thrusts: core::array::from_fn(|i| u[i]),
        };
        let state = SimState {
            position: FrameVector::zero(FrameId::Inertial),
            velocity: FrameVector::zero(FrameId::Inertial),
            attitude: UnitQuaternion::identity(),
            angular_velocity: Vector3::zeros(),
            motor_thrusts: command.thrusts,
            time: 0.0,
        };
        (state, command, f_hover)
    }

    /// One RK4 step of length `dt` under a held motor command and constant
    /// disturbance. The command is clamped to [0, u_max] first; the
    /// quaternion is renormalized afterwards.
    pub fn step(
        &self,
        state: &SimState,
        command: &MotorCommand,
        disturbance: &Disturbance,
        dt: f64,
    ) -> Result<SimState, SimError> {
        assert!(
            dt > 0.0 && dt <= MAX_DT,
            "dt must be in (0, {MAX_DT}], got {dt}"
        );
        assert!(
            disturbance.validate(),
            "disturbance must be a finite inertial wrench"
        );
        let u: [f64; 6] =
            core::array::from_fn(|i| command.thrusts[i].clamp(0.0, self.params.u_max));

        let x0 = pack(state);
        let k1 = self.derivative(&x0, &u, disturbance);
        let k2 = self.derivative(&(x0 + k1 * (0.5 * dt)), &u, disturbance);
        let k3 = self.derivative(&(x0 + k2 * (0.5 * dt)), &u, disturbance);
        let k4 = self.derivative(&(x0 + k3 * dt), &u, disturbance);
        let x1 = x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);

        let next = unpack(&x1, state.time + dt, self.params.u_max);
        // Finiteness first: with finite state entries the magnitude cannot
        // be NaN, so the comparison below catches every remaining blowup.
        if !x1.iter().all(|v| v.is_finite()) || next.magnitude() > BLOWUP_LIMIT {
            return Err(SimError::NumericalBlowup { time: next.time });
        }
        Ok(next)
    }

    fn derivative(&self, x: &StateVector, u: &[f64; 6], disturbance: &Disturbance) -> StateVector {
        let velocity = Vector3::new(x[3], x[4], x[5]);
        let q = Quaternion::new(x[6], x[7], x[8], x[9]);
        let omega = Vector3::new(x[10], x[11], x[12]);
        let motors: [f64; 6] = core::array::from_fn(|i| x[13 + i]);

        let (force_b, torque_b) = self.alloc.forward(&motors);
        // Rotate with the normalized attitude; the integration stages may
        // hold a slightly off-unit quaternion.
        let r = UnitQuaternion::from_quaternion(q);
        let thrust_i = r * force_b.coords();

        let accel = thrust_i / self.params.mass
            + Vector3::new(0.0, 0.0, self.params.gravity)
            + disturbance.force.coords() / self.params.mass;

        let torque = torque_b + disturbance.torque - omega.cross(&(self.params.inertia * omega));
        let omega_dot = self.inertia_inv * torque;

        let q_dot = q * Quaternion::from_parts(0.0, omega) * 0.5;
        let motor_dot: [f64; 6] =
            core::array::from_fn(|i| (u[i] - motors[i]) / self.params.motor_tau);

        let mut dx = StateVector::zeros();
        dx.fixed_rows_mut::<3>(0).copy_from(&velocity);
        dx.fixed_rows_mut::<3>(3).copy_from(&accel);
        dx[6] = q_dot.w;
        dx[7] = q_dot.i;
        dx[8] = q_dot.j;
        dx[9] = q_dot.k;
        dx.fixed_rows_mut::<3>(10).copy_from(&omega_dot);
        for i in 0..6 {
            dx[13 + i] = motor_dot[i];
        }
        dx
    }
}

fn pack(state: &SimState) -> StateVector {
    let mut x = StateVector::zeros();
    x.fixed_rows_mut::<3>(0).copy_from(&state.position.coords());
    x.fixed_rows_mut::<3>(3).copy_from(&state.velocity.coords());
    let q = state.attitude.quaternion();
    x[6] = q.w;
    x[7] = q.i;
    x[8] = q.j;
    x[9] = q.k;
    x.fixed_rows_mut::<3>(10).copy_from(&state.angular_velocity);
    for i in 0..6 {
        x[13 + i] = state.motor_thrusts[i];
    }
    x
}

fn unpack(x: &StateVector, time: f64, u_max: f64) -> SimState {
    let q = Quaternion::new(x[6], x[7], x[8], x[9]);
    SimState {
        position: FrameVector::new(x[0], x[1], x[2], FrameId::Inertial),
        velocity: FrameVector::new(x[3], x[4], x[5], FrameId::Inertial),
        attitude: UnitQuaternion::from_quaternion(q),
        angular_velocity: Vector3::new(x[10], x[11], x[12]),
        // Integration overshoot cannot push thrusts outside their
        // physical range.
        motor_thrusts: core::array::from_fn(|i| x[13 + i].clamp(0.0, u_max)),
        time,
    }
}

// ---------------------------------------------------------------------------
