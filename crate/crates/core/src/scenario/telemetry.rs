//! Telemetry rows logged once per control step.
//!
//! The CSV schema is fixed: a stable header, full-precision floats (Rust's
//! shortest round-trip formatting), angles in degrees, flags as 0/1. Rows
//! are plain numbers, so no quoting or escaping is ever needed, and two
//! runs of the same scenario produce byte-identical files.

use crate::controller::ControlOutput;
use crate::frames::{euler_from_rotation, EulerAngles, Rotation};
use crate::sim::SimState;
use std::io::{self, Write};

/// One logged control step.
#[derive(Debug, Clone)]
pub struct TelemetryRow {
    pub t: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    /// Vehicle roll/pitch/yaw, deg.
    pub euler_deg: [f64; 3],
    /// Vehicle tilt (angle between body z and vertical), deg.
    pub tilt_deg: f64,
    /// Setpoint roll/pitch/yaw, deg.
    pub sp_euler_deg: [f64; 3],
    /// Setpoint tilt, deg.
    pub sp_tilt_deg: f64,
    /// Unbounded inertial force demand, N.
    pub f_des: [f64; 3],
    /// Commanded body-frame force after bounding, N.
    pub f_sp: [f64; 3],
    /// Lateral norm of the commanded body force, N.
    pub lateral_norm: f64,
    /// 1 when the thrust strategy altered the demand to respect the bound.
    pub saturated: bool,
    /// Commanded motor thrusts, N.
    pub motors: [f64; 6],
}

pub const CSV_HEADER: &str = "t,x,y,z,vx,vy,vz,roll_deg,pitch_deg,yaw_deg,tilt_deg,\
sp_roll_deg,sp_pitch_deg,sp_yaw_deg,sp_tilt_deg,fdes_x,fdes_y,fdes_z,\
fsp_x,fsp_y,fsp_z,lateral_norm,saturated,m1,m2,m3,m4,m5,m6";

/// Euler angles with a lossy fallback at the pitch singularity, where roll
/// and yaw are not separately observable; both are logged as zero there.
fn euler_or_fallback(rotation: &Rotation) -> EulerAngles {
    euler_from_rotation(rotation).unwrap_or_else(|_| EulerAngles {
        roll: 0.0,
        pitch: (-rotation.matrix()[(2, 0)]).clamp(-1.0, 1.0).asin(),
        yaw: 0.0,
    })
}

impl TelemetryRow {
    /// Captures the state at a control instant and the outputs computed
    /// from it.
    pub fn from_control_step(state: &SimState, out: &ControlOutput) -> Self {
        let attitude = state.attitude_body_to_inertial();
        let e = euler_or_fallback(&attitude);
        let sp = euler_or_fallback(&out.attitude.rotation);
        let f_sp = out.thrust.force.coords();
        TelemetryRow {
            t: state.time,
            position: [state.position.x(), state.position.y(), state.position.z()],
            velocity: [state.velocity.x(), state.velocity.y(), state.velocity.z()],
            euler_deg: [
                e.roll.to_degrees(),
                e.pitch.to_degrees(),
                e.yaw.to_degrees(),
            ],
            tilt_deg: state.tilt().to_degrees(),
            sp_euler_deg: [
                sp.roll.to_degrees(),
                sp.pitch.to_degrees(),
                sp.yaw.to_degrees(),
            ],
            sp_tilt_deg: out.attitude.tilt().to_degrees(),
            f_des: [
                out.f_des_inertial.x(),
                out.f_des_inertial.y(),
                out.f_des_inertial.z(),
            ],
            f_sp: [f_sp.x, f_sp.y, f_sp.z],
            lateral_norm: out.thrust.lateral_norm,
            saturated: out.thrust.saturated,
            motors: out.motors.command.thrusts,
        }
    }

    pub fn write_csv(&self, w: &mut (impl Write + ?Sized)) -> io::Result<()> {
        write!(
            w,
            "{},{},{},{},{},{},{}",
            self.t,
            self.position[0],
            self.position[1],
            self.position[2],
            self.velocity[0],
            self.velocity[1],
            self.velocity[2],
        )?;
        write!(
            w,
            ",{},{},{},{},{},{},{},{}",
            self.euler_deg[0],
            self.euler_deg[1],
            self.euler_deg[2],
            self.tilt_deg,
            self.sp_euler_deg[0],
            self.sp_euler_deg[1],
            self.sp_euler_deg[2],
            self.sp_tilt_deg,
        )?;
        write!(
            w,
            ",{},{},{},{},{},{},{},{}",
            self.f_des[0],
            self.f_des[1],
            self.f_des[2],
            self.f_sp[0],
            self.f_sp[1],
            self.f_sp[2],
            self.lateral_norm,
            u8::from(self.saturated),
        )?;
        writeln!(
            w,
            ",{},{},{},{},{},{}",
            self.motors[0],
            self.motors[1],
            self.motors[2],
            self.motors[3],
            self.motors[4],
            self.motors[5],
        )
    }
}
