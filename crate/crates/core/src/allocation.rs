//! Control allocation for a fixed-tilt fully-actuated hexarotor.
//!
//! Six arms at 60 degree spacing, each rotor tilted sideways about its arm
//! axis by an alternating signed angle. The tilt gives every rotor a
//! lateral thrust component, so the 6x6 map from motor thrusts to the body
//! wrench (force + torque) has full rank and the vehicle can produce
//! bounded lateral force without tilting its body.
//!
//! [`allocate`] inverts that map and desaturates when the demanded wrench
//! does not fit the motor limits, relaxing in a fixed priority order:
//! lateral force first, then vertical force, and only as a last resort the
//! torques. Angular authority is what keeps the vehicle controllable, so
//! it is the last thing given up.
//!
//! [`max_lateral_thrust`] probes the geometry for the largest lateral
//! force sustainable at a given vertical load, which is how the lateral
//! bound used by the thrust strategies is derived from the hardware.

use crate::frames::{FrameId, FrameVector};
use nalgebra::{Matrix6, Vector2, Vector3, Vector6};
use thiserror::Error;

/// Motor solutions may stick out of [0, u_max] by this much (numerical
/// slack) and are clamped rather than rejected.
const BOUND_TOLERANCE: f64 = 1e-9;

/// Relaxation-factor bisections run this many halvings (resolution ~1e-12).
const RELAXATION_ITERATIONS: u32 = 40;

/// Condition numbers above this mean the geometry cannot span all six
/// wrench dimensions.
const CONDITION_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error(
        "rotor geometry is rank-deficient (condition number {condition:.3e}); \
             coplanar rotors cannot produce lateral force"
    )]
    SingularGeometry { condition: f64 },
    #[error("{name} must be finite and > 0, got {value}")]
    InvalidGeometry { name: &'static str, value: f64 },
}

/// Rotor spin direction seen from above (body -z looking down +z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinDirection {
    Cw,
    Ccw,
}

impl SpinDirection {
    /// Sign of the drag torque contribution along the rotor axis.
    fn sign(self) -> f64 {
        match self {
            SpinDirection::Ccw => 1.0,
            SpinDirection::Cw => -1.0,
        }
    }
}

/// One rotor: where it sits, how it is tilted, and its torque coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotor {
    /// Hub position in the body frame, m.
    pub position: Vector3<f64>,
    /// Signed tilt about the arm axis, radians; zero points the rotor along
    /// body -z.
    pub tilt: f64,
    pub spin: SpinDirection,
    /// Thrust gain; commands are thrusts in newtons, so this is 1 unless a
    /// different command scale is wanted.
    pub thrust_coeff: f64,
    /// Drag torque per newton of thrust, m.
    pub drag_coeff: f64,
}

impl Rotor {
    /// Unit vector along which the rotor pushes, body frame. Tilting about
    /// the (unit) arm direction swings body -z sideways.
    pub fn thrust_axis(&self) -> Vector3<f64> {
        let arm = self.position.xy();
        let azimuth = arm.y.atan2(arm.x);
        let (sin_t, cos_t) = self.tilt.sin_cos();
        Vector3::new(-azimuth.sin() * sin_t, azimuth.cos() * sin_t, -cos_t)
    }
}

/// The six rotors of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorGeometry {
    pub rotors: [Rotor; 6],
}

impl RotorGeometry {
    /// Arms at 60 degree spacing starting on body x, tilt alternating
    /// +tilt / -tilt, spin alternating Ccw / Cw, all sharing one arm
    /// length and one pair of coefficients.
    pub fn standard_hexarotor(arm_length: f64, tilt: f64, k_f: f64, k_m: f64) -> Self {
        let rotors = core::array::from_fn(|i| {
            let azimuth = (i as f64) * 60f64.to_radians();
            let alternating = if i % 2 == 0 { 1.0 } else { -1.0 };
            Rotor {
                position: Vector3::new(arm_length * azimuth.cos(), arm_length * azimuth.sin(), 0.0),
                tilt: alternating * tilt,
                spin: if i % 2 == 0 {
                    SpinDirection::Ccw
                } else {
                    SpinDirection::Cw
                },
                thrust_coeff: k_f,
                drag_coeff: k_m,
            }
        });
        Self { rotors }
    }

    pub fn validate(&self) -> Result<(), AllocationError> {
        for rotor in &self.rotors {
            if !(rotor.thrust_coeff.is_finite() && rotor.thrust_coeff > 0.0) {
                return Err(AllocationError::InvalidGeometry {
                    name: "thrust_coeff",
                    value: rotor.thrust_coeff,
                });
            }
            if !(rotor.drag_coeff.is_finite() && rotor.drag_coeff > 0.0) {
                return Err(AllocationError::InvalidGeometry {
                    name: "drag_coeff",
                    value: rotor.drag_coeff,
                });
            }
            let arm = rotor.position.xy().norm();
            if !(arm.is_finite() && arm > 0.0) {
                return Err(AllocationError::InvalidGeometry {
                    name: "arm length",
                    value: arm,
                });
            }
            if !rotor.tilt.is_finite() {
                return Err(AllocationError::InvalidGeometry {
                    name: "tilt",
                    value: rotor.tilt,
                });
            }
        }
        Ok(())
    }
}

/// The wrench map and its inverse. Rows of `b`: F_x, F_y, F_z, tau_x,
/// tau_y, tau_z; columns: rotor thrusts.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationMatrix {
    b: Matrix6<f64>,
    b_inv: Matrix6<f64>,
    condition: f64,
}

impl AllocationMatrix {
    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.b
    }

    pub fn inverse(&self) -> &Matrix6<f64> {
        &self.b_inv
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Wrench produced by the given motor thrusts: body force, N, and body
    /// torque, N·m.
    pub fn forward(&self, thrusts: &[f64; 6]) -> (FrameVector, Vector3<f64>) {
        let w = self.b * Vector6::from_row_slice(thrusts);
        (
            FrameVector::new(w[0], w[1], w[2], FrameId::Body),
            Vector3::new(w[3], w[4], w[5]),
        )
    }
}

/// Column i of the wrench map: per newton of thrust, the force is the
/// rotor axis and the torque is the moment arm plus the spin drag.
fn wrench_column(rotor: &Rotor) -> Vector6<f64> {
    let axis = rotor.thrust_axis() * rotor.thrust_coeff;
    let torque = rotor.position.cross(&axis) + rotor.spin.sign() * rotor.drag_coeff * axis;
    Vector6::new(axis.x, axis.y, axis.z, torque.x, torque.y, torque.z)
}

fn assemble(geom: &RotorGeometry) -> Matrix6<f64> {
    Matrix6::from_columns(&geom.rotors.map(|r| wrench_column(&r)))
}

pub fn build_allocation_matrix(geom: &RotorGeometry) -> Result<AllocationMatrix, AllocationError> {
    geom.validate()?;
    let b = assemble(geom);
    let svd = b.svd(false, false);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let condition = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(AllocationError::SingularGeometry { condition });
    }
    let b_inv = b.try_inverse().ok_or(AllocationError::SingularGeometry {
        condition: f64::INFINITY,
    })?;
    Ok(AllocationMatrix {
        b,
        b_inv,
        condition,
    })
}

/// Six motor thrusts, newtons, each within [0, u_max] after allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorCommand {
    pub thrusts: [f64; 6],
}

/// What [`allocate`] did to fit the demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationOutcome {
    pub command: MotorCommand,
    /// True when any relaxation stage ran (the demand was reduced).
    pub desaturated: bool,
    /// True when even zero lateral force and a relaxed vertical force
    /// could not fit the torque demand, so the torque itself was scaled.
    pub infeasible: bool,
}

/// Maps a body wrench to motor thrusts, desaturating by priority.
///
/// The exact solution is used when it fits the bounds. Otherwise the
/// demand is relaxed in stages, each found by bisection on its scale
/// factor: (1) shrink the lateral force toward zero, (2) shrink the
/// vertical force toward the mid-throttle value (the body-z force with
/// every motor at u_max/2, which centers the motors and maximizes the
/// margin left for torque), (3) shrink the torque itself. Torque survives
/// stages 1 and 2 untouched; the mid-throttle point always fits, so stage
/// 3 always terminates.
pub fn allocate(
    force: &FrameVector,
    torque: &Vector3<f64>,
    alloc: &AllocationMatrix,
    u_max: f64,
) -> AllocationOutcome {
    assert_eq!(
        force.frame(),
        FrameId::Body,
        "allocation expects a body-frame force"
    );
    assert!(u_max > 0.0, "u_max must be positive");
    let w = Vector6::new(
        force.x(),
        force.y(),
        force.z(),
        torque.x,
        torque.y,
        torque.z,
    );
    assert!(w.iter().all(|v| v.is_finite()), "wrench must be finite");

    let solve = |wrench: Vector6<f64>| alloc.b_inv * wrench;
    let fits = |u: &Vector6<f64>| {
        u.iter()
            .all(|&t| (-BOUND_TOLERANCE..=u_max + BOUND_TOLERANCE).contains(&t))
    };
    let command = |u: Vector6<f64>| MotorCommand {
        thrusts: core::array::from_fn(|i| u[i].clamp(0.0, u_max)),
    };

    let u = solve(w);
    if fits(&u) {
        return AllocationOutcome {
            command: command(u),
            desaturated: false,
            infeasible: false,
        };
    }

    // Stage 1: scale the lateral force, keeping F_z and torque exact.
    let lateral = |a: f64| Vector6::new(a * w[0], a * w[1], w[2], w[3], w[4], w[5]);
    if fits(&solve(lateral(0.0))) {
        let a = bisect_max_scale(|a| fits(&solve(lateral(a))));
        return AllocationOutcome {
            command: command(solve(lateral(a))),
            desaturated: true,
            infeasible: false,
        };
    }

    // Stage 2: no lateral force; pull F_z toward the mid-throttle value.
    let neutral_z = 0.5 * u_max * alloc.b.row(2).sum();
    let vertical = |b: f64| {
        Vector6::new(
            0.0,
            0.0,
            neutral_z + b * (w[2] - neutral_z),
            w[3],
            w[4],
            w[5],
        )
    };
    if fits(&solve(vertical(0.0))) {
        let b = bisect_max_scale(|b| fits(&solve(vertical(b))));
        return AllocationOutcome {
            command: command(solve(vertical(b))),
            desaturated: true,
            infeasible: false,
        };
    }

    // Stage 3: scale the torque. At zero torque the solution is every
    // motor at u_max/2, so this always fits.
    let torque_only = |c: f64| Vector6::new(0.0, 0.0, neutral_z, c * w[3], c * w[4], c * w[5]);
    let c = bisect_max_scale(|c| fits(&solve(torque_only(c))));
    AllocationOutcome {
        command: command(solve(torque_only(c))),
        desaturated: true,
        infeasible: true,
    }
}

/// Largest scale in [0, 1] accepted by `feasible`, which must accept 0 and
/// be monotone (an interval of acceptance starting at 0; true here because
/// the motor solution is affine in the scale).
fn bisect_max_scale(feasible: impl Fn(f64) -> bool) -> f64 {
    if feasible(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..RELAXATION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest lateral force, N, sustainable along `direction` (unit 2-vector,
/// body frame) while holding the body-z force `hover_fz` (negative =
/// upward) and zero torque, with every motor within [0, u_max].
///
/// Found by bisection on the force magnitude; the motor solution is affine
/// in it, so feasibility is an interval. Returns 0 when the geometry is
/// singular (no lateral authority at all) or when even the vertical load
/// alone does not fit.
pub fn max_lateral_thrust(
    geom: &RotorGeometry,
    u_max: f64,
    hover_fz: f64,
    direction: &Vector2<f64>,
) -> f64 {
    assert!(
        (direction.norm() - 1.0).abs() < 1e-6,
        "direction must be a unit vector"
    );
    assert!(u_max > 0.0, "u_max must be positive");
    let alloc = match build_allocation_matrix(geom) {
        Ok(a) => a,
        Err(_) => return 0.0,
    };
    let fits = |c: f64| {
        let w = Vector6::new(c * direction.x, c * direction.y, hover_fz, 0.0, 0.0, 0.0);
        let u = alloc.b_inv * w;
        u.iter()
            .all(|&t| (-BOUND_TOLERANCE..=u_max + BOUND_TOLERANCE).contains(&t))
    };
    if !fits(0.0) {
        return 0.0;
    }
    // Total thrust bounds the lateral force, so this cap is never feasible.
    let cap = 6.0 * u_max + 1.0;
    let (mut lo, mut hi) = (0.0f64, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

// ---------------------------------------------------------------------------
