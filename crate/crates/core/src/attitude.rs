//! Attitude setpoint strategies.
//!
//! Every strategy answers the same question: given the force the position
//! controller wants (`f_des`, inertial frame) and a desired yaw, how should
//! the setpoint frame be oriented? The answers span the range between a
//! conventional underactuated multirotor and a fully-actuated one:
//!
//! - [`AttitudeStrategy::ZeroTilt`]: never tilt; lateral thrust does all
//!   horizontal work.
//! - [`AttitudeStrategy::FullTilt`]: point the thrust axis straight at
//!   `f_des`, like an underactuated vehicle.
//! - [`AttitudeStrategy::MinimumTilt`]: tilt only as far as needed so the
//!   lateral thrust bound `f_lmax` can cover what is left.
//! - [`AttitudeStrategy::FixedTilt`]: hold a constant tilt angle toward a
//!   fixed compass direction, independent of yaw.
//! - [`AttitudeStrategy::FixedAttitude`]: hold constant roll/pitch angles;
//!   the tilt direction then rotates with yaw.
//!
//! All setpoints place the x-axis as close to the desired yaw heading as
//! the chosen z-axis allows: `i_s = normalize([-sin(yaw), cos(yaw), 0] x
//! k_s)`, `j_s = k_s x i_s`. When that cross product degenerates (thrust
//! demand nearly horizontal) the generator falls back to the previous
//! setpoint's x-axis, or to zero tilt when there is no history, and flags
//! the output as degraded.

use crate::frames::{
    rodrigues_rotate_vec, rotation_from_euler, EulerAngles, FrameId, FrameVector, Rotation,
};
use nalgebra::Vector3;
use thiserror::Error;

/// Force demands below this norm (newtons) carry no usable direction.
pub const THRUST_EPSILON: f64 = 1e-6;

/// Yaw-axis cross products below this norm count as degenerate.
const YAW_AXIS_EPSILON: f64 = 1e-6;

/// Parameter errors for attitude strategies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttitudeError {
    #[error("{name} must be finite and {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Selects how the attitude setpoint is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttitudeStrategy {
    /// Stay level; yaw is the only degree of freedom used.
    ZeroTilt,
    /// Tilt the thrust axis all the way onto the demanded force direction.
    FullTilt,
    /// Tilt just far enough that lateral thrust up to `f_lmax` (N) covers
    /// the remaining horizontal demand.
    MinimumTilt { f_lmax: f64 },
    /// Hold tilt `lambda_des` (rad) toward compass azimuth `kappa_des`
    /// (rad, measured from north toward east), independent of yaw.
    FixedTilt { lambda_des: f64, kappa_des: f64 },
    /// Hold constant roll `phi_des` and pitch `theta_des` (rad).
    FixedAttitude { phi_des: f64, theta_des: f64 },
}

impl AttitudeStrategy {
    /// Validates parameter ranges (angles that keep the setpoint z-axis
    /// pointed down, positive lateral bound).
    pub fn validate(&self) -> Result<(), AttitudeError> {
        let check = |name: &'static str,
                     requirement: &'static str,
                     value: f64,
                     ok: bool|
         -> Result<(), AttitudeError> {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(AttitudeError::InvalidParameter {
                    name,
                    requirement,
                    value,
                })
            }
        };
        match *self {
            AttitudeStrategy::ZeroTilt | AttitudeStrategy::FullTilt => Ok(()),
            AttitudeStrategy::MinimumTilt { f_lmax } => {
                check("f_lmax", "> 0", f_lmax, f_lmax > 0.0)
            }
            AttitudeStrategy::FixedTilt {
                lambda_des,
                kappa_des,
            } => {
                check(
                    "lambda_des",
                    "in [0, pi/2)",
                    lambda_des,
                    (0.0..std::f64::consts::FRAC_PI_2).contains(&lambda_des),
                )?;
                check("kappa_des", "finite", kappa_des, true)
            }
            AttitudeStrategy::FixedAttitude { phi_des, theta_des } => {
                check(
                    "phi_des",
                    "in (-pi/2, pi/2)",
                    phi_des,
                    phi_des.abs() < std::f64::consts::FRAC_PI_2,
                )?;
                check(
                    "theta_des",
                    "in (-pi/2, pi/2)",
                    theta_des,
                    theta_des.abs() < std::f64::consts::FRAC_PI_2,
                )
            }
        }
    }
}

/// An attitude setpoint produced by one of the strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeSetpoint {
    /// Setpoint-frame orientation: rotates setpoint coordinates into the
    /// inertial frame; columns are the setpoint axes in inertial
    /// coordinates.
    pub rotation: Rotation,
    /// The strategy that actually produced `rotation`. On a degraded
    /// fallback this is [`AttitudeStrategy::ZeroTilt`] regardless of what
    /// was requested.
    pub strategy: AttitudeStrategy,
    /// True when a fallback replaced the requested construction (no usable
    /// thrust direction, or a degenerate yaw axis).
    pub degraded: bool,
}

impl AttitudeSetpoint {
    /// The setpoint z-axis in inertial coordinates.
    pub fn z_axis(&self) -> Vector3<f64> {
        self.rotation.column(2)
    }

    /// Tilt of the setpoint frame from inertial z, radians.
    pub fn tilt(&self) -> f64 {
        crate::frames::tilt_angle(&self.rotation)
    }
}

/// Level setpoint at the requested yaw.
pub fn attitude_zero_tilt(yaw_des: f64) -> AttitudeSetpoint {
    AttitudeSetpoint {
        rotation: rotation_from_euler(EulerAngles::new(0.0, 0.0, yaw_des)),
        strategy: AttitudeStrategy::ZeroTilt,
        degraded: false,
    }
}

/// Constant roll/pitch setpoint; the tilt direction rotates with yaw.
pub fn attitude_fixed(yaw_des: f64, phi_des: f64, theta_des: f64) -> AttitudeSetpoint {
    AttitudeSetpoint {
        rotation: rotation_from_euler(EulerAngles::new(phi_des, theta_des, yaw_des)),
        strategy: AttitudeStrategy::FixedAttitude { phi_des, theta_des },
        degraded: false,
    }
}

/// Constant tilt toward a fixed compass azimuth, independent of yaw.
///
/// The z-axis is inertial z rotated by `lambda_des` about the horizontal
/// axis `[cos(kappa), sin(kappa), 0] x z`, so the tilt plane contains the
/// `kappa_des` compass direction and the tilt angle is exactly
/// `lambda_des` for every yaw.
pub fn attitude_fixed_tilt(yaw_des: f64, lambda_des: f64, kappa_des: f64) -> AttitudeSetpoint {
    let z_inertial = Vector3::new(0.0, 0.0, 1.0);
    // [cos k, sin k, 0] x [0, 0, 1] = [sin k, -cos k, 0]: already unit.
    let axis = Vector3::new(kappa_des.sin(), -kappa_des.cos(), 0.0);
    let k_s = rodrigues_rotate_vec(&z_inertial, &axis, lambda_des);
    let strategy = AttitudeStrategy::FixedTilt {
        lambda_des,
        kappa_des,
    };
    // lambda < pi/2 keeps k_s.z positive, so the yaw axis never degenerates.
    match frame_about_z_axis(k_s, yaw_des, None) {
        Some((rotation, _)) => AttitudeSetpoint {
            rotation,
            strategy,
            degraded: false,
        },
        None => degraded_zero_tilt(yaw_des),
    }
}

/// Tilt the thrust axis fully onto the demanded force: `k_s` anti-parallel
/// to `f_des`. Stateless; see [`AttitudeGenerator`] for the variant that
/// can reuse the previous setpoint when the yaw axis degenerates.
pub fn attitude_full_tilt(f_des: &FrameVector, yaw_des: f64) -> AttitudeSetpoint {
    full_tilt_with_history(f_des, yaw_des, None)
}

/// Tilt only as far as the lateral bound requires. Stateless; see
/// [`AttitudeGenerator`].
pub fn attitude_minimum_tilt(f_des: &FrameVector, yaw_des: f64, f_lmax: f64) -> AttitudeSetpoint {
    minimum_tilt_with_history(f_des, yaw_des, f_lmax, None)
}

/// Generates attitude setpoints and remembers the last one so the
/// full-tilt yaw-axis singularity can fall back to a continuous x-axis
/// instead of snapping to zero tilt.
#[derive(Debug, Clone, Default)]
pub struct AttitudeGenerator {
    prev_x_axis: Option<Vector3<f64>>,
}

impl AttitudeGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drops the stored history (e.g. between scenario runs).
    pub fn reset(&mut self) {
        self.prev_x_axis = None;
    }

    /// Dispatches to the requested strategy. Never panics on finite input;
    /// unusable inputs produce a degraded zero-tilt setpoint instead.
    pub fn generate(
        &mut self,
        strategy: &AttitudeStrategy,
        f_des: &FrameVector,
        yaw_des: f64,
    ) -> AttitudeSetpoint {
        assert_eq!(f_des.frame(), FrameId::Inertial, "f_des must be inertial");
        let setpoint = match *strategy {
            AttitudeStrategy::ZeroTilt => attitude_zero_tilt(yaw_des),
            AttitudeStrategy::FullTilt => full_tilt_with_history(f_des, yaw_des, self.prev_x_axis),
            AttitudeStrategy::MinimumTilt { f_lmax } => {
                minimum_tilt_with_history(f_des, yaw_des, f_lmax, self.prev_x_axis)
            }
            AttitudeStrategy::FixedTilt {
                lambda_des,
                kappa_des,
            } => attitude_fixed_tilt(yaw_des, lambda_des, kappa_des),
            AttitudeStrategy::FixedAttitude { phi_des, theta_des } => {
                attitude_fixed(yaw_des, phi_des, theta_des)
            }
        };
        self.prev_x_axis = Some(setpoint.rotation.column(0));
        setpoint
    }
}

fn degraded_zero_tilt(yaw_des: f64) -> AttitudeSetpoint {
    let mut sp = attitude_zero_tilt(yaw_des);
    sp.degraded = true;
    sp
}

/// Completes an orthonormal, right-handed setpoint frame around a unit
/// z-axis, steering the x-axis toward the desired yaw heading.
///
/// Returns the rotation and whether the history fallback was used; `None`
/// when the construction degenerates even with history.
fn frame_about_z_axis(
    k_s: Vector3<f64>,
    yaw_des: f64,
    prev_x_axis: Option<Vector3<f64>>,
) -> Option<(Rotation, bool)> {
    let yaw_y = Vector3::new(-yaw_des.sin(), yaw_des.cos(), 0.0);
    let cross = yaw_y.cross(&k_s);
    let (x_axis, used_history) = if cross.norm() >= YAW_AXIS_EPSILON {
        (cross.normalize(), false)
    } else {
        let prev = prev_x_axis?;
        let projected = prev - k_s * prev.dot(&k_s);
        if projected.norm() < YAW_AXIS_EPSILON {
            return None;
        }
        (projected.normalize(), true)
    };
    let y_axis = k_s.cross(&x_axis);
    let rotation =
        Rotation::from_columns(x_axis, y_axis, k_s, FrameId::Setpoint, FrameId::Inertial).ok()?;
    Some((rotation, used_history))
}

fn full_tilt_with_history(
    f_des: &FrameVector,
    yaw_des: f64,
    prev_x_axis: Option<Vector3<f64>>,
) -> AttitudeSetpoint {
    let norm = f_des.norm();
    if !f_des.is_finite() || norm <= THRUST_EPSILON {
        return degraded_zero_tilt(yaw_des);
    }
    let k_s = -f_des.coords() / norm;
    match frame_about_z_axis(k_s, yaw_des, prev_x_axis) {
        Some((rotation, used_history)) => AttitudeSetpoint {
            rotation,
            strategy: AttitudeStrategy::FullTilt,
            degraded: used_history,
        },
        None => degraded_zero_tilt(yaw_des),
    }
}

fn minimum_tilt_with_history(
    f_des: &FrameVector,
    yaw_des: f64,
    f_lmax: f64,
    prev_x_axis: Option<Vector3<f64>>,
) -> AttitudeSetpoint {
    let norm = f_des.norm();
    if !f_des.is_finite() || norm <= THRUST_EPSILON {
        return degraded_zero_tilt(yaw_des);
    }
    let strategy = AttitudeStrategy::MinimumTilt { f_lmax };
    let horizontal = f_des.horizontal_norm();
    if horizontal <= f_lmax {
        // Lateral thrust alone covers the horizontal demand: stay level.
        return AttitudeSetpoint {
            rotation: attitude_zero_tilt(yaw_des).rotation,
            strategy,
            degraded: false,
        };
    }
    // Tilt by the gap between the demand's angle from vertical and the
    // angle the lateral bound can absorb.
    let chi = (horizontal / norm).clamp(-1.0, 1.0).asin();
    let mu = (f_lmax / norm).clamp(-1.0, 1.0).asin();
    let lambda = (chi - mu).max(0.0);
    // f_des x z is horizontal with norm equal to the horizontal demand,
    // which exceeds f_lmax > 0 here.
    let axis = Vector3::new(f_des.y(), -f_des.x(), 0.0) / horizontal;
    let k_s = rodrigues_rotate_vec(&Vector3::new(0.0, 0.0, 1.0), &axis, lambda);
    match frame_about_z_axis(k_s, yaw_des, prev_x_axis) {
        Some((rotation, used_history)) => AttitudeSetpoint {
            rotation,
            strategy,
            degraded: used_history,
        },
        None => degraded_zero_tilt(yaw_des),
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{euler_from_rotation, tilt_angle};
    use approx::assert_relative_eq;
    use nalgebra::Matrix3;

    fn inertial(x: f64, y: f64, z: f64) -> FrameVector {
        FrameVector::new(x, y, z, FrameId::Inertial)
    }

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    mod zero_tilt {
        use super::*;

        #[test]
        fn thirty_degrees_yaw_matches_closed_form() {
            let sp = attitude_zero_tilt(deg(30.0));
            #[rustfmt::skip]
            let expected = Matrix3::new(
                0.8660254037844387, -0.5, 0.0,
                0.5, 0.8660254037844387, 0.0,
                0.0, 0.0, 1.0,
            );
            assert_relative_eq!(*sp.rotation.matrix(), expected, epsilon = 1e-9);
            assert!(!sp.degraded);
        }

        #[test]
        fn tilt_is_zero_and_yaw_round_trips() {
            for psi in [-3.0, -1.2, 0.0, 0.4, 2.9] {
                let sp = attitude_zero_tilt(psi);
                assert_relative_eq!(sp.tilt(), 0.0, epsilon = 1e-12);
                let e = euler_from_rotation(&sp.rotation).unwrap();
                assert_relative_eq!(e.yaw, psi, epsilon = 1e-12);
                assert_relative_eq!(e.roll, 0.0, epsilon = 1e-12);
                assert_relative_eq!(e.pitch, 0.0, epsilon = 1e-12);
            }
        }
    }

    mod full_tilt {
        use super::*;

        #[test]
        fn aligns_thrust_axis_against_the_demand() {
            let f = inertial(6.0, 0.0, -8.0);
            let sp = attitude_full_tilt(&f, 0.0);
            let k = sp.z_axis();
            assert_relative_eq!(k.x, -0.6, epsilon = 1e-9);
            assert_relative_eq!(k.y, 0.0, epsilon = 1e-9);
            assert_relative_eq!(k.z, 0.8, epsilon = 1e-9);
            assert_relative_eq!(sp.tilt(), deg(36.8698976458), epsilon = 1e-9);
            assert!(!sp.degraded);
        }

        #[test]
        fn x_axis_projects_onto_the_yaw_heading() {
            let f = inertial(3.0, -4.0, -9.0);
            for psi in [0.0, 0.7, -2.1] {
                let sp = attitude_full_tilt(&f, psi);
                let x = sp.rotation.column(0);
                let heading = x.y.atan2(x.x);
                assert_relative_eq!(heading, psi, epsilon = 1e-9);
            }
        }

        #[test]
        fn anti_parallel_for_random_demands() {
            // k_s . f_des == -|f_des| whenever the construction is regular.
            let demands = [
                (1.0, 2.0, -5.0),
                (-4.0, 0.5, -2.0),
                (0.0, 0.0, -9.81),
                (10.0, -10.0, -0.5),
            ];
            for (x, y, z) in demands {
                let f = inertial(x, y, z);
                let sp = attitude_full_tilt(&f, 0.3);
                assert_relative_eq!(sp.z_axis().dot(&f.coords()), -f.norm(), epsilon = 1e-9);
            }
        }

        #[test]
        fn vanishing_demand_degrades_to_zero_tilt() {
            let sp = attitude_full_tilt(&inertial(0.0, 0.0, -1e-9), 0.8);
            assert!(sp.degraded);
            assert_eq!(sp.strategy, AttitudeStrategy::ZeroTilt);
            assert_relative_eq!(sp.tilt(), 0.0, epsilon = 1e-12);
            let e = euler_from_rotation(&sp.rotation).unwrap();
            assert_relative_eq!(e.yaw, 0.8, epsilon = 1e-12);
        }

        #[test]
        fn horizontal_demand_without_history_degrades() {
            // Demand along the yaw y-axis makes the cross product vanish.
            let psi = 0.0;
            let f = inertial(0.0, 5.0, 0.0);
            let sp = attitude_full_tilt(&f, psi);
            assert!(sp.degraded);
            assert_eq!(sp.strategy, AttitudeStrategy::ZeroTilt);
        }

        #[test]
        fn horizontal_demand_with_history_keeps_continuity() {
            let mut generator = AttitudeGenerator::new();
            let warm =
                generator.generate(&AttitudeStrategy::FullTilt, &inertial(0.1, 5.0, -4.0), 0.0);
            assert!(!warm.degraded);
            // Now a demand parallel to the yaw y-axis: singular construction.
            let sp = generator.generate(&AttitudeStrategy::FullTilt, &inertial(0.0, 5.0, 0.0), 0.0);
            assert!(sp.degraded);
            // Thrust axis still points against the demand...
            assert_relative_eq!(
                sp.z_axis().dot(&Vector3::new(0.0, 1.0, 0.0)),
                -1.0,
                epsilon = 1e-9
            );
            // ...and the x-axis stays close to the previous one instead of
            // snapping somewhere arbitrary.
            assert!(sp.rotation.column(0).dot(&warm.rotation.column(0)) > 0.9);
            assert!(sp.rotation.orthonormality_defect() < 1e-9);
        }
    }

    mod minimum_tilt {
        use super::*;

        #[test]
        fn worked_example_tilts_just_enough() {
            let f = inertial(6.0, 0.0, -8.0);
            let sp = attitude_minimum_tilt(&f, 0.0, 3.0);
            // asin(6/10) - asin(3/10), frozen from an independent evaluation.
            assert_relative_eq!(sp.tilt(), 0.33880845477788685, epsilon = 1e-9);
            let k = sp.z_axis();
            assert_relative_eq!(k.x, -0.33235, epsilon = 1e-4);
            assert_relative_eq!(k.y, 0.0, epsilon = 1e-12);
            assert_relative_eq!(k.z, 0.94315, epsilon = 1e-4);
            // In the setpoint frame the demand's lateral part sits exactly
            // at the bound.
            let f_sp = sp.rotation.inverse().rotate(&f);
            assert_relative_eq!(f_sp.horizontal_norm(), 3.0, epsilon = 1e-9);
        }

        #[test]
        fn lateral_bound_covering_the_demand_stays_level() {
            let f = inertial(2.0, -1.0, -9.0);
            let sp = attitude_minimum_tilt(&f, 0.4, 3.0);
            assert!(!sp.degraded);
            assert_eq!(sp.strategy, AttitudeStrategy::MinimumTilt { f_lmax: 3.0 });
            assert_relative_eq!(sp.tilt(), 0.0, epsilon = 1e-12);
            assert_relative_eq!(
                *sp.rotation.matrix(),
                *attitude_zero_tilt(0.4).rotation.matrix(),
                epsilon = 1e-12
            );
        }

        #[test]
        fn boundary_demand_is_still_case_one() {
            let sp = attitude_minimum_tilt(&inertial(3.0, 0.0, -5.0), 0.0, 3.0);
            assert_relative_eq!(sp.tilt(), 0.0, epsilon = 1e-12);
        }

        #[test]
        fn tilts_less_than_full_tilt_in_the_same_direction() {
            let f = inertial(5.0, 3.0, -7.0);
            let min = attitude_minimum_tilt(&f, 0.0, 2.0);
            let full = attitude_full_tilt(&f, 0.0);
            assert!(min.tilt() <= full.tilt() + 1e-12);
            let h_min = min.z_axis().xy();
            let h_full = full.z_axis().xy();
            assert!(h_min.dot(&h_full) > 0.0);
        }

        #[test]
        fn vanishing_demand_degrades() {
            let sp = attitude_minimum_tilt(&inertial(0.0, 0.0, 0.0), 0.0, 2.0);
            assert!(sp.degraded);
            assert_eq!(sp.strategy, AttitudeStrategy::ZeroTilt);
        }
    }

    mod fixed_tilt {
        use super::*;

        #[test]
        fn tilt_angle_is_exact_for_every_yaw() {
            let lambda = deg(10.0);
            for psi_deg in [-170.0, -45.0, 0.0, 30.0, 90.0, 179.0] {
                let sp = attitude_fixed_tilt(deg(psi_deg), lambda, deg(90.0));
                assert_relative_eq!(sp.tilt(), lambda, epsilon = 1e-9);
                assert!(!sp.degraded);
            }
        }

        #[test]
        fn tilt_plane_contains_the_compass_direction() {
            // kappa = 90 deg: the tilt plane is the east/down plane, so the
            // z-axis keeps no north component.
            let sp = attitude_fixed_tilt(0.0, deg(10.0), deg(90.0));
            let k = sp.z_axis();
            assert_relative_eq!(k.x, 0.0, epsilon = 1e-12);
            assert_relative_eq!(k.xy().norm(), deg(10.0).sin(), epsilon = 1e-12);
        }

        #[test]
        fn z_axis_is_independent_of_yaw() {
            let a = attitude_fixed_tilt(deg(0.0), deg(7.5), deg(20.0));
            let b = attitude_fixed_tilt(deg(113.0), deg(7.5), deg(20.0));
            assert_relative_eq!(a.z_axis(), b.z_axis(), epsilon = 1e-12);
        }

        #[test]
        fn extracted_yaw_matches_the_request() {
            let sp = attitude_fixed_tilt(deg(25.0), deg(12.0), deg(-40.0));
            let e = euler_from_rotation(&sp.rotation).unwrap();
            assert_relative_eq!(e.yaw, deg(25.0), epsilon = 1e-9);
        }

        #[test]
        fn zero_tilt_parameter_reduces_to_zero_tilt() {
            let sp = attitude_fixed_tilt(0.7, 0.0, 1.3);
            assert_relative_eq!(
                *sp.rotation.matrix(),
                *attitude_zero_tilt(0.7).rotation.matrix(),
                epsilon = 1e-12
            );
        }
    }

    mod fixed_attitude {
        use super::*;

        #[test]
        fn roll_and_pitch_hold_while_tilt_direction_follows_yaw() {
            let phi = deg(5.0);
            let theta = deg(0.0);
            let a = attitude_fixed(deg(0.0), phi, theta);
            let b = attitude_fixed(deg(90.0), phi, theta);
            for sp in [&a, &b] {
                let e = euler_from_rotation(&sp.rotation).unwrap();
                assert_relative_eq!(e.roll, phi, epsilon = 1e-12);
                assert_relative_eq!(e.pitch, theta, epsilon = 1e-12);
                assert_relative_eq!(sp.tilt(), phi, epsilon = 1e-12);
            }
            // Same tilt magnitude, rotated tilt direction.
            let dir_a = a.z_axis().xy();
            let dir_b = b.z_axis().xy();
            let angle = dir_a.dot(&dir_b) / (dir_a.norm() * dir_b.norm());
            assert_relative_eq!(angle.acos(), deg(90.0), epsilon = 1e-9);
        }

        #[test]
        fn zero_angles_match_zero_tilt() {
            let sp = attitude_fixed(1.1, 0.0, 0.0);
            assert_relative_eq!(
                *sp.rotation.matrix(),
                *attitude_zero_tilt(1.1).rotation.matrix(),
                epsilon = 1e-15
            );
        }
    }

    mod validation {
        use super::*;

        #[test]
        fn parameter_ranges_are_enforced() {
            assert!(AttitudeStrategy::MinimumTilt { f_lmax: 0.0 }
                .validate()
                .is_err());
            assert!(AttitudeStrategy::MinimumTilt { f_lmax: f64::NAN }
                .validate()
                .is_err());
            assert!(AttitudeStrategy::FixedTilt {
                lambda_des: std::f64::consts::FRAC_PI_2,
                kappa_des: 0.0
            }
            .validate()
            .is_err());
            assert!(AttitudeStrategy::FixedTilt {
                lambda_des: -0.1,
                kappa_des: 0.0
            }
            .validate()
            .is_err());
            assert!(AttitudeStrategy::FixedAttitude {
                phi_des: 1.6,
                theta_des: 0.0
            }
            .validate()
            .is_err());
            assert!(AttitudeStrategy::FixedTilt {
                lambda_des: 0.3,
                kappa_des: 2.0
            }
            .validate()
            .is_ok());
        }
    }

    mod generator {
        use super::*;

        #[test]
        fn dispatch_matches_the_stateless_functions() {
            let f = inertial(4.0, 1.0, -9.0);
            let mut generator = AttitudeGenerator::new();
            let cases: Vec<(AttitudeStrategy, Rotation)> = vec![
                (AttitudeStrategy::ZeroTilt, attitude_zero_tilt(0.2).rotation),
                (
                    AttitudeStrategy::FullTilt,
                    attitude_full_tilt(&f, 0.2).rotation,
                ),
                (
                    AttitudeStrategy::MinimumTilt { f_lmax: 2.0 },
                    attitude_minimum_tilt(&f, 0.2, 2.0).rotation,
                ),
                (
                    AttitudeStrategy::FixedTilt {
                        lambda_des: 0.1,
                        kappa_des: 0.4,
                    },
                    attitude_fixed_tilt(0.2, 0.1, 0.4).rotation,
                ),
                (
                    AttitudeStrategy::FixedAttitude {
                        phi_des: 0.05,
                        theta_des: -0.02,
                    },
                    attitude_fixed(0.2, 0.05, -0.02).rotation,
                ),
            ];
            for (strategy, expected) in cases {
                let sp = generator.generate(&strategy, &f, 0.2);
                assert_relative_eq!(*sp.rotation.matrix(), *expected.matrix(), epsilon = 1e-12);
            }
        }

        #[test]
        fn every_setpoint_is_a_proper_rotation() {
            let mut generator = AttitudeGenerator::new();
            let strategies = [
                AttitudeStrategy::ZeroTilt,
                AttitudeStrategy::FullTilt,
                AttitudeStrategy::MinimumTilt { f_lmax: 1.5 },
                AttitudeStrategy::FixedTilt {
                    lambda_des: 0.2,
                    kappa_des: -1.0,
                },
                AttitudeStrategy::FixedAttitude {
                    phi_des: -0.1,
                    theta_des: 0.15,
                },
            ];
            let demands = [
                (0.0, 0.0, -9.0),
                (8.0, -3.0, -1.0),
                (0.0, 0.0, 0.0),
                (-2.0, 7.0, 2.0),
            ];
            for strategy in &strategies {
                for (x, y, z) in demands {
                    let sp = generator.generate(strategy, &inertial(x, y, z), 0.9);
                    assert!(sp.rotation.orthonormality_defect() < 1e-9);
                    assert!((sp.rotation.determinant() - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tilt_angle_of_setpoints_matches_z_axis_geometry() {
        let sp = attitude_full_tilt(&inertial(6.0, 0.0, -8.0), 0.0);
        assert_relative_eq!(
            tilt_angle(&sp.rotation),
            sp.z_axis().z.acos(),
            epsilon = 1e-12
        );
    }
}
