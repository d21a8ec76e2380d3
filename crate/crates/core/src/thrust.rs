//! Thrust setpoint strategies: keeping the body-frame force demand inside
//! the lateral bound.
//!
//! The attitude strategies decide how the vehicle tilts; whatever force
//! demand is left must be expressed in the body frame and bounded so its
//! x/y (lateral) norm never exceeds `f_lmax`. The two bounding strategies
//! differ in what they protect when something has to give:
//!
//! - [`ThrustStrategy::KeepVertical`] preserves the inertial vertical force
//!   (altitude hold) and scales only the horizontal part of the demand.
//! - [`ThrustStrategy::KeepAccelDirection`] preserves the direction of the
//!   acceleration relative to hover, so the flight path bends as little as
//!   possible while the magnitude shrinks.
//!
//! Both reduce to a plain rotation ([`ThrustStrategy::Passthrough`]) when
//! the demand already fits the bound. Bounding always scales (never
//! re-normalizes): demands inside the bound pass through untouched.

use crate::frames::{FrameId, FrameVector, Rotation};
use nalgebra::Vector2;
use thiserror::Error;

/// Lateral norms below this (newtons) cannot be meaningfully scaled; the
/// bounding scale is 1 instead of dividing by (near) zero.
const LATERAL_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThrustError {
    #[error("{name} must be finite and > 0, got {value}")]
    InvalidLimit { name: &'static str, value: f64 },
}

/// Selects how the inertial force demand becomes a body-frame setpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThrustStrategy {
    /// Rotate the demand into the body frame unchanged; no bounding.
    Passthrough,
    /// Bound lateral thrust while preserving the inertial vertical force.
    KeepVertical,
    /// Bound lateral thrust while preserving the direction of the
    /// acceleration demand relative to hover.
    KeepAccelDirection,
}

/// Limits the bounding strategies work against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustLimits {
    /// Maximum lateral (body x/y) thrust norm, N.
    pub f_lmax: f64,
    /// Hover thrust magnitude (mass * gravity), N.
    pub f_hover: f64,
}

impl ThrustLimits {
    pub fn new(f_lmax: f64, f_hover: f64) -> Self {
        Self { f_lmax, f_hover }
    }

    pub fn validate(&self) -> Result<(), ThrustError> {
        if !(self.f_lmax.is_finite() && self.f_lmax > 0.0) {
            return Err(ThrustError::InvalidLimit {
                name: "f_lmax",
                value: self.f_lmax,
            });
        }
        if !(self.f_hover.is_finite() && self.f_hover > 0.0) {
            return Err(ThrustError::InvalidLimit {
                name: "f_hover",
                value: self.f_hover,
            });
        }
        Ok(())
    }
}

/// Whether a demand fits the lateral bound as-is in the current attitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// The rotated demand's lateral norm is within `f_lmax`; bounding
    /// strategies pass it through unchanged.
    WithinLateralBound,
    /// The rotated demand exceeds `f_lmax` laterally; bounding will alter
    /// it.
    ExceedsLateralBound,
}

/// A bounded body-frame thrust setpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ThrustSetpoint {
    /// Commanded force, body frame, N.
    pub force: FrameVector,
    /// True when bounding altered the demand.
    pub saturated: bool,
    /// True when rotating `force` back to the inertial frame reproduces the
    /// demand's vertical component.
    pub vertical_preserved: bool,
    /// Norm of the body x/y part of `force`, N.
    pub lateral_norm: f64,
}

/// Splits a vector into its x/y part and its z component: lateral/normal
/// in the body frame, horizontal/vertical in the inertial frame.
pub fn decompose_thrust(f: &FrameVector) -> (Vector2<f64>, f64) {
    (Vector2::new(f.x(), f.y()), f.z())
}

/// Classifies whether `f_des` (inertial) fits the lateral bound once
/// rotated into the body frame by `to_body`.
pub fn classify_feasibility(
    f_des: &FrameVector,
    to_body: &Rotation,
    limits: &ThrustLimits,
) -> Feasibility {
    let f_body = rotate_demand(f_des, to_body);
    if f_body.horizontal_norm() <= limits.f_lmax {
        Feasibility::WithinLateralBound
    } else {
        Feasibility::ExceedsLateralBound
    }
}

/// Rotation into the body frame with no bounding at all.
pub fn thrust_passthrough(f_des: &FrameVector, to_body: &Rotation) -> ThrustSetpoint {
    let force = rotate_demand(f_des, to_body);
    let lateral_norm = force.horizontal_norm();
    ThrustSetpoint {
        force,
        saturated: false,
        vertical_preserved: true,
        lateral_norm,
    }
}

/// Bounds the lateral thrust while preserving the inertial vertical force.
///
/// The demand is split into vertical and horizontal parts in the inertial
/// frame and each is rotated into the body frame. The vertical part is kept
/// whole and the horizontal part is scaled by the largest factor in [0, 1]
/// whose combined lateral norm fits the bound. Only when no such factor
/// exists (holding altitude in this attitude bursts the bound by itself,
/// and the horizontal demand cannot pull it back) is the vertical part
/// clamped and the horizontal part dropped, giving up altitude tracking.
pub fn thrust_keep_vertical(
    f_des: &FrameVector,
    to_body: &Rotation,
    limits: &ThrustLimits,
) -> ThrustSetpoint {
    let (to_body, f_des) = checked_inputs(f_des, to_body);
    let vertical_i = FrameVector::new(0.0, 0.0, f_des.z(), FrameId::Inertial);
    let horizontal_i = FrameVector::new(f_des.x(), f_des.y(), 0.0, FrameId::Inertial);
    let vertical_b = to_body.rotate(&vertical_i);
    let horizontal_b = to_body.rotate(&horizontal_i);

    let (vert_lat, _) = decompose_thrust(&vertical_b);
    let (hor_lat, _) = decompose_thrust(&horizontal_b);
    match lateral_budget_scale(&vert_lat, &hor_lat, limits.f_lmax) {
        Some(scale) => {
            let force = vertical_b + horizontal_b * scale;
            let lateral_norm = force.horizontal_norm();
            ThrustSetpoint {
                force,
                saturated: scale < 1.0,
                vertical_preserved: true,
                lateral_norm,
            }
        }
        None => {
            // No fraction of the horizontal demand fits alongside the
            // vertical part: holding altitude in this attitude bursts the
            // bound by itself. Clamp its lateral footprint, drop the rest.
            let vert_lat_norm = vert_lat.norm();
            let k = limits.f_lmax / vert_lat_norm;
            let force = FrameVector::new(
                vertical_b.x() * k,
                vertical_b.y() * k,
                vertical_b.z(),
                FrameId::Body,
            );
            let lateral_norm = force.horizontal_norm();
            ThrustSetpoint {
                force,
                saturated: true,
                vertical_preserved: false,
                lateral_norm,
            }
        }
    }
}

/// Bounds the lateral thrust while preserving the direction of the
/// acceleration demand.
///
/// Above hover the demand is split into a hover baseline plus a residual;
/// the residual is scaled as a whole vector, so the acceleration it
/// represents keeps its direction. At or below hover there is no baseline
/// to protect and the entire demand is scaled as one vector.
pub fn thrust_keep_accel_direction(
    f_des: &FrameVector,
    to_body: &Rotation,
    limits: &ThrustLimits,
) -> ThrustSetpoint {
    let (to_body, f_des) = checked_inputs(f_des, to_body);
    let above_hover = -f_des.z() > limits.f_hover;
    if !above_hover {
        let f_body = to_body.rotate(&f_des);
        let lateral = f_body.horizontal_norm();
        if lateral <= limits.f_lmax || lateral < LATERAL_EPSILON {
            return ThrustSetpoint {
                force: f_body,
                saturated: false,
                vertical_preserved: true,
                lateral_norm: lateral,
            };
        }
        let force = f_body * (limits.f_lmax / lateral);
        let lateral_norm = force.horizontal_norm();
        return ThrustSetpoint {
            force,
            saturated: true,
            vertical_preserved: false,
            lateral_norm,
        };
    }

    // NED: upward hover force is -z.
    let hover_i = FrameVector::new(0.0, 0.0, -limits.f_hover, FrameId::Inertial);
    let hover_b = to_body.rotate(&hover_i);
    let residual_b = to_body.rotate(&(f_des - hover_i));

    let (hover_lat, _) = decompose_thrust(&hover_b);
    let (res_lat, _) = decompose_thrust(&residual_b);
    match lateral_budget_scale(&hover_lat, &res_lat, limits.f_lmax) {
        Some(scale) => {
            let force = hover_b + residual_b * scale;
            let lateral_norm = force.horizontal_norm();
            ThrustSetpoint {
                force,
                saturated: scale < 1.0,
                vertical_preserved: scale >= 1.0,
                lateral_norm,
            }
        }
        None => {
            // Even hovering in this attitude bursts the bound and the
            // residual cannot help; clamp the baseline, drop the residual.
            let hover_lat_norm = hover_lat.norm();
            let k = limits.f_lmax / hover_lat_norm;
            let force =
                FrameVector::new(hover_b.x() * k, hover_b.y() * k, hover_b.z(), FrameId::Body);
            let lateral_norm = force.horizontal_norm();
            ThrustSetpoint {
                force,
                saturated: true,
                vertical_preserved: false,
                lateral_norm,
            }
        }
    }
}

/// Dispatches to the configured strategy.
pub fn generate_thrust(
    strategy: ThrustStrategy,
    f_des: &FrameVector,
    to_body: &Rotation,
    limits: &ThrustLimits,
) -> ThrustSetpoint {
    match strategy {
        ThrustStrategy::Passthrough => {
            let (to_body, f_des) = checked_inputs(f_des, to_body);
            thrust_passthrough(&f_des, &to_body)
        }
        ThrustStrategy::KeepVertical => thrust_keep_vertical(f_des, to_body, limits),
        ThrustStrategy::KeepAccelDirection => thrust_keep_accel_direction(f_des, to_body, limits),
    }
}

fn checked_inputs(f_des: &FrameVector, to_body: &Rotation) -> (Rotation, FrameVector) {
    assert_eq!(
        f_des.frame(),
        FrameId::Inertial,
        "force demand must be inertial"
    );
    assert_eq!(
        to_body.from_frame(),
        FrameId::Inertial,
        "rotation must consume inertial coords"
    );
    assert_eq!(
        to_body.to_frame(),
        FrameId::Body,
        "rotation must produce body coords"
    );
    (*to_body, *f_des)
}

fn rotate_demand(f_des: &FrameVector, to_body: &Rotation) -> FrameVector {
    let (to_body, f_des) = checked_inputs(f_des, to_body);
    to_body.rotate(&f_des)
}

/// Largest `s` in [0, 1] such that `|base + s * add| <= limit`, or `None`
/// when no such `s` exists. This is the exact disc-geometry solution of the
/// quadratic `|base + s*add|^2 = limit^2`: the admissible set is the
/// interval between the two roots, intersected with [0, 1].
///
/// `base` itself may lie outside the disc; `add` can then still pull the
/// sum inside (the demand as a whole is feasible even though its parts are
/// not), and the fallback that abandons `add` fires only when it cannot.
fn lateral_budget_scale(base: &Vector2<f64>, add: &Vector2<f64>, limit: f64) -> Option<f64> {
    let c = base.norm_squared() - limit * limit;
    let a = add.norm_squared();
    if a < LATERAL_EPSILON * LATERAL_EPSILON {
        // Nothing to scale; feasibility is base's alone.
        return if c <= 0.0 { Some(1.0) } else { None };
    }
    let b = 2.0 * base.dot(add);
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let s_high = (-b + sqrt_disc) / (2.0 * a);
    let s_low = (-b - sqrt_disc) / (2.0 * a);
    if s_high < 0.0 || s_low > 1.0 {
        return None;
    }
    Some(s_high.min(1.0))
}

// ---------------------------------------------------------------------------
