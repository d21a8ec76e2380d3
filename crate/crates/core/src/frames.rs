//! Coordinate frames, tagged vectors, and rotation utilities.
//!
//! Conventions shared by the whole crate:
//!
//! - Inertial frame `I`: NED (x north, y east, z down). Gravity is +z,
//!   upward thrust is -z.
//! - Body frame `B`: FRD (x forward, y right, z down), fixed to the vehicle.
//! - Setpoint frame `S`: the frame the attitude strategies output; same
//!   handedness as the body frame.
//! - Euler angles are intrinsic ZYX: yaw about z, then pitch about the new
//!   y, then roll about the new x.
//!
//! Vectors carry their frame as a runtime tag ([`FrameVector`]); mixing
//! frames in arithmetic is a programming error and panics. A [`Rotation`]
//! maps coordinates from one tagged frame into another, so a vehicle
//! attitude is the rotation from `Body` to `Inertial` and its columns are
//! the body axes expressed in inertial coordinates.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use thiserror::Error;

/// Orthonormality defect above which a freshly built rotation matrix is
/// re-orthonormalized before use.
pub const ORTHONORMALITY_REPAIR_THRESHOLD: f64 = 1e-12;

/// Maximum orthonormality defect any constructed [`Rotation`] may carry.
pub const ORTHONORMALITY_LIMIT: f64 = 1e-9;

/// Errors produced by frame and rotation constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    /// The matrix could not be repaired into a proper rotation.
    #[error("not a proper rotation: det = {det:.6e}, orthonormality defect = {defect:.6e}")]
    NotARotation { det: f64, defect: f64 },
    /// Pitch is at +-90 deg and roll/yaw are no longer separable.
    #[error("gimbal lock: |sin(pitch)| = {sin_pitch:.15} leaves roll and yaw coupled")]
    GimbalLock { sin_pitch: f64 },
    /// A rotation axis was not unit length.
    #[error("rotation axis must be unit length, got norm {norm:.9}")]
    NonUnitAxis { norm: f64 },
}

/// Identifies which frame a vector's coordinates are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameId {
    Inertial,
    Body,
    Setpoint,
}

impl std::fmt::Display for FrameId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameId::Inertial => write!(f, "Inertial"),
            FrameId::Body => write!(f, "Body"),
            FrameId::Setpoint => write!(f, "Setpoint"),
        }
    }
}

// ---------------------------------------------------------------------------
// FrameVector
// ---------------------------------------------------------------------------

/// A 3-vector tagged with the frame its coordinates are expressed in.
///
/// Arithmetic between two `FrameVector`s asserts that the tags match; a
/// mismatch is a contract violation and panics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameVector {
    coords: Vector3<f64>,
    frame: FrameId,
}

impl FrameVector {
    pub fn new(x: f64, y: f64, z: f64, frame: FrameId) -> Self {
        Self {
            coords: Vector3::new(x, y, z),
            frame,
        }
    }

    pub fn from_vector(coords: Vector3<f64>, frame: FrameId) -> Self {
        Self { coords, frame }
    }

    pub fn zero(frame: FrameId) -> Self {
        Self {
            coords: Vector3::zeros(),
            frame,
        }
    }

    pub fn x(&self) -> f64 {
        self.coords.x
    }

    pub fn y(&self) -> f64 {
        self.coords.y
    }

    pub fn z(&self) -> f64 {
        self.coords.z
    }

    pub fn frame(&self) -> FrameId {
        self.frame
    }

    /// The raw coordinates; the caller takes over frame bookkeeping.
    pub fn coords(&self) -> Vector3<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    /// Norm of the x/y part: lateral in body frame, horizontal in inertial.
    pub fn horizontal_norm(&self) -> f64 {
        self.coords.x.hypot(self.coords.y)
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &FrameVector) -> f64 {
        assert_same_frame(self.frame, other.frame, "dot");
        self.coords.dot(&other.coords)
    }

    pub fn cross(&self, other: &FrameVector) -> FrameVector {
        assert_same_frame(self.frame, other.frame, "cross");
        FrameVector::from_vector(self.coords.cross(&other.coords), self.frame)
    }
}

fn assert_same_frame(a: FrameId, b: FrameId, op: &str) {
    assert_eq!(a, b, "frame mismatch in {op}: {a} vs {b}");
}

impl std::ops::Add for FrameVector {
    type Output = FrameVector;
    fn add(self, rhs: FrameVector) -> FrameVector {
        assert_same_frame(self.frame, rhs.frame, "add");
        FrameVector::from_vector(self.coords + rhs.coords, self.frame)
    }
}

impl std::ops::Sub for FrameVector {
    type Output = FrameVector;
    fn sub(self, rhs: FrameVector) -> FrameVector {
        assert_same_frame(self.frame, rhs.frame, "sub");
        FrameVector::from_vector(self.coords - rhs.coords, self.frame)
    }
}

impl std::ops::Neg for FrameVector {
    type Output = FrameVector;
    fn neg(self) -> FrameVector {
        FrameVector::from_vector(-self.coords, self.frame)
    }
}

impl std::ops::Mul<f64> for FrameVector {
    type Output = FrameVector;
    fn mul(self, rhs: f64) -> FrameVector {
        FrameVector::from_vector(self.coords * rhs, self.frame)
    }
}

impl std::ops::Mul<FrameVector> for f64 {
    type Output = FrameVector;
    fn mul(self, rhs: FrameVector) -> FrameVector {
        rhs * self
    }
}

impl std::ops::Div<f64> for FrameVector {
    type Output = FrameVector;
    fn div(self, rhs: f64) -> FrameVector {
        FrameVector::from_vector(self.coords / rhs, self.frame)
    }
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

/// A proper rotation between two tagged frames.
///
/// `rotate` consumes coordinates expressed in [`Rotation::from_frame`] and
/// produces the same vector expressed in [`Rotation::to_frame`]; the columns
/// of the stored matrix are the `from` frame's axes expressed in `to`
/// coordinates. An attitude is therefore `Body -> Inertial` (columns: body
/// axes in NED) and an attitude setpoint `Setpoint -> Inertial`.
///
/// Every constructed rotation is orthonormal with determinant +1 to within
/// [`ORTHONORMALITY_LIMIT`]; constructors repair small defects by
/// Gram-Schmidt and reject anything that is not a rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    matrix: Matrix3<f64>,
    from: FrameId,
    to: FrameId,
}

impl Rotation {
    /// Builds a rotation from a matrix, repairing orthonormality defects up
    /// to Gram-Schmidt tolerance and rejecting reflections and degenerate
    /// matrices.
    pub fn from_matrix(
        matrix: Matrix3<f64>,
        from: FrameId,
        to: FrameId,
    ) -> Result<Self, FrameError> {
        if !matrix.iter().all(|m| m.is_finite()) {
            return Err(FrameError::NotARotation {
                det: f64::NAN,
                defect: f64::NAN,
            });
        }
        let det = matrix.determinant();
        let defect = orthonormality_defect_of(&matrix);
        if det <= 0.0 {
            return Err(FrameError::NotARotation { det, defect });
        }
        if defect <= ORTHONORMALITY_REPAIR_THRESHOLD {
            return Ok(Self { matrix, from, to });
        }
        let repaired = gram_schmidt(&matrix).ok_or(FrameError::NotARotation { det, defect })?;
        let repaired_defect = orthonormality_defect_of(&repaired);
        if repaired_defect > ORTHONORMALITY_LIMIT {
            return Err(FrameError::NotARotation {
                det,
                defect: repaired_defect,
            });
        }
        Ok(Self {
            matrix: repaired,
            from,
            to,
        })
    }

    /// Builds a rotation whose columns are the `from` frame's axes expressed
    /// in `to` coordinates.
    pub fn from_columns(
        x: Vector3<f64>,
        y: Vector3<f64>,
        z: Vector3<f64>,
        from: FrameId,
        to: FrameId,
    ) -> Result<Self, FrameError> {
        Self::from_matrix(Matrix3::from_columns(&[x, y, z]), from, to)
    }

    pub fn identity(from: FrameId, to: FrameId) -> Self {
        Self {
            matrix: Matrix3::identity(),
            from,
            to,
        }
    }

    /// Intrinsic ZYX Euler rotation between arbitrary frames. The matrix is
    /// Rz(yaw) * Ry(pitch) * Rx(roll).
    pub fn from_euler(angles: EulerAngles, from: FrameId, to: FrameId) -> Self {
        let (sp, cp) = angles.roll.sin_cos();
        let (st, ct) = angles.pitch.sin_cos();
        let (sy, cy) = angles.yaw.sin_cos();
        let matrix = Matrix3::new(
            ct * cy,
            sp * st * cy - cp * sy,
            cp * st * cy + sp * sy,
            ct * sy,
            sp * st * sy + cp * cy,
            cp * st * sy - sp * cy,
            -st,
            sp * ct,
            cp * ct,
        );
        Self { matrix, from, to }
    }

    pub fn from_unit_quaternion(q: UnitQuaternion<f64>, from: FrameId, to: FrameId) -> Self {
        Self {
            matrix: q.to_rotation_matrix().into_inner(),
            from,
            to,
        }
    }

    pub fn to_unit_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.matrix))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn from_frame(&self) -> FrameId {
        self.from
    }

    pub fn to_frame(&self) -> FrameId {
        self.to
    }

    /// Column `i` of the matrix: the `from` frame's i-th axis in `to`
    /// coordinates.
    pub fn column(&self, i: usize) -> Vector3<f64> {
        self.matrix.column(i).into_owned()
    }

    /// Re-expresses `v` (given in the `from` frame) in the `to` frame.
    pub fn rotate(&self, v: &FrameVector) -> FrameVector {
        assert_eq!(
            v.frame(),
            self.from,
            "rotation expects {} coordinates, got {}",
            self.from,
            v.frame()
        );
        FrameVector::from_vector(self.matrix * v.coords(), self.to)
    }

    pub fn inverse(&self) -> Rotation {
        Rotation {
            matrix: self.matrix.transpose(),
            from: self.to,
            to: self.from,
        }
    }

    /// Composition `self * rhs`: first `rhs`, then `self`. Frame tags must
    /// chain (`rhs.to == self.from`).
    pub fn compose(&self, rhs: &Rotation) -> Rotation {
        assert_eq!(
            rhs.to, self.from,
            "cannot compose {} -> {} after {} -> {}",
            self.from, self.to, rhs.from, rhs.to
        );
        Rotation {
            matrix: self.matrix * rhs.matrix,
            from: rhs.from,
            to: self.to,
        }
    }

    /// Maximum absolute entry of `m^T m - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect_of(&self.matrix)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

fn orthonormality_defect_of(m: &Matrix3<f64>) -> f64 {
    let residual = m.transpose() * m - Matrix3::identity();
    residual.iter().fold(0.0_f64, |acc, r| acc.max(r.abs()))
}

/// Column-wise Gram-Schmidt producing a right-handed orthonormal basis.
/// Returns `None` when the columns do not span 3-space.
fn gram_schmidt(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let c0 = m.column(0).into_owned();
    let n0 = c0.norm();
    if n0 < 1e-9 {
        return None;
    }
    let e0 = c0 / n0;
    let c1 = m.column(1).into_owned();
    let p1 = c1 - e0 * e0.dot(&c1);
    let n1 = p1.norm();
    if n1 < 1e-9 {
        return None;
    }
    let e1 = p1 / n1;
    // The third column is the right-handed completion; the determinant sign
    // was checked before repair, so this never hides a reflection.
    let e2 = e0.cross(&e1);
    Some(Matrix3::from_columns(&[e0, e1, e2]))
}

// ---------------------------------------------------------------------------
// Euler angles
// ---------------------------------------------------------------------------

/// Intrinsic ZYX Euler angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }
}

/// Attitude-style rotation (`Setpoint -> Inertial`) from ZYX Euler angles.
pub fn rotation_from_euler(angles: EulerAngles) -> Rotation {
    Rotation::from_euler(angles, FrameId::Setpoint, FrameId::Inertial)
}

/// Extracts ZYX Euler angles from an attitude-style rotation.
///
/// Angles come out wrapped to (-pi, pi] with |pitch| <= pi/2. Fails with
/// [`FrameError::GimbalLock`] when the pitch magnitude reaches 90 deg and
/// roll/yaw are no longer separable.
pub fn euler_from_rotation(r: &Rotation) -> Result<EulerAngles, FrameError> {
    let m = r.matrix();
    let sin_pitch = -m[(2, 0)];
    if sin_pitch.abs() >= 1.0 - 1e-12 {
        return Err(FrameError::GimbalLock { sin_pitch });
    }
    Ok(EulerAngles {
        roll: wrap_angle(m[(2, 1)].atan2(m[(2, 2)])),
        pitch: sin_pitch.asin(),
        yaw: wrap_angle(m[(1, 0)].atan2(m[(0, 0)])),
    })
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = angle % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

/// Rotates `v` about the unit axis `r` by `angle` (right-hand rule):
///
/// `v' = (1 - cos a)(r . v) r + v cos a + (r x v) sin a`
pub fn rodrigues_rotate_vec(v: &Vector3<f64>, axis: &Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    axis * (axis.dot(v) * (1.0 - c)) + v * c + axis.cross(v) * s
}

/// Frame-tagged Rodrigues rotation; `v` and `axis` must share a frame and
/// the axis must be unit length to within 1e-9.
pub fn rodrigues_rotate(
    v: &FrameVector,
    axis: &FrameVector,
    angle: f64,
) -> Result<FrameVector, FrameError> {
    assert_same_frame(v.frame(), axis.frame(), "rodrigues_rotate");
    let norm = axis.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(FrameError::NonUnitAxis { norm });
    }
    Ok(FrameVector::from_vector(
        rodrigues_rotate_vec(&v.coords(), &axis.coords(), angle),
        v.frame(),
    ))
}

/// Tilt angle of an attitude-style rotation: the angle between the rotated
/// frame's z-axis and inertial z, `arccos(m33)` clamped into [0, pi].
pub fn tilt_angle(r: &Rotation) -> f64 {
    r.matrix()[(2, 2)].clamp(-1.0, 1.0).acos()
}

// ---------------------------------------------------------------------------
