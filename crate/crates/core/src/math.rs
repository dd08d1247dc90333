//! Vectors, rotations, rigid transforms and rays.
//!
//! Everything here is 64-bit. A model's local frame is the world frame with
//! the object's rotation and translation removed; per-axis scale is never
//! applied to rays and lives in the traversal bounds instead, so ray
//! directions stay unit length in both spaces and the ray parameter `t`
//! means the same distance in world and local space.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for unit-length and orthonormality checks.
pub const UNIT_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MathError {
    #[error("quaternion norm {0} is too small to normalize")]
    DegenerateQuaternion(f64),
    #[error("ray direction has zero length")]
    ZeroDirection,
    #[error("ray parameter {0} is negative")]
    NegativeParameter(f64),
    #[error("rotation matrix is not orthonormal with determinant +1")]
    NotARotation,
    #[error("scale components must be finite and strictly positive, got {0:?}")]
    InvalidScale([f64; 3]),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const ONE: Vec3 = Vec3::new(1.0, 1.0, 1.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for a zero or non-finite vector.
    pub fn try_normalize(self) -> Option<Vec3> {
        let len = self.length();
        if len > 0.0 && len.is_finite() {
            Some(self * (1.0 / len))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component_mul(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn lerp(self, o: Vec3, s: f64) -> Vec3 {
        self + (o - self) * s
    }

    pub fn max_abs_diff(self, o: Vec3) -> f64 {
        let d = self - o;
        d.x.abs().max(d.y.abs()).max(d.z.abs())
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, axis: usize) -> &f64 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("axis index {axis} out of range"),
        }
    }
}

/// Rotation quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Rotation of `angle_rad` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Result<Self, MathError> {
        let axis = axis.try_normalize().ok_or(MathError::ZeroDirection)?;
        let (s, c) = (angle_rad * 0.5).sin_cos();
        Ok(Self::new(c, axis.x * s, axis.y * s, axis.z * s))
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, o: Quaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn normalize(self) -> Result<Self, MathError> {
        let n = self.norm();
        if !n.is_finite() {
            return Err(MathError::NonFinite("quaternion"));
        }
        if n <= 1e-12 {
            return Err(MathError::DegenerateQuaternion(n));
        }
        Ok(Self::new(self.w / n, self.x / n, self.y / n, self.z / n))
    }

    /// Normalized linear interpolation along the shorter arc.
    pub fn nlerp(self, o: Quaternion, s: f64) -> Result<Self, MathError> {
        let o = if self.dot(o) < 0.0 {
            Quaternion::new(-o.w, -o.x, -o.y, -o.z)
        } else {
            o
        };
        Quaternion::new(
            self.w + (o.w - self.w) * s,
            self.x + (o.x - self.x) * s,
            self.y + (o.y - self.y) * s,
            self.z + (o.z - self.z) * s,
        )
        .normalize()
    }

    pub fn to_rotation(self) -> Result<Mat3, MathError> {
        Mat3::from_quaternion(self)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Self::from_rows([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    /// Rotation matrix for `q`; the quaternion is normalized first.
    pub fn from_quaternion(q: Quaternion) -> Result<Self, MathError> {
        let Quaternion { w, x, y, z } = q.normalize()?;
        Ok(Self::from_rows([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]))
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3::from_rows([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3::from_rows(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }

    pub fn is_rotation(&self, eps: f64) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
            && self
                .mul_mat(&self.transpose())
                .max_abs_diff(&Mat3::IDENTITY)
                <= eps
            && (self.determinant() - 1.0).abs() <= eps
    }
}

/// Per-object animation state: rotation, translation and per-axis scale.
///
/// The rotation pivots about the model's center, which sits at the local
/// origin. Scale never touches the ray; it sizes the octree bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
    pub scale: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
        scale: Vec3::ONE,
    };

    pub fn new(rotation: Mat3, translation: Vec3, scale: Vec3) -> Result<Self, MathError> {
        if !translation.is_finite() {
            return Err(MathError::NonFinite("translation"));
        }
        if !scale.is_finite() || scale.x <= 0.0 || scale.y <= 0.0 || scale.z <= 0.0 {
            return Err(MathError::InvalidScale(scale.to_array()));
        }
        if !rotation.is_rotation(UNIT_EPSILON) {
            return Err(MathError::NotARotation);
        }
        Ok(Self {
            rotation,
            translation,
            scale,
        })
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            translation,
            ..Self::IDENTITY
        }
    }

    /// Inverse rotation (the transpose) and inverse translation (the negation).
    pub fn inverse_rigid(&self) -> (Mat3, Vec3) {
        (self.rotation.transpose(), -self.translation)
    }

    /// Maps a world-space ray into the model's local frame:
    /// `d' = R⁻¹ d`, `o' = R⁻¹ (o - T)`.
    pub fn ray_to_local(&self, ray: &Ray) -> Ray {
        let (inv_rot, inv_trans) = self.inverse_rigid();
        Ray {
            origin: inv_rot.mul_vec(ray.origin + inv_trans),
            direction: inv_rot.mul_vec(ray.direction),
        }
    }

    /// Forward model transform of a local point: rotate, then translate.
    pub fn point_to_world(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    pub fn vector_to_world(&self, v: Vec3) -> Vec3 {
        self.rotation.mul_vec(v)
    }
}

/// Parametric ray `origin + t * direction`, `t >= 0`, with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self, MathError> {
        if !origin.is_finite() {
            return Err(MathError::NonFinite("ray origin"));
        }
        let direction = direction.try_normalize().ok_or(MathError::ZeroDirection)?;
        Ok(Self { origin, direction })
    }

    pub fn at(&self, t: f64) -> Result<Vec3, MathError> {
        if t < 0.0 || t.is_nan() {
            return Err(MathError::NegativeParameter(t));
        }
        Ok(self.point_at(t))
    }

    /// Unchecked evaluation, also valid for negative `t`.
    pub fn point_at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// Rodrigues' formula, independent of the quaternion path.
    fn rotate_axis_angle(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
        let k = axis.try_normalize().unwrap();
        let (s, c) = angle.sin_cos();
        v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
    }

    fn rot_z_90() -> Mat3 {
        Mat3::from_rows([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    }

    #[test]
    fn identity_quaternion_gives_identity() {
        let m = Mat3::from_quaternion(Quaternion::IDENTITY).unwrap();
        assert_eq!(m, Mat3::IDENTITY);
    }

    #[test]
    fn half_turn_about_z() {
        let m = Mat3::from_quaternion(Quaternion::new(0.0, 0.0, 0.0, 1.0)).unwrap();
        let expected = Mat3::from_rows([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(m.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn quarter_turn_matches_rodrigues() {
        let m = Mat3::from_quaternion(Quaternion::new(SQRT_HALF, 0.0, 0.0, SQRT_HALF)).unwrap();
        let got = m.mul_vec(Vec3::X);
        let oracle = rotate_axis_angle(Vec3::X, Vec3::Z, std::f64::consts::FRAC_PI_2);
        assert!(got.max_abs_diff(Vec3::Y) < 1e-12);
        assert!(got.max_abs_diff(oracle) < 1e-12);
    }

    #[test]
    fn degenerate_quaternion_rejected() {
        let err = Mat3::from_quaternion(Quaternion::new(0.0, 1e-14, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, MathError::DegenerateQuaternion(_)));
    }

    #[test]
    fn inverse_of_identity_and_translation() {
        let (r, t) = RigidTransform::IDENTITY.inverse_rigid();
        assert_eq!(r, Mat3::IDENTITY);
        assert_eq!(t, Vec3::ZERO);

        let tf = RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0));
        let (r, t) = tf.inverse_rigid();
        assert_eq!(r, Mat3::IDENTITY);
        assert_eq!(t, Vec3::new(-1.0, -2.0, -3.0));
    }

    #[test]
    fn inverse_rotation_times_rotation_is_identity() {
        let tf = RigidTransform::new(rot_z_90(), Vec3::ZERO, Vec3::ONE).unwrap();
        let (inv, _) = tf.inverse_rigid();
        assert_eq!(inv, rot_z_90().transpose());
        assert!(inv.mul_mat(&tf.rotation).max_abs_diff(&Mat3::IDENTITY) < 1e-9);
    }

    #[test]
    fn identity_transform_leaves_ray() {
        let ray = Ray::new(Vec3::new(0.3, -2.0, 7.0), Vec3::new(1.0, 2.0, -0.5)).unwrap();
        assert_eq!(RigidTransform::IDENTITY.ray_to_local(&ray), ray);
    }

    #[test]
    fn pure_translation_shifts_origin() {
        let tf = RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0));
        let ray = Ray::new(Vec3::ZERO, Vec3::Z).unwrap();
        let local = tf.ray_to_local(&ray);
        assert_eq!(local.origin, Vec3::new(-1.0, -2.0, -3.0));
        assert_eq!(local.direction, Vec3::Z);
    }

    #[test]
    fn rotation_about_z_rotates_direction_backwards() {
        let tf = RigidTransform::new(rot_z_90(), Vec3::ZERO, Vec3::ONE).unwrap();
        let ray = Ray::new(Vec3::ZERO, Vec3::X).unwrap();
        let local = tf.ray_to_local(&ray);
        assert!(local.direction.max_abs_diff(Vec3::new(0.0, -1.0, 0.0)) < 1e-15);
        // forward rotation recovers the world direction
        assert!(rot_z_90().mul_vec(local.direction).max_abs_diff(Vec3::X) < 1e-15);
    }

    #[test]
    fn ray_at_substitutes() {
        let ray = Ray::new(Vec3::ZERO, Vec3::X).unwrap();
        assert_eq!(ray.at(0.0).unwrap(), Vec3::ZERO);
        let ray = Ray::new(Vec3::ONE, Vec3::Y).unwrap();
        assert_eq!(ray.at(2.0).unwrap(), Vec3::new(1.0, 3.0, 1.0));
        let ray = Ray::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 0.0)).unwrap();
        let p = ray.at(2f64.sqrt()).unwrap();
        assert!(p.max_abs_diff(Vec3::new(1.0, 1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn ray_at_rejects_negative() {
        let ray = Ray::new(Vec3::ZERO, Vec3::X).unwrap();
        assert_eq!(ray.at(-0.5), Err(MathError::NegativeParameter(-0.5)));
    }

    #[test]
    fn transform_validation() {
        assert!(matches!(
            RigidTransform::new(Mat3::IDENTITY, Vec3::ZERO, Vec3::new(1.0, 0.0, 1.0)),
            Err(MathError::InvalidScale(_))
        ));
        let reflection = Mat3::from_rows([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(
            RigidTransform::new(reflection, Vec3::ZERO, Vec3::ONE),
            Err(MathError::NotARotation)
        );
    }

    #[test]
    fn nlerp_midpoint_is_half_angle() {
        let q0 = Quaternion::IDENTITY;
        let q1 = Quaternion::from_axis_angle(Vec3::Z, std::f64::consts::FRAC_PI_2).unwrap();
        let mid = q0.nlerp(q1, 0.5).unwrap();
        let got = mid.to_rotation().unwrap().mul_vec(Vec3::X);
        let oracle = rotate_axis_angle(Vec3::X, Vec3::Z, std::f64::consts::FRAC_PI_4);
        assert!(got.max_abs_diff(oracle) < 1e-6);
    }

    #[test]
    fn nlerp_takes_short_arc() {
        let q1 = Quaternion::from_axis_angle(Vec3::Z, 0.2).unwrap();
        let neg = Quaternion::new(-q1.w, -q1.x, -q1.y, -q1.z);
        let a = Quaternion::IDENTITY.nlerp(q1, 0.5).unwrap();
        let b = Quaternion::IDENTITY.nlerp(neg, 0.5).unwrap();
        assert!((a.dot(b) - 1.0).abs() < 1e-12);
    }
}
