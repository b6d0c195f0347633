//! Mechanism geometry: constant parameters, Denavit-Hartenberg transforms,
//! the platform orientation convention and limb attachment points.
//!
//! Frames: the fixed frame `{O_f; X_f, Y_f, Z_f}` has `Z_f` pointing up from
//! the base towards the platform. The central RPU limb keeps the platform
//! origin in the `X_f`-`Z_f` plane, so a pose carries only `(x, z, θ, ψ)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};

/// Fixed and mobile leg radii plus the angular placement of limbs 2 and 3.
///
/// Limb 1 sits on the negative `X` axis of both platforms. Limb 2 is placed at
/// `+beta` and limb 3 at `-beta` measured from the positive `X` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricParams {
    /// Fixed-base leg radius (m).
    pub r: f64,
    /// Mobile-platform leg radius (m).
    pub r_m: f64,
    /// Fixed-base placement of limb 2 (rad).
    pub beta_fd: f64,
    /// Fixed-base placement of limb 3 (rad).
    pub beta_fi: f64,
    /// Mobile-platform placement of limb 2 (rad).
    pub beta_md: f64,
    /// Mobile-platform placement of limb 3 (rad).
    pub beta_mi: f64,
}

impl Default for GeometricParams {
    fn default() -> Self {
        Self {
            r: 0.40,
            r_m: 0.20,
            beta_fd: 50f64.to_radians(),
            beta_fi: 40f64.to_radians(),
            beta_md: 40f64.to_radians(),
            beta_mi: 30f64.to_radians(),
        }
    }
}

impl GeometricParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::invalid(format!("r must be positive, got {}", self.r)));
        }
        if !(self.r_m > 0.0 && self.r_m.is_finite()) {
            return Err(Error::invalid(format!("r_m must be positive, got {}", self.r_m)));
        }
        for (name, beta) in
            [("beta_fd", self.beta_fd), ("beta_fi", self.beta_fi), ("beta_md", self.beta_md), ("beta_mi", self.beta_mi)]
        {
            if !(beta > 0.0 && beta < FRAC_PI_2) {
                return Err(Error::invalid(format!(
                    "{name} must lie in (0, 90) degrees, got {:.6} degrees",
                    beta.to_degrees()
                )));
            }
        }
        Ok(())
    }

    /// Base attachment point of an external limb in the fixed frame.
    pub fn fixed_point(&self, limb: Limb) -> Vector3<f64> {
        match limb {
            Limb::One => Vector3::new(-self.r, 0.0, 0.0),
            Limb::Two => self.r * Vector3::new(self.beta_fd.cos(), self.beta_fd.sin(), 0.0),
            Limb::Three => self.r * Vector3::new(self.beta_fi.cos(), -self.beta_fi.sin(), 0.0),
        }
    }

    /// Platform attachment point of an external limb in the platform frame.
    pub fn mobile_point_local(&self, limb: Limb) -> Vector3<f64> {
        match limb {
            Limb::One => Vector3::new(-self.r_m, 0.0, 0.0),
            Limb::Two => self.r_m * Vector3::new(self.beta_md.cos(), self.beta_md.sin(), 0.0),
            Limb::Three => self.r_m * Vector3::new(self.beta_mi.cos(), -self.beta_mi.sin(), 0.0),
        }
    }
}

/// Task-space state of the mobile platform. `y` is structurally zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    /// Platform origin `X` coordinate (m).
    pub x: f64,
    /// Platform origin `Z` coordinate (m).
    pub z: f64,
    /// Pitch about the fixed `Y` axis (rad).
    pub theta: f64,
    /// Yaw (rad).
    pub psi: f64,
}

impl Pose {
    /// Start pose of both experimental trajectories.
    pub const HOME: Pose = Pose { x: 0.0, z: 0.635, theta: 0.0, psi: 0.0 };

    pub const fn new(x: f64, z: f64, theta: f64, psi: f64) -> Self {
        Self { x, z, theta, psi }
    }

    /// Pose with angles given in degrees.
    pub fn from_degrees(x: f64, z: f64, theta_deg: f64, psi_deg: f64) -> Self {
        Self::new(x, z, theta_deg.to_radians(), psi_deg.to_radians())
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x, self.z, self.theta, self.psi)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Platform origin in the fixed frame.
    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(self.x, 0.0, self.z)
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        platform_rotation(self.theta, self.psi)
    }

    /// Largest absolute component difference (mixed m / rad).
    pub fn max_abs_diff(&self, other: &Pose) -> f64 {
        (self.to_vector() - other.to_vector()).amax()
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "x = {:.9} m, z = {:.9} m, theta = {:.9} deg, psi = {:.9} deg",
            self.x,
            self.z,
            self.theta.to_degrees(),
            self.psi.to_degrees()
        )
    }
}

/// One of the three external UPS limbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Limb {
    One,
    Two,
    Three,
}

impl Limb {
    pub const ALL: [Limb; 3] = [Limb::One, Limb::Two, Limb::Three];

    pub fn index(self) -> usize {
        match self {
            Limb::One => 0,
            Limb::Two => 1,
            Limb::Three => 2,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Limb> {
        match n {
            1 => Some(Limb::One),
            2 => Some(Limb::Two),
            3 => Some(Limb::Three),
            _ => None,
        }
    }
}

impl fmt::Display for Limb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Which D-H parameter of a row carries the joint variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointVariable {
    /// Joint value is added to `theta`.
    Revolute,
    /// Joint value is added to `d`.
    Prismatic,
    None,
}

/// A row of a D-H table in Paul's convention. `d` and `theta` are offsets the
/// joint value is added to when the row is variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub alpha: f64,
    pub a: f64,
    pub d: f64,
    pub theta: f64,
    pub variable: JointVariable,
}

impl DhRow {
    pub const fn revolute(alpha: f64) -> Self {
        Self { alpha, a: 0.0, d: 0.0, theta: 0.0, variable: JointVariable::Revolute }
    }

    pub const fn prismatic(alpha: f64, theta: f64) -> Self {
        Self { alpha, a: 0.0, d: 0.0, theta, variable: JointVariable::Prismatic }
    }
}

/// D-H rows `j = 1..6` of each external UPS limb.
pub const UPS_DH_TABLE: [DhRow; 6] = [
    DhRow::revolute(-FRAC_PI_2),
    DhRow::revolute(FRAC_PI_2),
    DhRow::prismatic(0.0, 0.0),
    DhRow::revolute(FRAC_PI_2),
    DhRow::revolute(FRAC_PI_2),
    DhRow::revolute(FRAC_PI_2),
];

/// D-H rows `j = 1..4` of the central RPU limb.
pub const RPU_DH_TABLE: [DhRow; 4] =
    [DhRow::revolute(-FRAC_PI_2), DhRow::prismatic(FRAC_PI_2, PI), DhRow::revolute(FRAC_PI_2), DhRow::revolute(0.0)];

/// Rigid transform stored as rotation plus translation; the implicit last row
/// is `(0, 0, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl HomogeneousTransform {
    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `‖RᵀR − I‖` (max entry), zero for an exact rotation.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax()
    }
}

impl Mul for HomogeneousTransform {
    type Output = HomogeneousTransform;

    fn mul(self, rhs: HomogeneousTransform) -> HomogeneousTransform {
        HomogeneousTransform {
            rotation: self.rotation * rhs.rotation,
            translation: self.rotation * rhs.translation + self.translation,
        }
    }
}

/// D-H link transform with the joint value `q` substituted into the row's
/// variable slot.
pub fn dh_transform(row: &DhRow, q: f64) -> HomogeneousTransform {
    let (theta, d) = match row.variable {
        JointVariable::Revolute => (row.theta + q, row.d),
        JointVariable::Prismatic => (row.theta, row.d + q),
        JointVariable::None => (row.theta, row.d),
    };
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    HomogeneousTransform {
        rotation: Matrix3::new(ct, -ca * st, sa * st, st, ca * ct, -sa * ct, 0.0, sa, ca),
        translation: Vector3::new(row.a * ct, row.a * st, d),
    }
}

/// Composes `base · H_1(q_1) · … · H_n(q_n)` over the first `q.len()` rows.
pub fn chain_transform(base: &HomogeneousTransform, rows: &[DhRow], q: &[f64]) -> HomogeneousTransform {
    rows.iter().zip(q).fold(*base, |acc, (row, &qj)| acc * dh_transform(row, qj))
}

pub(crate) fn rot_x(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub(crate) fn rot_y(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub(crate) fn rot_z(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Platform orientation `Rot(Z, ψ) · Rot(Y, θ)`.
pub fn platform_rotation(theta: f64, psi: f64) -> Matrix3<f64> {
    rot_z(psi) * rot_y(theta)
}

/// Partial derivatives of [`platform_rotation`] with respect to `(θ, ψ)`.
pub(crate) fn platform_rotation_partials(theta: f64, psi: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let d_ry = Matrix3::new(-st, 0.0, ct, 0.0, 0.0, 0.0, -ct, 0.0, -st);
    let d_rz = Matrix3::new(-sp, -cp, 0.0, cp, -sp, 0.0, 0.0, 0.0, 0.0);
    (rot_z(psi) * d_ry, d_rz * rot_y(theta))
}

/// Orientation of every limb's D-H frame 0: its `z` axis (first U axis, or
/// the central R axis) is parallel to `Y_f`, and its `y` axis points up.
pub(crate) fn limb_base_rotation() -> Matrix3<f64> {
    rot_x(FRAC_PI_2)
}

/// Frame 0 of an external limb, located at its base attachment point.
pub fn limb_base_frame(params: &GeometricParams, limb: Limb) -> HomogeneousTransform {
    HomogeneousTransform::new(limb_base_rotation(), params.fixed_point(limb))
}

/// Frame 0 of the central limb, located at the fixed-frame origin.
pub fn central_base_frame() -> HomogeneousTransform {
    HomogeneousTransform::new(limb_base_rotation(), Vector3::zeros())
}

/// Fixed and mobile attachment points, all expressed in the fixed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttachmentPoints {
    /// `A₀, B₀, C₀`.
    pub fixed: [Vector3<f64>; 3],
    /// `A, B, C`.
    pub mobile: [Vector3<f64>; 3],
    /// `O_f`.
    pub base_origin: Vector3<f64>,
    /// `O_m`.
    pub platform_origin: Vector3<f64>,
}

impl AttachmentPoints {
    /// Leg vector from base to platform attachment point.
    pub fn leg(&self, limb: Limb) -> Vector3<f64> {
        self.mobile[limb.index()] - self.fixed[limb.index()]
    }
}

pub fn attachment_points(params: &GeometricParams, pose: &Pose) -> AttachmentPoints {
    let rot = pose.rotation();
    let p = pose.position();
    AttachmentPoints {
        fixed: Limb::ALL.map(|l| params.fixed_point(l)),
        mobile: Limb::ALL.map(|l| p + rot * params.mobile_point_local(l)),
        base_origin: Vector3::zeros(),
        platform_origin: p,
    }
}

/// Lower-pair joint types with their connectivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Revolute,
    Prismatic,
    Universal,
    Spherical,
}

impl JointKind {
    pub fn freedom(self) -> u32 {
        match self {
            JointKind::Revolute | JointKind::Prismatic => 1,
            JointKind::Universal => 2,
            JointKind::Spherical => 3,
        }
    }
}

/// Joint census of the 3UPS+RPU mechanism: three U, four P, three S, one R
/// and one U.
pub const MECHANISM_JOINTS: [JointKind; 12] = [
    JointKind::Universal,
    JointKind::Prismatic,
    JointKind::Spherical,
    JointKind::Universal,
    JointKind::Prismatic,
    JointKind::Spherical,
    JointKind::Universal,
    JointKind::Prismatic,
    JointKind::Spherical,
    JointKind::Revolute,
    JointKind::Prismatic,
    JointKind::Universal,
];

/// Links of the mechanism including the fixed base: two per limb plus the
/// platform, plus the base.
pub const MECHANISM_LINKS: usize = 10;

/// Grübler-Kutzbach mobility of a spatial mechanism: `6·(n − 1 − j) + Σfᵢ`,
/// where `n` counts links including the ground.
pub fn mobility(n_links: usize, joint_freedoms: &[u32]) -> i64 {
    let j = joint_freedoms.len() as i64;
    let f: i64 = joint_freedoms.iter().map(|&f| f as i64).sum();
    6 * (n_links as i64 - 1 - j) + f
}

pub fn mechanism_mobility() -> i64 {
    let freedoms: Vec<u32> = MECHANISM_JOINTS.iter().map(|j| j.freedom()).collect();
    mobility(MECHANISM_LINKS, &freedoms)
}
