//! Closed-form inverse kinematics: pose to every active and passive joint
//! coordinate.
//!
//! The solution runs in two stages. The central limb coordinates `q41, q42`
//! and, per external limb, the prismatic length `q_i3` and base U-joint angles
//! `q_i1, q_i2` follow from the attachment points alone. The spherical joint
//! angles `q_i4..q_i6` and the central U-joint angles `q43, q44` then follow
//! from the orientation left over between the leg and the platform.
//!
//! Branch conventions:
//! - prismatic lengths take the positive root;
//! - `q_i2 ∈ [0, π]` measures the leg from the first U axis (which is parallel
//!   to `Y_f`), so a leg lying in the `X`-`Z` plane has `q_i2 = π/2`;
//! - `q_i5 ∈ [0, π]`; the S joint is at its neutral configuration
//!   `(π/2, π/2, π/2)` when leg frame 3 and the platform share orientation.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{
    attachment_points, central_base_frame, chain_transform, limb_base_frame, limb_base_rotation, rot_x, rot_y,
    GeometricParams, Limb, Pose, RPU_DH_TABLE, UPS_DH_TABLE,
};
use crate::JointVector;

/// Squared lengths at or below this value (m²) are degenerate.
pub const LENGTH_SQUARED_TOLERANCE: f64 = 1e-12;

/// Relative size of the leg's in-plane component below which the base
/// U joint angle `q_i1` is undefined.
pub const U_JOINT_TOLERANCE: f64 = 1e-9;

/// `sin q_i5` below this value flags the spherical joint as locked.
pub const GIMBAL_TOLERANCE: f64 = 1e-9;

/// Joint coordinates of one external UPS limb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpsLimbCoordinates {
    /// Base U joint, first axis (rad).
    pub q1: f64,
    /// Base U joint, second axis (rad).
    pub q2: f64,
    /// Actuated prismatic length (m).
    pub q3: f64,
    pub q4: f64,
    pub q5: f64,
    pub q6: f64,
    /// The S joint sits at a representation singularity; `q6` was set to 0.
    pub gimbal_lock: bool,
}

/// Joint coordinates of the central RPU limb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralLimbCoordinates {
    /// Base revolute joint (rad).
    pub q1: f64,
    /// Actuated prismatic length (m).
    pub q2: f64,
    /// Platform U joint, axis parallel to `Y_f` (rad).
    pub q3: f64,
    /// Platform U joint, axis along the platform normal (rad).
    pub q4: f64,
    /// Max-entry deviation between the U-joint rotation and the platform
    /// orientation. Zero unless both pitch and yaw are non-zero, since the
    /// `Rot(Z,ψ)·Rot(Y,θ)` pose model and a U joint with a fixed axis along
    /// `Y_f` disagree at order `sin θ · sin ψ`.
    pub orientation_mismatch: f64,
}

/// All generalized coordinates of the four limbs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullConfiguration {
    pub ups: [UpsLimbCoordinates; 3],
    pub central: CentralLimbCoordinates,
}

impl FullConfiguration {
    /// Actuated lengths `(q13, q23, q33, q42)`.
    pub fn active(&self) -> JointVector {
        JointVector::new(self.ups[0].q3, self.ups[1].q3, self.ups[2].q3, self.central.q2)
    }

    pub fn limb(&self, limb: Limb) -> &UpsLimbCoordinates {
        &self.ups[limb.index()]
    }
}

/// Spherical joint angles of one limb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalAngles {
    pub q4: f64,
    pub q5: f64,
    pub q6: f64,
    pub gimbal_lock: bool,
}

/// Central limb revolute angle and length, `(q41, q42)`.
pub fn ik_central(pose: &Pose) -> Result<(f64, f64)> {
    let len_sq = pose.x * pose.x + pose.z * pose.z;
    if len_sq <= LENGTH_SQUARED_TOLERANCE {
        return Err(Error::DegeneratePose);
    }
    Ok(((-pose.x).atan2(pose.z), len_sq.sqrt()))
}

/// Actuated length `q_i3` of an external limb.
pub fn ik_limb_active(pose: &Pose, params: &GeometricParams, limb: Limb) -> Result<f64> {
    let squared_length = attachment_points(params, pose).leg(limb).norm_squared();
    if squared_length <= LENGTH_SQUARED_TOLERANCE {
        return Err(Error::UnreachablePose { limb, squared_length });
    }
    Ok(squared_length.sqrt())
}

/// The four actuated lengths `(q13, q23, q33, q42)`.
pub fn ik_active(pose: &Pose, params: &GeometricParams) -> Result<JointVector> {
    let (_, q42) = ik_central(pose)?;
    let pts = attachment_points(params, pose);
    let mut q = JointVector::new(0.0, 0.0, 0.0, q42);
    for limb in Limb::ALL {
        let squared_length = pts.leg(limb).norm_squared();
        if squared_length <= LENGTH_SQUARED_TOLERANCE {
            return Err(Error::UnreachablePose { limb, squared_length });
        }
        q[limb.index()] = squared_length.sqrt();
    }
    Ok(q)
}

/// Squared limb-1 length from its expanded closed-form polynomial.
pub fn limb1_length_squared_closed_form(pose: &Pose, params: &GeometricParams) -> f64 {
    let (r, rm, x, z) = (params.r, params.r_m, pose.x, pose.z);
    let (st, ct) = pose.theta.sin_cos();
    let cp = pose.psi.cos();
    x * x + z * z + r * r + rm * rm + 2.0 * r * x + 2.0 * rm * z * st - 2.0 * rm * x * ct * cp - 2.0 * r * rm * ct * cp
}

/// Base U-joint angles from a leg vector given in the fixed frame.
fn u_angles_from_leg(leg: &Vector3<f64>, limb: Limb) -> Result<(f64, f64)> {
    // Leg direction in frame 0 is (cos q1 sin q2, sin q1 sin q2, cos q2).
    let local = limb_base_rotation().transpose() * leg;
    let in_plane = local.x.hypot(local.y);
    if in_plane <= U_JOINT_TOLERANCE * local.norm() {
        return Err(Error::UJointSingular { limb });
    }
    Ok((local.y.atan2(local.x), in_plane.atan2(local.z)))
}

/// Base U-joint angles `(q_i1, q_i2)` of an external limb.
pub fn ik_limb_u_angles(pose: &Pose, params: &GeometricParams, limb: Limb) -> Result<(f64, f64)> {
    let leg = attachment_points(params, pose).leg(limb);
    if leg.norm_squared() <= LENGTH_SQUARED_TOLERANCE {
        return Err(Error::UnreachablePose { limb, squared_length: leg.norm_squared() });
    }
    u_angles_from_leg(&leg, limb)
}

/// Spherical joint angles solving `ᶠR₃ · ³R₆ = ᶠR_m` for one limb, given the
/// limb's first three joint values `uch = (q_i1, q_i2, q_i3)`.
pub fn ik_spherical_angles(pose: &Pose, uch: (f64, f64, f64), params: &GeometricParams, limb: Limb) -> SphericalAngles {
    let frame3 = chain_transform(&limb_base_frame(params, limb), &UPS_DH_TABLE[..3], &[uch.0, uch.1, uch.2]);
    spherical_from_relative(&(frame3.rotation.transpose() * pose.rotation()))
}

/// Inverts `³R₆(q4, q5, q6)` for the rows `j = 4..6` (all `α = π/2`).
///
/// That product equals `Rz(q4)·Ry(−q5)·Rz(−q6)·Rx(−π/2)`, so the angles are
/// a Z-Y-Z extraction on `relative · Rx(π/2)`.
fn spherical_from_relative(relative: &Matrix3<f64>) -> SphericalAngles {
    let n = relative * rot_x(PI / 2.0);
    let s5 = n[(0, 2)].hypot(n[(1, 2)]);
    let q5 = s5.atan2(n[(2, 2)]);
    if s5 < GIMBAL_TOLERANCE {
        // Only q4 − q6 (q5 ≈ 0) or q4 + q6 (q5 ≈ π) is defined; pin q6 = 0.
        let q4 = if n[(2, 2)] > 0.0 { n[(1, 0)].atan2(n[(0, 0)]) } else { (-n[(1, 0)]).atan2(-n[(0, 0)]) };
        return SphericalAngles { q4, q5, q6: 0.0, gimbal_lock: true };
    }
    SphericalAngles { q4: (-n[(1, 2)]).atan2(-n[(0, 2)]), q5, q6: n[(2, 1)].atan2(n[(2, 0)]), gimbal_lock: false }
}

/// Constant rotation from the platform frame to the central limb's D-H
/// frame 4, chosen so that `q43 = q44 = 0` at the home pose.
fn central_platform_offset() -> Matrix3<f64> {
    rot_y(PI)
}

/// Central U-joint angles `(q43, q44)` and the residual orientation mismatch.
pub fn ik_central_u_angles(pose: &Pose, q41: f64, q42: f64) -> (f64, f64, f64) {
    let frame2 = chain_transform(&central_base_frame(), &RPU_DH_TABLE[..2], &[q41, q42]);
    let w = frame2.rotation.transpose() * pose.rotation() * central_platform_offset();
    // U(q43, q44): third column (sin q43, −cos q43, 0), first column
    // (cos q43 cos q44, sin q43 cos q44, sin q44).
    let q43 = w[(0, 2)].atan2(-w[(1, 2)]);
    let (s3, c3) = q43.sin_cos();
    let q44 = w[(2, 0)].atan2(c3 * w[(0, 0)] + s3 * w[(1, 0)]);
    let reached = chain_transform(&crate::geometry::HomogeneousTransform::identity(), &RPU_DH_TABLE[2..], &[q43, q44]);
    let mismatch = (reached.rotation - w).amax();
    (q43, q44, mismatch)
}

/// Every generalized coordinate of the mechanism for `pose`.
pub fn ik_full(pose: &Pose, params: &GeometricParams) -> Result<FullConfiguration> {
    let (q41, q42) = ik_central(pose)?;
    let pts = attachment_points(params, pose);
    let mut ups = [UpsLimbCoordinates { q1: 0.0, q2: 0.0, q3: 0.0, q4: 0.0, q5: 0.0, q6: 0.0, gimbal_lock: false }; 3];
    for limb in Limb::ALL {
        let leg = pts.leg(limb);
        let squared_length = leg.norm_squared();
        if squared_length <= LENGTH_SQUARED_TOLERANCE {
            return Err(Error::UnreachablePose { limb, squared_length });
        }
        let q3 = squared_length.sqrt();
        let (q1, q2) = u_angles_from_leg(&leg, limb)?;
        let s = ik_spherical_angles(pose, (q1, q2, q3), params, limb);
        ups[limb.index()] = UpsLimbCoordinates { q1, q2, q3, q4: s.q4, q5: s.q5, q6: s.q6, gimbal_lock: s.gimbal_lock };
    }
    let (q43, q44, orientation_mismatch) = ik_central_u_angles(pose, q41, q42);
    Ok(FullConfiguration {
        ups,
        central: CentralLimbCoordinates { q1: q41, q2: q42, q3: q43, q4: q44, orientation_mismatch },
    })
}
