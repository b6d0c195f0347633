//! Kinematics and joint-space control of a 3UPS+RPU four-degree-of-freedom
//! parallel manipulator: two translations in the sagittal `X`-`Z` plane plus
//! pitch and yaw of the mobile platform.
//!
//! ```
//! use pm4dof::{fk_reduced, ik_active, GeometricParams, Pose, SolverSettings};
//!
//! let params = GeometricParams::default();
//! let pose = Pose::new(0.05, 0.75, 0.1, 0.1);
//! let q = ik_active(&pose, &params).unwrap();
//! let sol = fk_reduced(&q, &params, &SolverSettings::default()).unwrap();
//! assert!(sol.pose.max_abs_diff(&pose) < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod error;
pub mod fk;
pub mod geometry;
pub mod ik;
pub mod simulation;

/// Actuated joint vector `(q13, q23, q33, q42)`, also used for any per-joint
/// quantity.
pub type JointVector = nalgebra::Vector4<f64>;

pub use control::{control_law, ControllerConfig, ControllerState, FilterParams, Gains};
pub use error::{Error, Result};
pub use fk::{
    fk_full_11, fk_reduced, jacobian_phi, residual_phi, singularity_proximity, FkSolution, FullFkSolution,
    SolverSettings,
};
pub use geometry::{
    attachment_points, chain_transform, dh_transform, mechanism_mobility, mobility, platform_rotation, DhRow,
    GeometricParams, HomogeneousTransform, Limb, Pose,
};
pub use ik::{ik_active, ik_full, CentralLimbCoordinates, FullConfiguration, UpsLimbCoordinates};
pub use simulation::{
    mean_error, mean_errors, phase_offset, run_closed_loop, summarize, EllipticParams, PlantParams, SimLog,
    SimulationConfig, SinusoidalParams, TrackingSummary, TrajectoryKind, TrajectorySpec,
};
