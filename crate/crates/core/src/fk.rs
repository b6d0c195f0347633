//! Forward displacement: recover the platform pose from the four actuated
//! lengths.
//!
//! The production solver runs Newton-Raphson on the reduced system where the
//! passive coordinates have been eliminated:
//!
//! ```text
//! Φᵢ = q_i3² − ‖mobileᵢ(pose) − fixedᵢ‖²      i = 1..3
//! Φ₄ = q_42² − x² − z²
//! ```
//!
//! [`fk_full_11`] solves the unreduced vector-closure system (9 leg equations
//! plus 2 central-limb equations in 11 unknowns) and serves as an
//! independent check on the reduced formulation.

use nalgebra::{DMatrix, DVector, SMatrix, SVector, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::geometry::{attachment_points, limb_base_rotation, platform_rotation_partials, GeometricParams, Limb, Pose};
use crate::ik::ik_full;
use crate::JointVector;

/// Condition numbers above this abort a Newton step.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Step halvings tried when a full Newton step does not reduce the residual.
pub const MAX_HALVINGS: usize = 8;

/// Extra Newton steps taken after the residual tolerance is met.
const POLISH_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Bound on `‖Φ‖∞` (m² for the reduced system, m for the full one).
    pub residual_tolerance: f64,
    /// Updates shorter than this end the iteration.
    pub step_tolerance: f64,
    pub initial_guess: Pose,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iterations: 50, residual_tolerance: 1e-10, step_tolerance: 1e-14, initial_guess: Pose::HOME }
    }
}

impl SolverSettings {
    pub fn with_guess(mut self, guess: Pose) -> Self {
        self.initial_guess = guess;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.residual_tolerance > 0.0) || !(self.step_tolerance > 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkSolution {
    pub pose: Pose,
    /// Newton steps taken.
    pub iterations: usize,
    /// Final `‖Φ‖∞`.
    pub residual: f64,
}

/// Pose plus the passive coordinates that appear in the vector closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullFkSolution {
    pub pose: Pose,
    /// `(q_i1, q_i2)` for each external limb.
    pub u_angles: [(f64, f64); 3],
    /// Central revolute angle `q41`.
    pub central_angle: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Reduced closure residuals `(Φ₁, Φ₂, Φ₃, Φ₄)` in m².
pub fn residual_phi(pose: &Pose, active: &JointVector, params: &GeometricParams) -> Vector4<f64> {
    let pts = attachment_points(params, pose);
    let mut phi = Vector4::zeros();
    for limb in Limb::ALL {
        let i = limb.index();
        phi[i] = active[i] * active[i] - pts.leg(limb).norm_squared();
    }
    phi[3] = active[3] * active[3] - pose.x * pose.x - pose.z * pose.z;
    phi
}

/// `∂Φ/∂(x, z, θ, ψ)`. The actuated lengths only shift Φ by a constant, so
/// the Jacobian depends on the pose alone.
pub fn jacobian_phi(pose: &Pose, params: &GeometricParams) -> SMatrix<f64, 4, 4> {
    let pts = attachment_points(params, pose);
    let (d_theta, d_psi) = platform_rotation_partials(pose.theta, pose.psi);
    let mut jac = SMatrix::<f64, 4, 4>::zeros();
    for limb in Limb::ALL {
        let i = limb.index();
        let leg = pts.leg(limb);
        let local = params.mobile_point_local(limb);
        let partials = [Vector3::x(), Vector3::z(), d_theta * local, d_psi * local];
        for (k, dp) in partials.iter().enumerate() {
            jac[(i, k)] = -2.0 * leg.dot(dp);
        }
    }
    jac[(3, 0)] = -2.0 * pose.x;
    jac[(3, 1)] = -2.0 * pose.z;
    jac
}

/// 2-norm condition number of the reduced Jacobian; grows without bound as
/// the pose approaches a singular configuration.
pub fn singularity_proximity(pose: &Pose, params: &GeometricParams) -> f64 {
    condition_number(&jacobian_phi(pose, params))
}

fn condition_number<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    dynamic_condition_number(&DMatrix::from_column_slice(N, N, m.as_slice()))
}

fn dynamic_condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Damped Newton-Raphson shared by both formulations.
fn newton<const N: usize, R, J>(
    mut x: SVector<f64, N>,
    settings: &SolverSettings,
    residual: R,
    jacobian: J,
) -> Result<(SVector<f64, N>, usize, f64)>
where
    R: Fn(&SVector<f64, N>) -> SVector<f64, N>,
    J: Fn(&SVector<f64, N>) -> SMatrix<f64, N, N>,
{
    let solve = |x: &SVector<f64, N>, f: &SVector<f64, N>| -> Result<SVector<f64, N>> {
        let jac = DMatrix::from_column_slice(N, N, jacobian(x).as_slice());
        let cond = dynamic_condition_number(&jac);
        if !(cond <= SINGULAR_CONDITION) {
            return Err(Error::SingularJacobian { condition: cond });
        }
        jac.lu()
            .solve(&DVector::from_column_slice((-f).as_slice()))
            .map(|s| SVector::<f64, N>::from_column_slice(s.as_slice()))
            .ok_or(Error::SingularJacobian { condition: f64::INFINITY })
    };
    // Once inside tolerance, a few undamped steps bring the iterate to
    // rounding level; they are kept only while the residual keeps falling.
    let polish = |mut x: SVector<f64, N>, mut f: SVector<f64, N>| {
        for _ in 0..POLISH_STEPS {
            let Ok(step) = solve(&x, &f) else { break };
            let trial = x + step;
            let f_trial = residual(&trial);
            if !(f_trial.norm() < f.norm()) {
                break;
            }
            x = trial;
            f = f_trial;
        }
        (x, f.amax())
    };

    let mut f = residual(&x);
    for iteration in 0..settings.max_iterations {
        let res = f.amax();
        if !res.is_finite() {
            return Err(Error::NonConvergence { iterations: iteration, residual: res });
        }
        if res < settings.residual_tolerance {
            let (x, res) = polish(x, f);
            return Ok((x, iteration, res));
        }
        let step = solve(&x, &f)?;

        let norm = f.norm();
        let mut lambda = 1.0;
        let mut trial = x + step;
        let mut f_trial = residual(&trial);
        for _ in 0..MAX_HALVINGS {
            if f_trial.norm() < norm {
                break;
            }
            lambda *= 0.5;
            trial = x + step * lambda;
            f_trial = residual(&trial);
        }
        x = trial;
        f = f_trial;
        if (step * lambda).norm() < settings.step_tolerance {
            let res = f.amax();
            if res < settings.residual_tolerance {
                return Ok((x, iteration + 1, res));
            }
            return Err(Error::NonConvergence { iterations: iteration + 1, residual: res });
        }
    }
    let res = f.amax();
    if res < settings.residual_tolerance {
        let (x, res) = polish(x, f);
        return Ok((x, settings.max_iterations, res));
    }
    Err(Error::NonConvergence { iterations: settings.max_iterations, residual: res })
}

fn check_active(active: &JointVector) -> Result<()> {
    if active.iter().all(|q| *q > 0.0 && q.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("actuator lengths must be positive, got {active:?}")))
    }
}

/// Forward displacement on the reduced four-equation system.
pub fn fk_reduced(active: &JointVector, params: &GeometricParams, settings: &SolverSettings) -> Result<FkSolution> {
    settings.validate()?;
    check_active(active)?;
    let (x, iterations, residual) = newton(
        settings.initial_guess.to_vector(),
        settings,
        |v| residual_phi(&Pose::from_vector(v), active, params),
        |v| jacobian_phi(&Pose::from_vector(v), params),
    )?;
    Ok(FkSolution { pose: Pose::from_vector(&x), iterations, residual })
}

// Unknown layout for the full system: [x, z, θ, ψ, q11, q12, q21, q22, q31, q32, q41].
type Full = SVector<f64, 11>;

/// Leg direction in the fixed frame for base U-joint angles `(q1, q2)`.
fn leg_direction(q1: f64, q2: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (s1, c1) = q1.sin_cos();
    let (s2, c2) = q2.sin_cos();
    let r0 = limb_base_rotation();
    (
        r0 * Vector3::new(c1 * s2, s1 * s2, c2),
        r0 * Vector3::new(-s1 * s2, c1 * s2, 0.0),
        r0 * Vector3::new(c1 * c2, s1 * c2, -s2),
    )
}

fn full_residual(u: &Full, active: &JointVector, params: &GeometricParams) -> Full {
    let pose = Pose::new(u[0], u[1], u[2], u[3]);
    let pts = attachment_points(params, &pose);
    let mut f = Full::zeros();
    for limb in Limb::ALL {
        let i = limb.index();
        let (dir, _, _) = leg_direction(u[4 + 2 * i], u[5 + 2 * i]);
        let chain_end = pts.fixed[i] + active[i] * dir;
        let gap = chain_end - pts.mobile[i];
        f.fixed_rows_mut::<3>(3 * i).copy_from(&gap);
    }
    let (s41, c41) = u[10].sin_cos();
    f[9] = -s41 * active[3] - pose.x;
    f[10] = c41 * active[3] - pose.z;
    f
}

fn full_jacobian(u: &Full, active: &JointVector, params: &GeometricParams) -> SMatrix<f64, 11, 11> {
    let pose = Pose::new(u[0], u[1], u[2], u[3]);
    let (d_theta, d_psi) = platform_rotation_partials(pose.theta, pose.psi);
    let mut jac = SMatrix::<f64, 11, 11>::zeros();
    for limb in Limb::ALL {
        let i = limb.index();
        let local = params.mobile_point_local(limb);
        let rows = 3 * i;
        // −∂mobile/∂pose
        jac.fixed_view_mut::<3, 1>(rows, 0).copy_from(&(-Vector3::x()));
        jac.fixed_view_mut::<3, 1>(rows, 1).copy_from(&(-Vector3::z()));
        jac.fixed_view_mut::<3, 1>(rows, 2).copy_from(&(-(d_theta * local)));
        jac.fixed_view_mut::<3, 1>(rows, 3).copy_from(&(-(d_psi * local)));
        let (_, d_q1, d_q2) = leg_direction(u[4 + 2 * i], u[5 + 2 * i]);
        jac.fixed_view_mut::<3, 1>(rows, 4 + 2 * i).copy_from(&(active[i] * d_q1));
        jac.fixed_view_mut::<3, 1>(rows, 5 + 2 * i).copy_from(&(active[i] * d_q2));
    }
    let (s41, c41) = u[10].sin_cos();
    jac[(9, 0)] = -1.0;
    jac[(9, 10)] = -c41 * active[3];
    jac[(10, 1)] = -1.0;
    jac[(10, 10)] = -s41 * active[3];
    jac
}

/// Forward displacement on the full 11-equation vector-closure system. The
/// passive unknowns start from the inverse kinematics of the initial guess.
pub fn fk_full_11(active: &JointVector, params: &GeometricParams, settings: &SolverSettings) -> Result<FullFkSolution> {
    settings.validate()?;
    check_active(active)?;
    let guess = settings.initial_guess;
    let cfg = ik_full(&guess, params)?;
    let mut u = Full::zeros();
    u.fixed_rows_mut::<4>(0).copy_from(&guess.to_vector());
    for limb in Limb::ALL {
        let c = cfg.limb(limb);
        u[4 + 2 * limb.index()] = c.q1;
        u[5 + 2 * limb.index()] = c.q2;
    }
    u[10] = cfg.central.q1;

    let (u, iterations, residual) =
        newton(u, settings, |v| full_residual(v, active, params), |v| full_jacobian(v, active, params))?;
    Ok(FullFkSolution {
        pose: Pose::new(u[0], u[1], u[2], u[3]),
        u_angles: [(u[4], u[5]), (u[6], u[7]), (u[8], u[9])],
        central_angle: u[10],
        iterations,
        residual,
    })
}
