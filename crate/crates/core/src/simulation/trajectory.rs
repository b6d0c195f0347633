//! Cartesian reference trajectories.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::Pose;

/// `z` and yaw oscillate; `x` and pitch stay at the base pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalParams {
    pub base: Pose,
    /// m
    pub amplitude_z: f64,
    /// rad
    pub amplitude_psi: f64,
    /// Hz
    pub frequency: f64,
}

impl Default for SinusoidalParams {
    fn default() -> Self {
        Self { base: Pose::HOME, amplitude_z: 0.05, amplitude_psi: 10f64.to_radians(), frequency: 0.2 }
    }
}

/// Straight-line approach segments followed by an ellipse in the `X`-`Z`
/// plane. Orientation stays at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticParams {
    pub start: Pose,
    /// `(target, duration in s)` for each linear segment, in order.
    pub approach: Vec<(Pose, f64)>,
    /// Semi-axis along `X` (m).
    pub semi_axis_x: f64,
    /// Semi-axis along `Z` (m).
    pub semi_axis_z: f64,
    /// Hz
    pub frequency: f64,
}

impl Default for EllipticParams {
    fn default() -> Self {
        Self {
            start: Pose::HOME,
            approach: vec![(Pose::new(0.05, 0.69, 0.0, 0.0), 2.0), (Pose::new(0.05, 0.75, 0.0, 0.0), 2.0)],
            semi_axis_x: 0.05,
            semi_axis_z: 0.06,
            frequency: 0.2,
        }
    }
}

impl EllipticParams {
    fn approach_end(&self) -> (Pose, f64) {
        self.approach.iter().fold((self.start, 0.0), |(_, t), (p, d)| (*p, t + d))
    }

    /// Centre of the ellipse. The ellipse passes through the last approach
    /// target, which lies on the `+X` end of its major axis.
    pub fn center(&self) -> (f64, f64) {
        let (end, _) = self.approach_end();
        (end.x - self.semi_axis_x, end.z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    Sinusoidal(SinusoidalParams),
    Elliptic(EllipticParams),
    Hold(Pose),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    /// Total duration (s).
    pub duration: f64,
}

impl TrajectorySpec {
    pub fn sinusoidal(params: SinusoidalParams, duration: f64) -> Self {
        Self { kind: TrajectoryKind::Sinusoidal(params), duration }
    }

    pub fn elliptic(params: EllipticParams, duration: f64) -> Self {
        Self { kind: TrajectoryKind::Elliptic(params), duration }
    }

    pub fn hold(pose: Pose, duration: f64) -> Self {
        Self { kind: TrajectoryKind::Hold(pose), duration }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TrajectoryKind::Sinusoidal(_) => "sinusoidal",
            TrajectoryKind::Elliptic(_) => "elliptic",
            TrajectoryKind::Hold(_) => "hold",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("trajectory duration must be positive"));
        }
        match &self.kind {
            TrajectoryKind::Sinusoidal(p) if !(p.frequency > 0.0) => {
                Err(Error::invalid("sinusoidal frequency must be positive"))
            }
            TrajectoryKind::Elliptic(p) => {
                if !(p.frequency > 0.0) {
                    return Err(Error::invalid("elliptic frequency must be positive"));
                }
                if p.approach.iter().any(|(_, d)| !(*d > 0.0)) {
                    return Err(Error::invalid("approach segment durations must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Reference pose at time `t ≥ 0`.
    pub fn sample(&self, t: f64) -> Pose {
        match &self.kind {
            TrajectoryKind::Sinusoidal(p) => trajectory_sinusoidal(p, t),
            TrajectoryKind::Elliptic(p) => trajectory_elliptic(p, t),
            TrajectoryKind::Hold(pose) => *pose,
        }
    }

    /// Key/value pairs describing the trajectory, angles in degrees.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("trajectory".to_string(), self.name().to_string()),
            ("duration_s".to_string(), self.duration.to_string()),
        ];
        let mut push = |k: &str, v: f64| out.push((k.to_string(), v.to_string()));
        match &self.kind {
            TrajectoryKind::Sinusoidal(p) => {
                push("x0_m", p.base.x);
                push("z0_m", p.base.z);
                push("theta0_deg", p.base.theta.to_degrees());
                push("amplitude_z_m", p.amplitude_z);
                push("amplitude_psi_deg", p.amplitude_psi.to_degrees());
                push("frequency_hz", p.frequency);
            }
            TrajectoryKind::Elliptic(p) => {
                push("start_x_m", p.start.x);
                push("start_z_m", p.start.z);
                for (i, (target, d)) in p.approach.iter().enumerate() {
                    push(&format!("approach{}_x_m", i + 1), target.x);
                    push(&format!("approach{}_z_m", i + 1), target.z);
                    push(&format!("approach{}_duration_s", i + 1), *d);
                }
                let (xc, zc) = p.center();
                push("center_x_m", xc);
                push("center_z_m", zc);
                push("semi_axis_x_m", p.semi_axis_x);
                push("semi_axis_z_m", p.semi_axis_z);
                push("frequency_hz", p.frequency);
            }
            TrajectoryKind::Hold(pose) => {
                push("x_m", pose.x);
                push("z_m", pose.z);
                push("theta_deg", pose.theta.to_degrees());
                push("psi_deg", pose.psi.to_degrees());
            }
        }
        out
    }
}

pub fn trajectory_sinusoidal(p: &SinusoidalParams, t: f64) -> Pose {
    let s = (TAU * p.frequency * t).sin();
    Pose::new(p.base.x, p.base.z + p.amplitude_z * s, p.base.theta, p.base.psi + p.amplitude_psi * s)
}

fn lerp(a: &Pose, b: &Pose, s: f64) -> Pose {
    Pose::from_vector(&(a.to_vector() + (b.to_vector() - a.to_vector()) * s))
}

pub fn trajectory_elliptic(p: &EllipticParams, t: f64) -> Pose {
    let mut from = p.start;
    let mut t0 = 0.0;
    for (target, d) in &p.approach {
        if t < t0 + d {
            return lerp(&from, target, (t - t0) / d);
        }
        from = *target;
        t0 += d;
    }
    let phase = TAU * p.frequency * (t - t0);
    let (xc, zc) = p.center();
    Pose::new(xc + p.semi_axis_x * phase.cos(), zc + p.semi_axis_z * phase.sin(), 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sinusoid_start_and_peak() {
        let p = SinusoidalParams::default();
        assert_eq!(trajectory_sinusoidal(&p, 0.0), Pose::HOME);
        let peak = trajectory_sinusoidal(&p, 1.0 / (4.0 * p.frequency));
        assert_abs_diff_eq!(peak.z, 0.635 + 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(peak.psi, 10f64.to_radians(), epsilon = 1e-15);
        assert_eq!((peak.x, peak.theta), (0.0, 0.0));
    }

    #[test]
    fn sinusoid_stays_in_sampling_box() {
        let p = SinusoidalParams::default();
        // Bounds over a period: z ∈ z0 ± A_z, ψ ∈ ±A_ψ.
        assert!(p.base.z - p.amplitude_z >= 0.55 && p.base.z + p.amplitude_z <= 0.80);
        assert!(p.amplitude_psi <= 20f64.to_radians());
        for k in 0..5000 {
            let pose = trajectory_sinusoidal(&p, k as f64 * 1e-3);
            assert!((0.55..=0.80).contains(&pose.z));
            assert!(pose.psi.abs() <= 20f64.to_radians());
        }
    }

    #[test]
    fn elliptic_waypoints() {
        let p = EllipticParams::default();
        assert_eq!(trajectory_elliptic(&p, 0.0), Pose::new(0.0, 0.635, 0.0, 0.0));
        let a = trajectory_elliptic(&p, 2.0);
        assert_abs_diff_eq!(a.to_vector(), Pose::new(0.05, 0.69, 0.0, 0.0).to_vector(), epsilon = 1e-15);
        let b = trajectory_elliptic(&p, 4.0);
        assert_abs_diff_eq!(b.to_vector(), Pose::new(0.05, 0.75, 0.0, 0.0).to_vector(), epsilon = 1e-15);
        let mid = trajectory_elliptic(&p, 1.0);
        assert_abs_diff_eq!(mid.x, 0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.z, 0.6625, epsilon = 1e-15);
    }

    #[test]
    fn ellipse_is_continuous_and_periodic() {
        let p = EllipticParams::default();
        let before = trajectory_elliptic(&p, 4.0 - 1e-9);
        let after = trajectory_elliptic(&p, 4.0 + 1e-9);
        assert!(before.max_abs_diff(&after) < 1e-9);
        let period = 1.0 / p.frequency;
        let a = trajectory_elliptic(&p, 5.3);
        let b = trajectory_elliptic(&p, 5.3 + period);
        assert!(a.max_abs_diff(&b) < 1e-12);
        // Quarter period: top of the ellipse.
        let top = trajectory_elliptic(&p, 4.0 + period / 4.0);
        assert_abs_diff_eq!(top.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(top.z, 0.81, epsilon = 1e-12);
    }

    #[test]
    fn validation() {
        assert!(TrajectorySpec::hold(Pose::HOME, 1.0).validate().is_ok());
        assert!(TrajectorySpec::hold(Pose::HOME, 0.0).validate().is_err());
        let p = SinusoidalParams { frequency: 0.0, ..Default::default() };
        assert!(TrajectorySpec::sinusoidal(p, 1.0).validate().is_err());
    }
}
