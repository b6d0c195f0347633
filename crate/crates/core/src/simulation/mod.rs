//! Fixed-step closed-loop simulation: Cartesian reference, inverse
//! kinematics, joint controller, actuator plant.

mod log;
mod metrics;
mod plant;
mod trajectory;

pub use log::{SimLog, CSV_COLUMNS};
pub use metrics::{mean_error, mean_errors, phase_offset, phase_offset_within, DEFAULT_MAX_LAG};
pub use plant::{plant_step, PlantParams, PlantState};
pub use trajectory::{
    trajectory_elliptic, trajectory_sinusoidal, EllipticParams, SinusoidalParams, TrajectoryKind, TrajectorySpec,
};

use crate::control::{ControllerConfig, ControllerState};
use crate::error::{Error, Result};
use crate::geometry::GeometricParams;
use crate::ik::ik_active;
use crate::JointVector;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationConfig {
    pub geometry: GeometricParams,
    pub controller: ControllerConfig,
    pub plant: PlantParams,
    pub trajectory: TrajectorySpec,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec::sinusoidal(SinusoidalParams::default(), 30.0)
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.controller.validate()?;
        self.plant.validate()?;
        self.trajectory.validate()
    }

    /// Number of control ticks: `round(duration / dt)`.
    pub fn ticks(&self) -> usize {
        (self.trajectory.duration / self.controller.dt).round() as usize
    }
}

/// Runs `round(duration / dt)` ticks at `t_k = k·dt`. The plant starts at
/// rest on the inverse-kinematics solution of the first reference pose.
pub fn run_closed_loop(config: &SimulationConfig) -> Result<SimLog> {
    config.validate()?;
    let dt = config.controller.dt;
    let n = config.ticks();
    let traj = &config.trajectory;

    let reference = |tick: usize| {
        let t = tick as f64 * dt;
        let pose = traj.sample(t);
        ik_active(&pose, &config.geometry).map(|q| (t, pose, q)).map_err(|e| Error::UnreachableReference {
            tick,
            time: t,
            source: Box::new(e),
        })
    };

    let (_, _, q0) = reference(0)?;
    let mut state = PlantState::at_rest(q0);
    let mut controller = ControllerState::new(config.controller, config.plant.measure(&q0));

    let mut log = SimLog::with_capacity(dt, n);
    log.metadata = metadata(config);
    for tick in 0..n {
        let (t, pose, q_ref) = reference(tick)?;
        let q = config.plant.measure(&state.q);
        let u = controller.step(&q, &q_ref);
        log.push(t, pose, q_ref, q, u);
        state = plant_step(&config.plant, &state, &u, dt);
    }
    Ok(log)
}

fn metadata(config: &SimulationConfig) -> Vec<(String, String)> {
    let mut out = config.trajectory.describe();
    out.push(("dt_s".into(), config.controller.dt.to_string()));
    let joints = |v: &JointVector| format!("{} {} {} {}", v[0], v[1], v[2], v[3]);
    let c = &config.controller;
    out.push(("kp".into(), joints(&c.gains.kp)));
    out.push(("kd".into(), joints(&c.gains.kd)));
    out.push(("ki".into(), joints(&c.gains.ki)));
    out.push(("filter_a".into(), joints(&c.filter.a)));
    out.push(("filter_b".into(), joints(&c.filter.b)));
    out.push(("integral_clamp".into(), c.integral_clamp.to_string()));
    out.push(("tau_max".into(), c.tau_max.map_or("none".into(), |t| t.to_string())));
    let p = &config.plant;
    out.push(("plant_mass_kg".into(), joints(&p.mass)));
    out.push(("plant_damping".into(), joints(&p.damping)));
    out.push(("plant_force_gain".into(), joints(&p.force_gain)));
    out.push(("encoder_resolution_m".into(), p.quantization.map_or("none".into(), |r| r.to_string())));
    out
}

/// Per-joint tracking figures of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSummary {
    /// Signed mean of `q − q_ref` (m).
    pub mean_error: JointVector,
    /// Lag of `q` behind `q_ref` (s); `None` when the reference is constant.
    pub phase_offset: [Option<f64>; 4],
}

pub fn summarize(log: &SimLog) -> Result<TrackingSummary> {
    let mean_error = mean_errors(log)?;
    let mut phase = [None; 4];
    for (j, slot) in phase.iter_mut().enumerate() {
        let r = log.joint_series(&log.q_ref, j);
        let a = log.joint_series(&log.q, j);
        *slot = match phase_offset(&r, &a, log.dt) {
            Ok(p) => Some(p),
            Err(Error::DegenerateSignal) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(TrackingSummary { mean_error, phase_offset: phase })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    fn short(traj: TrajectorySpec) -> SimulationConfig {
        SimulationConfig { trajectory: traj, ..Default::default() }
    }

    #[test]
    fn hold_at_home_is_an_exact_equilibrium() {
        let log = run_closed_loop(&short(TrajectorySpec::hold(Pose::HOME, 2.0))).unwrap();
        assert_eq!(log.len(), 2000);
        for (e, u) in log.e.iter().zip(&log.u) {
            assert_eq!(*e, JointVector::zeros());
            assert_eq!(*u, JointVector::zeros());
        }
        let s = summarize(&log).unwrap();
        assert_eq!(s.mean_error, JointVector::zeros());
        assert_eq!(s.phase_offset, [None; 4]);
    }

    #[test]
    fn hold_off_home_is_an_exact_equilibrium() {
        let pose = Pose::from_degrees(0.03, 0.7, 5.0, -8.0);
        let log = run_closed_loop(&short(TrajectorySpec::hold(pose, 0.5))).unwrap();
        assert!(log.e.iter().all(|e| e.amax() < 1e-12));
    }

    #[test]
    fn time_base_is_uniform() {
        let log = run_closed_loop(&short(TrajectorySpec::sinusoidal(SinusoidalParams::default(), 0.25))).unwrap();
        assert_eq!(log.len(), 250);
        for (k, t) in log.time.iter().enumerate() {
            assert_eq!(*t, k as f64 * 1e-3);
        }
    }

    #[test]
    fn runs_are_bit_identical() {
        let cfg = short(TrajectorySpec::elliptic(EllipticParams::default(), 1.0));
        let a = run_closed_loop(&cfg).unwrap();
        let b = run_closed_loop(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }

    #[test]
    fn unreachable_reference_reports_tick() {
        // Straight line through the base origin, crossed at t = 1 s.
        let p = EllipticParams { approach: vec![(Pose::new(0.0, -0.635, 0.0, 0.0), 2.0)], ..Default::default() };
        let err = run_closed_loop(&short(TrajectorySpec::elliptic(p, 5.0))).unwrap_err();
        match err {
            Error::UnreachableReference { tick, time, source } => {
                assert_eq!(tick, 1000);
                assert_eq!(time, tick as f64 * 1e-3);
                assert_eq!(*source, Error::DegeneratePose);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = short(TrajectorySpec::hold(Pose::HOME, 1.0));
        cfg.controller.dt = 0.0;
        assert!(matches!(run_closed_loop(&cfg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn header_echoes_trajectory_parameters() {
        let log = run_closed_loop(&short(TrajectorySpec::elliptic(EllipticParams::default(), 0.01))).unwrap();
        let keys: Vec<&str> = log.metadata.iter().map(|(k, _)| k.as_str()).collect();
        for k in ["trajectory", "semi_axis_x_m", "semi_axis_z_m", "approach1_duration_s", "kp", "plant_mass_kg"] {
            assert!(keys.contains(&k), "{k}");
        }
    }
}
