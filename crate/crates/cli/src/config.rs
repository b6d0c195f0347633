//! TOML run configuration. Every section is optional and falls back to the
//! library defaults; unknown keys are rejected. Angles are in degrees.

use std::path::Path;

use pm4dof::{
    ControllerConfig, EllipticParams, FilterParams, Gains, GeometricParams, JointVector, PlantParams, Pose,
    SimulationConfig, SinusoidalParams, SolverSettings, TrajectorySpec,
};
use serde::Deserialize;

use crate::CliError;

/// One value for all four joints, or one per joint in `q13, q23, q33, q42`
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerJoint {
    Uniform(f64),
    Each([f64; 4]),
}

impl PerJoint {
    pub fn to_vector(self) -> JointVector {
        match self {
            PerJoint::Uniform(v) => JointVector::repeat(v),
            PerJoint::Each(v) => JointVector::from(v),
        }
    }

    fn from_vector(v: &JointVector) -> Self {
        if v.iter().all(|x| *x == v[0]) {
            PerJoint::Uniform(v[0])
        } else {
            PerJoint::Each([v[0], v[1], v[2], v[3]])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKindName {
    Sinusoidal,
    Elliptic,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub r: f64,
    pub r_m: f64,
    pub beta_fd_deg: f64,
    pub beta_fi_deg: f64,
    pub beta_md_deg: f64,
    pub beta_mi_deg: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { r: 0.40, r_m: 0.20, beta_fd_deg: 50.0, beta_fi_deg: 40.0, beta_md_deg: 40.0, beta_mi_deg: 30.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseEntry {
    pub x: f64,
    pub z: f64,
    pub theta_deg: f64,
    pub psi_deg: f64,
}

impl Default for PoseEntry {
    fn default() -> Self {
        Self { x: Pose::HOME.x, z: Pose::HOME.z, theta_deg: 0.0, psi_deg: 0.0 }
    }
}

impl PoseEntry {
    pub fn to_pose(self) -> Pose {
        Pose::from_degrees(self.x, self.z, self.theta_deg, self.psi_deg)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_guess: PoseEntry,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            max_iterations: s.max_iterations,
            residual_tolerance: s.residual_tolerance,
            step_tolerance: s.step_tolerance,
            initial_guess: PoseEntry::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub kp: PerJoint,
    pub kd: PerJoint,
    pub ki: PerJoint,
    pub filter_a: PerJoint,
    pub filter_b: PerJoint,
    pub dt: f64,
    pub integral_clamp: f64,
    pub saturation: bool,
    pub tau_max: f64,
}

impl Default for ControlSection {
    fn default() -> Self {
        let c = ControllerConfig::default();
        Self {
            kp: PerJoint::from_vector(&c.gains.kp),
            kd: PerJoint::from_vector(&c.gains.kd),
            ki: PerJoint::from_vector(&c.gains.ki),
            filter_a: PerJoint::from_vector(&c.filter.a),
            filter_b: PerJoint::from_vector(&c.filter.b),
            dt: c.dt,
            integral_clamp: c.integral_clamp,
            saturation: c.tau_max.is_some(),
            tau_max: c.tau_max.unwrap_or(400.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub mass: PerJoint,
    pub damping: PerJoint,
    pub force_gain: PerJoint,
    pub encoder_resolution: Option<f64>,
}

impl Default for PlantSection {
    fn default() -> Self {
        let p = PlantParams::default();
        Self {
            mass: PerJoint::from_vector(&p.mass),
            damping: PerJoint::from_vector(&p.damping),
            force_gain: PerJoint::from_vector(&p.force_gain),
            encoder_resolution: p.quantization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinusoidalSection {
    pub x0: f64,
    pub z0: f64,
    pub theta0_deg: f64,
    pub psi0_deg: f64,
    pub amplitude_z: f64,
    pub amplitude_psi_deg: f64,
    pub frequency: f64,
}

impl Default for SinusoidalSection {
    fn default() -> Self {
        let s = SinusoidalParams::default();
        Self {
            x0: s.base.x,
            z0: s.base.z,
            theta0_deg: 0.0,
            psi0_deg: 0.0,
            amplitude_z: s.amplitude_z,
            amplitude_psi_deg: 10.0,
            frequency: s.frequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub x: f64,
    pub z: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticSection {
    pub start_x: f64,
    pub start_z: f64,
    pub approach: Vec<Waypoint>,
    pub semi_axis_x: f64,
    pub semi_axis_z: f64,
    pub frequency: f64,
}

impl Default for EllipticSection {
    fn default() -> Self {
        let e = EllipticParams::default();
        Self {
            start_x: e.start.x,
            start_z: e.start.z,
            approach: e.approach.iter().map(|(p, d)| Waypoint { x: p.x, z: p.z, duration: *d }).collect(),
            semi_axis_x: e.semi_axis_x,
            semi_axis_z: e.semi_axis_z,
            frequency: e.frequency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub kind: TrajectoryKindName,
    pub duration: f64,
    pub sinusoidal: SinusoidalSection,
    pub elliptic: EllipticSection,
    pub hold: PoseEntry,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            kind: TrajectoryKindName::Sinusoidal,
            duration: 30.0,
            sinusoidal: SinusoidalSection::default(),
            elliptic: EllipticSection::default(),
            hold: PoseEntry::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub solver: SolverSection,
    pub control: ControlSection,
    pub plant: PlantSection,
    pub trajectory: TrajectorySection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Loads `path` when given, otherwise the built-in defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Checks every section, including trajectory kinds not currently
    /// selected.
    pub fn validate(&self) -> Result<(), CliError> {
        let check = |section: &str, r: pm4dof::Result<()>| r.map_err(|e| CliError::Config(format!("[{section}] {e}")));
        check("geometry", self.geometry().validate())?;
        check("solver", self.solver().validate())?;
        check("control", self.controller().validate())?;
        check("plant", self.plant().validate())?;
        for kind in [TrajectoryKindName::Sinusoidal, TrajectoryKindName::Elliptic, TrajectoryKindName::Hold] {
            check("trajectory", self.trajectory(kind).validate())?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> GeometricParams {
        let g = &self.geometry;
        GeometricParams {
            r: g.r,
            r_m: g.r_m,
            beta_fd: g.beta_fd_deg.to_radians(),
            beta_fi: g.beta_fi_deg.to_radians(),
            beta_md: g.beta_md_deg.to_radians(),
            beta_mi: g.beta_mi_deg.to_radians(),
        }
    }

    pub fn solver(&self) -> SolverSettings {
        let s = &self.solver;
        SolverSettings {
            max_iterations: s.max_iterations,
            residual_tolerance: s.residual_tolerance,
            step_tolerance: s.step_tolerance,
            initial_guess: s.initial_guess.to_pose(),
        }
    }

    pub fn controller(&self) -> ControllerConfig {
        let c = &self.control;
        ControllerConfig {
            gains: Gains { kp: c.kp.to_vector(), kd: c.kd.to_vector(), ki: c.ki.to_vector() },
            filter: FilterParams { a: c.filter_a.to_vector(), b: c.filter_b.to_vector() },
            dt: c.dt,
            integral_clamp: c.integral_clamp,
            tau_max: c.saturation.then_some(c.tau_max),
        }
    }

    pub fn plant(&self) -> PlantParams {
        let p = &self.plant;
        PlantParams {
            mass: p.mass.to_vector(),
            damping: p.damping.to_vector(),
            force_gain: p.force_gain.to_vector(),
            quantization: p.encoder_resolution,
        }
    }

    pub fn trajectory(&self, kind: TrajectoryKindName) -> TrajectorySpec {
        let t = &self.trajectory;
        match kind {
            TrajectoryKindName::Sinusoidal => {
                let s = &t.sinusoidal;
                let params = SinusoidalParams {
                    base: Pose::from_degrees(s.x0, s.z0, s.theta0_deg, s.psi0_deg),
                    amplitude_z: s.amplitude_z,
                    amplitude_psi: s.amplitude_psi_deg.to_radians(),
                    frequency: s.frequency,
                };
                TrajectorySpec::sinusoidal(params, t.duration)
            }
            TrajectoryKindName::Elliptic => {
                let e = &t.elliptic;
                let params = EllipticParams {
                    start: Pose::new(e.start_x, e.start_z, 0.0, 0.0),
                    approach: e.approach.iter().map(|w| (Pose::new(w.x, w.z, 0.0, 0.0), w.duration)).collect(),
                    semi_axis_x: e.semi_axis_x,
                    semi_axis_z: e.semi_axis_z,
                    frequency: e.frequency,
                };
                TrajectorySpec::elliptic(params, t.duration)
            }
            TrajectoryKindName::Hold => TrajectorySpec::hold(t.hold.to_pose(), t.duration),
        }
    }

    pub fn simulation(&self, kind: TrajectoryKindName) -> SimulationConfig {
        SimulationConfig {
            geometry: self.geometry(),
            controller: self.controller(),
            plant: self.plant(),
            trajectory: self.trajectory(kind),
        }
    }
}
