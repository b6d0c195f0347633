//! Decoupled per-joint actuator model `m·q̈ = k_u·u − c·q̇`.

use crate::error::{Error, Result};
use crate::JointVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    /// Effective mass per joint (kg).
    pub mass: JointVector,
    /// Viscous damping per joint (N·s/m).
    pub damping: JointVector,
    /// Force per unit control action (N).
    pub force_gain: JointVector,
    /// Encoder resolution (m). Measurements are rounded to this grid when set.
    pub quantization: Option<f64>,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            mass: JointVector::repeat(2.0),
            damping: JointVector::repeat(50.0),
            force_gain: JointVector::repeat(1.0),
            quantization: None,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if self.mass.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::invalid("plant mass must be positive"));
        }
        if self.damping.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::invalid("plant damping must be non-negative"));
        }
        if self.force_gain.iter().any(|k| !k.is_finite()) {
            return Err(Error::invalid("plant force gain must be finite"));
        }
        if let Some(res) = self.quantization {
            if !(res > 0.0 && res.is_finite()) {
                return Err(Error::invalid("encoder resolution must be positive"));
            }
        }
        Ok(())
    }

    /// Encoder reading of the true joint positions.
    pub fn measure(&self, q: &JointVector) -> JointVector {
        match self.quantization {
            Some(res) => q.map(|v| (v / res).round() * res),
            None => *q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub q: JointVector,
    pub qdot: JointVector,
}

impl PlantState {
    pub fn at_rest(q: JointVector) -> Self {
        Self { q, qdot: JointVector::zeros() }
    }
}

/// Semi-implicit Euler step.
pub fn plant_step(params: &PlantParams, state: &PlantState, u: &JointVector, dt: f64) -> PlantState {
    let mut qdot = state.qdot;
    for i in 0..4 {
        let force = params.force_gain[i] * u[i] - params.damping[i] * state.qdot[i];
        qdot[i] += dt * force / params.mass[i];
    }
    PlantState { q: state.q + qdot * dt, qdot }
}
