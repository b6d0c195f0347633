//! Joint-space passivity-based PID with approximate differentiation.
//!
//! ```text
//! τ = −Kp·e − Kd·v − Ki·∫(e + v) dt,    e = q − q_d
//! v = diag{ bᵢ·s / (s + aᵢ) } · q
//! ```
//!
//! Both the filter and the integral are discretised with backward Euler.

use crate::error::{Error, Result};
use crate::JointVector;

/// Diagonal gain matrices, one entry per actuated joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// N/m
    pub kp: JointVector,
    /// N·s/m
    pub kd: JointVector,
    /// N/(m·s)
    pub ki: JointVector,
}

impl Default for Gains {
    fn default() -> Self {
        Self { kp: JointVector::repeat(4000.0), kd: JointVector::repeat(40.0), ki: JointVector::repeat(10.0) }
    }
}

impl Gains {
    pub fn uniform(kp: f64, kd: f64, ki: f64) -> Self {
        Self { kp: JointVector::repeat(kp), kd: JointVector::repeat(kd), ki: JointVector::repeat(ki) }
    }

    /// All gain matrices must be positive definite.
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("kp", &self.kp), ("kd", &self.kd), ("ki", &self.ki)] {
            if !g.iter().all(|v| *v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} entries must be positive, got {g:?}")));
            }
        }
        Ok(())
    }
}

/// Pole `a` (1/s) and gain `b` of each joint's `b·s/(s + a)` filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub a: JointVector,
    pub b: JointVector,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { a: JointVector::repeat(100.0), b: JointVector::repeat(100.0) }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        if !self.a.iter().chain(self.b.iter()).all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::invalid("filter parameters a and b must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub gains: Gains,
    pub filter: FilterParams,
    /// Control period (s).
    pub dt: f64,
    /// Symmetric clamp on each integral accumulator (m·s).
    pub integral_clamp: f64,
    /// Per-joint actuation limit (N); `None` disables saturation.
    pub tau_max: Option<f64>,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            gains: Gains::default(),
            filter: FilterParams::default(),
            dt: 1e-3,
            integral_clamp: 10.0,
            tau_max: Some(400.0),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        self.filter.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.integral_clamp > 0.0) {
            return Err(Error::invalid("integral_clamp must be positive"));
        }
        if let Some(t) = self.tau_max {
            if !(t > 0.0) {
                return Err(Error::invalid("tau_max must be positive"));
            }
        }
        Ok(())
    }
}

/// `τ = −Kp·e − Kd·v − Ki·integral`, per joint.
pub fn control_law(gains: &Gains, e: &JointVector, v: &JointVector, integral: &JointVector) -> JointVector {
    -gains.kp.component_mul(e) - gains.kd.component_mul(v) - gains.ki.component_mul(integral)
}

/// Filter and integral memory of one controller instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    config: ControllerConfig,
    integral: JointVector,
    v: JointVector,
    q_prev: JointVector,
}

impl ControllerState {
    /// Starts at rest at joint position `q0`, with empty integral.
    pub fn new(config: ControllerConfig, q0: JointVector) -> Self {
        Self { config, integral: JointVector::zeros(), v: JointVector::zeros(), q_prev: q0 }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn integral(&self) -> &JointVector {
        &self.integral
    }

    pub fn velocity(&self) -> &JointVector {
        &self.v
    }

    /// Backward-Euler image of `b·s/(s + a)`:
    /// `v_k = (v_{k−1} + b·(q_k − q_{k−1})) / (1 + a·dt)`.
    pub fn velocity_estimate(&mut self, q: &JointVector) -> JointVector {
        let dt = self.config.dt;
        let f = &self.config.filter;
        for i in 0..4 {
            self.v[i] = (self.v[i] + f.b[i] * (q[i] - self.q_prev[i])) / (1.0 + f.a[i] * dt);
        }
        self.q_prev = *q;
        self.v
    }

    /// One control period: measured joints `q`, references `q_d`.
    pub fn step(&mut self, q: &JointVector, q_d: &JointVector) -> JointVector {
        let e = q - q_d;
        let v = self.velocity_estimate(q);
        let clamp = self.config.integral_clamp;
        self.integral = (self.integral + (e + v) * self.config.dt).map(|s| s.clamp(-clamp, clamp));
        let tau = control_law(&self.config.gains, &e, &v, &self.integral);
        match self.config.tau_max {
            Some(limit) => tau.map(|t| t.clamp(-limit, limit)),
            None => tau,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn single_joint_config(a: f64, b: f64, dt: f64) -> ControllerConfig {
        ControllerConfig {
            filter: FilterParams { a: JointVector::repeat(a), b: JointVector::repeat(b) },
            dt,
            ..Default::default()
        }
    }

    #[test]
    fn law_is_zero_at_rest() {
        let z = JointVector::zeros();
        assert_eq!(control_law(&Gains::default(), &z, &z, &z), z);
    }

    #[test]
    fn proportional_only() {
        let gains = Gains { kp: JointVector::repeat(100.0), kd: JointVector::zeros(), ki: JointVector::zeros() };
        let e = JointVector::new(0.01, 0.0, 0.0, 0.0);
        let z = JointVector::zeros();
        assert_abs_diff_eq!(control_law(&gains, &e, &z, &z), JointVector::new(-1.0, 0.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn positive_error_restores() {
        let g = Gains::default();
        let z = JointVector::zeros();
        let tau = control_law(&g, &JointVector::new(0.01, -0.01, 0.02, -0.02), &z, &z);
        assert!(tau[0] < 0.0 && tau[1] > 0.0 && tau[2] < 0.0 && tau[3] > 0.0);
    }

    #[test]
    fn constant_input_decays_velocity() {
        let cfg = single_joint_config(100.0, 100.0, 1e-3);
        let mut st = ControllerState::new(cfg, JointVector::zeros());
        let q = JointVector::repeat(0.3);
        let mut prev = st.velocity_estimate(&q)[0];
        let ratio = 1.0 / (1.0 + 100.0 * 1e-3);
        for _ in 0..50 {
            let v = st.velocity_estimate(&q)[0];
            assert_relative_eq!(v, prev * ratio, max_relative = 1e-14);
            prev = v;
        }
    }

    #[test]
    fn ramp_reaches_filter_fixed_point() {
        let (a, b, m, dt) = (80.0, 60.0, 0.05, 1e-3);
        let mut st = ControllerState::new(single_joint_config(a, b, dt), JointVector::zeros());
        let mut v = 0.0;
        for k in 1..=20_000 {
            v = st.velocity_estimate(&JointVector::repeat(m * k as f64 * dt))[0];
        }
        assert_abs_diff_eq!(v, b * m / a, epsilon = 1e-9);
    }

    #[test]
    fn impulse_response_matches_closed_form() {
        let (a, b, dt) = (100.0, 100.0, 1e-3);
        let mut st = ControllerState::new(single_joint_config(a, b, dt), JointVector::zeros());
        let rho = 1.0 / (1.0 + a * dt);
        for n in 0..1000 {
            let x = if n == 0 { 1.0 } else { 0.0 };
            let v = st.velocity_estimate(&JointVector::repeat(x))[0];
            // H(z) = bρ(1 − z⁻¹)/(1 − ρz⁻¹)
            let expected = if n == 0 { b * rho } else { b * rho * rho.powi(n - 1) * (rho - 1.0) };
            assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn sine_amplitude_matches_analytic_response() {
        let (a, b, dt, amp) = (100.0, 100.0, 1e-3, 0.02);
        let w = 2.0 * std::f64::consts::PI;
        let mut st = ControllerState::new(single_joint_config(a, b, dt), JointVector::zeros());
        let mut peak: f64 = 0.0;
        for k in 0..6000 {
            let v = st.velocity_estimate(&JointVector::repeat(amp * (w * k as f64 * dt).sin()))[0];
            if k >= 3000 {
                peak = peak.max(v.abs());
            }
        }
        let analytic = amp * b * w / (w * w + a * a).sqrt();
        assert!((peak - analytic).abs() / analytic < 0.02, "{peak} vs {analytic}");
    }

    #[test]
    fn equilibrium_stays_silent() {
        let q = JointVector::new(0.66, 0.67, 0.67, 0.635);
        let mut st = ControllerState::new(ControllerConfig::default(), q);
        for _ in 0..1000 {
            assert_eq!(st.step(&q, &q), JointVector::zeros());
        }
        assert_eq!(*st.integral(), JointVector::zeros());
    }

    #[test]
    fn step_reference_without_integral() {
        let cfg = ControllerConfig {
            gains: Gains { ki: JointVector::zeros(), ..Gains::default() },
            tau_max: None,
            ..Default::default()
        };
        let q = JointVector::repeat(0.6);
        let mut st = ControllerState::new(cfg, q);
        assert_eq!(st.step(&q, &q), JointVector::zeros());
        let delta = 0.002;
        let tau = st.step(&q, &(q + JointVector::repeat(delta)));
        assert_abs_diff_eq!(tau, JointVector::repeat(4000.0 * delta), epsilon = 1e-9);
    }

    #[test]
    fn constant_offset_winds_integral_until_clamp() {
        let cfg = ControllerConfig { integral_clamp: 0.01, tau_max: None, ..Default::default() };
        let q = JointVector::repeat(0.6);
        let qd = q - JointVector::repeat(0.005);
        let mut st = ControllerState::new(cfg, q);
        let mut last_tau = 0.0;
        let mut last_int = 0.0;
        let mut clamped_at = None;
        for k in 0..5000 {
            let tau = st.step(&q, &qd)[0].abs();
            let int = st.integral()[0];
            if clamped_at.is_none() {
                assert!(tau > last_tau);
                if int == 0.01 {
                    clamped_at = Some(k);
                } else {
                    assert_abs_diff_eq!(int - last_int, 0.005 * 1e-3, epsilon = 1e-15);
                }
            } else {
                assert_eq!(int, 0.01);
                assert_eq!(tau, last_tau);
            }
            last_tau = tau;
            last_int = int;
        }
        assert!(clamped_at.is_some());
    }

    #[test]
    fn saturation_limits_output() {
        let q = JointVector::repeat(0.6);
        let mut st = ControllerState::new(ControllerConfig::default(), q);
        let tau = st.step(&q, &(q + JointVector::repeat(1.0)));
        assert_eq!(tau, JointVector::repeat(400.0));
    }

    #[test]
    fn validation() {
        assert!(ControllerConfig::default().validate().is_ok());
        let bad = ControllerConfig { gains: Gains::uniform(1.0, 0.0, 1.0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ControllerConfig { dt: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn law_is_linear(
            alpha in -10.0..10.0f64,
            e in proptest::array::uniform4(-1.0..1.0f64),
            v in proptest::array::uniform4(-1.0..1.0f64),
            i in proptest::array::uniform4(-1.0..1.0f64),
        ) {
            let g = Gains::uniform(120.0, 7.0, 3.0);
            let (e, v, i) = (JointVector::from(e), JointVector::from(v), JointVector::from(i));
            let z = JointVector::zeros();
            for (lhs, rhs) in [
                (control_law(&g, &(e * alpha), &z, &z), control_law(&g, &e, &z, &z) * alpha),
                (control_law(&g, &z, &(v * alpha), &z), control_law(&g, &z, &v, &z) * alpha),
                (control_law(&g, &z, &z, &(i * alpha)), control_law(&g, &z, &z, &i) * alpha),
            ] {
                prop_assert!((lhs - rhs).amax() < 1e-9);
            }
        }

        #[test]
        fn zero_gains_give_zero_action(seq in proptest::collection::vec(proptest::array::uniform4(-1.0..1.0f64), 1..50)) {
            let cfg = ControllerConfig { gains: Gains::uniform(0.0, 0.0, 0.0), ..Default::default() };
            let mut st = ControllerState::new(cfg, JointVector::zeros());
            for q in seq {
                prop_assert_eq!(st.step(&JointVector::from(q), &JointVector::zeros()), JointVector::zeros());
            }
        }

        #[test]
        fn time_invariant(seq in proptest::collection::vec(-0.1..0.1f64, 2..60), shift in 1usize..20) {
            let cfg = ControllerConfig { tau_max: None, ..Default::default() };
            let run = |inputs: &[f64]| {
                let mut st = ControllerState::new(cfg, JointVector::zeros());
                inputs.iter().map(|q| st.step(&JointVector::repeat(*q), &JointVector::zeros())[0]).collect::<Vec<_>>()
            };
            let base = run(&seq);
            let mut shifted_input = vec![0.0; shift];
            shifted_input.extend_from_slice(&seq);
            let shifted = run(&shifted_input);
            prop_assert!(shifted[..shift].iter().all(|t| *t == 0.0));
            prop_assert_eq!(&shifted[shift..], &base[..]);
        }
    }
}
