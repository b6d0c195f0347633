//! Tracking metrics: signed mean error and phase offset.

use crate::error::{Error, Result};
use crate::simulation::SimLog;
use crate::JointVector;

/// Default search window for [`phase_offset`] (s).
pub const DEFAULT_MAX_LAG: f64 = 0.5;

/// Fewest overlapping samples a lag must keep to be scored.
const MIN_OVERLAP: usize = 8;

/// Mean of `q − q_ref` over the whole log for one joint (`0..4`).
pub fn mean_error(log: &SimLog, joint: usize) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    if joint >= 4 {
        return Err(Error::invalid(format!("joint index {joint} out of range")));
    }
    let sum: f64 = log.e.iter().map(|e| e[joint]).sum();
    Ok(sum / log.len() as f64)
}

pub fn mean_errors(log: &SimLog) -> Result<JointVector> {
    let mut out = JointVector::zeros();
    for j in 0..4 {
        out[j] = mean_error(log, j)?;
    }
    Ok(out)
}

/// Delay of `actual` relative to `reference` (s), positive when `actual`
/// lags. Searches `±DEFAULT_MAX_LAG`.
pub fn phase_offset(reference: &[f64], actual: &[f64], dt: f64) -> Result<f64> {
    phase_offset_within(reference, actual, dt, DEFAULT_MAX_LAG)
}

/// Maximises the Pearson correlation between `reference[i]` and
/// `actual[i + k]` over integer lags `|k·dt| ≤ max_lag`, then refines the
/// peak with a parabola through its two neighbours.
pub fn phase_offset_within(reference: &[f64], actual: &[f64], dt: f64, max_lag: f64) -> Result<f64> {
    if reference.len() != actual.len() {
        return Err(Error::invalid("phase_offset series must have equal length"));
    }
    if !(dt > 0.0) || !(max_lag >= 0.0) {
        return Err(Error::invalid("phase_offset needs dt > 0 and max_lag >= 0"));
    }
    let n = reference.len();
    if n < MIN_OVERLAP || is_constant(reference) || is_constant(actual) {
        return Err(Error::DegenerateSignal);
    }
    let max_k = ((max_lag / dt).round() as usize).min(n - MIN_OVERLAP) as isize;

    let scores: Vec<Option<f64>> = (-max_k..=max_k).map(|k| lagged_correlation(reference, actual, k)).collect();
    let (best, peak) = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|v| (i, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })
        .ok_or(Error::DegenerateSignal)?;

    let mut lag = best as f64 - max_k as f64;
    if best > 0 && best + 1 < scores.len() {
        if let (Some(left), Some(right)) = (scores[best - 1], scores[best + 1]) {
            let curvature = left - 2.0 * peak + right;
            if curvature < 0.0 {
                lag += 0.5 * (left - right) / curvature;
            }
        }
    }
    Ok(lag * dt)
}

fn is_constant(x: &[f64]) -> bool {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    !(hi - lo > 1e-12 * scale)
}

/// Pearson correlation of `x[i]` with `y[i + k]` over their overlap.
fn lagged_correlation(x: &[f64], y: &[f64], k: isize) -> Option<f64> {
    let shift = k.unsigned_abs();
    let (xs, ys) = if k >= 0 { (&x[..x.len() - shift], &y[shift..]) } else { (&x[shift..], &y[..y.len() - shift]) };
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in xs.iter().zip(ys) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    let denom = (sxx * syy).sqrt();
    (denom > 0.0).then(|| sxy / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::TAU;

    fn sine(n: usize, dt: f64, freq: f64, delay: f64) -> Vec<f64> {
        (0..n).map(|i| (TAU * freq * (i as f64 * dt - delay)).sin()).collect()
    }

    fn log_with_errors(errors: &[JointVector]) -> SimLog {
        let mut log = SimLog::with_capacity(1e-3, errors.len());
        for (i, e) in errors.iter().enumerate() {
            let q_ref = JointVector::new(0.6, 0.6, 0.6, 0.635);
            log.push(i as f64 * 1e-3, Pose::HOME, q_ref, q_ref + e, JointVector::zeros());
        }
        log
    }

    #[test]
    fn mean_error_of_perfect_tracking_is_zero() {
        let log = log_with_errors(&vec![JointVector::zeros(); 10]);
        assert_eq!(mean_errors(&log).unwrap(), JointVector::zeros());
    }

    #[test]
    fn mean_error_of_constant_offset() {
        let log = log_with_errors(&vec![JointVector::new(0.0, 2.5e-4, 0.0, 0.0); 10]);
        let m = mean_errors(&log).unwrap();
        assert!((m[1] - 2.5e-4).abs() < 1e-15);
        assert_eq!((m[0], m[2], m[3]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_log_is_rejected() {
        assert_eq!(mean_error(&SimLog::default(), 0), Err(Error::EmptyLog));
        let log = log_with_errors(&[JointVector::zeros()]);
        assert!(mean_error(&log, 4).is_err());
    }

    #[test]
    fn identical_series_have_zero_offset() {
        let s = sine(5000, 1e-3, 0.5, 0.0);
        assert!(phase_offset(&s, &s, 1e-3).unwrap().abs() < 1e-12);
    }

    #[test]
    fn recovers_integer_lag() {
        let dt = 1e-3;
        let r = sine(10_000, dt, 0.5, 0.0);
        let a = sine(10_000, dt, 0.5, 0.040);
        let lag = phase_offset(&r, &a, dt).unwrap();
        assert!((lag - 0.040).abs() < 1e-3, "lag {lag}");
        let lead = phase_offset(&a, &r, dt).unwrap();
        assert!((lead + 0.040).abs() < 1e-3);
    }

    #[test]
    fn refines_fractional_lag() {
        let dt = 1e-3;
        let r = sine(10_000, dt, 0.5, 0.0);
        let a = sine(10_000, dt, 0.5, 0.0123);
        let lag = phase_offset(&r, &a, dt).unwrap();
        assert!((lag - 0.0123).abs() < 1e-4, "lag {lag}");
    }

    #[test]
    fn noisy_lag_stays_within_two_samples() {
        let dt = 1e-3;
        let r = sine(10_000, dt, 0.5, 0.0);
        let clean = sine(10_000, dt, 0.5, 0.040);
        let noise = Normal::new(0.0, 0.01).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();
            let lag = phase_offset(&r, &a, dt).unwrap();
            assert!((lag - 0.040).abs() < 2e-3, "seed {seed}: lag {lag}");
        }
    }

    #[test]
    fn constant_series_is_degenerate() {
        let c = vec![0.635; 1000];
        let s = sine(1000, 1e-3, 1.0, 0.0);
        assert_eq!(phase_offset(&c, &s, 1e-3), Err(Error::DegenerateSignal));
        assert_eq!(phase_offset(&s, &c, 1e-3), Err(Error::DegenerateSignal));
        assert_eq!(phase_offset(&s[..3], &s[..3], 1e-3), Err(Error::DegenerateSignal));
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let s = sine(100, 1e-3, 1.0, 0.0);
        assert!(phase_offset(&s, &s[..50], 1e-3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn offset_is_antisymmetric(delay in -0.2f64..0.2, freq in 0.3f64..2.0, seed in 0u64..1000) {
            let dt = 1e-3;
            let noise = Normal::new(0.0, 0.05).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r: Vec<f64> = sine(4000, dt, freq, 0.0).iter().map(|v| v + noise.sample(&mut rng)).collect();
            let a = sine(4000, dt, freq, delay);
            let forward = phase_offset(&r, &a, dt).unwrap();
            let backward = phase_offset(&a, &r, dt).unwrap();
            prop_assert!((forward + backward).abs() <= dt);
        }

        #[test]
        fn mean_error_is_translation_equivariant(
            errs in prop::collection::vec(prop::array::uniform4(-1e-2f64..1e-2), 1..200),
            delta in -1e-2f64..1e-2,
        ) {
            let base: Vec<JointVector> = errs.iter().map(|e| JointVector::from(*e)).collect();
            let log = log_with_errors(&base);
            let mut shifted = log.clone();
            for (q, e) in shifted.q.iter_mut().zip(shifted.e.iter_mut()) {
                q[2] += delta;
                *e = *q - JointVector::new(0.6, 0.6, 0.6, 0.635);
            }
            let before = mean_error(&log, 2).unwrap();
            let after = mean_error(&shifted, 2).unwrap();
            prop_assert!((after - before - delta).abs() < 1e-12);
            prop_assert_eq!(mean_error(&shifted, 0).unwrap(), mean_error(&log, 0).unwrap());
        }
    }
}
