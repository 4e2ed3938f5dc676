//! Perturbation terms and the success-rate perturbation-magnitude rule.

use rand::Rng;
use rand_distr::StandardNormal;

pub const PM_INITIAL: f64 = 0.5;
pub const PM_SUCCESS_THRESHOLD: u32 = 40;
pub const PM_FAILURE_THRESHOLD: u32 = 20;
pub const PM_MAX: f64 = 1.0;
pub const PM_MIN: f64 = 1e-6;
const INFORMED_EPSILON: f64 = 1e-12;

/// Per-particle perturbation magnitude with its success/failure counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmState {
    pub magnitude: f64,
    pub successes: u32,
    pub failures: u32,
}

impl Default for PmState {
    fn default() -> Self {
        PmState { magnitude: PM_INITIAL, successes: 0, failures: 0 }
    }
}

/// Counts an improvement or a failure. Reaching the success threshold
/// doubles the magnitude, reaching the failure threshold halves it; either
/// event resets both counters.
pub fn update_pm(state: PmState, improved: bool) -> PmState {
    let mut s = state;
    if improved {
        s.successes += 1;
    } else {
        s.failures += 1;
    }
    if s.successes >= PM_SUCCESS_THRESHOLD {
        s.magnitude = (s.magnitude * 2.0).min(PM_MAX);
        s.successes = 0;
        s.failures = 0;
    } else if s.failures >= PM_FAILURE_THRESHOLD {
        s.magnitude = (s.magnitude * 0.5).max(PM_MIN);
        s.successes = 0;
        s.failures = 0;
    }
    s
}

/// Gaussian offset around an informant: per dimension a draw from
/// `N(target_d, pm * |target_d| + eps)` minus `target_d`.
pub fn informed_perturbation<R: Rng + ?Sized>(pm: f64, target: &[f64], rng: &mut R) -> Vec<f64> {
    target
        .iter()
        .map(|&t| {
            let sigma = pm * t.abs() + INFORMED_EPSILON;
            let z: f64 = rng.sample(StandardNormal);
            sigma * z
        })
        .collect()
}

/// Uniform offset in `[-pm, pm] * width_d` per dimension.
pub fn random_perturbation<R: Rng + ?Sized>(pm: f64, widths: &[f64], rng: &mut R) -> Vec<f64> {
    widths
        .iter()
        .map(|&w| {
            let u: f64 = rng.random::<f64>() * 2.0 - 1.0;
            u * pm * w
        })
        .collect()
}
