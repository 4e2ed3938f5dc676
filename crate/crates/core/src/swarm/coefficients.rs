//! Acceleration coefficients and inertia-weight strategies.

use super::config::{AccelCoefficients, InertiaWeight};

pub const CONSTANT_PHI: f64 = 1.4;
pub const PHI1_START: f64 = 2.4;
pub const PHI1_END: f64 = 0.5;
pub const PHI2_START: f64 = 0.5;
pub const PHI2_END: f64 = 2.4;

pub const INERTIA_MIN: f64 = 0.15;
pub const INERTIA_MAX: f64 = 0.95;
pub const INERTIA_STEP: f64 = 0.1;
/// Ideal-speed scale for the velocity-adaptive strategy.
pub const VELOCITY_LAMBDA: f64 = 0.5;

fn progress(t: usize, t_max: usize) -> f64 {
    if t_max == 0 {
        0.0
    } else {
        (t.min(t_max)) as f64 / t_max as f64
    }
}

/// `(phi1, phi2)` at iteration `t` of `t_max`.
pub fn accel_coefficients(kind: AccelCoefficients, t: usize, t_max: usize) -> (f64, f64) {
    match kind {
        AccelCoefficients::Constant => (CONSTANT_PHI, CONSTANT_PHI),
        AccelCoefficients::Scheduled => {
            let s = progress(t, t_max);
            (PHI1_START + (PHI1_END - PHI1_START) * s, PHI2_START + (PHI2_END - PHI2_START) * s)
        }
    }
}

/// Swarm-level inputs the adaptive strategies read.
#[derive(Debug, Clone, Copy)]
pub struct InertiaContext {
    /// Current value of the velocity-adaptive weight.
    pub adaptive: f64,
    /// Fraction of particles that improved their personal best last iteration.
    pub success_fraction: f64,
    pub swarm_size: usize,
}

/// `w1` for one particle. `rank` is 0 for the best particle.
pub fn inertia_weight(kind: InertiaWeight, ctx: &InertiaContext, rank: usize) -> f64 {
    match kind {
        InertiaWeight::ConstantZero => 0.0,
        InertiaWeight::ConstantThreeQuarters => 0.75,
        InertiaWeight::AdaptiveVelocity => ctx.adaptive.clamp(INERTIA_MIN, INERTIA_MAX),
        InertiaWeight::RankBased => {
            let denom = ctx.swarm_size.saturating_sub(1).max(1) as f64;
            INERTIA_MIN + (INERTIA_MAX - INERTIA_MIN) * rank as f64 / denom
        }
        InertiaWeight::SuccessBased => {
            INERTIA_MIN + (INERTIA_MAX - INERTIA_MIN) * ctx.success_fraction.clamp(0.0, 1.0)
        }
    }
}

/// Ideal mean absolute velocity component at iteration `t`: a cosine decay
/// from `lambda * mean domain width` to zero at `t_max`.
pub fn ideal_speed(mean_width: f64, t: usize, t_max: usize) -> f64 {
    let s = progress(t, t_max);
    VELOCITY_LAMBDA * mean_width * 0.5 * (1.0 + (std::f64::consts::PI * s).cos())
}

/// One adjustment of the velocity-adaptive weight: raise it when the swarm is
/// slower than ideal, lower it otherwise.
pub fn adapt_velocity_weight(current: f64, mean_speed: f64, ideal: f64) -> f64 {
    let next = if mean_speed < ideal { current + INERTIA_STEP } else { current - INERTIA_STEP };
    next.clamp(INERTIA_MIN, INERTIA_MAX)
}

/// Ranks by value ascending, ties by index. `ranks[i]` is particle i's rank.
pub fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> InertiaContext {
        InertiaContext { adaptive: INERTIA_MAX, success_fraction: 0.0, swarm_size: 20 }
    }

    #[test]
    fn constant_accel() {
        for t in [0, 5, 100] {
            assert_eq!(accel_coefficients(AccelCoefficients::Constant, t, 100), (1.4, 1.4));
        }
    }

    #[test]
    fn scheduled_accel_endpoints() {
        assert_eq!(accel_coefficients(AccelCoefficients::Scheduled, 0, 50), (2.4, 0.5));
        let (a, b) = accel_coefficients(AccelCoefficients::Scheduled, 50, 50);
        assert!((a - 0.5).abs() < 1e-15 && (b - 2.4).abs() < 1e-15);
        let (a, b) = accel_coefficients(AccelCoefficients::Scheduled, 25, 50);
        assert!((a - 1.45).abs() < 1e-12 && (b - 1.45).abs() < 1e-12);
    }

    #[test]
    fn constant_inertia() {
        assert_eq!(inertia_weight(InertiaWeight::ConstantThreeQuarters, &ctx(), 3), 0.75);
        assert_eq!(inertia_weight(InertiaWeight::ConstantZero, &ctx(), 3), 0.0);
    }

    #[test]
    fn rank_based_endpoints() {
        assert_eq!(inertia_weight(InertiaWeight::RankBased, &ctx(), 0), 0.15);
        assert!((inertia_weight(InertiaWeight::RankBased, &ctx(), 19) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn success_based_full_success() {
        let c = InertiaContext { success_fraction: 1.0, ..ctx() };
        assert!((inertia_weight(InertiaWeight::SuccessBased, &c, 0) - 0.95).abs() < 1e-15);
        let c = InertiaContext { success_fraction: 0.0, ..ctx() };
        assert_eq!(inertia_weight(InertiaWeight::SuccessBased, &c, 0), 0.15);
    }

    #[test]
    fn velocity_adaptation_is_clamped() {
        assert_eq!(adapt_velocity_weight(0.95, 0.0, 1.0), 0.95);
        assert_eq!(adapt_velocity_weight(0.15, 2.0, 1.0), 0.15);
        assert!((adapt_velocity_weight(0.5, 0.0, 1.0) - 0.6).abs() < 1e-15);
        assert_eq!(ideal_speed(10.0, 100, 100), 0.0);
        assert_eq!(ideal_speed(10.0, 0, 100), 5.0);
    }

    #[test]
    fn ranks_break_ties_by_index() {
        assert_eq!(ranks(&[2.0, 1.0, 2.0, 0.5]), vec![2, 1, 3, 0]);
    }
}
