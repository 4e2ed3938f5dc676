//! PSO variants composed from interchangeable modules.
//!
//! Every variant instantiates the generalized velocity update
//!
//! ```text
//! v' = w1 * v + DNPP(x, informants, phi, M) + Pert_rand
//! x' = x + v'
//! ```
//!
//! with `w2 = w3 = 1` and a constant swarm of 20 particles. Bounded problems
//! clamp `x'` to the domain and zero the offending velocity component.

pub mod coefficients;
pub mod config;
pub mod dnpp;
pub mod matrix;
pub mod perturbation;
pub mod topology;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{BenchmarkError, ProblemInstance};
use crate::rng::rng_from_seed;

pub use config::{
    AccelCoefficients, ConfigError, Dnpp, InertiaWeight, InformedPerturbation, Module, ModelOfInfluence,
    ModuleConfiguration, RandomMatrixKind, RandomPerturbation, Topology,
};
pub use perturbation::{update_pm, PmState};

use coefficients::{accel_coefficients, adapt_velocity_weight, ideal_speed, inertia_weight, ranks, InertiaContext};
use dnpp::{dnpp_term, Pull};
use matrix::random_matrix;
use perturbation::{informed_perturbation, random_perturbation};
use topology::{best_index, informants, neighborhood};

pub const SWARM_SIZE: usize = 20;
/// Trajectory sampling interval, in evaluations.
pub const TRAJECTORY_INTERVAL: usize = 1000;

#[derive(Debug, Error)]
pub enum SwarmError {
    #[error("budget {budget} is smaller than the swarm size {SWARM_SIZE}")]
    BudgetTooSmall { budget: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error("expected {SWARM_SIZE} initial positions, got {0}")]
    SwarmSize(usize),
}

/// Complete mutable state of one run.
#[derive(Debug, Clone)]
pub struct SwarmState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub personal_bests: Vec<Vec<f64>>,
    pub personal_best_values: Vec<f64>,
    pub global_best: usize,
    pub global_best_value: f64,
    pub pm: Vec<PmState>,
    pub improved: Vec<bool>,
    /// Velocity-adaptive inertia weight, shared by the swarm.
    pub adaptive_inertia: f64,
    pub iteration: usize,
    pub horizon: usize,
    pub evaluations: usize,
}

impl SwarmState {
    /// Uniform initialisation in the domain with zero velocities.
    pub fn initialize<R: Rng + ?Sized>(
        problem: &ProblemInstance,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Self, SwarmError> {
        let lo = problem.domain_low();
        let hi = problem.domain_high();
        let positions: Vec<Vec<f64>> = (0..SWARM_SIZE)
            .map(|_| lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect())
            .collect();
        Self::from_positions(problem, positions, horizon, rng)
    }

    /// Starts a swarm at the given positions (evaluating each once).
    pub fn from_positions<R: Rng + ?Sized>(
        problem: &ProblemInstance,
        positions: Vec<Vec<f64>>,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Self, SwarmError> {
        if positions.len() != SWARM_SIZE {
            return Err(SwarmError::SwarmSize(positions.len()));
        }
        let dim = problem.dimension();
        let values = positions
            .iter()
            .map(|x| problem.evaluate(x, rng))
            .collect::<Result<Vec<f64>, _>>()?;
        let all: Vec<usize> = (0..SWARM_SIZE).collect();
        let global_best = best_index(&all, &values);
        Ok(SwarmState {
            velocities: vec![vec![0.0; dim]; SWARM_SIZE],
            personal_bests: positions.clone(),
            personal_best_values: values.clone(),
            global_best_value: values[global_best],
            global_best,
            positions,
            values,
            pm: vec![PmState::default(); SWARM_SIZE],
            // a fresh swarm has just set every personal best
            improved: vec![true; SWARM_SIZE],
            adaptive_inertia: coefficients::INERTIA_MAX,
            iteration: 0,
            horizon,
            evaluations: SWARM_SIZE,
        })
    }

    pub fn success_fraction(&self) -> f64 {
        self.improved.iter().filter(|&&b| b).count() as f64 / self.improved.len() as f64
    }

    fn mean_abs_velocity(&self) -> f64 {
        let n: usize = self.velocities.iter().map(Vec::len).sum();
        self.velocities.iter().flatten().map(|v| v.abs()).sum::<f64>() / n.max(1) as f64
    }
}

/// Advances the swarm by one synchronous iteration (one evaluation per
/// particle).
pub fn step<R: Rng + ?Sized>(
    state: &mut SwarmState,
    config: &ModuleConfiguration,
    problem: &ProblemInstance,
    rng: &mut R,
) -> Result<(), SwarmError> {
    let dim = problem.dimension();
    let (t, t_max) = (state.iteration, state.horizon);
    let (phi1, phi2) = accel_coefficients(config.accel, t, t_max);
    let lo = problem.domain_low();
    let hi = problem.domain_high();
    let widths: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();

    if config.inertia == InertiaWeight::AdaptiveVelocity {
        let mean_width = widths.iter().sum::<f64>() / dim as f64;
        state.adaptive_inertia =
            adapt_velocity_weight(state.adaptive_inertia, state.mean_abs_velocity(), ideal_speed(mean_width, t, t_max));
    }
    let rank = if config.inertia == InertiaWeight::RankBased { ranks(&state.values) } else { Vec::new() };
    let ctx = InertiaContext {
        adaptive: state.adaptive_inertia,
        success_fraction: state.success_fraction(),
        swarm_size: SWARM_SIZE,
    };

    let mut next_positions = Vec::with_capacity(SWARM_SIZE);
    let mut next_velocities = Vec::with_capacity(SWARM_SIZE);
    for i in 0..SWARM_SIZE {
        let w1 = inertia_weight(config.inertia, &ctx, rank.get(i).copied().unwrap_or(0));
        let hood = neighborhood(config.topology, SWARM_SIZE, i);
        let chosen = informants(config.influence, &hood, &state.personal_best_values, i);
        let pm = state.pm[i].magnitude;
        let pulls: Vec<Pull> = chosen
            .iter()
            .enumerate()
            .map(|(slot, inf)| {
                let phi = match config.influence {
                    ModelOfInfluence::BestOfNeighborhood => {
                        if slot == 0 {
                            phi1
                        } else {
                            phi2
                        }
                    }
                    ModelOfInfluence::FullyInformed => inf.weight * (phi1 + phi2),
                };
                let mut position = state.personal_bests[inf.index].clone();
                if config.informed_perturbation == InformedPerturbation::Gaussian {
                    let offset = informed_perturbation(pm, &position, rng);
                    position.iter_mut().zip(offset).for_each(|(p, o)| *p += o);
                }
                Pull { position, phi, weight: inf.weight }
            })
            .collect();
        let op = random_matrix(config.matrix, rng, dim, t, t_max);
        let x = &state.positions[i];
        let displacement = dnpp_term(config.dnpp, x, &pulls, &op, rng);

        let mut v: Vec<f64> = state.velocities[i].iter().zip(&displacement).map(|(v, d)| w1 * v + d).collect();
        if config.random_perturbation == RandomPerturbation::Rectangular {
            let kick = random_perturbation(pm, &widths, rng);
            v.iter_mut().zip(kick).for_each(|(a, b)| *a += b);
        }
        let mut x_new: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        if problem.bounded_search() {
            for d in 0..dim {
                if x_new[d] < lo[d] {
                    x_new[d] = lo[d];
                    v[d] = 0.0;
                } else if x_new[d] > hi[d] {
                    x_new[d] = hi[d];
                    v[d] = 0.0;
                }
            }
        }
        next_positions.push(x_new);
        next_velocities.push(v);
    }

    for i in 0..SWARM_SIZE {
        let value = problem.evaluate(&next_positions[i], rng)?;
        state.values[i] = value;
        let improved = value < state.personal_best_values[i];
        if improved {
            state.personal_best_values[i] = value;
            state.personal_bests[i].clone_from(&next_positions[i]);
        }
        state.improved[i] = improved;
        state.pm[i] = update_pm(state.pm[i], improved);
    }
    state.positions = next_positions;
    state.velocities = next_velocities;
    state.evaluations += SWARM_SIZE;
    let all: Vec<usize> = (0..SWARM_SIZE).collect();
    state.global_best = best_index(&all, &state.personal_best_values);
    state.global_best_value = state.personal_best_values[state.global_best];
    state.iteration += 1;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_error: f64,
    pub best_value: f64,
    pub evaluations: usize,
    /// `(evaluations, best error)` every [`TRAJECTORY_INTERVAL`] evaluations.
    pub trajectory: Vec<(usize, f64)>,
}

/// Number of update iterations a budget affords after initialisation.
pub fn iterations_for_budget(budget: usize) -> usize {
    (budget / SWARM_SIZE).saturating_sub(1)
}

/// Runs one variant for `budget` evaluations. Deterministic in `seed`.
pub fn run(
    config: &ModuleConfiguration,
    problem: &ProblemInstance,
    budget: usize,
    seed: u64,
) -> Result<RunResult, SwarmError> {
    config.validate()?;
    if budget < SWARM_SIZE {
        return Err(SwarmError::BudgetTooSmall { budget });
    }
    let mut rng = rng_from_seed(seed);
    let horizon = iterations_for_budget(budget);
    let mut state = SwarmState::initialize(problem, horizon, &mut rng)?;
    let mut trajectory = Vec::new();
    for _ in 0..horizon {
        step(&mut state, config, problem, &mut rng)?;
        if state.evaluations % TRAJECTORY_INTERVAL == 0 {
            trajectory.push((state.evaluations, problem.error_of(state.global_best_value)?));
        }
    }
    Ok(RunResult {
        final_error: problem.error_of(state.global_best_value)?,
        best_value: state.global_best_value,
        evaluations: state.evaluations,
        trajectory,
    })
}
