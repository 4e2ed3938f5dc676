//! Distributions of next possible positions: the informed displacement term.

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::Dnpp;
use super::matrix::LinearOperator;

/// Mixing ratio of the additive stochastic DNPP.
pub const ADDITIVE_R: f64 = 0.5;

/// One informant's pull on a particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Pull {
    /// Informant position (personal best, possibly perturbed).
    pub position: Vec<f64>,
    pub phi: f64,
    pub weight: f64,
}

/// `sum_k phi_k * (u_k ⊙ (p_k - x))` before the matrix is applied.
pub fn rectangular_sum(x: &[f64], pulls: &[Pull], uniforms: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; x.len()];
    for (pull, u) in pulls.iter().zip(uniforms) {
        for d in 0..x.len() {
            acc[d] += pull.phi * (u[d] * (pull.position[d] - x[d]));
        }
    }
    acc
}

/// Offset from `x` to the centroid of `x` and the points `x + phi_k (p_k - x)`,
/// with the pulls counted as two points (cognitive and social share).
fn spherical_center_offset(x: &[f64], pulls: &[Pull]) -> Vec<f64> {
    let mut acc = vec![0.0; x.len()];
    for pull in pulls {
        for d in 0..x.len() {
            acc[d] += pull.phi * (pull.position[d] - x[d]);
        }
    }
    acc.iter_mut().for_each(|v| *v /= 3.0);
    acc
}

/// Uniform sample inside the ball of radius `radius` centred at the origin.
fn sample_ball<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    if radius == 0.0 {
        return vec![0.0; dim];
    }
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    if n > 0.0 {
        dir.iter_mut().for_each(|v| *v *= r / n);
    }
    dir
}

/// The DNPP displacement for a particle at `x`.
pub fn dnpp_term<R: Rng + ?Sized>(
    kind: Dnpp,
    x: &[f64],
    pulls: &[Pull],
    matrix: &LinearOperator,
    rng: &mut R,
) -> Vec<f64> {
    let dim = x.len();
    match kind {
        Dnpp::Rectangular => {
            let uniforms: Vec<Vec<f64>> = pulls.iter().map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
            matrix.apply(&rectangular_sum(x, pulls, &uniforms))
        }
        Dnpp::Spherical => {
            let center = spherical_center_offset(x, pulls);
            let radius = center.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ball = sample_ball(dim, radius, rng);
            let offset: Vec<f64> = center.iter().zip(&ball).map(|(c, b)| c + b).collect();
            matrix.apply(&offset)
        }
        Dnpp::AdditiveStochastic => {
            let total_weight: f64 = pulls.iter().map(|p| p.weight).sum();
            let mut direction = vec![0.0; dim];
            for pull in pulls {
                for d in 0..dim {
                    direction[d] += pull.weight * pull.position[d];
                }
            }
            direction.iter_mut().zip(x).for_each(|(m, xd)| *m = *m / total_weight - xd);
            direction
                .iter()
                .map(|&dd| {
                    let z: f64 = rng.sample(StandardNormal);
                    ADDITIVE_R * dd + (1.0 - ADDITIVE_R) * z * dd
                })
                .collect()
        }
    }
}
