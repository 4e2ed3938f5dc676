//! Random linear operators applied inside the DNPP term.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::RandomMatrixKind;
use crate::linalg::{random_orthogonal, Matrix};

pub const ROTATION_PAR_ALPHA: f64 = 30.0;
pub const ROTATION_PAR_BETA: f64 = 0.01;

#[derive(Debug, Clone)]
pub enum LinearOperator {
    Identity,
    Diagonal(Vec<f64>),
    /// Disjoint plane rotations `(p, q, cos, sin)`.
    PlaneRotations(Vec<(usize, usize, f64, f64)>),
    /// Orthogonal blocks acting on the listed coordinates.
    BlockDiagonal(Vec<(Vec<usize>, Matrix)>),
}

impl LinearOperator {
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            LinearOperator::Identity => v.to_vec(),
            LinearOperator::Diagonal(d) => v.iter().zip(d).map(|(a, b)| a * b).collect(),
            LinearOperator::PlaneRotations(planes) => {
                let mut out = v.to_vec();
                for &(p, q, c, s) in planes {
                    let (a, b) = (v[p], v[q]);
                    out[p] = c * a - s * b;
                    out[q] = s * a + c * b;
                }
                out
            }
            LinearOperator::BlockDiagonal(blocks) => {
                let mut out = v.to_vec();
                for (coords, m) in blocks {
                    let local: Vec<f64> = coords.iter().map(|&c| v[c]).collect();
                    let rotated = m.mul_vec(&local);
                    for (&c, r) in coords.iter().zip(rotated) {
                        out[c] = r;
                    }
                }
                out
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, LinearOperator::Identity)
    }
}

/// Standard deviation (degrees) of the adaptive rotation angle at iteration `t`.
pub fn rotation_sigma_degrees(t: usize) -> f64 {
    ROTATION_PAR_ALPHA * (-ROTATION_PAR_BETA * t as f64).exp()
}

/// Number of blocks of the increasing group-based operator: 1 at `t = 0`
/// growing linearly to `dim / 2` at `t_max`.
pub fn group_count(dim: usize, t: usize, t_max: usize) -> usize {
    let top = (dim / 2).max(1);
    if t_max == 0 {
        return 1;
    }
    let s = t.min(t_max) as f64 / t_max as f64;
    (1 + ((top - 1) as f64 * s).floor() as usize).min(top)
}

/// Draws the operator for one particle at iteration `t`.
pub fn random_matrix<R: Rng + ?Sized>(
    kind: RandomMatrixKind,
    rng: &mut R,
    dim: usize,
    t: usize,
    t_max: usize,
) -> LinearOperator {
    match kind {
        RandomMatrixKind::Identity | RandomMatrixKind::None => LinearOperator::Identity,
        RandomMatrixKind::RandomDiagonal => LinearOperator::Diagonal((0..dim).map(|_| rng.random::<f64>()).collect()),
        RandomMatrixKind::EuclideanRotation => {
            let sigma = rotation_sigma_degrees(t);
            let normal = Normal::new(0.0, sigma).expect("finite sigma");
            let mut coords: Vec<usize> = (0..dim).collect();
            coords.shuffle(rng);
            let planes = coords
                .chunks_exact(2)
                .map(|pair| {
                    let alpha = normal.sample(rng).to_radians();
                    let (s, c) = alpha.sin_cos();
                    (pair[0], pair[1], c, s)
                })
                .collect();
            LinearOperator::PlaneRotations(planes)
        }
        RandomMatrixKind::IncreasingGroupBased => {
            let groups = group_count(dim, t, t_max);
            let mut coords: Vec<usize> = (0..dim).collect();
            coords.shuffle(rng);
            let base = dim / groups;
            let extra = dim % groups;
            let mut start = 0;
            let blocks = (0..groups)
                .map(|g| {
                    let len = base + usize::from(g < extra);
                    let members = coords[start..start + len].to_vec();
                    start += len;
                    let m = random_orthogonal(rng, len);
                    (members, m)
                })
                .collect();
            LinearOperator::BlockDiagonal(blocks)
        }
    }
}
