//! Three-component weighted compositions standing in for the hybrid rows.
//!
//! `F(x) = sum_i w_i (C_i f_i(M_i (x - o_i) / lambda_i) + bias_i)` with
//! Gaussian proximity weights. Component 0 carries bias 0, so the global
//! optimum is `o_0` and equals the instance's additive optimum value.

use super::functions as f;
use crate::linalg::{random_orthogonal, Matrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    Sphere,
    Rastrigin,
    Weierstrass,
    Griewank,
    Ackley,
    ExpandedScaffer,
    GriewankRosenbrock,
}

impl ComponentKind {
    fn eval(self, z: &[f64]) -> f64 {
        match self {
            ComponentKind::Sphere => f::sphere(z),
            ComponentKind::Rastrigin => f::rastrigin(z),
            ComponentKind::Weierstrass => f::weierstrass(z),
            ComponentKind::Griewank => f::griewank(z),
            ComponentKind::Ackley => f::ackley(z),
            ComponentKind::ExpandedScaffer => f::expanded_scaffer(z),
            ComponentKind::GriewankRosenbrock => f::griewank_rosenbrock(z),
        }
    }
}

/// Static description of one composed row.
#[derive(Debug, Clone, Copy)]
pub struct CompositionRecipe {
    pub kinds: [ComponentKind; 3],
    pub lambdas: [f64; 3],
    pub sigmas: [f64; 3],
    pub rotated: bool,
    /// Condition numbers applied on top of the rotations (1 = none).
    pub conditions: [f64; 3],
    pub non_continuous: bool,
    /// Put the even-indexed coordinates of the optimum on the upper bound.
    pub optimum_on_bounds: bool,
}

const COMPONENT_BIASES: [f64; 3] = [0.0, 100.0, 200.0];
const NORMALISED_HEIGHT: f64 = 2000.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub shift: Vec<f64>,
    pub matrix: Matrix,
    pub lambda: f64,
    pub sigma: f64,
    pub bias: f64,
    pub scale: f64,
}

impl Component {
    fn raw(&self, x: &[f64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(x.iter().zip(&self.shift).map(|(a, o)| (a - o) / self.lambda));
        let z = self.matrix.mul_vec(buf);
        self.kind.eval(&z)
    }

    fn normalise(&mut self) {
        let d = self.shift.len();
        let probe: Vec<f64> = vec![5.0 / self.lambda; d];
        let peak = self.kind.eval(&self.matrix.mul_vec(&probe)).abs();
        self.scale = if peak > 0.0 && peak.is_finite() { NORMALISED_HEIGHT / peak } else { 1.0 };
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Composition {
    pub components: Vec<Component>,
    pub non_continuous: bool,
}

impl Composition {
    pub fn generate<R: Rng + ?Sized>(recipe: &CompositionRecipe, dim: usize, low: f64, high: f64, rng: &mut R) -> Self {
        let width = high - low;
        let components = (0..3)
            .map(|i| {
                let mut shift: Vec<f64> = (0..dim)
                    .map(|_| low + width * (0.1 + 0.8 * rng.random::<f64>()))
                    .collect();
                if i == 0 && recipe.optimum_on_bounds {
                    for v in shift.iter_mut().step_by(2) {
                        *v = high;
                    }
                }
                let mut matrix = if recipe.rotated { random_orthogonal(rng, dim) } else { Matrix::identity(dim) };
                if recipe.conditions[i] > 1.0 {
                    let c = recipe.conditions[i];
                    let factors: Vec<f64> = (0..dim)
                        .map(|j| c.powf(j as f64 / (dim.max(2) - 1) as f64))
                        .collect();
                    matrix = matrix.scale_columns(&factors);
                }
                let mut comp = Component {
                    kind: recipe.kinds[i],
                    shift,
                    matrix,
                    lambda: recipe.lambdas[i],
                    sigma: recipe.sigmas[i],
                    bias: COMPONENT_BIASES[i],
                    scale: 1.0,
                };
                comp.normalise();
                comp
            })
            .collect();
        Composition { components, non_continuous: recipe.non_continuous }
    }

    /// Replaces the optimum-carrying component's shift (and optionally its
    /// matrix) and renormalises it.
    pub fn set_primary(&mut self, shift: Vec<f64>, matrix: Option<Matrix>) {
        let c = &mut self.components[0];
        c.shift = shift;
        if let Some(m) = matrix {
            c.matrix = m;
        }
        c.normalise();
    }

    pub fn optimum(&self) -> &[f64] {
        &self.components[0].shift
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let rounded: Vec<f64>;
        let x = if self.non_continuous {
            let o = self.optimum();
            rounded = x
                .iter()
                .zip(o)
                .map(|(&v, &ov)| if (v - ov).abs() < 0.5 { v } else { (2.0 * v).round() / 2.0 })
                .collect();
            &rounded[..]
        } else {
            x
        };

        let mut weights: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                let dist2: f64 = x.iter().zip(&c.shift).map(|(a, o)| (a - o) * (a - o)).sum();
                (-dist2 / (2.0 * d as f64 * c.sigma * c.sigma)).exp()
            })
            .collect();
        let top = weights.iter().copied().fold(0.0, f64::max);
        let damp = 1.0 - top.powi(10);
        for w in weights.iter_mut() {
            if *w != top {
                *w *= damp;
            }
        }
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for w in weights.iter_mut() {
                *w /= total;
            }
        } else {
            weights.iter_mut().for_each(|w| *w = 1.0 / 3.0);
        }

        let mut buf = Vec::with_capacity(d);
        self.components
            .iter()
            .zip(&weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(c, &w)| w * (c.scale * c.raw(x, &mut buf) + c.bias))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn recipe() -> CompositionRecipe {
        CompositionRecipe {
            kinds: [ComponentKind::Rastrigin, ComponentKind::Weierstrass, ComponentKind::Griewank],
            lambdas: [1.0, 10.0, 5.0 / 60.0],
            sigmas: [1.0; 3],
            rotated: true,
            conditions: [1.0; 3],
            non_continuous: false,
            optimum_on_bounds: false,
        }
    }

    #[test]
    fn zero_at_primary_optimum() {
        let mut rng = rng_from_seed(9);
        let c = Composition::generate(&recipe(), 6, -5.0, 5.0, &mut rng);
        let o = c.optimum().to_vec();
        assert!(c.eval(&o).abs() < 1e-9);
    }

    #[test]
    fn nonnegative_elsewhere() {
        let mut rng = rng_from_seed(10);
        let c = Composition::generate(&recipe(), 4, -5.0, 5.0, &mut rng);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            assert!(c.eval(&x) >= -1e-9);
        }
    }
}
