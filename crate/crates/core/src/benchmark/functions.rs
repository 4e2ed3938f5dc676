//! Untransformed base functions. Each takes the already shifted/rotated
//! argument and is zero at its optimum (Rosenbrock's optimum is at `1`).

use std::f64::consts::{E, PI};

pub fn sphere(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

/// Schwefel's problem 1.2: sum of squared prefix sums.
pub fn schwefel_1_2(z: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for v in z {
        prefix += v;
        total += prefix * prefix;
    }
    total
}

pub fn high_conditioned_elliptic(z: &[f64]) -> f64 {
    let d = z.len();
    if d == 1 {
        return z[0] * z[0];
    }
    z.iter()
        .enumerate()
        .map(|(i, v)| 1e6_f64.powf(i as f64 / (d - 1) as f64) * v * v)
        .sum()
}

/// Canonical Rosenbrock, minimum 0 at `z = (1, ..., 1)`.
pub fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}

pub fn griewank(z: &[f64]) -> f64 {
    let sum: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = z
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

pub fn ackley(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let sq = (z.iter().map(|v| v * v).sum::<f64>() / d).sqrt();
    let cs = z.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq).exp() - cs.exp() + 20.0 + E
}

pub fn rastrigin(z: &[f64]) -> f64 {
    z.iter()
        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
        .sum()
}

const WEIERSTRASS_A: f64 = 0.5;
const WEIERSTRASS_B: f64 = 3.0;
const WEIERSTRASS_K: i32 = 20;

pub fn weierstrass(z: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut offset = 0.0;
    for k in 0..=WEIERSTRASS_K {
        let ak = WEIERSTRASS_A.powi(k);
        let two_pi_bk = 2.0 * PI * WEIERSTRASS_B.powi(k);
        for v in z {
            total += ak * (two_pi_bk * (v + 0.5)).cos();
        }
        // same operation order as the loop above at v = 0
        offset += ak * (two_pi_bk * 0.5).cos();
    }
    total - z.len() as f64 * offset
}

/// Griewank applied to a scalar (the outer map of the expanded F8F2).
fn griewank_1d(v: f64) -> f64 {
    v * v / 4000.0 - v.cos() + 1.0
}

/// Expanded Griewank-of-Rosenbrock over consecutive pairs with wrap-around.
/// The argument is shifted by one inside so the optimum sits at `z = 0`.
pub fn griewank_rosenbrock(z: &[f64]) -> f64 {
    let d = z.len();
    (0..d)
        .map(|i| {
            let a = z[i] + 1.0;
            let b = z[(i + 1) % d] + 1.0;
            let r = 100.0 * (a * a - b).powi(2) + (a - 1.0).powi(2);
            griewank_1d(r)
        })
        .sum()
}

fn scaffer_pair(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let s = r2.sqrt().sin();
    0.5 + (s * s - 0.5) / (1.0 + 0.001 * r2).powi(2)
}

/// Expanded Scaffer F6 over consecutive pairs with wrap-around.
pub fn expanded_scaffer(z: &[f64]) -> f64 {
    let d = z.len();
    (0..d).map(|i| scaffer_pair(z[i], z[(i + 1) % d])).sum()
}

/// Schwefel's problem 2.6: `max_i |A_i z|` for an integer matrix `A`.
pub fn schwefel_2_6(a: &[Vec<f64>], z: &[f64]) -> f64 {
    a.iter()
        .map(|row| row.iter().zip(z).map(|(p, q)| p * q).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// `B_i(x) = sum_j a_ij sin x_j + b_ij cos x_j`, the inner map of Schwefel 2.13.
pub fn schwefel_2_13_terms(a: &[Vec<f64>], b: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .zip(x)
                .map(|((p, q), v)| p * v.sin() + q * v.cos())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_origin() {
        let z = vec![0.0; 7];
        assert_eq!(sphere(&z), 0.0);
        assert_eq!(schwefel_1_2(&z), 0.0);
        assert_eq!(high_conditioned_elliptic(&z), 0.0);
        assert_eq!(rastrigin(&z), 0.0);
        assert_eq!(expanded_scaffer(&z), 0.0);
        assert!(griewank(&z).abs() < 1e-15);
        assert!(ackley(&z).abs() < 1e-14);
        assert!(weierstrass(&z).abs() < 1e-12);
        assert!(griewank_rosenbrock(&z).abs() < 1e-15);
        assert_eq!(rosenbrock(&[1.0; 7]), 0.0);
    }

    #[test]
    fn rosenbrock_matches_scalar_transcription() {
        // f(x, y, w) = 100 (x^2 - y)^2 + (x - 1)^2 + 100 (y^2 - w)^2 + (y - 1)^2
        let (x, y, w) = (0.3_f64, -1.2_f64, 2.0_f64);
        let direct = 100.0 * (x * x - y).powi(2)
            + (x - 1.0).powi(2)
            + 100.0 * (y * y - w).powi(2)
            + (y - 1.0).powi(2);
        assert!((rosenbrock(&[x, y, w]) - direct).abs() < 1e-12);
    }

    #[test]
    fn schwefel_1_2_small_case() {
        // (1)^2 + (1+2)^2 + (1+2-4)^2 = 1 + 9 + 1
        assert_eq!(schwefel_1_2(&[1.0, 2.0, -4.0]), 11.0);
    }

    #[test]
    fn rastrigin_integer_points() {
        // at integer points the cosine term is exactly 10 per coordinate
        let v = rastrigin(&[1.0, -2.0]);
        assert!((v - 5.0).abs() < 1e-12);
    }
}
