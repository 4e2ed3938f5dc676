//! Seeded benchmark problems modelled on the 25 CEC'05 problem classes.
//!
//! Each [`FunctionId`] maps to one base function plus a transform stack
//! (shift, optional rotation, optional noise, or a three-component
//! composition for the hybrid rows). Transforms are synthetic by default:
//! a seeded Gaussian matrix orthonormalised into a rotation and a shift
//! drawn uniformly from the central 80% of the domain. Official data files
//! can be supplied through [`DataSource::External`].

mod composition;
pub mod external;
pub mod functions;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{random_orthogonal, Matrix};
use crate::rng::{derive_seed, rng_from_seed};
use composition::{ComponentKind, Composition, CompositionRecipe};

/// Tolerance below the optimum that [`ProblemInstance::error_of`] accepts.
pub const OPTIMUM_GUARD: f64 = 1e-6;
/// Multiplicative noise amplitude for the noisy rows.
pub const NOISE_AMPLITUDE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("unknown function id {0:?}")]
    UnknownFunction(String),
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in evaluation point")]
    NonFinite,
    #[error("external data {path}: {message}")]
    ExternalData { path: String, message: String },
    #[error("rotation is not orthogonal (max |R^T R - I| = {0:e})")]
    NotOrthogonal(f64),
    #[error("value {value} lies below the optimum {optimum}; evaluator defect")]
    BelowOptimum { value: f64, optimum: f64 },
    #[error("instance document: {0}")]
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
    F13,
    F14,
    F15,
    F16,
    F17,
    F18,
    F19,
    F20,
    F21,
    F22,
    F23,
    F24,
    F25,
}

/// Descriptive metadata of one row of the benchmark table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionInfo {
    pub name: &'static str,
    /// Type column of the table: Unimodal, Multimodal or Hybrid.
    pub category: &'static str,
    /// Suite class used in prose; differs from `category` for f13/f14,
    /// which are listed as multimodal but described as expanded multimodal.
    pub suite_class: &'static str,
    pub properties: &'static str,
    pub low: f64,
    pub high: f64,
    pub optimum: f64,
    pub separable: bool,
    pub rotated: bool,
    pub noisy: bool,
    pub bounded: bool,
}

const fn info(
    name: &'static str,
    category: &'static str,
    suite_class: &'static str,
    properties: &'static str,
    low: f64,
    high: f64,
    optimum: f64,
    flags: (bool, bool, bool, bool),
) -> FunctionInfo {
    FunctionInfo {
        name,
        category,
        suite_class,
        properties,
        low,
        high,
        optimum,
        separable: flags.0,
        rotated: flags.1,
        noisy: flags.2,
        bounded: flags.3,
    }
}

const PI: f64 = std::f64::consts::PI;
// (separable, rotated, noisy, bounded)
const TABLE: [FunctionInfo; 25] = [
    info("Shifted Sphere", "Unimodal", "unimodal", "Separable, shifted", -100.0, 100.0, 0.0, (true, false, false, true)),
    info("Shifted Schwefel's 1.2", "Unimodal", "unimodal", "Non-separable, shifted", -100.0, 100.0, 0.0, (false, false, false, true)),
    info("Shifted Rotated High Cond. Elliptic", "Unimodal", "unimodal", "Non-separable, rotated, shifted", -100.0, 100.0, 0.0, (false, true, false, true)),
    info("Shifted Schwefel's 1.2 + Noise", "Unimodal", "unimodal", "Non-separable, noisy", -100.0, 100.0, 0.0, (false, false, true, true)),
    info("Schwefel's 2.6 (bounds)", "Unimodal", "unimodal", "Non-separable, optimum on bounds", -100.0, 100.0, 0.0, (false, false, false, true)),
    info("Shifted Rosenbrock", "Multimodal", "basic multimodal", "Non-separable, narrow valley", -100.0, 100.0, 0.0, (false, false, false, true)),
    info("Shifted Rotated Griewank (no bounds)", "Multimodal", "basic multimodal", "Non-separable, rotated", -600.0, 600.0, 0.0, (false, true, false, false)),
    info("Shifted Rotated Ackley (bounds)", "Multimodal", "basic multimodal", "Non-separable, rotated, bounds", -32.0, 32.0, 0.0, (false, true, false, true)),
    info("Shifted Rastrigin", "Multimodal", "basic multimodal", "Separable, many local optima", -5.0, 5.0, 0.0, (true, false, false, true)),
    info("Shifted Rotated Rastrigin", "Multimodal", "basic multimodal", "Non-separable, rotated, many optima", -5.0, 5.0, 0.0, (false, true, false, true)),
    info("Shifted Rotated Weierstrass", "Multimodal", "basic multimodal", "Non-separable, fractal landscape", -0.5, 0.5, 0.0, (false, true, false, true)),
    info("Schwefel's 2.13", "Multimodal", "basic multimodal", "Non-separable, shifted", -PI, PI, 0.0, (false, false, false, true)),
    info("Expanded Griewank+Rosenbrock (F8F2)", "Multimodal", "expanded multimodal", "Non-separable, expanded hybrid", -3.0, 1.0, 0.0, (false, false, false, true)),
    info("Shifted Rotated Scaffer's F6", "Multimodal", "expanded multimodal", "Non-separable, rotated", -100.0, 100.0, 0.0, (false, true, false, true)),
    info("Hybrid Composition 1", "Hybrid", "hybrid composition", "Mixed, partly separable", -5.0, 5.0, 0.0, (false, false, false, true)),
    info("Rotated Hybrid 1", "Hybrid", "hybrid composition", "Non-separable, rotated", -5.0, 5.0, 0.0, (false, true, false, true)),
    info("Rotated Hybrid 1 + Noise", "Hybrid", "hybrid composition", "Non-separable, noisy", -5.0, 5.0, 0.0, (false, true, true, true)),
    info("Rotated Hybrid 2", "Hybrid", "hybrid composition", "Non-separable, traps, flat regions", -5.0, 5.0, 0.0, (false, true, false, true)),
    info("Rotated Hybrid 2 (narrow basin)", "Hybrid", "hybrid composition", "Non-separable, narrow basin", -5.0, 5.0, 100.0, (false, true, false, true)),
    info("Rotated Hybrid 2 (opt on bounds)", "Hybrid", "hybrid composition", "Non-separable, optimum on bounds", -5.0, 5.0, 0.0, (false, true, false, true)),
    info("Rotated Hybrid 3", "Hybrid", "hybrid composition", "Non-separable, rotated", -5.0, 5.0, 200.0, (false, true, false, true)),
    info("Rotated Hybrid 3 (ill-conditioned)", "Hybrid", "hybrid composition", "Non-separable, ill-conditioned", -5.0, 5.0, 300.0, (false, true, false, true)),
    info("Non-continuous Rotated Hybrid", "Hybrid", "hybrid composition", "Non-separable, non-continuous", -5.0, 5.0, 300.0, (false, true, false, true)),
    info("Rotated Hybrid 4", "Hybrid", "hybrid composition", "Non-separable, rotated, complex", -5.0, 5.0, 200.0, (false, true, false, true)),
    info("Rotated Hybrid 4 (no bounds)", "Hybrid", "hybrid composition", "Non-separable, opt outside init", -5.0, 5.0, 200.0, (false, true, false, false)),
];

impl FunctionId {
    pub const ALL: [FunctionId; 25] = [
        FunctionId::F1,
        FunctionId::F2,
        FunctionId::F3,
        FunctionId::F4,
        FunctionId::F5,
        FunctionId::F6,
        FunctionId::F7,
        FunctionId::F8,
        FunctionId::F9,
        FunctionId::F10,
        FunctionId::F11,
        FunctionId::F12,
        FunctionId::F13,
        FunctionId::F14,
        FunctionId::F15,
        FunctionId::F16,
        FunctionId::F17,
        FunctionId::F18,
        FunctionId::F19,
        FunctionId::F20,
        FunctionId::F21,
        FunctionId::F22,
        FunctionId::F23,
        FunctionId::F24,
        FunctionId::F25,
    ];

    /// 1-based row number.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn from_number(n: usize) -> Option<Self> {
        n.checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn info(self) -> &'static FunctionInfo {
        &TABLE[self as usize]
    }

    fn composition_recipe(self) -> Option<CompositionRecipe> {
        use ComponentKind::*;
        let hybrid1 = CompositionRecipe {
            kinds: [Rastrigin, Weierstrass, Griewank],
            lambdas: [1.0, 10.0, 5.0 / 60.0],
            sigmas: [1.0, 1.0, 1.0],
            rotated: false,
            conditions: [1.0; 3],
            non_continuous: false,
            optimum_on_bounds: false,
        };
        let hybrid2 = CompositionRecipe {
            kinds: [Ackley, Rastrigin, Sphere],
            lambdas: [2.0 * 5.0 / 32.0, 1.0, 5.0 / 100.0],
            sigmas: [1.0, 2.0, 1.5],
            rotated: true,
            ..hybrid1
        };
        let hybrid3 = CompositionRecipe {
            kinds: [ExpandedScaffer, Rastrigin, GriewankRosenbrock],
            lambdas: [5.0 * 5.0 / 100.0, 1.0, 5.0 / 20.0],
            sigmas: [1.0, 1.0, 2.0],
            rotated: true,
            ..hybrid1
        };
        let hybrid4 = CompositionRecipe {
            kinds: [Weierstrass, ExpandedScaffer, GriewankRosenbrock],
            lambdas: [10.0, 5.0 / 20.0, 1.0],
            sigmas: [2.0, 2.0, 2.0],
            rotated: true,
            ..hybrid1
        };
        Some(match self {
            FunctionId::F15 => hybrid1,
            FunctionId::F16 | FunctionId::F17 => CompositionRecipe { rotated: true, ..hybrid1 },
            FunctionId::F18 => hybrid2,
            FunctionId::F19 => CompositionRecipe {
                sigmas: [0.1, 2.0, 1.5],
                lambdas: [0.1 * 5.0 / 32.0, 1.0, 5.0 / 100.0],
                ..hybrid2
            },
            FunctionId::F20 => CompositionRecipe { optimum_on_bounds: true, ..hybrid2 },
            FunctionId::F21 => hybrid3,
            FunctionId::F22 => CompositionRecipe { conditions: [10.0, 20.0, 50.0], ..hybrid3 },
            FunctionId::F23 => CompositionRecipe { non_continuous: true, ..hybrid3 },
            FunctionId::F24 | FunctionId::F25 => hybrid4,
            _ => return None,
        })
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.number())
    }
}

impl FromStr for FunctionId {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        t.strip_prefix('f')
            .or_else(|| t.strip_prefix('F'))
            .filter(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) && !n.starts_with('0'))
            .and_then(|n| n.parse::<usize>().ok())
            .and_then(FunctionId::from_number)
            .ok_or_else(|| BenchmarkError::UnknownFunction(s.to_string()))
    }
}

impl Serialize for FunctionId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    #[default]
    Synthetic,
    /// Whitespace-separated numeric files; the rotation file is optional.
    External { shift: PathBuf, rotation: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub function: FunctionId,
    pub dimension: usize,
    pub transform_seed: u64,
    #[serde(default)]
    pub data_source: DataSource,
}

impl ProblemSpec {
    pub fn new(function: FunctionId, dimension: usize, transform_seed: u64) -> Self {
        ProblemSpec { function, dimension, transform_seed, data_source: DataSource::Synthetic }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Sphere,
    Schwefel12,
    Elliptic,
    Schwefel26 { a: Vec<Vec<f64>> },
    Rosenbrock,
    Griewank,
    Ackley,
    Rastrigin,
    Weierstrass,
    Schwefel213 { a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, target: Vec<f64> },
    GriewankRosenbrock,
    ExpandedScaffer,
    Composition(Composition),
}

/// A concrete, immutable problem. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    spec: ProblemSpec,
    shift: Vec<f64>,
    rotation: Matrix,
    domain_low: Vec<f64>,
    domain_high: Vec<f64>,
    optimum_value: f64,
    bounded_search: bool,
    kernel: Kernel,
}

/// Generates the instance described by `spec`. Same spec, same instance.
pub fn make_problem(spec: &ProblemSpec) -> Result<ProblemInstance, BenchmarkError> {
    let d = spec.dimension;
    if d < 2 {
        return Err(BenchmarkError::InvalidDimension(d));
    }
    let id = spec.function;
    let meta = id.info();
    let mut rng = rng_from_seed(derive_seed([
        b"problem".as_slice(),
        id.to_string().as_bytes(),
        &(d as u64).to_le_bytes(),
        &spec.transform_seed.to_le_bytes(),
    ]));
    let (low, high) = (meta.low, meta.high);
    let width = high - low;

    let mut shift: Vec<f64> = (0..d).map(|_| low + width * (0.1 + 0.8 * rng.random::<f64>())).collect();
    let rotation = if meta.rotated && id.composition_recipe().is_none() {
        random_orthogonal(&mut rng, d)
    } else {
        Matrix::identity(d)
    };

    let kernel = match id {
        FunctionId::F1 => Kernel::Sphere,
        FunctionId::F2 | FunctionId::F4 => Kernel::Schwefel12,
        FunctionId::F3 => Kernel::Elliptic,
        FunctionId::F5 => {
            let quarter = d.div_ceil(4);
            for v in shift.iter_mut().take(quarter) {
                *v = low;
            }
            for v in shift.iter_mut().skip(d - d / 4) {
                *v = high;
            }
            let a = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-500..=500) as f64).collect())
                .collect();
            Kernel::Schwefel26 { a }
        }
        FunctionId::F6 => Kernel::Rosenbrock,
        FunctionId::F7 => Kernel::Griewank,
        FunctionId::F8 => {
            for v in shift.iter_mut().step_by(2) {
                *v = low;
            }
            Kernel::Ackley
        }
        FunctionId::F9 | FunctionId::F10 => Kernel::Rastrigin,
        FunctionId::F11 => Kernel::Weierstrass,
        FunctionId::F12 => {
            let a: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-100..=100) as f64).collect())
                .collect();
            let b: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-100..=100) as f64).collect())
                .collect();
            Kernel::Schwefel213 { a, b, target: Vec::new() }
        }
        FunctionId::F13 => Kernel::GriewankRosenbrock,
        FunctionId::F14 => Kernel::ExpandedScaffer,
        _ => {
            let recipe = id.composition_recipe().expect("hybrid rows have recipes");
            let comp = Composition::generate(&recipe, d, low, high, &mut rng);
            shift = comp.optimum().to_vec();
            Kernel::Composition(comp)
        }
    };

    let mut instance = ProblemInstance {
        spec: spec.clone(),
        shift,
        rotation,
        domain_low: vec![low; d],
        domain_high: vec![high; d],
        optimum_value: meta.optimum,
        bounded_search: meta.bounded,
        kernel,
    };
    instance.refresh_kernel();

    if let DataSource::External { shift, rotation } = &spec.data_source {
        let s = external::load_shift(shift, d)?;
        let r = match rotation {
            Some(p) => Some(Matrix::from_rows(&external::load_rotation(p, d)?).expect("square rows")),
            None => None,
        };
        instance = instance.with_transform(s, r)?;
    }
    Ok(instance)
}

impl ProblemInstance {
    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn function(&self) -> FunctionId {
        self.spec.function
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    pub fn domain_low(&self) -> &[f64] {
        &self.domain_low
    }

    pub fn domain_high(&self) -> &[f64] {
        &self.domain_high
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    /// False for rows whose bounds only govern initialisation.
    pub fn bounded_search(&self) -> bool {
        self.bounded_search
    }

    pub fn is_noisy(&self) -> bool {
        self.spec.function.info().noisy
    }

    /// Replaces the shift and (optionally) the rotation, recomputing any
    /// data derived from them.
    pub fn with_transform(mut self, shift: Vec<f64>, rotation: Option<Matrix>) -> Result<Self, BenchmarkError> {
        let d = self.dimension();
        if shift.len() != d {
            return Err(BenchmarkError::DimensionMismatch { expected: d, got: shift.len() });
        }
        if shift.iter().any(|v| !v.is_finite()) {
            return Err(BenchmarkError::NonFinite);
        }
        if let Some(r) = &rotation {
            if r.rows() != d || r.cols() != d {
                return Err(BenchmarkError::DimensionMismatch { expected: d, got: r.rows() });
            }
            let defect = r.orthogonality_defect();
            if !(defect <= 1e-8) {
                return Err(BenchmarkError::NotOrthogonal(defect));
            }
        }
        match &mut self.kernel {
            Kernel::Composition(c) => {
                c.set_primary(shift.clone(), rotation);
            }
            _ => {
                if let Some(r) = rotation {
                    self.rotation = r;
                }
            }
        }
        self.shift = shift;
        self.refresh_kernel();
        Ok(self)
    }

    fn refresh_kernel(&mut self) {
        if let Kernel::Schwefel213 { a, b, target } = &mut self.kernel {
            *target = functions::schwefel_2_13_terms(a, b, &self.shift);
        }
    }

    /// A point where the noise-free value equals the optimum.
    pub fn optimizer(&self) -> Vec<f64> {
        match self.kernel {
            // canonical parameterisation: base minimum at 1, unrotated row
            Kernel::Rosenbrock => self.shift.iter().map(|s| s + 1.0).collect(),
            _ => self.shift.clone(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<(), BenchmarkError> {
        if x.len() != self.dimension() {
            return Err(BenchmarkError::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(BenchmarkError::NonFinite);
        }
        Ok(())
    }

    /// Base value without the optimum offset and without noise.
    fn base_value(&self, x: &[f64]) -> f64 {
        let transformed = || {
            let diff: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
            if self.rotation.is_identity() {
                diff
            } else {
                self.rotation.mul_vec(&diff)
            }
        };
        match &self.kernel {
            Kernel::Sphere => functions::sphere(&transformed()),
            Kernel::Schwefel12 => functions::schwefel_1_2(&transformed()),
            Kernel::Elliptic => functions::high_conditioned_elliptic(&transformed()),
            Kernel::Schwefel26 { a } => functions::schwefel_2_6(a, &transformed()),
            Kernel::Rosenbrock => functions::rosenbrock(&transformed()),
            Kernel::Griewank => functions::griewank(&transformed()),
            Kernel::Ackley => functions::ackley(&transformed()),
            Kernel::Rastrigin => functions::rastrigin(&transformed()),
            Kernel::Weierstrass => functions::weierstrass(&transformed()),
            Kernel::Schwefel213 { a, b, target } => {
                let terms = functions::schwefel_2_13_terms(a, b, x);
                target.iter().zip(&terms).map(|(p, q)| (p - q) * (p - q)).sum()
            }
            Kernel::GriewankRosenbrock => functions::griewank_rosenbrock(&transformed()),
            Kernel::ExpandedScaffer => functions::expanded_scaffer(&transformed()),
            Kernel::Composition(c) => c.eval(x),
        }
    }

    /// Objective value. Noisy rows draw one standard normal from `rng`;
    /// all other rows leave `rng` untouched.
    pub fn evaluate<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64, BenchmarkError> {
        self.check_point(x)?;
        let mut base = self.base_value(x);
        if self.is_noisy() {
            let n: f64 = rng.sample(StandardNormal);
            base *= 1.0 + NOISE_AMPLITUDE * n.abs();
        }
        Ok(base + self.optimum_value)
    }

    /// Objective value with the noise factor switched off.
    pub fn evaluate_clean(&self, x: &[f64]) -> Result<f64, BenchmarkError> {
        self.check_point(x)?;
        Ok(self.base_value(x) + self.optimum_value)
    }

    /// Fixed-budget error `best - f*`, floored at zero.
    pub fn error_of(&self, best_value: f64) -> Result<f64, BenchmarkError> {
        if !best_value.is_finite() {
            return Err(BenchmarkError::NonFinite);
        }
        if best_value < self.optimum_value - OPTIMUM_GUARD {
            return Err(BenchmarkError::BelowOptimum { value: best_value, optimum: self.optimum_value });
        }
        Ok((best_value - self.optimum_value).max(0.0))
    }

    pub fn to_document(&self) -> InstanceDocument {
        let meta = self.function().info();
        InstanceDocument {
            spec: self.spec.clone(),
            name: meta.name.to_string(),
            category: meta.category.to_string(),
            suite_class: meta.suite_class.to_string(),
            dimension: self.dimension(),
            shift: self.shift.clone(),
            rotation: self.rotation.as_slice().to_vec(),
            domain_low: self.domain_low.clone(),
            domain_high: self.domain_high.clone(),
            optimum_value: self.optimum_value,
            bounded_search: self.bounded_search,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("instance document serialises")
    }

    /// Rebuilds an instance from its JSON document: the `ProblemSpec` regenerates the
    /// kernel, then the stored shift and rotation are applied on top.
    pub fn from_json(text: &str) -> Result<Self, BenchmarkError> {
        let doc: InstanceDocument =
            serde_json::from_str(text).map_err(|e| BenchmarkError::Document(e.to_string()))?;
        let d = doc.spec.dimension;
        if doc.dimension != d {
            return Err(BenchmarkError::DimensionMismatch { expected: d, got: doc.dimension });
        }
        if d < 2 {
            return Err(BenchmarkError::InvalidDimension(d));
        }
        let rotation = Matrix::from_row_major(d, d, doc.rotation).ok_or_else(|| {
            BenchmarkError::Document(format!("rotation must hold {} entries", d * d))
        })?;
        let mut spec = doc.spec;
        // the document carries the transform itself
        spec.data_source = DataSource::Synthetic;
        let base = make_problem(&spec)?;
        let rotation = (!base.rotation.is_identity() || !rotation.is_identity()).then_some(rotation);
        let is_composition = matches!(base.kernel, Kernel::Composition(_));
        let rotation = if is_composition { None } else { rotation };
        base.with_transform(doc.shift, rotation)
    }
}

/// Serialised form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub spec: ProblemSpec,
    pub name: String,
    pub category: String,
    pub suite_class: String,
    pub dimension: usize,
    pub shift: Vec<f64>,
    /// Row-major `dimension x dimension`.
    pub rotation: Vec<f64>,
    pub domain_low: Vec<f64>,
    pub domain_high: Vec<f64>,
    pub optimum_value: f64,
    pub bounded_search: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn problem(id: FunctionId, d: usize, seed: u64) -> ProblemInstance {
        make_problem(&ProblemSpec::new(id, d, seed)).unwrap()
    }

    #[test]
    fn f1_metadata() {
        let p = problem(FunctionId::F1, 10, 1);
        assert_eq!(p.optimum_value(), 0.0);
        assert!(p.domain_low().iter().all(|&v| v == -100.0));
        assert!(p.domain_high().iter().all(|&v| v == 100.0));
        assert_eq!(p.dimension(), 10);
    }

    #[test]
    fn unshifted_rastrigin_is_optimal_at_origin() {
        let p = problem(FunctionId::F9, 5, 3).with_transform(vec![0.0; 5], None).unwrap();
        assert_eq!(p.evaluate_clean(&[0.0; 5]).unwrap(), p.optimum_value());
    }

    #[test]
    fn f3_rotation_orthogonal() {
        let p = problem(FunctionId::F3, 4, 7);
        let r = p.rotation();
        // explicit R^T R
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut dot = 0.0;
                for k in 0..4 {
                    dot += r.get(k, i) * r.get(k, j);
                }
                worst = worst.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        assert!(worst <= 1e-10);
        assert!(!r.is_identity());
    }

    #[test]
    fn shifted_optimum_for_every_clean_row() {
        for id in FunctionId::ALL {
            for d in [2, 3, 10] {
                let p = problem(id, d, 11);
                let x = p.optimizer();
                let v = p.evaluate_clean(&x).unwrap();
                assert!((v - p.optimum_value()).abs() <= 1e-8, "{id} d={d}: {v}");
            }
        }
    }

    #[test]
    fn rosenbrock_optimum_at_shift_plus_one() {
        let p = problem(FunctionId::F6, 6, 2);
        let x: Vec<f64> = p.shift().iter().map(|s| s + 1.0).collect();
        let z: Vec<f64> = x.iter().zip(p.shift()).map(|(a, b)| a - b).collect();
        let direct: f64 = (0..5)
            .map(|i| 100.0 * (z[i] * z[i] - z[i + 1]).powi(2) + (z[i] - 1.0).powi(2))
            .sum();
        assert_eq!(direct, 0.0);
        assert_eq!(p.evaluate_clean(&x).unwrap(), p.optimum_value());
    }

    #[test]
    fn ackley_range_by_sampling() {
        let p = problem(FunctionId::F8, 10, 5);
        let mut rng = rng_from_seed(1);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..10).map(|_| rng.random_range(-32.0..32.0)).collect();
            let gap = p.evaluate_clean(&x).unwrap() - p.optimum_value();
            assert!((0.0..=25.0).contains(&gap), "{gap}");
        }
    }

    #[test]
    fn shifts_inside_bounded_domains() {
        for id in FunctionId::ALL {
            let p = problem(id, 10, 4);
            if p.bounded_search() {
                for ((s, lo), hi) in p.shift().iter().zip(p.domain_low()).zip(p.domain_high()) {
                    assert!(lo <= s && s <= hi, "{id}");
                }
            }
        }
    }

    #[test]
    fn listed_optima() {
        let optima: Vec<f64> = FunctionId::ALL.iter().map(|f| f.info().optimum).collect();
        assert_eq!(optima[18], 100.0);
        assert_eq!(optima[20], 200.0);
        assert_eq!(optima[21], 300.0);
        assert_eq!(optima[22], 300.0);
        assert_eq!(optima[23], 200.0);
        assert_eq!(optima[24], 200.0);
        assert!(optima[..18].iter().all(|&v| v == 0.0));
        assert_eq!(optima[19], 0.0);
    }

    #[test]
    fn unbounded_rows() {
        assert!(!FunctionId::F7.info().bounded);
        assert!(!FunctionId::F25.info().bounded);
        assert_eq!(FunctionId::ALL.iter().filter(|f| !f.info().bounded).count(), 2);
    }

    #[test]
    fn error_of_cases() {
        let p = problem(FunctionId::F21, 10, 1);
        assert_eq!(p.error_of(200.0).unwrap(), 0.0);
        assert_eq!(p.error_of(210.5).unwrap(), 10.5);
        assert_eq!(p.error_of(200.0 - 1e-7).unwrap(), 0.0);
        assert!(matches!(p.error_of(199.0), Err(BenchmarkError::BelowOptimum { .. })));
        let q = problem(FunctionId::F1, 10, 1);
        assert_eq!(q.error_of(0.0).unwrap(), 0.0);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            make_problem(&ProblemSpec::new(FunctionId::F1, 1, 0)),
            Err(BenchmarkError::InvalidDimension(1))
        ));
        let p = problem(FunctionId::F1, 3, 0);
        assert!(matches!(p.evaluate_clean(&[0.0; 2]), Err(BenchmarkError::DimensionMismatch { .. })));
    }

    #[test]
    fn parse_function_ids() {
        assert_eq!("f10".parse::<FunctionId>().unwrap(), FunctionId::F10);
        assert_eq!("F25".parse::<FunctionId>().unwrap(), FunctionId::F25);
        for bad in ["f0", "f26", "x3", "f", "f01", ""] {
            assert!(bad.parse::<FunctionId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn taxonomy_keeps_both_labels_for_expanded_rows() {
        for id in [FunctionId::F13, FunctionId::F14] {
            assert_eq!(id.info().category, "Multimodal");
            assert_eq!(id.info().suite_class, "expanded multimodal");
        }
    }

    #[test]
    fn noise_is_multiplicative_and_seeded() {
        let p = problem(FunctionId::F4, 5, 2);
        let x: Vec<f64> = p.shift().iter().map(|s| s + 1.0).collect();
        let clean = p.evaluate_clean(&x).unwrap();
        let mut rng = rng_from_seed(8);
        for _ in 0..100 {
            let v = p.evaluate(&x, &mut rng).unwrap();
            assert!(v >= clean);
        }
        let a = p.evaluate(&x, &mut rng_from_seed(1)).unwrap();
        let b = p.evaluate(&x, &mut rng_from_seed(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip_preserves_values() {
        for id in [FunctionId::F3, FunctionId::F12, FunctionId::F16] {
            let p = problem(id, 4, 6);
            let q = ProblemInstance::from_json(&p.to_json()).unwrap();
            let x = vec![0.3, -0.2, 0.1, 0.05];
            assert_eq!(p.evaluate_clean(&x).unwrap(), q.evaluate_clean(&x).unwrap());
        }
    }

    #[test]
    fn external_files_override_transform() {
        let dir = tempfile::tempdir().unwrap();
        let shift_path = dir.path().join("shift.txt");
        let rot_path = dir.path().join("rot.txt");
        std::fs::write(&shift_path, "1 2 3 4 5 6\n").unwrap();
        std::fs::write(&rot_path, "0 1 0\n1 0 0\n0 0 1\n").unwrap();
        let spec = ProblemSpec {
            function: FunctionId::F10,
            dimension: 3,
            transform_seed: 0,
            data_source: DataSource::External { shift: shift_path.clone(), rotation: Some(rot_path) },
        };
        let p = make_problem(&spec).unwrap();
        assert_eq!(p.shift(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.evaluate_clean(&[1.0, 2.0, 3.0]).unwrap(), 0.0);

        let spec = ProblemSpec {
            function: FunctionId::F1,
            dimension: 8,
            transform_seed: 0,
            data_source: DataSource::External { shift: shift_path, rotation: None },
        };
        assert!(matches!(make_problem(&spec), Err(BenchmarkError::DimensionMismatch { .. })));
    }
}
