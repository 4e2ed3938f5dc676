//! Functional ANOVA over the categorical module space.
//!
//! A performance function `g(m)` over a finite product of level sets is split
//! into pure effects `g_U` (one per feature subset) whose variances add up to
//! the total variance under the uniform product measure. Importance of a
//! subset is its share of that total. [`SurrogateForest`] supplies `g` from
//! data; [`ExactTable`] supplies it from a complete factorial table and serves
//! as the oracle.

mod forest;
mod io;
mod table;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use forest::{fit_forest, ForestParams, Leaf, SurrogateForest, Tree};
pub use io::MarginalTable;
pub use table::{decode, encode, grid, FactorTable};

use crate::runner::PerformanceDataset;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FanovaError {
    #[error("malformed table: {0}")]
    Shape(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("invalid feature subset {0:?}")]
    Subset(Vec<usize>),
    #[error("level {level} is outside the domain of feature {feature}")]
    Level { feature: usize, level: usize },
    #[error("table is not a complete factorial grid: {0}")]
    IncompleteGrid(String),
    #[error("degenerate dataset: total variance {0} is zero")]
    Degenerate(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Anything that can report exact uniform-measure marginals of a function on
/// a categorical grid.
pub trait MarginalSource: Sync {
    fn level_counts(&self) -> Vec<usize>;
    /// Expected value with `subset` fixed, for every assignment of the
    /// subset in mixed-radix order.
    fn marginal_table(&self, subset: &[usize]) -> Result<Vec<f64>, FanovaError>;
    /// Variance of the function over the whole grid.
    fn total_variance(&self) -> Result<f64, FanovaError>;
}

impl MarginalSource for SurrogateForest {
    fn level_counts(&self) -> Vec<usize> {
        self.level_counts.clone()
    }

    fn marginal_table(&self, subset: &[usize]) -> Result<Vec<f64>, FanovaError> {
        SurrogateForest::marginal_table(self, subset)
    }

    fn total_variance(&self) -> Result<f64, FanovaError> {
        Ok(self.grid_moments()?.1)
    }
}

/// Function values of a complete factorial table, indexed by grid code.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTable {
    level_counts: Vec<usize>,
    values: Vec<f64>,
}

impl ExactTable {
    pub fn new(table: &FactorTable) -> Result<Self, FanovaError> {
        let counts = table.level_counts();
        let cells: usize = counts.iter().product();
        if table.rows.len() != cells {
            return Err(FanovaError::IncompleteGrid(format!("{} rows for {cells} cells", table.rows.len())));
        }
        let mut values = vec![f64::NAN; cells];
        let mut seen = vec![false; cells];
        for (row, &y) in table.rows.iter().zip(&table.targets) {
            let code = encode(row, &counts);
            if std::mem::replace(&mut seen[code], true) {
                return Err(FanovaError::IncompleteGrid(format!("cell {row:?} appears twice")));
            }
            values[code] = y;
        }
        Ok(ExactTable { level_counts: counts, values })
    }

    pub fn value(&self, levels: &[usize]) -> f64 {
        self.values[encode(levels, &self.level_counts)]
    }
}

impl MarginalSource for ExactTable {
    fn level_counts(&self) -> Vec<usize> {
        self.level_counts.clone()
    }

    fn marginal_table(&self, subset: &[usize]) -> Result<Vec<f64>, FanovaError> {
        check_subset(subset, self.level_counts.len())?;
        let radices: Vec<usize> = subset.iter().map(|&f| self.level_counts[f]).collect();
        let size: usize = radices.iter().product();
        let mut out = vec![0.0; size];
        for (code, &v) in self.values.iter().enumerate() {
            let x = decode(code, &self.level_counts);
            let key: Vec<usize> = subset.iter().map(|&f| x[f]).collect();
            out[encode(&key, &radices)] += v;
        }
        let per_cell = (self.values.len() / size) as f64;
        out.iter_mut().for_each(|v| *v /= per_cell);
        Ok(out)
    }

    fn total_variance(&self) -> Result<f64, FanovaError> {
        Ok(variance(&self.values))
    }
}

fn check_subset(subset: &[usize], n: usize) -> Result<(), FanovaError> {
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&f| f >= n) {
        return Err(FanovaError::Subset(subset.to_vec()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// All subsets of `0..n` with `1..=max_order` elements: by size, then
/// lexicographically. For 8 features and order 3 this is 8 + 28 + 56 = 92.
pub fn canonical_subsets(n: usize, max_order: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            extend(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 1..=max_order.min(n) {
        extend(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Pure effect tables `g_U` for every canonical subset up to `max_order`,
/// plus the grand mean.
pub struct PureEffects {
    pub mean: f64,
    pub subsets: Vec<Vec<usize>>,
    pub tables: Vec<Vec<f64>>,
}

pub fn pure_effects<S: MarginalSource + ?Sized>(source: &S, max_order: usize) -> Result<PureEffects, FanovaError> {
    let counts = source.level_counts();
    if max_order == 0 || max_order > counts.len() {
        return Err(FanovaError::Params(format!("max_order must lie in 1..={}", counts.len())));
    }
    let mean = source.marginal_table(&[])?[0];
    let subsets = canonical_subsets(counts.len(), max_order);
    let marginals: Vec<Vec<f64>> =
        subsets.par_iter().map(|u| source.marginal_table(u)).collect::<Result<_, _>>()?;

    // Smaller subsets come first, so every proper subset is already resolved.
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(subsets.len());
    for (i, (u, marginal)) in subsets.iter().zip(marginals).enumerate() {
        let radices: Vec<usize> = u.iter().map(|&f| counts[f]).collect();
        let mut pure = marginal;
        for code in 0..pure.len() {
            let levels = decode(code, &radices);
            let mut sub = mean;
            for mask in 1..(1usize << u.len()) - 1 {
                let pos: Vec<usize> = (0..u.len()).filter(|b| mask >> b & 1 == 1).collect();
                let w: Vec<usize> = pos.iter().map(|&p| u[p]).collect();
                let w_levels: Vec<usize> = pos.iter().map(|&p| levels[p]).collect();
                let w_radices: Vec<usize> = pos.iter().map(|&p| radices[p]).collect();
                sub += tables[index[&w]][encode(&w_levels, &w_radices)];
            }
            pure[code] -= sub;
        }
        index.insert(u.clone(), i);
        tables.push(pure);
    }
    Ok(PureEffects { mean, subsets, tables })
}

/// Variance of the pure effect of `subset`; zero for the empty set.
pub fn subset_variance<S: MarginalSource + ?Sized>(source: &S, subset: &[usize]) -> Result<f64, FanovaError> {
    if subset.is_empty() {
        return Ok(0.0);
    }
    check_subset(subset, source.level_counts().len())?;
    let effects = pure_effects(source, subset.len())?;
    let at = effects.subsets.iter().position(|s| s == subset).ok_or_else(|| FanovaError::Subset(subset.to_vec()))?;
    Ok(mean_square(&effects.tables[at]))
}

fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTerm {
    pub subset: Vec<usize>,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectVector {
    pub features: Vec<String>,
    pub terms: Vec<EffectTerm>,
    /// `1 - sum of importances`: higher-order mass plus numerical slack.
    pub residual: f64,
    pub total_variance: f64,
    /// Set when the decomposed function had no variance. Importances are
    /// then placeholders (all zero, residual one) and carry no information.
    pub degenerate: bool,
    pub metadata: BTreeMap<String, String>,
}

impl EffectVector {
    pub fn degenerate(features: Vec<String>, max_order: usize) -> Self {
        let terms = canonical_subsets(features.len(), max_order)
            .into_iter()
            .map(|subset| EffectTerm { subset, importance: 0.0 })
            .collect();
        EffectVector { features, terms, residual: 1.0, total_variance: 0.0, degenerate: true, metadata: BTreeMap::new() }
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.subset.len()).max().unwrap_or(0)
    }

    pub fn importances(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.importance).collect()
    }

    pub fn label(&self, subset: &[usize]) -> String {
        subset.iter().map(|&f| self.features[f].as_str()).collect::<Vec<_>>().join("+")
    }

    pub fn importance_of(&self, subset: &[usize]) -> Option<f64> {
        self.terms.iter().find(|t| t.subset == subset).map(|t| t.importance)
    }

    /// Main-effect importance by feature name.
    pub fn main_effect(&self, feature: &str) -> Option<f64> {
        let f = self.features.iter().position(|n| n == feature)?;
        self.importance_of(&[f])
    }
}

/// Relative total variance below which a function counts as constant.
const DEGENERATE_TOLERANCE: f64 = 1e-24;

/// Decomposes any marginal source into an effect vector.
pub fn decompose_source<S: MarginalSource + ?Sized>(
    source: &S,
    features: Vec<String>,
    max_order: usize,
) -> Result<EffectVector, FanovaError> {
    let total = source.total_variance()?;
    let effects = pure_effects(source, max_order)?;
    if total <= DEGENERATE_TOLERANCE * effects.mean.abs().max(1.0).powi(2) {
        return Err(FanovaError::Degenerate(total));
    }
    let terms: Vec<EffectTerm> = effects
        .subsets
        .into_iter()
        .zip(&effects.tables)
        .map(|(subset, t)| EffectTerm { subset, importance: mean_square(t) / total })
        .collect();
    let sum: f64 = terms.iter().map(|t| t.importance).sum();
    let mut metadata = BTreeMap::new();
    metadata.insert("measure".into(), "uniform product over all module levels".into());
    Ok(EffectVector { features, terms, residual: 1.0 - sum, total_variance: total, degenerate: false, metadata })
}

/// Effect vector of a complete factorial table, computed without a surrogate.
pub fn exact_decompose(table: &FactorTable, max_order: usize) -> Result<EffectVector, FanovaError> {
    decompose_source(&ExactTable::new(table)?, table.names.clone(), max_order)
}

/// Fits a forest to `table` and decomposes its predictions.
pub fn decompose_table(
    table: &FactorTable,
    params: ForestParams,
    max_order: usize,
) -> Result<(SurrogateForest, EffectVector), FanovaError> {
    let forest = fit_forest(table, params)?;
    let mut ev = decompose_source(&forest, table.names.clone(), max_order)?;
    ev.metadata.insert("forest".into(), params_label(&params));
    if let Some(r2) = forest.oob_r2 {
        ev.metadata.insert("oob_r2".into(), r2.to_string());
    }
    Ok((forest, ev))
}

/// Module-level decomposition of one performance dataset.
pub fn decompose(
    dataset: &PerformanceDataset,
    params: ForestParams,
    max_order: usize,
) -> Result<(SurrogateForest, EffectVector), FanovaError> {
    let (forest, mut ev) = decompose_table(&FactorTable::from_dataset(dataset), params, max_order)?;
    ev.metadata.insert("dataset".into(), dataset.id());
    ev.metadata.insert(
        "unobserved_cells".into(),
        "dnpp=add with mtx other than none never occurs and inherits neighbouring predictions".into(),
    );
    Ok((forest, ev))
}

pub fn params_label(p: &ForestParams) -> String {
    let opt = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
    format!(
        "n_trees:{} max_depth:{} min_leaf:{} feature_subsample:{} bootstrap:{} seed:{}",
        p.n_trees,
        opt(p.max_depth),
        p.min_leaf,
        opt(p.feature_subsample),
        p.bootstrap,
        p.seed
    )
}

/// Predicted performance for every level (one feature) or level pair (two).
pub fn marginal_performance<S: MarginalSource + ?Sized>(
    source: &S,
    table: &FactorTable,
    subset: &[usize],
) -> Result<MarginalTable, FanovaError> {
    if subset.is_empty() || subset.len() > 2 {
        return Err(FanovaError::Subset(subset.to_vec()));
    }
    let values = source.marginal_table(subset)?;
    Ok(MarginalTable {
        features: subset.iter().map(|&f| table.names[f].clone()).collect(),
        levels: subset.iter().map(|&f| table.levels[f].clone()).collect(),
        values,
    })
}

/// Importances sorted descending (ties in canonical order) and summed:
/// entry `k - 1` is the share explained by the top `k` terms.
pub fn cumulative_curve(ev: &EffectVector) -> Vec<(usize, f64)> {
    let mut sorted = ev.importances();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            acc += v;
            (i + 1, acc)
        })
        .collect()
}

/// Terms ordered by decreasing importance, ties kept in canonical order.
pub fn ranked_terms(ev: &EffectVector) -> Vec<&EffectTerm> {
    let mut terms: Vec<&EffectTerm> = ev.terms.iter().collect();
    terms.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    /// Independent oracle: closed indices `Var(E[g | m_W])` by brute force,
    /// then pure variances by inclusion and exclusion.
    fn oracle_variance(counts: &[usize], g: &dyn Fn(&[usize]) -> f64, u: &[usize]) -> f64 {
        let cells = grid(counts);
        let closed = |w: &[usize]| -> f64 {
            let mut groups: BTreeMap<Vec<usize>, (f64, usize)> = BTreeMap::new();
            for x in &cells {
                let key: Vec<usize> = w.iter().map(|&f| x[f]).collect();
                let e = groups.entry(key).or_default();
                e.0 += g(x);
                e.1 += 1;
            }
            let means: Vec<f64> = groups.values().map(|(s, c)| s / *c as f64).collect();
            variance(&means)
        };
        let mut v = 0.0;
        for mask in 0..(1usize << u.len()) {
            let w: Vec<usize> = (0..u.len()).filter(|b| mask >> b & 1 == 1).map(|b| u[b]).collect();
            let sign = if (u.len() - w.len()) % 2 == 0 { 1.0 } else { -1.0 };
            v += sign * closed(&w);
        }
        v
    }

    #[test]
    fn ninety_two_subsets_in_order() {
        let s = canonical_subsets(8, 3);
        assert_eq!(s.len(), 92);
        assert_eq!(s[0], vec![0]);
        assert_eq!(s[8], vec![0, 1]);
        assert_eq!(s[35], vec![6, 7]);
        assert_eq!(s[36], vec![0, 1, 2]);
        assert_eq!(s[91], vec![5, 6, 7]);
    }

    #[test]
    fn xor_is_pure_interaction() {
        let t = FactorTable::full_factorial(&[2, 2], |x| (x[0] ^ x[1]) as f64).unwrap();
        let ev = exact_decompose(&t, 2).unwrap();
        assert_eq!(ev.importance_of(&[0]), Some(0.0));
        assert_eq!(ev.importance_of(&[1]), Some(0.0));
        assert!((ev.importance_of(&[0, 1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_of_signs() {
        let s = |l: usize| if l == 0 { -1.0 } else { 1.0 };
        let t = FactorTable::full_factorial(&[2, 2], |x| s(x[0]) * s(x[1])).unwrap();
        let exact = ExactTable::new(&t).unwrap();
        assert_eq!(subset_variance(&exact, &[0]).unwrap(), 0.0);
        assert_eq!(subset_variance(&exact, &[1]).unwrap(), 0.0);
        assert_eq!(subset_variance(&exact, &[0, 1]).unwrap(), 1.0);
        assert_eq!(subset_variance(&exact, &[]).unwrap(), 0.0);
    }

    #[test]
    fn additive_has_no_interaction() {
        let t = FactorTable::full_factorial(&[2, 2], |x| (x[0] + x[1]) as f64).unwrap();
        let ev = exact_decompose(&t, 2).unwrap();
        assert!((ev.importance_of(&[0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((ev.importance_of(&[1]).unwrap() - 0.5).abs() < 1e-12);
        assert!(ev.importance_of(&[0, 1]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_driver_takes_everything() {
        let t = FactorTable::full_factorial(&[3, 2, 4], |x| (x[0] * x[0]) as f64).unwrap();
        let ev = exact_decompose(&t, 3).unwrap();
        for term in &ev.terms {
            let want = if term.subset == [0] { 1.0 } else { 0.0 };
            assert!((term.importance - want).abs() < 1e-12, "{:?}", term);
        }
    }

    #[test]
    fn constant_is_degenerate() {
        let t = FactorTable::full_factorial(&[2, 3], |_| -9.0).unwrap();
        assert!(matches!(exact_decompose(&t, 2), Err(FanovaError::Degenerate(_))));
        let forest = fit_forest(&t, ForestParams::default()).unwrap();
        assert!(matches!(decompose_source(&forest, names(2), 2), Err(FanovaError::Degenerate(_))));
    }

    #[test]
    fn incomplete_grid_rejected() {
        let t = FactorTable::with_counts(&[2, 2], vec![vec![0, 0], vec![1, 1]], vec![0.0, 1.0]).unwrap();
        assert!(matches!(exact_decompose(&t, 2), Err(FanovaError::IncompleteGrid(_))));
        let dup = FactorTable::with_counts(&[1, 2], vec![vec![0, 0], vec![0, 0]], vec![0.0, 1.0]).unwrap();
        assert!(matches!(exact_decompose(&dup, 2), Err(FanovaError::IncompleteGrid(_))));
    }

    #[test]
    fn matches_inclusion_exclusion_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = rng.random_range(1..=4);
            let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=4)).collect();
            let cells: usize = counts.iter().product();
            let values: Vec<f64> = (0..cells).map(|_| rng.random_range(-5.0..5.0)).collect();
            let g = |x: &[usize]| values[encode(x, &counts)];
            let t = FactorTable::full_factorial(&counts, g).unwrap();
            let Ok(ev) = exact_decompose(&t, n) else { continue };
            for term in &ev.terms {
                let want = oracle_variance(&counts, &g, &term.subset) / ev.total_variance;
                assert!((term.importance - want).abs() < 1e-9, "{counts:?} {:?}", term.subset);
            }
            assert!(ev.residual.abs() < 1e-9);
        }
    }

    #[test]
    fn interpolating_forest_agrees_with_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let counts: Vec<usize> = (0..3).map(|_| rng.random_range(2..=4)).collect();
            let t = FactorTable::full_factorial(&counts, |_| rng.random_range(0.0..1.0)).unwrap();
            let exact = exact_decompose(&t, 3).unwrap();
            let (_, fitted) = decompose_table(&t, ForestParams::interpolating(), 3).unwrap();
            for (a, b) in exact.terms.iter().zip(&fitted.terms) {
                assert!((a.importance - b.importance).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn curve_is_sorted_cumsum() {
        let t = FactorTable::full_factorial(&[2, 3, 2], |x| (x[0] * 3 + x[1] * x[2]) as f64).unwrap();
        let ev = exact_decompose(&t, 2).unwrap();
        let c = cumulative_curve(&ev);
        assert_eq!(c.len(), ev.terms.len());
        assert!(c.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!((c.last().unwrap().1 - (1.0 - ev.residual)).abs() < 1e-12);
    }

    #[test]
    fn single_term_curve_steps_once() {
        let mut ev = EffectVector::degenerate(names(3), 1);
        ev.terms[2].importance = 0.4;
        ev.residual = 0.6;
        let c = cumulative_curve(&ev);
        assert_eq!(c, vec![(1, 0.4), (2, 0.4), (3, 0.4)]);
    }

    #[test]
    fn marginal_performance_shapes() {
        let t = FactorTable::full_factorial(&[5, 5, 2], |x| (x[0] + x[1]) as f64).unwrap();
        let exact = ExactTable::new(&t).unwrap();
        let single = marginal_performance(&exact, &t, &[0]).unwrap();
        assert_eq!(single.values.len(), 5);
        let pair = marginal_performance(&exact, &t, &[0, 1]).unwrap();
        assert_eq!(pair.values.len(), 25);
        assert_eq!(pair.values[encode(&[2, 3], &[5, 5])], 5.0);
        assert!(marginal_performance(&exact, &t, &[0, 1, 2]).is_err());
    }
}
