//! Random forest over categorical features with one-level-versus-rest
//! splits, and exact marginalisation over its leaf partitions.
//!
//! Each leaf is a box in the level grid: for every feature a set of allowed
//! levels (a bitmask). Under the uniform product measure the mass of a leaf
//! compatible with a partial assignment is the product, over the free
//! features, of the fraction of levels the leaf allows.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{decode, encode, grid, FactorTable};
use super::FanovaError;
use crate::rng::{derive_seed, rng_from_seed, Rng as StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all.
    pub feature_subsample: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 64, max_depth: None, min_leaf: 1, feature_subsample: Some(5), bootstrap: true, seed: 0 }
    }
}

impl ForestParams {
    /// Settings under which every tree reproduces a complete factorial table.
    pub fn interpolating() -> Self {
        ForestParams { n_trees: 4, max_depth: None, min_leaf: 1, feature_subsample: None, bootstrap: false, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum Node {
    /// Left child takes `feature == level`.
    Split { feature: usize, level: usize, left: usize, right: usize },
    Leaf(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Leaf {
    pub allowed: Vec<u64>,
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    pub leaves: Vec<Leaf>,
}

impl Tree {
    pub fn predict(&self, x: &[usize]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split { feature, level, left, right } => at = if x[feature] == level { left } else { right },
                Node::Leaf(l) => return self.leaves[l].value,
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateForest {
    pub trees: Vec<Tree>,
    pub level_counts: Vec<usize>,
    pub params: ForestParams,
    /// Out-of-bag coefficient of determination, when bootstrapping.
    pub oob_r2: Option<f64>,
}

struct Builder<'a> {
    table: &'a FactorTable,
    counts: Vec<usize>,
    params: ForestParams,
    nodes: Vec<Node>,
    leaves: Vec<Leaf>,
}

fn full_mask(k: usize) -> u64 {
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

impl Builder<'_> {
    fn leaf(&mut self, allowed: Vec<u64>, samples: &[usize]) -> usize {
        let value = samples.iter().map(|&i| self.table.targets[i]).sum::<f64>() / samples.len() as f64;
        self.leaves.push(Leaf { allowed, value, count: samples.len() });
        self.nodes.push(Node::Leaf(self.leaves.len() - 1));
        self.nodes.len() - 1
    }

    fn build(&mut self, samples: &[usize], allowed: Vec<u64>, depth: usize, rng: &mut StreamRng) -> usize {
        let y = &self.table.targets;
        let first = y[samples[0]];
        let pure = samples.iter().all(|&i| y[i] == first);
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < 2 * self.params.min_leaf {
            return self.leaf(allowed, samples);
        }

        let n_features = self.counts.len();
        let mut order: Vec<usize> = (0..n_features).collect();
        if self.params.feature_subsample.is_some() {
            order.shuffle(rng);
        }
        let budget = self.params.feature_subsample.unwrap_or(n_features).max(1);

        let n = samples.len() as f64;
        let total: f64 = samples.iter().map(|&i| y[i]).sum();
        let mut best: Option<(f64, usize, usize)> = None;
        let mut examined = 0;
        for &f in &order {
            if examined == budget {
                break;
            }
            let k = self.counts[f];
            let mut sums = vec![0.0; k];
            let mut cnt = vec![0usize; k];
            for &i in samples {
                let l = self.table.rows[i][f];
                sums[l] += y[i];
                cnt[l] += 1;
            }
            if cnt.iter().filter(|&&c| c > 0).count() < 2 {
                continue;
            }
            examined += 1;
            for l in 0..k {
                let (nl, nr) = (cnt[l], samples.len() - cnt[l]);
                if nl < self.params.min_leaf || nr < self.params.min_leaf || nl == 0 || nr == 0 {
                    continue;
                }
                let ml = sums[l] / nl as f64;
                let mr = (total - sums[l]) / nr as f64;
                let m = total / n;
                let gain = nl as f64 * (ml - m).powi(2) + nr as f64 * (mr - m).powi(2);
                if best.is_none_or(|(g, bf, bl)| gain > g || (gain == g && (f, l) < (bf, bl))) {
                    best = Some((gain, f, l));
                }
            }
        }

        let Some((_, feature, level)) = best else {
            return self.leaf(allowed, samples);
        };
        let (left_s, right_s): (Vec<usize>, Vec<usize>) =
            samples.iter().partition(|&&i| self.table.rows[i][feature] == level);
        let mut left_allowed = allowed.clone();
        left_allowed[feature] = 1u64 << level;
        let mut right_allowed = allowed;
        right_allowed[feature] &= !(1u64 << level);

        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(usize::MAX));
        let left = self.build(&left_s, left_allowed, depth + 1, rng);
        let right = self.build(&right_s, right_allowed, depth + 1, rng);
        self.nodes[at] = Node::Split { feature, level, left, right };
        at
    }
}

fn fit_tree(table: &FactorTable, params: ForestParams, samples: &[usize], rng: &mut StreamRng) -> Tree {
    let counts = table.level_counts();
    let allowed = counts.iter().map(|&k| full_mask(k)).collect();
    let mut b = Builder { table, counts, params, nodes: Vec::new(), leaves: Vec::new() };
    b.build(samples, allowed, 0, rng);
    Tree { nodes: b.nodes, leaves: b.leaves }
}

/// Fits the surrogate. Deterministic in `params.seed`, independent of the
/// number of worker threads.
pub fn fit_forest(table: &FactorTable, params: ForestParams) -> Result<SurrogateForest, FanovaError> {
    if table.is_empty() {
        return Err(FanovaError::EmptyDataset);
    }
    if params.n_trees == 0 || params.min_leaf == 0 {
        return Err(FanovaError::Params("n_trees and min_leaf must be positive".into()));
    }
    let n = table.rows.len();
    let fitted: Vec<(Tree, Vec<bool>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed([
                b"tree".as_slice(),
                &params.seed.to_le_bytes(),
                &(t as u64).to_le_bytes(),
            ]));
            let mut in_bag = vec![!params.bootstrap; n];
            let samples: Vec<usize> = if params.bootstrap {
                (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect()
            } else {
                (0..n).collect()
            };
            (fit_tree(table, params, &samples, &mut rng), in_bag)
        })
        .collect();

    let oob_r2 = params.bootstrap.then(|| {
        let mut pairs = Vec::new();
        for i in 0..n {
            let preds: Vec<f64> =
                fitted.iter().filter(|(_, bag)| !bag[i]).map(|(tree, _)| tree.predict(&table.rows[i])).collect();
            if !preds.is_empty() {
                pairs.push((table.targets[i], preds.iter().sum::<f64>() / preds.len() as f64));
            }
        }
        let mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len().max(1) as f64;
        let ss_tot: f64 = pairs.iter().map(|p| (p.0 - mean).powi(2)).sum();
        let ss_res: f64 = pairs.iter().map(|p| (p.0 - p.1).powi(2)).sum();
        if ss_tot > 0.0 {
            1.0 - ss_res / ss_tot
        } else {
            f64::NAN
        }
    });
    let oob_r2 = oob_r2.filter(|v| v.is_finite());

    Ok(SurrogateForest {
        trees: fitted.into_iter().map(|(t, _)| t).collect(),
        level_counts: table.level_counts(),
        params,
        oob_r2,
    })
}

impl SurrogateForest {
    pub fn predict(&self, x: &[usize]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    fn check_subset(&self, subset: &[usize]) -> Result<(), FanovaError> {
        if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&f| f >= self.level_counts.len()) {
            return Err(FanovaError::Subset(subset.to_vec()));
        }
        Ok(())
    }

    /// Expected forest prediction with the features in `subset` fixed to
    /// `assignment` and all other features uniform over their levels.
    pub fn marginal_prediction(&self, subset: &[usize], assignment: &[usize]) -> Result<f64, FanovaError> {
        self.check_subset(subset)?;
        if assignment.len() != subset.len() {
            return Err(FanovaError::Subset(subset.to_vec()));
        }
        for (&f, &l) in subset.iter().zip(assignment) {
            if l >= self.level_counts[f] {
                return Err(FanovaError::Level { feature: f, level: l });
            }
        }
        let mut total = 0.0;
        for tree in &self.trees {
            for leaf in &tree.leaves {
                if subset.iter().zip(assignment).all(|(&f, &l)| leaf.allowed[f] >> l & 1 == 1) {
                    total += leaf.value * self.free_mass(leaf, subset);
                }
            }
        }
        Ok(total / self.trees.len() as f64)
    }

    fn free_mass(&self, leaf: &Leaf, subset: &[usize]) -> f64 {
        let mut mass = 1.0;
        for (f, &k) in self.level_counts.iter().enumerate() {
            if !subset.contains(&f) {
                mass *= leaf.allowed[f].count_ones() as f64 / k as f64;
            }
        }
        mass
    }

    /// Marginal predictions for every assignment of `subset`, indexed in
    /// mixed-radix order (first feature of the subset most significant).
    pub fn marginal_table(&self, subset: &[usize]) -> Result<Vec<f64>, FanovaError> {
        self.check_subset(subset)?;
        let radices: Vec<usize> = subset.iter().map(|&f| self.level_counts[f]).collect();
        let mut out = vec![0.0; radices.iter().product()];
        for tree in &self.trees {
            for leaf in &tree.leaves {
                let w = leaf.value * self.free_mass(leaf, subset);
                let choices: Vec<Vec<usize>> = subset
                    .iter()
                    .map(|&f| (0..self.level_counts[f]).filter(|&l| leaf.allowed[f] >> l & 1 == 1).collect())
                    .collect();
                let sizes: Vec<usize> = choices.iter().map(Vec::len).collect();
                let combos: usize = sizes.iter().product();
                for code in 0..combos {
                    let pick = decode(code, &sizes);
                    let levels: Vec<usize> = pick.iter().zip(&choices).map(|(&p, c)| c[p]).collect();
                    out[encode(&levels, &radices)] += w;
                }
            }
        }
        let t = self.trees.len() as f64;
        out.iter_mut().for_each(|v| *v /= t);
        Ok(out)
    }

    /// Mean and variance of the prediction over the whole uniform grid.
    pub fn grid_moments(&self) -> Result<(f64, f64), FanovaError> {
        let cells: usize = self.level_counts.iter().product();
        if cells > 1 << 24 {
            return Err(FanovaError::Params(format!("level grid of {cells} cells is too large")));
        }
        let preds: Vec<f64> = grid(&self.level_counts).par_iter().map(|x| self.predict(x)).collect();
        let mean = preds.iter().sum::<f64>() / preds.len() as f64;
        let var = preds.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / preds.len() as f64;
        Ok((mean, var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_predicts_constant() {
        let t = FactorTable::full_factorial(&[3, 2], |_| 4.25).unwrap();
        let f = fit_forest(&t, ForestParams::default()).unwrap();
        for x in grid(&[3, 2]) {
            assert_eq!(f.predict(&x), 4.25);
        }
        assert_eq!(f.marginal_prediction(&[], &[]).unwrap(), 4.25);
    }

    #[test]
    fn interpolates_complete_grid() {
        let g = |x: &[usize]| (x[0] * 3 + x[1]) as f64 * 0.7 - (x[0] == x[1]) as usize as f64;
        let t = FactorTable::full_factorial(&[3, 4], g).unwrap();
        let f = fit_forest(&t, ForestParams::interpolating()).unwrap();
        for x in grid(&[3, 4]) {
            assert_eq!(f.predict(&x), g(&x));
        }
    }

    #[test]
    fn xor_is_still_split() {
        let t = FactorTable::full_factorial(&[2, 2], |x| (x[0] ^ x[1]) as f64).unwrap();
        let f = fit_forest(&t, ForestParams::interpolating()).unwrap();
        for x in grid(&[2, 2]) {
            assert_eq!(f.predict(&x), (x[0] ^ x[1]) as f64);
        }
    }

    #[test]
    fn marginal_of_first_feature() {
        let t = FactorTable::full_factorial(&[2, 2], |x| x[0] as f64).unwrap();
        let f = fit_forest(&t, ForestParams::interpolating()).unwrap();
        assert_eq!(f.marginal_prediction(&[0], &[0]).unwrap(), 0.0);
        assert_eq!(f.marginal_prediction(&[0], &[1]).unwrap(), 1.0);
        assert_eq!(f.marginal_prediction(&[1], &[0]).unwrap(), 0.5);
        assert_eq!(f.marginal_prediction(&[1], &[1]).unwrap(), 0.5);
        assert_eq!(f.marginal_table(&[1]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn single_leaf_marginal() {
        let t = FactorTable::with_counts(&[3, 3], vec![vec![0, 0]], vec![2.5]).unwrap();
        let f = fit_forest(&t, ForestParams { n_trees: 1, ..ForestParams::interpolating() }).unwrap();
        assert_eq!(f.trees[0].leaves.len(), 1);
        assert_eq!(f.marginal_prediction(&[0, 1], &[2, 1]).unwrap(), 2.5);
    }

    #[test]
    fn level_out_of_domain() {
        let t = FactorTable::full_factorial(&[2, 2], |x| x[0] as f64).unwrap();
        let f = fit_forest(&t, ForestParams::interpolating()).unwrap();
        assert!(matches!(f.marginal_prediction(&[0], &[2]), Err(FanovaError::Level { .. })));
    }

    #[test]
    fn deterministic_in_seed_and_reports_oob() {
        let t = FactorTable::full_factorial(&[3, 3, 2], |x| (x[0] + 2 * x[1] + x[2]) as f64).unwrap();
        let p = ForestParams { n_trees: 16, seed: 11, ..ForestParams::default() };
        let a = fit_forest(&t, p).unwrap();
        let b = fit_forest(&t, p).unwrap();
        for x in grid(&[3, 3, 2]) {
            assert_eq!(a.predict(&x), b.predict(&x));
        }
        assert!(a.oob_r2.is_some());
    }

    #[test]
    fn empty_dataset_rejected() {
        let t = FactorTable::with_counts(&[2], vec![], vec![]).unwrap();
        assert!(matches!(fit_forest(&t, ForestParams::default()), Err(FanovaError::EmptyDataset)));
    }
}
