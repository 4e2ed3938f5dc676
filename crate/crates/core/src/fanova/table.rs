//! Categorical design tables: the common input of the surrogate forest and
//! the exact decomposition.

use super::FanovaError;
use crate::runner::PerformanceDataset;
use crate::swarm::Module;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable {
    pub names: Vec<String>,
    /// Level labels per feature. The uniform measure ranges over all of
    /// them, observed or not.
    pub levels: Vec<Vec<String>>,
    pub rows: Vec<Vec<usize>>,
    pub targets: Vec<f64>,
}

impl FactorTable {
    pub fn new(
        names: Vec<String>,
        levels: Vec<Vec<String>>,
        rows: Vec<Vec<usize>>,
        targets: Vec<f64>,
    ) -> Result<Self, FanovaError> {
        if names.len() != levels.len() {
            return Err(FanovaError::Shape("names and level sets differ in length".into()));
        }
        if rows.len() != targets.len() {
            return Err(FanovaError::Shape("rows and targets differ in length".into()));
        }
        if levels.iter().any(|l| l.is_empty() || l.len() > 64) {
            return Err(FanovaError::Shape("every feature needs 1..=64 levels".into()));
        }
        for row in &rows {
            if row.len() != names.len() || row.iter().zip(&levels).any(|(v, l)| *v >= l.len()) {
                return Err(FanovaError::Shape(format!("row {row:?} does not fit the level sets")));
            }
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(FanovaError::Shape("non-finite target".into()));
        }
        Ok(FactorTable { names, levels, rows, targets })
    }

    /// Table with numeric level labels `0..k`.
    pub fn with_counts(level_counts: &[usize], rows: Vec<Vec<usize>>, targets: Vec<f64>) -> Result<Self, FanovaError> {
        let names = (0..level_counts.len()).map(|i| format!("x{i}")).collect();
        let levels = level_counts.iter().map(|&k| (0..k).map(|l| l.to_string()).collect()).collect();
        Self::new(names, levels, rows, targets)
    }

    /// Module settings as features over the full option sets.
    pub fn from_dataset(dataset: &PerformanceDataset) -> Self {
        let names = Module::ALL.iter().map(|m| m.key().to_string()).collect();
        let levels = Module::ALL
            .iter()
            .map(|m| m.levels().iter().map(|s| s.to_string()).collect())
            .collect();
        let rows = dataset.rows.iter().map(|r| r.config.levels().to_vec()).collect();
        FactorTable { names, levels, rows, targets: dataset.targets() }
    }

    /// Module settings restricted to the levels that occur in the dataset,
    /// in module order. A factorial design over a subspace then forms a
    /// complete grid suitable for exact decomposition.
    pub fn from_dataset_observed(dataset: &PerformanceDataset) -> Self {
        let full = Self::from_dataset(dataset);
        let used: Vec<Vec<usize>> = (0..full.n_features())
            .map(|f| {
                let mut seen: Vec<usize> = full.rows.iter().map(|r| r[f]).collect();
                seen.sort_unstable();
                seen.dedup();
                seen
            })
            .collect();
        let levels = used
            .iter()
            .zip(&full.levels)
            .map(|(u, names)| u.iter().map(|&l| names[l].clone()).collect())
            .collect();
        let rows = full
            .rows
            .iter()
            .map(|r| r.iter().zip(&used).map(|(l, u)| u.binary_search(l).expect("observed level")).collect())
            .collect();
        FactorTable { names: full.names, levels, rows, targets: full.targets }
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn level_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn map_targets(&self, f: impl Fn(f64) -> f64) -> Self {
        FactorTable { targets: self.targets.iter().map(|&t| f(t)).collect(), ..self.clone() }
    }

    /// Complete factorial table of `g` over the given level counts, rows in
    /// mixed-radix order (last feature fastest).
    pub fn full_factorial(level_counts: &[usize], mut g: impl FnMut(&[usize]) -> f64) -> Result<Self, FanovaError> {
        let rows = grid(level_counts);
        let targets = rows.iter().map(|r| g(r)).collect();
        Self::with_counts(level_counts, rows, targets)
    }
}

/// Every level vector of the grid, last feature fastest.
pub fn grid(level_counts: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = level_counts.iter().product();
    (0..total).map(|code| decode(code, level_counts)).collect()
}

/// Mixed-radix decode with the first feature most significant.
pub fn decode(mut code: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for k in (0..radices.len()).rev() {
        out[k] = code % radices[k];
        code /= radices[k];
    }
    out
}

pub fn encode(levels: &[usize], radices: &[usize]) -> usize {
    levels.iter().zip(radices).fold(0, |acc, (l, r)| acc * r + l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_inverse() {
        let radices = [3, 2, 5];
        for code in 0..30 {
            assert_eq!(encode(&decode(code, &radices), &radices), code);
        }
    }

    #[test]
    fn rejects_out_of_range_rows() {
        assert!(FactorTable::with_counts(&[2, 2], vec![vec![0, 2]], vec![1.0]).is_err());
        assert!(FactorTable::with_counts(&[2], vec![vec![0]], vec![f64::NAN]).is_err());
    }
}
