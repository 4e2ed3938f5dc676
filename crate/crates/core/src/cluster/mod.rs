//! Agglomerative clustering of effect vectors with a silhouette-driven
//! search over cluster count, distance metric and linkage.
//!
//! Cluster ids follow the usual convention: leaves are `0..n`, and the
//! cluster created by merge `s` gets id `n + s`.

mod dendrogram;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dendrogram::{Dendrogram, Merge, LEAF_HEADER, MERGE_HEADER};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("need at least 2 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("vector {index} has length {len}, expected {expected}")]
    LengthMismatch { index: usize, len: usize, expected: usize },
    #[error("vector {0} is zero or non-finite, so its cosine distance is undefined")]
    ZeroVector(usize),
    #[error("ward linkage requires euclidean distances")]
    WardRequiresEuclidean,
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("silhouette needs at least 2 clusters")]
    SingleCluster,
    #[error("labels cover {labels} points but distances cover {points}")]
    LabelMismatch { labels: usize, points: usize },
    #[error("empty search grid")]
    EmptyGrid,
    #[error("unknown {kind} `{value}`")]
    UnknownName { kind: &'static str, value: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
    Ward,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Euclidean, Metric::Cosine];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        }
    }
}

macro_rules! named {
    ($t:ty, $kind:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = ClusterError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$t>::ALL
                    .into_iter()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| ClusterError::UnknownName { kind: $kind, value: s.to_string() })
            }
        }
    };
}
named!(Metric, "metric");
named!(Linkage, "linkage");

/// Symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    metric: Metric,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps precomputed distances. The matrix is symmetrised from its upper
    /// triangle and the diagonal is zeroed.
    pub fn from_square(metric: Metric, rows: &[Vec<f64>]) -> Result<Self, ClusterError> {
        let n = rows.len();
        if n < 2 {
            return Err(ClusterError::TooFewVectors(n));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            if rows[i].len() != n {
                return Err(ClusterError::LengthMismatch { index: i, len: rows[i].len(), expected: n });
            }
            for j in i + 1..n {
                data[i * n + j] = rows[i][j];
                data[j * n + i] = rows[i][j];
            }
        }
        Ok(DistanceMatrix { n, metric, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

fn check_vectors(vectors: &[Vec<f64>]) -> Result<usize, ClusterError> {
    if vectors.len() < 2 {
        return Err(ClusterError::TooFewVectors(vectors.len()));
    }
    let dim = vectors[0].len();
    for (index, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(ClusterError::LengthMismatch { index, len: v.len(), expected: dim });
        }
    }
    Ok(dim)
}

pub fn distance_matrix(vectors: &[Vec<f64>], metric: Metric) -> Result<DistanceMatrix, ClusterError> {
    check_vectors(vectors)?;
    let n = vectors.len();
    let norms: Vec<f64> = vectors.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    if metric == Metric::Cosine {
        if let Some(i) = norms.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(ClusterError::ZeroVector(i));
        }
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (u, v) = (&vectors[i], &vectors[j]);
            let d = match metric {
                Metric::Euclidean => u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(),
                Metric::Cosine => {
                    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                    (1.0 - dot / (norms[i] * norms[j])).clamp(0.0, 2.0)
                }
            };
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, metric, data })
}

/// Agglomerative clustering with Lance-Williams updates. Among equally close
/// pairs the one with the smallest `(min id, max id)` merges first.
pub fn agglomerate(d: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram, ClusterError> {
    if linkage == Linkage::Ward && d.metric != Metric::Euclidean {
        return Err(ClusterError::WardRequiresEuclidean);
    }
    let n = d.n;
    // Slot i holds the cluster that absorbed leaf i, if still active.
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut active = vec![true; n];
    let mut dist = d.data.clone();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                let h = dist[i * n + j];
                let key = (ids[i].min(ids[j]), ids[i].max(ids[j]));
                let better = match best {
                    None => true,
                    Some((bh, lo, hi, _, _)) => h < bh || (h == bh && key < (lo, hi)),
                };
                if better {
                    best = Some((h, key.0, key.1, i, j));
                }
            }
        }
        let (h, lo, hi, i, j) = best.expect("at least two active clusters");
        let (ni, nj) = (sizes[i] as f64, sizes[j] as f64);
        for k in (0..n).filter(|&k| active[k] && k != i && k != j) {
            let (dik, djk) = (dist[i * n + k], dist[j * n + k]);
            let nk = sizes[k] as f64;
            let updated = match linkage {
                Linkage::Single => dik.min(djk),
                Linkage::Complete => dik.max(djk),
                Linkage::Average => (ni * dik + nj * djk) / (ni + nj),
                Linkage::Ward => {
                    (((ni + nk) * dik * dik + (nj + nk) * djk * djk - nk * h * h) / (ni + nj + nk)).max(0.0).sqrt()
                }
            };
            dist[i * n + k] = updated;
            dist[k * n + i] = updated;
        }
        active[j] = false;
        sizes[i] += sizes[j];
        ids[i] = n + step;
        merges.push(Merge { a: lo, b: hi, height: h, id: n + step, size: sizes[i] });
    }
    Ok(Dendrogram {
        labels: (0..n).map(|i| i.to_string()).collect(),
        merges,
        metric: d.metric,
        linkage,
    })
}

/// Mean silhouette width. Points in singleton clusters score 0.
pub fn silhouette(labels: &[usize], d: &DistanceMatrix) -> Result<f64, ClusterError> {
    let n = d.n;
    if labels.len() != n {
        return Err(ClusterError::LabelMismatch { labels: labels.len(), points: n });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let mut total = 0.0;
    for i in 0..n {
        if sizes[labels[i]] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in (0..n).filter(|&j| j != i) {
            sums[labels[j]] += d.get(i, j);
        }
        let a = sums[labels[i]] / (sizes[labels[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != labels[i] && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += ((b - a) / m).clamp(-1.0, 1.0);
        }
    }
    Ok((total / n as f64).clamp(-1.0, 1.0))
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![0u64; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        table[x * kb + y] += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().map(|&c| pairs(c)).sum();
    let rows: f64 = (0..ka).map(|x| pairs(table[x * kb..(x + 1) * kb].iter().sum())).sum();
    let cols: f64 = (0..kb).map(|y| pairs((0..ka).map(|x| table[x * kb + y]).sum())).sum();
    let all = pairs(n as u64);
    let expected = if all > 0.0 { rows * cols / all } else { 0.0 };
    let max = (rows + cols) / 2.0;
    if max == expected {
        1.0
    } else {
        (index - expected) / (max - expected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub k: usize,
    pub metric: Metric,
    pub linkage: Linkage,
    /// `None` marks a combination that is not evaluated (ward on cosine).
    pub silhouette: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub metric: Metric,
    pub linkage: Linkage,
    pub silhouette: f64,
    /// Problem-class label and cluster id, in input order.
    pub labels: Vec<(String, usize)>,
    pub grid: Vec<GridEntry>,
}

impl ClusterReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, ClusterError> {
        serde_json::from_str(text)
            .map_err(|e| ClusterError::Parse { line: e.line(), message: e.to_string() })
    }

    pub fn cluster_ids(&self) -> Vec<usize> {
        self.labels.iter().map(|(_, c)| *c).collect()
    }
}

/// Silhouette search over every `(k, metric, linkage)` cell. The best cell
/// maximises the silhouette; ties go to smaller `k`, then metric order, then
/// linkage order. With exactly two vectors the only cut is `k = 2`.
pub fn grid_search(
    names: &[String],
    vectors: &[Vec<f64>],
    ks: std::ops::RangeInclusive<usize>,
    metrics: &[Metric],
    linkages: &[Linkage],
) -> Result<ClusterReport, ClusterError> {
    check_vectors(vectors)?;
    let n = vectors.len();
    if names.len() != n {
        return Err(ClusterError::LabelMismatch { labels: names.len(), points: n });
    }
    let upper = if n == 2 { 2 } else { n - 1 };
    let ks: Vec<usize> = ks.filter(|&k| (2..=upper).contains(&k)).collect();
    let mut metrics = metrics.to_vec();
    metrics.sort();
    metrics.dedup();
    let mut linkages = linkages.to_vec();
    linkages.sort();
    linkages.dedup();
    if ks.is_empty() || metrics.is_empty() || linkages.is_empty() {
        return Err(ClusterError::EmptyGrid);
    }

    let matrices: Vec<DistanceMatrix> =
        metrics.iter().map(|&m| distance_matrix(vectors, m)).collect::<Result<_, _>>()?;
    // Ward on cosine distances stays `None` and its cells are skipped.
    let trees: Vec<Option<Dendrogram>> =
        matrices.iter().flat_map(|d| linkages.iter().map(|&l| agglomerate(d, l).ok()).collect::<Vec<_>>()).collect();

    let (nm, nl) = (metrics.len(), linkages.len());
    let cells: Vec<(usize, usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..nm).flat_map(move |mi| (0..nl).map(move |li| (k, mi, li))))
        .collect();
    let scores: Vec<Option<(f64, Vec<usize>)>> = cells
        .par_iter()
        .map(|&(k, mi, li)| {
            let tree = trees[mi * nl + li].as_ref()?;
            let labels = tree.cut_k(k).ok()?;
            let s = silhouette(&labels, &matrices[mi]).ok()?;
            Some((s, labels))
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some((v, _)) = s {
            // Cells are in (k, metric, linkage) order, so strict improvement
            // alone implements the tie-breaking rule.
            if best.is_none_or(|(_, b)| *v > b) {
                best = Some((i, *v));
            }
        }
    }
    let (bi, score) = best.ok_or(ClusterError::EmptyGrid)?;
    let (k, mi, li) = cells[bi];
    let labels = scores[bi].as_ref().map(|(_, l)| l.clone()).unwrap_or_default();
    let grid = cells
        .iter()
        .zip(&scores)
        .map(|(&(k, mi, li), s)| GridEntry {
            k,
            metric: metrics[mi],
            linkage: linkages[li],
            silhouette: s.as_ref().map(|(v, _)| *v),
        })
        .collect();
    Ok(ClusterReport {
        k,
        metric: metrics[mi],
        linkage: linkages[li],
        silhouette: score,
        labels: names.iter().cloned().zip(labels).collect(),
        grid,
    })
}
