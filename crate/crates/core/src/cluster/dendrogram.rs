//! Merge trees, cuts and their delimited-text form.
//!
//! ```text
//! # metric=cosine
//! # linkage=complete
//! id_a,id_b,height,new_id
//! 0,1,0.05,3
//! 2,3,0.8,4
//! leaf,label
//! 0,f1_d10
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ClusterError, Linkage, Metric};

pub const MERGE_HEADER: &str = "id_a,id_b,height,new_id";
pub const LEAF_HEADER: &str = "leaf,label";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Smaller of the two merged ids.
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub id: usize,
    /// Leaves under the new cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
    pub metric: Metric,
    pub linkage: Linkage,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.labels.len(), "one label per leaf");
        self.labels = labels;
        self
    }

    fn children(&self, id: usize) -> Option<(usize, usize)> {
        let n = self.n_leaves();
        (id >= n).then(|| {
            let m = &self.merges[id - n];
            (m.a, m.b)
        })
    }

    /// Leaves left to right, smaller child id first at every merge.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.n_leaves();
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![2 * n - 2];
        if n == 1 {
            stack = vec![0];
        }
        while let Some(id) = stack.pop() {
            match self.children(id) {
                Some((a, b)) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => out.push(id),
            }
        }
        out
    }

    /// Labels after undoing the last `k - 1` merges. Cluster numbers are
    /// assigned in order of first appearance scanning leaves `0..n`.
    pub fn cut_k(&self, k: usize) -> Result<Vec<usize>, ClusterError> {
        let n = self.n_leaves();
        if k == 0 || k > n {
            return Err(ClusterError::KOutOfRange { k, n });
        }
        let mut parent: Vec<usize> = (0..2 * n - 1).collect();
        for m in &self.merges[..n - k] {
            parent[m.a] = m.id;
            parent[m.b] = m.id;
        }
        let root = |mut i: usize| {
            while parent[i] != i {
                i = parent[i];
            }
            i
        };
        let mut seen: Vec<(usize, usize)> = Vec::new();
        Ok((0..n)
            .map(|leaf| {
                let r = root(leaf);
                match seen.iter().find(|(c, _)| *c == r) {
                    Some(&(_, label)) => label,
                    None => {
                        seen.push((r, seen.len()));
                        seen.len() - 1
                    }
                }
            })
            .collect())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# metric={}", self.metric);
        let _ = writeln!(out, "# linkage={}", self.linkage);
        let _ = writeln!(out, "{MERGE_HEADER}");
        for m in &self.merges {
            let _ = writeln!(out, "{},{},{},{}", m.a, m.b, m.height, m.id);
        }
        let _ = writeln!(out, "{LEAF_HEADER}");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{i},{l}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ClusterError> {
        let bad = |line: usize, message: String| ClusterError::Parse { line, message };
        let (mut metric, mut linkage) = (None, None);
        let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
        let mut leaves: Vec<(usize, &str)> = Vec::new();
        let mut section = 0;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.trim().split_once('=').ok_or_else(|| bad(n, "expected key=value".into()))?;
                match k.trim() {
                    "metric" => metric = Some(v.trim().parse::<Metric>().map_err(|e| bad(n, e.to_string()))?),
                    "linkage" => linkage = Some(v.trim().parse::<Linkage>().map_err(|e| bad(n, e.to_string()))?),
                    _ => {}
                }
                continue;
            }
            match (section, line) {
                (0, MERGE_HEADER) => section = 1,
                (1, LEAF_HEADER) => section = 2,
                (1, _) => rows.push((n, line.split(',').collect())),
                (2, _) => {
                    let (idx, label) = line.split_once(',').ok_or_else(|| bad(n, "expected leaf,label".into()))?;
                    if idx.trim().parse::<usize>().ok() != Some(leaves.len()) {
                        return Err(bad(n, "leaves must be numbered 0, 1, 2, ...".into()));
                    }
                    leaves.push((n, label));
                }
                _ => return Err(bad(n, format!("unexpected line `{line}`"))),
            }
        }
        if section != 2 {
            return Err(bad(0, "missing merge or leaf section".into()));
        }
        let metric = metric.ok_or_else(|| bad(0, "missing metric".into()))?;
        let linkage = linkage.ok_or_else(|| bad(0, "missing linkage".into()))?;
        let n = leaves.len();
        if n < 2 || rows.len() != n - 1 {
            return Err(bad(0, format!("{} merges for {n} leaves", rows.len())));
        }
        let mut size = vec![1usize; n];
        size.resize(2 * n - 1, 0);
        let mut used = vec![false; 2 * n - 1];
        let mut merges = Vec::with_capacity(n - 1);
        for (s, (line, cols)) in rows.iter().enumerate() {
            let [a, b, h, id] = cols[..] else {
                return Err(bad(*line, "expected four columns".into()));
            };
            let int = |v: &str| v.trim().parse::<usize>().map_err(|_| bad(*line, format!("bad id `{v}`")));
            let (a, b, id) = (int(a)?, int(b)?, int(id)?);
            let height: f64 = h.trim().parse().map_err(|_| bad(*line, format!("bad height `{h}`")))?;
            if !height.is_finite() || height < 0.0 {
                return Err(bad(*line, "height must be finite and nonnegative".into()));
            }
            if id != n + s || a >= b || b >= id || used[a] || used[b] {
                return Err(bad(*line, "merge does not join two live clusters into the next id".into()));
            }
            used[a] = true;
            used[b] = true;
            size[id] = size[a] + size[b];
            merges.push(Merge { a, b, height, id, size: size[id] });
        }
        Ok(Dendrogram { labels: leaves.iter().map(|(_, l)| l.to_string()).collect(), merges, metric, linkage })
    }
}
