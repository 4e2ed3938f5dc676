//! Analysis artifacts: distribution summaries, cumulative-variance files,
//! clustermap matrices, SVG renderings and a hashed index of output files.

mod index;
pub mod svg;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use index::{build_index, FileEntry, OutputIndex, INDEX_FILE};

use crate::cluster::{ClusterReport, Dendrogram};
use crate::fanova::{cumulative_curve, ranked_terms, EffectVector};
use crate::runner::{PerformanceDataset, TARGET_FLOOR};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// Boxplot statistics of one dataset's targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSummary {
    pub dataset: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Variants whose target sits at the error cap.
    pub capped: usize,
}

pub const SUMMARY_HEADER: &str = "dataset,count,min,q1,median,q3,max,capped";

/// Quantile by linear interpolation between order statistics, the common
/// default in numerical libraries. `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl PerformanceSummary {
    pub fn of(dataset: &PerformanceDataset) -> Result<Self, ReportError> {
        Self::from_targets(dataset.id(), &dataset.targets())
    }

    pub fn from_targets(dataset: String, targets: &[f64]) -> Result<Self, ReportError> {
        if targets.is_empty() {
            return Err(ReportError::Invalid(format!("dataset {dataset} has no rows")));
        }
        let mut v = targets.to_vec();
        v.sort_by(f64::total_cmp);
        Ok(PerformanceSummary {
            dataset,
            count: v.len(),
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
            capped: v.iter().filter(|&&t| t <= TARGET_FLOOR).count(),
        })
    }
}

pub fn summaries_to_text(rows: &[PerformanceSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{},{}", s.dataset, s.count, s.min, s.q1, s.median, s.q3, s.max, s.capped);
    }
    out
}

fn split_csv(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split(',').collect()))
}

fn number(line: usize, v: &str) -> Result<f64, ReportError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ReportError::Parse { line, message: format!("bad number `{v}`") })
}

fn count(line: usize, v: &str) -> Result<usize, ReportError> {
    v.trim().parse().map_err(|_| ReportError::Parse { line, message: format!("bad count `{v}`") })
}

fn expect_header(rows: &mut impl Iterator<Item = (usize, Vec<String>)>, header: &str) -> Result<(), ReportError> {
    match rows.next() {
        Some((_, cols)) if cols.join(",") == header => Ok(()),
        Some((line, _)) => Err(ReportError::Parse { line, message: format!("expected header `{header}`") }),
        None => Err(ReportError::Parse { line: 0, message: "empty file".into() }),
    }
}

pub fn parse_summaries(text: &str) -> Result<Vec<PerformanceSummary>, ReportError> {
    let mut rows = split_csv(text).map(|(i, c)| (i, c.into_iter().map(str::to_string).collect::<Vec<_>>()));
    expect_header(&mut rows, SUMMARY_HEADER)?;
    rows.map(|(line, c)| {
        let [d, n, min, q1, med, q3, max, capped] = &c[..] else {
            return Err(ReportError::Parse { line, message: "expected 8 columns".into() });
        };
        let s = PerformanceSummary {
            dataset: d.clone(),
            count: count(line, n)?,
            min: number(line, min)?,
            q1: number(line, q1)?,
            median: number(line, med)?,
            q3: number(line, q3)?,
            max: number(line, max)?,
            capped: count(line, capped)?,
        };
        let ordered = s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max;
        if !ordered || s.capped > s.count {
            return Err(ReportError::Parse { line, message: "statistics out of order".into() });
        }
        Ok(s)
    })
    .collect()
}

/// One row of a cumulative-variance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub subset: String,
    pub importance: f64,
    pub cumulative: f64,
}

pub const CURVE_HEADER: &str = "k,subset,importance,cumulative";

pub fn curve_points(ev: &EffectVector) -> Vec<CurvePoint> {
    ranked_terms(ev)
        .into_iter()
        .zip(cumulative_curve(ev))
        .map(|(t, (k, cumulative))| CurvePoint { k, subset: ev.label(&t.subset), importance: t.importance, cumulative })
        .collect()
}

pub fn curve_to_text(ev: &EffectVector) -> String {
    let mut out = String::new();
    if let Some(d) = ev.metadata.get("dataset") {
        let _ = writeln!(out, "# dataset={d}");
    }
    let _ = writeln!(out, "# residual={}", ev.residual);
    let _ = writeln!(out, "# degenerate={}", ev.degenerate);
    let _ = writeln!(out, "{CURVE_HEADER}");
    for p in curve_points(ev) {
        let _ = writeln!(out, "{},{},{},{}", p.k, p.subset, p.importance, p.cumulative);
    }
    out
}

pub fn parse_curve(text: &str) -> Result<Vec<CurvePoint>, ReportError> {
    let mut rows = split_csv(text).map(|(i, c)| (i, c.into_iter().map(str::to_string).collect::<Vec<_>>()));
    expect_header(&mut rows, CURVE_HEADER)?;
    let mut out: Vec<CurvePoint> = Vec::new();
    for (line, c) in rows {
        let [k, subset, imp, cum] = &c[..] else {
            return Err(ReportError::Parse { line, message: "expected 4 columns".into() });
        };
        let p = CurvePoint {
            k: count(line, k)?,
            subset: subset.clone(),
            importance: number(line, imp)?,
            cumulative: number(line, cum)?,
        };
        let prev = out.last().map_or(0.0, |q| q.cumulative);
        if p.k != out.len() + 1 || p.cumulative < prev || !(0.0..=1.0 + 1e-9).contains(&p.cumulative) {
            return Err(ReportError::Parse { line, message: "curve must be numbered and non-decreasing in [0, 1]".into() });
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(ReportError::Parse { line: 0, message: "curve has no points".into() });
    }
    Ok(out)
}

/// Problem classes by effect terms, rows in dendrogram leaf order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustermap {
    pub columns: Vec<String>,
    pub rows: Vec<ClustermapRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustermapRow {
    pub problem: String,
    pub cluster: usize,
    pub values: Vec<f64>,
}

impl Clustermap {
    /// `vectors` and `report.labels` are in the same input order, which is
    /// also the leaf numbering of `tree`.
    pub fn build(vectors: &[EffectVector], report: &ClusterReport, tree: &Dendrogram) -> Result<Self, ReportError> {
        let first = vectors.first().ok_or_else(|| ReportError::Invalid("no effect vectors".into()))?;
        let columns: Vec<String> = first.terms.iter().map(|t| first.label(&t.subset)).collect();
        if vectors.len() != report.labels.len() || vectors.len() != tree.n_leaves() {
            return Err(ReportError::Invalid("vectors, labels and dendrogram disagree in size".into()));
        }
        for v in vectors {
            let cols: Vec<String> = v.terms.iter().map(|t| v.label(&t.subset)).collect();
            if cols != columns {
                return Err(ReportError::Invalid("effect vectors have different terms".into()));
            }
        }
        let rows = tree
            .leaf_order()
            .into_iter()
            .map(|leaf| ClustermapRow {
                problem: report.labels[leaf].0.clone(),
                cluster: report.labels[leaf].1,
                values: vectors[leaf].importances(),
            })
            .collect();
        Ok(Clustermap { columns, rows })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("problem,cluster,{}\n", self.columns.join(","));
        for r in &self.rows {
            let _ = write!(out, "{},{}", r.problem, r.cluster);
            for v in &r.values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
