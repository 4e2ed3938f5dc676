//! Delimited-text forms of effect vectors and marginal tables.
//!
//! ```text
//! # dataset=f9_d10
//! # features=dnpp+ac+top+moi+mtx+iw+p1+p2
//! # total_variance=0.84
//! # residual=0.02
//! # degenerate=false
//! subset,order,importance
//! dnpp,1,0.011
//! mtx+iw,2,0.2
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{canonical_subsets, encode, EffectTerm, EffectVector, FanovaError};

pub const EFFECT_HEADER: &str = "subset,order,importance";

impl EffectVector {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut meta = self.metadata.clone();
        meta.insert("features".into(), self.features.join("+"));
        meta.insert("total_variance".into(), self.total_variance.to_string());
        meta.insert("residual".into(), self.residual.to_string());
        meta.insert("degenerate".into(), self.degenerate.to_string());
        for (k, v) in &meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(EFFECT_HEADER);
        out.push('\n');
        for t in &self.terms {
            let _ = writeln!(out, "{},{},{}", self.label(&t.subset), t.subset.len(), t.importance);
        }
        out
    }

    /// Parses [`EffectVector::to_text`] output. Terms must be the canonical
    /// subsets of the declared features, in canonical order.
    pub fn parse(text: &str) -> Result<Self, FanovaError> {
        let bad = |line: usize, message: String| FanovaError::Parse { line, message };
        let mut meta = BTreeMap::new();
        let mut body = Vec::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if header_seen {
                    return Err(bad(n, "metadata after header".into()));
                }
                let (k, v) = rest.trim().split_once('=').ok_or_else(|| bad(n, "expected key=value".into()))?;
                if meta.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                    return Err(bad(n, format!("duplicate key {k}")));
                }
            } else if !header_seen {
                if line.trim() != EFFECT_HEADER {
                    return Err(bad(n, format!("expected header `{EFFECT_HEADER}`")));
                }
                header_seen = true;
            } else {
                body.push((n, line));
            }
        }
        if !header_seen {
            return Err(bad(0, "missing header".into()));
        }
        let mut take = |key: &str| meta.remove(key).ok_or_else(|| bad(0, format!("missing metadata `{key}`")));
        let features: Vec<String> = take("features")?.split('+').map(str::to_string).collect();
        let num = |key: &str, v: String| -> Result<f64, FanovaError> {
            v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(0, format!("bad number for `{key}`")))
        };
        let total_variance = num("total_variance", take("total_variance")?)?;
        let residual = num("residual", take("residual")?)?;
        let degenerate = match take("degenerate")?.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(bad(0, format!("bad degenerate flag `{other}`"))),
        };
        if features.is_empty() || features.iter().any(|f| f.is_empty() || f.contains(',')) {
            return Err(bad(0, "bad feature list".into()));
        }
        let mut unique = features.clone();
        unique.sort();
        unique.dedup();
        if unique.len() != features.len() {
            return Err(bad(0, "duplicate feature names".into()));
        }

        let mut terms = Vec::with_capacity(body.len());
        for (n, line) in &body {
            let cols: Vec<&str> = line.split(',').collect();
            let [label, order, imp] = cols[..] else {
                return Err(bad(*n, "expected three columns".into()));
            };
            let subset: Vec<usize> = label
                .split('+')
                .map(|tok| features.iter().position(|f| f == tok.trim()))
                .collect::<Option<_>>()
                .ok_or_else(|| bad(*n, format!("unknown subset `{label}`")))?;
            if order.trim().parse::<usize>().ok() != Some(subset.len()) {
                return Err(bad(*n, "order does not match subset size".into()));
            }
            let importance: f64 = imp.trim().parse().map_err(|_| bad(*n, format!("bad importance `{imp}`")))?;
            if !importance.is_finite() || importance < 0.0 {
                return Err(bad(*n, "importance must be finite and nonnegative".into()));
            }
            terms.push(EffectTerm { subset, importance });
        }
        let max_order = terms.iter().map(|t| t.subset.len()).max().unwrap_or(0);
        let expected = canonical_subsets(features.len(), max_order);
        if max_order == 0 || terms.len() != expected.len() || terms.iter().zip(&expected).any(|(t, e)| &t.subset != e) {
            return Err(bad(0, "terms are not the canonical subset sequence".into()));
        }
        Ok(EffectVector { features, terms, residual, total_variance, degenerate, metadata: meta })
    }
}

/// Marginal predictions over one or two features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTable {
    pub features: Vec<String>,
    pub levels: Vec<Vec<String>>,
    /// Mixed-radix order, first feature most significant.
    pub values: Vec<f64>,
}

impl MarginalTable {
    pub fn get(&self, levels: &[usize]) -> f64 {
        let radices: Vec<usize> = self.levels.iter().map(Vec::len).collect();
        self.values[encode(levels, &radices)]
    }

    /// One row per assignment: the level tokens then the predicted value.
    pub fn to_text(&self) -> String {
        let mut out = self.features.join(",");
        out.push_str(",value\n");
        let radices: Vec<usize> = self.levels.iter().map(Vec::len).collect();
        for (code, v) in self.values.iter().enumerate() {
            let pick = super::decode(code, &radices);
            for (f, &l) in pick.iter().enumerate() {
                out.push_str(&self.levels[f][l]);
                out.push(',');
            }
            let _ = writeln!(out, "{v}");
        }
        out
    }

    /// Parses [`MarginalTable::to_text`] output. Level sets are recovered in
    /// order of first appearance and must form a complete grid.
    pub fn parse(text: &str) -> Result<Self, FanovaError> {
        let bad = |line: usize, message: String| FanovaError::Parse { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| bad(0, "empty table".into()))?;
        let mut cols: Vec<String> = header.trim_end_matches('\r').split(',').map(str::to_string).collect();
        if cols.len() < 2 || cols.pop().as_deref() != Some("value") {
            return Err(bad(1, "header must end with `value`".into()));
        }
        let features = cols;
        let mut levels: Vec<Vec<String>> = vec![Vec::new(); features.len()];
        let mut cells: Vec<(Vec<usize>, f64)> = Vec::new();
        for (i, line) in lines {
            let parts: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
            if parts.len() != features.len() + 1 {
                return Err(bad(i + 1, "wrong column count".into()));
            }
            let mut key = Vec::with_capacity(features.len());
            for (f, tok) in parts[..features.len()].iter().enumerate() {
                let at = match levels[f].iter().position(|l| l == tok) {
                    Some(at) => at,
                    None if levels[f].len() < 64 => {
                        levels[f].push(tok.to_string());
                        levels[f].len() - 1
                    }
                    None => return Err(bad(i + 1, "too many levels".into())),
                };
                key.push(at);
            }
            let v: f64 = parts[features.len()].trim().parse().map_err(|_| bad(i + 1, "bad value".into()))?;
            if !v.is_finite() {
                return Err(bad(i + 1, "non-finite value".into()));
            }
            cells.push((key, v));
        }
        let radices: Vec<usize> = levels.iter().map(Vec::len).collect();
        let size = radices.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
        if size != Some(cells.len()) || cells.is_empty() {
            return Err(bad(0, "rows do not form a complete grid".into()));
        }
        let mut values = vec![f64::NAN; cells.len()];
        for (key, v) in cells {
            let code = encode(&key, &radices);
            if !values[code].is_nan() {
                return Err(bad(0, "duplicate cell".into()));
            }
            values[code] = v;
        }
        Ok(MarginalTable { features, levels, values })
    }
}
