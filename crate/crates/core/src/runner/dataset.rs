//! Per-problem performance tables and their delimited-text form.
//!
//! ```text
//! # function=f9
//! # dimension=10
//! dnpp,ac,top,moi,mtx,iw,p1,p2,target
//! rect,const,ring,bon,id,c0.75,none,none,-3.2
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::benchmark::FunctionId;
use crate::swarm::{Module, ModuleConfiguration};

pub const HEADER: &str = "dnpp,ac,top,moi,mtx,iw,p1,p2,target";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub function: FunctionId,
    pub dimension: usize,
    pub runs_per_cell: usize,
    pub budget_multiplier: usize,
    pub master_seed: u64,
    pub transform_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub config: ModuleConfiguration,
    /// `log10(max(median error, 1e-9))`.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceDataset {
    pub meta: DatasetMeta,
    pub rows: Vec<DatasetRow>,
}

impl PerformanceDataset {
    /// Stable identifier, e.g. `f9_d10`.
    pub fn id(&self) -> String {
        format!("{}_d{}", self.meta.function, self.meta.dimension)
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        let _ = writeln!(out, "# function={}", m.function);
        let _ = writeln!(out, "# dimension={}", m.dimension);
        let _ = writeln!(out, "# runs_per_cell={}", m.runs_per_cell);
        let _ = writeln!(out, "# budget_multiplier={}", m.budget_multiplier);
        let _ = writeln!(out, "# master_seed={}", m.master_seed);
        let _ = writeln!(out, "# transform_seed={}", m.transform_seed);
        out.push_str(HEADER);
        out.push('\n');
        for row in &self.rows {
            for module in Module::ALL {
                out.push_str(row.config.token(module));
                out.push(',');
            }
            let _ = writeln!(out, "{}", row.target);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, RunnerError> {
        let bad = |line: usize, msg: String| RunnerError::Dataset { line, message: msg };
        let mut meta: [Option<String>; 6] = Default::default();
        const KEYS: [&str; 6] =
            ["function", "dimension", "runs_per_cell", "budget_multiplier", "master_seed", "transform_seed"];
        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, line)) = lines.peek() {
            let Some(comment) = line.strip_prefix('#') else { break };
            let (no, _) = lines.next().expect("peeked");
            let (k, v) = comment
                .trim()
                .split_once('=')
                .ok_or_else(|| bad(no + 1, format!("malformed metadata {comment:?}")))?;
            if let Some(slot) = KEYS.iter().position(|key| *key == k.trim()) {
                meta[slot] = Some(v.trim().to_string());
            }
        }
        let (hno, header) = lines.next().ok_or_else(|| bad(0, "missing header".into()))?;
        if header.trim_end_matches('\r') != HEADER {
            return Err(bad(hno + 1, format!("malformed header {header:?}")));
        }
        let field = |slot: usize| -> Result<&str, RunnerError> {
            meta[slot].as_deref().ok_or_else(|| bad(0, format!("missing metadata {}", KEYS[slot])))
        };
        let num = |slot: usize| -> Result<u64, RunnerError> {
            field(slot)?.parse::<u64>().map_err(|e| bad(0, format!("{}: {e}", KEYS[slot])))
        };
        let meta = DatasetMeta {
            function: field(0)?.parse().map_err(|e| bad(0, format!("{e}")))?,
            dimension: num(1)? as usize,
            runs_per_cell: num(2)? as usize,
            budget_multiplier: num(3)? as usize,
            master_seed: num(4)?,
            transform_seed: num(5)?,
        };

        let mut rows = Vec::new();
        for (no, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                return Err(bad(no + 1, format!("expected 9 columns, found {}", cells.len())));
            }
            let mut levels = [0usize; 8];
            for (k, module) in Module::ALL.iter().enumerate() {
                levels[k] = module.level_of(cells[k]).map_err(|e| bad(no + 1, e.to_string()))?;
            }
            let config = ModuleConfiguration::from_levels(levels).map_err(|e| bad(no + 1, e.to_string()))?;
            let target: f64 = cells[8].parse().map_err(|_| bad(no + 1, format!("bad target {:?}", cells[8])))?;
            if !target.is_finite() {
                return Err(bad(no + 1, format!("non-finite target {:?}", cells[8])));
            }
            rows.push(DatasetRow { config, target });
        }
        Ok(PerformanceDataset { meta, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PerformanceDataset {
        PerformanceDataset {
            meta: DatasetMeta {
                function: FunctionId::F9,
                dimension: 10,
                runs_per_cell: 3,
                budget_multiplier: 100,
                master_seed: 7,
                transform_seed: 7,
            },
            rows: vec![
                DatasetRow { config: ModuleConfiguration::canonical(), target: -9.0 },
                DatasetRow {
                    config: "dnpp=add;ac=sched;top=full;moi=fi;mtx=none;iw=rank;p1=gauss;p2=rect".parse().unwrap(),
                    target: 1.234_567_890_123_456_7,
                },
            ],
        }
    }

    #[test]
    fn round_trip() {
        let d = sample();
        assert_eq!(PerformanceDataset::parse(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn nan_target_rejected() {
        let text = sample().to_text().replace("-9", "NaN");
        assert!(matches!(PerformanceDataset::parse(&text), Err(RunnerError::Dataset { .. })));
    }

    #[test]
    fn bad_header_rejected() {
        let text = sample().to_text().replace("p2,target", "p2,score");
        assert!(PerformanceDataset::parse(&text).is_err());
    }

    #[test]
    fn unknown_label_rejected() {
        let text = sample().to_text().replace("rect,const,ring", "rect,const,star");
        assert!(PerformanceDataset::parse(&text).is_err());
    }
}
