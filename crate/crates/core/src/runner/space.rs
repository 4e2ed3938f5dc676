//! Selections over the module option sets and their enumeration.

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::swarm::{Module, ModuleConfiguration};

/// Selected option tokens per module. Missing modules default to the full
/// option set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDescription {
    #[serde(default = "all_dnpp")]
    pub dnpp: Vec<String>,
    #[serde(default = "all_ac")]
    pub ac: Vec<String>,
    #[serde(default = "all_top")]
    pub top: Vec<String>,
    #[serde(default = "all_moi")]
    pub moi: Vec<String>,
    #[serde(default = "all_mtx")]
    pub mtx: Vec<String>,
    #[serde(default = "all_iw")]
    pub iw: Vec<String>,
    #[serde(default = "all_p1")]
    pub p1: Vec<String>,
    #[serde(default = "all_p2")]
    pub p2: Vec<String>,
}

fn all_of(m: Module) -> Vec<String> {
    m.levels().iter().map(|s| s.to_string()).collect()
}
fn all_dnpp() -> Vec<String> {
    all_of(Module::Dnpp)
}
fn all_ac() -> Vec<String> {
    all_of(Module::Accel)
}
fn all_top() -> Vec<String> {
    all_of(Module::Topology)
}
fn all_moi() -> Vec<String> {
    all_of(Module::Influence)
}
fn all_mtx() -> Vec<String> {
    all_of(Module::Matrix)
}
fn all_iw() -> Vec<String> {
    all_of(Module::Inertia)
}
fn all_p1() -> Vec<String> {
    all_of(Module::InformedPerturbation)
}
fn all_p2() -> Vec<String> {
    all_of(Module::RandomPerturbation)
}

impl Default for SpaceDescription {
    fn default() -> Self {
        Self::full()
    }
}

impl SpaceDescription {
    pub fn full() -> Self {
        SpaceDescription {
            dnpp: all_dnpp(),
            ac: all_ac(),
            top: all_top(),
            moi: all_moi(),
            mtx: all_mtx(),
            iw: all_iw(),
            p1: all_p1(),
            p2: all_p2(),
        }
    }

    pub fn selection(&self, module: Module) -> &[String] {
        match module {
            Module::Dnpp => &self.dnpp,
            Module::Accel => &self.ac,
            Module::Topology => &self.top,
            Module::Influence => &self.moi,
            Module::Matrix => &self.mtx,
            Module::Inertia => &self.iw,
            Module::InformedPerturbation => &self.p1,
            Module::RandomPerturbation => &self.p2,
        }
    }

    pub fn selection_mut(&mut self, module: Module) -> &mut Vec<String> {
        match module {
            Module::Dnpp => &mut self.dnpp,
            Module::Accel => &mut self.ac,
            Module::Topology => &mut self.top,
            Module::Influence => &mut self.moi,
            Module::Matrix => &mut self.mtx,
            Module::Inertia => &mut self.iw,
            Module::InformedPerturbation => &mut self.p1,
            Module::RandomPerturbation => &mut self.p2,
        }
    }

    /// Selected level indices per module, sorted and deduplicated.
    pub fn level_sets(&self) -> Result<Vec<Vec<usize>>, RunnerError> {
        Module::ALL
            .iter()
            .map(|&m| {
                let sel = self.selection(m);
                if sel.is_empty() {
                    return Err(RunnerError::EmptySelection(m.key()));
                }
                let mut levels = sel
                    .iter()
                    .map(|tok| m.level_of(tok).map_err(RunnerError::from))
                    .collect::<Result<Vec<_>, _>>()?;
                levels.sort_unstable();
                levels.dedup();
                Ok(levels)
            })
            .collect()
    }
}

/// Cartesian product of the selected options minus structurally invalid
/// combinations, in canonical (lexicographic level) order.
pub fn enumerate_configs(space: &SpaceDescription) -> Result<Vec<ModuleConfiguration>, RunnerError> {
    let sets = space.level_sets()?;
    let mut out = Vec::new();
    let mut cursor = [0usize; 8];
    loop {
        let mut levels = [0usize; 8];
        for (k, l) in levels.iter_mut().enumerate() {
            *l = sets[k][cursor[k]];
        }
        if let Ok(config) = ModuleConfiguration::from_levels(levels) {
            out.push(config);
        }
        // odometer, last module fastest
        let mut k = 8;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] < sets[k].len() {
                break;
            }
            cursor[k] = 0;
        }
    }
}
