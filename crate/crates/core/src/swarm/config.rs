//! The eight-module design space and its canonical token form.
//!
//! A configuration renders as
//! `dnpp=rect;ac=const;top=ring;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none`,
//! with keys always in that order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("malformed configuration field {0:?}")]
    Malformed(String),
    #[error("expected key {expected:?}, found {found:?}")]
    UnexpectedKey { expected: &'static str, found: String },
    #[error("unknown label {label:?} for module {module}")]
    UnknownLabel { module: &'static str, label: String },
    #[error("expected 8 module fields, found {0}")]
    FieldCount(usize),
    #[error("additive stochastic DNPP requires mtx=none")]
    AdditiveWithMatrix,
}

/// The eight configurable modules, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Module {
    Dnpp,
    Accel,
    Topology,
    Influence,
    Matrix,
    Inertia,
    InformedPerturbation,
    RandomPerturbation,
}

impl Module {
    pub const ALL: [Module; 8] = [
        Module::Dnpp,
        Module::Accel,
        Module::Topology,
        Module::Influence,
        Module::Matrix,
        Module::Inertia,
        Module::InformedPerturbation,
        Module::RandomPerturbation,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Module::Dnpp => "dnpp",
            Module::Accel => "ac",
            Module::Topology => "top",
            Module::Influence => "moi",
            Module::Matrix => "mtx",
            Module::Inertia => "iw",
            Module::InformedPerturbation => "p1",
            Module::RandomPerturbation => "p2",
        }
    }

    /// Option tokens in canonical level order.
    pub fn levels(self) -> &'static [&'static str] {
        match self {
            Module::Dnpp => &["rect", "sph", "add"],
            Module::Accel => &["const", "sched"],
            Module::Topology => &["ring", "full"],
            Module::Influence => &["bon", "fi"],
            Module::Matrix => &["id", "diag", "rot", "igb", "none"],
            Module::Inertia => &["c0.0", "c0.75", "vel", "rank", "succ"],
            Module::InformedPerturbation => &["none", "gauss"],
            Module::RandomPerturbation => &["none", "rect"],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_key(key: &str) -> Option<Module> {
        Module::ALL.into_iter().find(|m| m.key() == key)
    }

    pub fn level_of(self, token: &str) -> Result<usize, ConfigError> {
        self.levels()
            .iter()
            .position(|t| *t == token)
            .ok_or_else(|| ConfigError::UnknownLabel { module: self.key(), label: token.to_string() })
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

macro_rules! option_enum {
    ($(#[$doc:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn level(self) -> usize {
                self as usize
            }

            fn from_level(level: usize) -> Option<Self> {
                Self::ALL.get(level).copied()
            }
        }
    };
}

option_enum!(
    /// Distribution of next possible positions.
    Dnpp { Rectangular, Spherical, AdditiveStochastic }
);
option_enum!(AccelCoefficients { Constant, Scheduled });
option_enum!(Topology { Ring, FullyConnected });
option_enum!(ModelOfInfluence { BestOfNeighborhood, FullyInformed });
option_enum!(RandomMatrixKind { Identity, RandomDiagonal, EuclideanRotation, IncreasingGroupBased, None });
option_enum!(
    /// Inertia weight (w1) control strategies.
    InertiaWeight { ConstantZero, ConstantThreeQuarters, AdaptiveVelocity, RankBased, SuccessBased }
);
option_enum!(InformedPerturbation { None, Gaussian });
option_enum!(RandomPerturbation { None, Rectangular });

/// One point of the design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModuleConfiguration {
    pub dnpp: Dnpp,
    pub accel: AccelCoefficients,
    pub topology: Topology,
    pub influence: ModelOfInfluence,
    pub matrix: RandomMatrixKind,
    pub inertia: InertiaWeight,
    pub informed_perturbation: InformedPerturbation,
    pub random_perturbation: RandomPerturbation,
}

impl ModuleConfiguration {
    /// Rectangular DNPP, constant coefficients, constant w1 = 0.75, identity
    /// matrix, no perturbations, ring topology, best-of-neighbourhood.
    pub fn canonical() -> Self {
        ModuleConfiguration {
            dnpp: Dnpp::Rectangular,
            accel: AccelCoefficients::Constant,
            topology: Topology::Ring,
            influence: ModelOfInfluence::BestOfNeighborhood,
            matrix: RandomMatrixKind::Identity,
            inertia: InertiaWeight::ConstantThreeQuarters,
            informed_perturbation: InformedPerturbation::None,
            random_perturbation: RandomPerturbation::None,
        }
    }

    /// Level index of every module, in canonical module order.
    pub fn levels(&self) -> [usize; 8] {
        [
            self.dnpp.level(),
            self.accel.level(),
            self.topology.level(),
            self.influence.level(),
            self.matrix.level(),
            self.inertia.level(),
            self.informed_perturbation.level(),
            self.random_perturbation.level(),
        ]
    }

    /// Builds a configuration from level indices and checks the structural
    /// constraint.
    pub fn from_levels(levels: [usize; 8]) -> Result<Self, ConfigError> {
        let bad = |m: Module, l: usize| ConfigError::UnknownLabel { module: m.key(), label: l.to_string() };
        let config = ModuleConfiguration {
            dnpp: Dnpp::from_level(levels[0]).ok_or_else(|| bad(Module::Dnpp, levels[0]))?,
            accel: AccelCoefficients::from_level(levels[1]).ok_or_else(|| bad(Module::Accel, levels[1]))?,
            topology: Topology::from_level(levels[2]).ok_or_else(|| bad(Module::Topology, levels[2]))?,
            influence: ModelOfInfluence::from_level(levels[3]).ok_or_else(|| bad(Module::Influence, levels[3]))?,
            matrix: RandomMatrixKind::from_level(levels[4]).ok_or_else(|| bad(Module::Matrix, levels[4]))?,
            inertia: InertiaWeight::from_level(levels[5]).ok_or_else(|| bad(Module::Inertia, levels[5]))?,
            informed_perturbation: InformedPerturbation::from_level(levels[6])
                .ok_or_else(|| bad(Module::InformedPerturbation, levels[6]))?,
            random_perturbation: RandomPerturbation::from_level(levels[7])
                .ok_or_else(|| bad(Module::RandomPerturbation, levels[7]))?,
        };
        config.validate()?;
        Ok(config)
    }

    /// The random-matrix module only applies to rectangular and spherical
    /// DNPPs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dnpp == Dnpp::AdditiveStochastic && self.matrix != RandomMatrixKind::None {
            return Err(ConfigError::AdditiveWithMatrix);
        }
        Ok(())
    }

    pub fn token(&self, module: Module) -> &'static str {
        module.levels()[self.levels()[module.index()]]
    }
}

impl fmt::Display for ModuleConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in Module::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}={}", m.key(), self.token(*m))?;
        }
        Ok(())
    }
}

impl FromStr for ModuleConfiguration {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.trim().split(';').collect();
        if fields.len() != Module::ALL.len() {
            return Err(ConfigError::FieldCount(fields.len()));
        }
        let mut levels = [0usize; 8];
        for (slot, (field, module)) in levels.iter_mut().zip(fields.iter().zip(Module::ALL)) {
            let (key, value) = field.split_once('=').ok_or_else(|| ConfigError::Malformed(field.to_string()))?;
            if key != module.key() {
                return Err(ConfigError::UnexpectedKey { expected: module.key(), found: key.to_string() });
            }
            *slot = module.level_of(value)?;
        }
        ModuleConfiguration::from_levels(levels)
    }
}

impl PartialOrd for ModuleConfiguration {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: lexicographic over level indices in module order.
impl Ord for ModuleConfiguration {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.levels().cmp(&other.levels())
    }
}

impl Serialize for ModuleConfiguration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModuleConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_token_string() {
        assert_eq!(
            ModuleConfiguration::canonical().to_string(),
            "dnpp=rect;ac=const;top=ring;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none"
        );
    }

    #[test]
    fn option_counts() {
        let total: usize = Module::ALL.iter().map(|m| m.levels().len()).sum();
        assert_eq!(total, 23);
        assert_eq!(Module::Inertia.levels().len(), 5);
        assert_eq!(Module::Matrix.levels().len(), 5);
    }

    #[test]
    fn parse_rejects_bad_input() {
        let ok = "dnpp=rect;ac=const;top=ring;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none";
        assert!(ok.parse::<ModuleConfiguration>().is_ok());
        assert_eq!(
            "dnpp=add;ac=const;top=ring;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none".parse::<ModuleConfiguration>(),
            Err(ConfigError::AdditiveWithMatrix)
        );
        assert!(matches!(
            "ac=const;dnpp=rect;top=ring;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none".parse::<ModuleConfiguration>(),
            Err(ConfigError::UnexpectedKey { .. })
        ));
        assert!(matches!(
            "dnpp=rect;ac=const;top=star;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none".parse::<ModuleConfiguration>(),
            Err(ConfigError::UnknownLabel { .. })
        ));
        assert!(matches!("dnpp=rect".parse::<ModuleConfiguration>(), Err(ConfigError::FieldCount(1))));
        assert!(matches!(
            "dnpp=rect;ac=const;top;moi=bon;mtx=id;iw=c0.75;p1=none;p2=none".parse::<ModuleConfiguration>(),
            Err(ConfigError::Malformed(_))
        ));
    }

    #[test]
    fn from_levels_checks_ranges() {
        assert!(ModuleConfiguration::from_levels([0, 0, 0, 0, 5, 0, 0, 0]).is_err());
        assert!(ModuleConfiguration::from_levels([2, 0, 0, 0, 4, 0, 0, 0]).is_ok());
    }
}
