use std::fmt;
use std::path::Path;

use modpso::benchmark::BenchmarkError;
use modpso::cluster::ClusterError;
use modpso::fanova::FanovaError;
use modpso::report::ReportError;
use modpso::runner::RunnerError;
use modpso::swarm::SwarmError;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations.
    Usage(String),
    /// Unreadable, malformed or unsuitable input files.
    Data(String),
    /// A result that violates an internal guarantee.
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    pub fn in_file(path: &Path, err: impl Into<CliError>) -> Self {
        match err.into() {
            CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Invariant(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl From<BenchmarkError> for CliError {
    fn from(e: BenchmarkError) -> Self {
        match e {
            BenchmarkError::BelowOptimum { .. } => CliError::Invariant(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SwarmError> for CliError {
    fn from(e: SwarmError) -> Self {
        match e {
            SwarmError::Benchmark(b) => b.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<RunnerError> for CliError {
    fn from(e: RunnerError) -> Self {
        match e {
            RunnerError::Benchmark(b) => b.into(),
            RunnerError::Swarm(s) => s.into(),
            RunnerError::Pool(m) => CliError::Invariant(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<FanovaError> for CliError {
    fn from(e: FanovaError) -> Self {
        match e {
            FanovaError::Params(m) => CliError::Usage(m),
            FanovaError::Subset(_) | FanovaError::Level { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::KOutOfRange { .. } | ClusterError::UnknownName { .. } | ClusterError::WardRequiresEuclidean => {
                CliError::Usage(e.to_string())
            }
            ClusterError::LabelMismatch { .. } => CliError::Invariant(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Data(e.to_string())
    }
}
