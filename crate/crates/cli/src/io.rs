//! File formats and I/O helpers shared by the CLI commands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use prony_smt::forward::{MomentVector, SphericalMeanTrace};
use prony_smt::model::ModelKind;
use prony_smt::pipeline::{RecoveryError, RecoveryReport};
use prony_smt::RadialKernel;

use crate::CliError;

/// Simulated data for one scenario: per-sensor moment vectors, or sampled
/// traces plus the kernel they were generated with.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataFile {
    Points {
        dim: usize,
        sources: usize,
        moments: Vec<MomentVector>,
    },
    Hyperplanes {
        dim: usize,
        sources: usize,
        moments: Vec<MomentVector>,
    },
    Radial {
        dim: usize,
        sources: usize,
        kernel: RadialKernel,
        traces: Vec<SphericalMeanTrace>,
    },
}

impl DataFile {
    pub fn kind(&self) -> ModelKind {
        match self {
            DataFile::Points { .. } => ModelKind::Points,
            DataFile::Hyperplanes { .. } => ModelKind::Hyperplanes,
            DataFile::Radial { .. } => ModelKind::Radial,
        }
    }
}

/// A recovery report, or the typed error that stopped the run.
#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ReportFile {
    Success {
        #[serde(flatten)]
        report: Box<RecoveryReport>,
    },
    Error {
        error: &'static str,
        detail: String,
    },
}

/// Short stable name of a recovery error for reports and scripts.
pub fn recovery_error_name(err: &RecoveryError) -> &'static str {
    use prony_smt::correspondence::CorrespondenceError as C;
    use prony_smt::geometry::GeometryError as G;
    use prony_smt::hankel::HankelError as H;
    use prony_smt::prony::PronyError as P;
    match err {
        RecoveryError::NoData => "NoData",
        RecoveryError::NotEnoughGoodSensors { .. } => "NotEnoughGoodSensors",
        RecoveryError::ProbeMismatch { .. } => "ProbeMismatch",
        RecoveryError::DimensionMismatch { .. } => "DimensionMismatch",
        RecoveryError::Prony { source, .. } => match source {
            P::InsufficientMoments { .. } => "InsufficientMoments",
            P::DegenerateSystem { .. } => "DegenerateSystem",
            P::ComplexRoots { .. } => "ComplexRoots",
            P::OutOfRangeRoots { .. } => "OutOfRangeRoots",
            P::RepeatedRoots { .. } => "RepeatedRoots",
            P::InconsistentMoments { .. } => "InconsistentMoments",
            P::SolveFailed => "SolveFailed",
        },
        RecoveryError::Assignment { source, .. } => match source {
            C::AmbiguousAssignment { .. } => "AmbiguousAssignment",
            C::NoMatch { .. } => "NoMatch",
            _ => "AssignmentError",
        },
        RecoveryError::Geometry { source, .. } => match source {
            G::AffinelyDependentAnchors => "AffinelyDependentAnchors",
            G::InconsistentDistances { .. } => "InconsistentDistances",
            G::NoConsistentHyperplane => "NoConsistentHyperplane",
            G::MultipleCandidates { .. } => "MultipleCandidates",
            _ => "GeometryError",
        },
        RecoveryError::Extraction { source, .. } => match source {
            H::GridTooCoarse { .. } => "GridTooCoarse",
            H::ProfileVanishes => "ProfileVanishes",
            _ => "ExtractionError",
        },
        RecoveryError::VerificationFailed { .. } => "VerificationFailed",
        RecoveryError::TruthMismatch => "TruthMismatch",
        RecoveryError::InvalidModel { .. } => "InvalidModel",
        RecoveryError::Model(_) => "ModelError",
        RecoveryError::Forward(_) => "ForwardError",
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(format!("parsing {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Schema(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
