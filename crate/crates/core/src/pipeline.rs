//! End-to-end recovery: classify sensors by Hankel degeneracy, solve the
//! Prony system at a base sensor, match roots at the auxiliary sensors via
//! the known amplitudes, invert the distance data geometrically, and verify
//! the recovered model against every sensor's data.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::correspondence::{match_roots, CorrespondenceError, MatchConfig};
use crate::forward::{self, MomentVector, ProbeFamily, SphericalMeanTrace};
use crate::geometry::{self, GeometryConfig, GeometryError};
use crate::hankel::{self, ExtractConfig, HankelError, RadialKernel};
use crate::model::{
    required_good_sensors, HyperplaneSources, ModelError, ModelFlag, ModelKind, PointSources,
    RadialSources, SourceModel,
};
use crate::prony::{self, PronyConfig, PronyError};

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("no sensor data supplied")]
    NoData,
    #[error("need {need} non-degenerate sensors, found {got}")]
    NotEnoughGoodSensors { got: usize, need: usize },
    #[error("sensor {sensor}: expected {expected:?} probes with first index {first_index}")]
    ProbeMismatch {
        sensor: usize,
        expected: ProbeFamily,
        first_index: usize,
    },
    #[error("sensor {sensor} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        sensor: usize,
        expected: usize,
        got: usize,
    },
    #[error("sensor {sensor}: {source}")]
    Prony { sensor: usize, source: PronyError },
    #[error("sensor {sensor}: {source}")]
    Assignment {
        sensor: usize,
        source: CorrespondenceError,
    },
    #[error("source {node}: {source}")]
    Geometry { node: usize, source: GeometryError },
    #[error("sensor {sensor}: {source}")]
    Extraction { sensor: usize, source: HankelError },
    #[error("verification failed: relative data error {max_err:e} exceeds {tol:e}")]
    VerificationFailed { max_err: f64, tol: f64 },
    #[error("recovered model violates its invariants: {flags:?}")]
    InvalidModel { flags: Vec<ModelFlag> },
    #[error("ground truth and recovered model disagree in kind or source count")]
    TruthMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Forward(#[from] forward::ForwardError),
}

/// All tolerances of the recovery path in one place.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub prony: PronyConfig,
    pub matching: MatchConfig,
    pub geometry: GeometryConfig,
    pub extract: ExtractConfig,
    /// Final verification: relative error allowed when re-synthesizing
    /// moments at every sensor from the recovered model.
    pub tol_verify_rel: f64,
    /// Verification tolerance for re-synthesized traces (quadrature and fit
    /// error dominate here, so it is looser than the moment check).
    pub tol_verify_trace_rel: f64,
    /// Largest λ·distance the radial extraction grid may reach.
    pub radial_z_max: f64,
    /// Matching tolerance for the radial path, where the extracted moments
    /// carry quadrature and fit error instead of being exact.
    pub radial_match_rel: f64,
    /// Held-out-moment residual allowed on extracted radial moments.
    pub radial_moment_res: f64,
}

impl PipelineConfig {
    pub fn new() -> Self {
        Self {
            prony: PronyConfig::default(),
            matching: MatchConfig::default(),
            geometry: GeometryConfig::default(),
            extract: ExtractConfig::default(),
            tol_verify_rel: 1e-5,
            tol_verify_trace_rel: 1e-2,
            radial_z_max: 2.0,
            radial_match_rel: 1e-3,
            radial_moment_res: 1e-3,
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorStatus {
    Good,
    Degenerate,
    Unused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorRole {
    Base,
    Matching,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensorRecord {
    pub index: usize,
    pub status: SensorStatus,
    /// σ_min/σ_max of the sensor's Hankel system.
    pub sigma_ratio: f64,
    pub role: Option<SensorRole>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssignmentRecord {
    pub sensor: usize,
    /// permutation[i] = root index assigned to source i.
    pub permutation: Vec<usize>,
    pub residual: f64,
    pub runner_up: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub max_rel_error: f64,
    pub tol: f64,
}

/// Outcome of a recovery run: the model plus a full per-sensor audit.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub kind: ModelKind,
    pub dim: usize,
    pub model: SourceModel,
    pub sensors: Vec<SensorRecord>,
    pub assignments: Vec<AssignmentRecord>,
    pub verification: Verification,
    pub warnings: Vec<String>,
    /// Per-parameter errors against a known ground truth; filled only when
    /// one is supplied (see [`RecoveryReport::attach_truth`]).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_errors: Option<ParameterErrors>,
    pub timing_ms: f64,
}

impl RecoveryReport {
    /// Computes and stores the parameter errors against a ground truth.
    pub fn attach_truth(&mut self, truth: &SourceModel) -> Result<(), RecoveryError> {
        self.truth_errors = Some(parameter_errors(truth, &self.model)?);
        Ok(())
    }
}

/// Errors of one recovered source against its ground-truth counterpart.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum SourceErrors {
    Point {
        source: usize,
        node_error: f64,
        amplitude_error: f64,
    },
    Plane {
        source: usize,
        normal_angle: f64,
        offset_error: f64,
        amplitude_error: f64,
    },
}

/// Per-parameter absolute errors after optimal source relabeling.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterErrors {
    pub rows: Vec<SourceErrors>,
    pub max: f64,
    pub mean: f64,
}

/// Compares a recovered model against ground truth, minimizing over source
/// relabelings before differencing.
pub fn parameter_errors(
    truth: &SourceModel,
    recovered: &SourceModel,
) -> Result<ParameterErrors, RecoveryError> {
    if truth.kind() != recovered.kind() || truth.len() != recovered.len() {
        return Err(RecoveryError::TruthMismatch);
    }
    let m = truth.len();
    let rows = match (truth, recovered) {
        (SourceModel::Points(t), SourceModel::Points(r)) => {
            point_error_rows(t.nodes(), t.amplitudes(), r.nodes(), r.amplitudes(), m)
        }
        (SourceModel::Radial(t), SourceModel::Radial(r)) => {
            point_error_rows(t.nodes(), t.amplitudes(), r.nodes(), r.amplitudes(), m)
        }
        (SourceModel::Hyperplanes(t), SourceModel::Hyperplanes(r)) => {
            let mut best: Option<(f64, Vec<usize>)> = None;
            crate::correspondence::heap_permutations(m, |perm| {
                let total: f64 = (0..m)
                    .map(|i| {
                        let (angle, d_off) = plane_gap(t, r, i, perm[i]);
                        angle + d_off + (t.amplitudes()[i] - r.amplitudes()[perm[i]]).abs()
                    })
                    .sum();
                if best.as_ref().is_none_or(|(b, _)| total < *b) {
                    best = Some((total, perm.to_vec()));
                }
            });
            let (_, perm) = best.expect("m >= 1");
            (0..m)
                .map(|i| {
                    let (angle, d_off) = plane_gap(t, r, i, perm[i]);
                    SourceErrors::Plane {
                        source: i,
                        normal_angle: angle,
                        offset_error: d_off,
                        amplitude_error: (t.amplitudes()[i] - r.amplitudes()[perm[i]]).abs(),
                    }
                })
                .collect()
        }
        _ => unreachable!("kinds checked above"),
    };

    let values: Vec<f64> = rows
        .iter()
        .flat_map(|row| match row {
            SourceErrors::Point {
                node_error,
                amplitude_error,
                ..
            } => vec![*node_error, *amplitude_error],
            SourceErrors::Plane {
                normal_angle,
                offset_error,
                amplitude_error,
                ..
            } => vec![*normal_angle, *offset_error, *amplitude_error],
        })
        .collect();
    let max = values.iter().cloned().fold(0.0_f64, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(ParameterErrors { rows, max, mean })
}

fn point_error_rows(
    t_nodes: &[Vec<f64>],
    t_amps: &[f64],
    r_nodes: &[Vec<f64>],
    r_amps: &[f64],
    m: usize,
) -> Vec<SourceErrors> {
    use crate::model::dist;
    let mut best: Option<(f64, Vec<usize>)> = None;
    crate::correspondence::heap_permutations(m, |perm| {
        let total: f64 = (0..m)
            .map(|i| dist(&t_nodes[i], &r_nodes[perm[i]]) + (t_amps[i] - r_amps[perm[i]]).abs())
            .sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm.to_vec()));
        }
    });
    let (_, perm) = best.expect("m >= 1");
    (0..m)
        .map(|i| SourceErrors::Point {
            source: i,
            node_error: dist(&t_nodes[i], &r_nodes[perm[i]]),
            amplitude_error: (t_amps[i] - r_amps[perm[i]]).abs(),
        })
        .collect()
}

/// Orientation-free angle between two plane normals plus the offset gap in
/// the matching orientation.
fn plane_gap(t: &HyperplaneSources, r: &HyperplaneSources, i: usize, j: usize) -> (f64, f64) {
    use crate::model::dot;
    let (pt, pr) = (&t.planes()[i], &r.planes()[j]);
    let cosine = dot(pt.normal(), pr.normal());
    let angle = cosine.abs().clamp(0.0, 1.0).acos();
    let d_off = if cosine >= 0.0 {
        (pt.offset() - pr.offset()).abs()
    } else {
        (pt.offset() + pr.offset()).abs()
    };
    (angle, d_off)
}

// ---------------------------------------------------------------------------
// Shared Prony-node recovery (points and radial sources)
// ---------------------------------------------------------------------------

struct NodeRecovery {
    amplitudes: Vec<f64>,
    /// distances[i][l] = matched distance of source i at good sensor l.
    distances: Vec<Vec<f64>>,
    good: Vec<usize>,
    sensors: Vec<SensorRecord>,
    assignments: Vec<AssignmentRecord>,
}

/// Runs classification, base solve, and root matching on monomial-type
/// moment vectors. `root_to_distance` converts a Prony root to a Euclidean
/// distance (identity for point sources, square root for radial ones).
fn recover_prony_nodes(
    moments: &[MomentVector],
    m: usize,
    use_count: usize,
    cfg: &PipelineConfig,
    root_to_distance: impl Fn(f64) -> f64,
) -> Result<NodeRecovery, RecoveryError> {
    let mut systems = Vec::with_capacity(moments.len());
    let mut records = Vec::with_capacity(moments.len());
    let mut good = Vec::new();
    for (idx, mv) in moments.iter().enumerate() {
        let system = prony::build_hankel(mv, m).map_err(|source| RecoveryError::Prony {
            sensor: idx,
            source,
        })?;
        let degenerate = system.scaled_sigma_ratio < cfg.prony.eps_degenerate;
        records.push(SensorRecord {
            index: idx,
            status: if degenerate {
                SensorStatus::Degenerate
            } else {
                SensorStatus::Unused
            },
            sigma_ratio: system.scaled_sigma_ratio,
            role: None,
        });
        if !degenerate {
            good.push(idx);
        }
        systems.push(system);
    }
    if good.len() < use_count {
        return Err(RecoveryError::NotEnoughGoodSensors {
            got: good.len(),
            need: use_count,
        });
    }
    good.truncate(use_count);

    // Base sensor: full solve fixes the source labeling (ascending roots)
    // and the amplitudes.
    let base = good[0];
    let base_solution =
        prony::PronySolution::solve(&moments[base], m, &cfg.prony).map_err(|source| {
            RecoveryError::Prony {
                sensor: base,
                source,
            }
        })?;
    records[base].status = SensorStatus::Good;
    records[base].role = Some(SensorRole::Base);

    let mut distances: Vec<Vec<f64>> = (0..m)
        .map(|i| vec![root_to_distance(base_solution.roots[i])])
        .collect();
    let mut assignments = Vec::new();
    for &sensor in &good[1..] {
        let coeffs = prony::solve_coefficients(&systems[sensor], &cfg.prony)
            .map_err(|source| RecoveryError::Prony { sensor, source })?;
        let domain = prony::RootDomain::for_probe(moments[sensor].probe);
        let roots = prony::find_roots(&coeffs, domain, &cfg.prony)
            .map_err(|source| RecoveryError::Prony { sensor, source })?;
        let assignment = match_roots(
            &base_solution.amplitudes,
            &roots,
            &moments[sensor],
            &cfg.matching,
        )
        .map_err(|source| RecoveryError::Assignment { sensor, source })?;
        for i in 0..m {
            distances[i].push(root_to_distance(roots[assignment.permutation[i]]));
        }
        records[sensor].status = SensorStatus::Good;
        records[sensor].role = Some(SensorRole::Matching);
        assignments.push(AssignmentRecord {
            sensor,
            permutation: assignment.permutation,
            residual: assignment.residual,
            runner_up: assignment.runner_up,
        });
    }

    Ok(NodeRecovery {
        amplitudes: base_solution.amplitudes,
        distances,
        good,
        sensors: records,
        assignments,
    })
}

fn check_monomial(moments: &[MomentVector], n: usize) -> Result<(), RecoveryError> {
    if moments.is_empty() {
        return Err(RecoveryError::NoData);
    }
    for (idx, mv) in moments.iter().enumerate() {
        if mv.probe != ProbeFamily::Monomial || mv.first_index != 0 {
            return Err(RecoveryError::ProbeMismatch {
                sensor: idx,
                expected: ProbeFamily::Monomial,
                first_index: 0,
            });
        }
        if mv.sensor.len() != n {
            return Err(RecoveryError::DimensionMismatch {
                sensor: idx,
                expected: n,
                got: mv.sensor.len(),
            });
        }
    }
    Ok(())
}

/// Recovers point sources from monomial moment vectors, one per sensor.
pub fn recover_points(
    moments: &[MomentVector],
    n: usize,
    m: usize,
    cfg: &PipelineConfig,
) -> Result<RecoveryReport, RecoveryError> {
    let started = Instant::now();
    if m == 0 {
        return Err(RecoveryError::Model(ModelError::EmptyModel));
    }
    check_monomial(moments, n)?;
    let use_count = required_good_sensors(ModelKind::Points, n);
    let rec = recover_prony_nodes(moments, m, use_count, cfg, |root| root)?;
    let model = build_point_model(moments, n, m, &rec, cfg)?;

    // Verification pass over every sensor, not just the consumed ones.
    let mut max_rel = 0.0_f64;
    for mv in moments {
        let synth = forward::point_moments(&model, &mv.sensor, mv.len())?;
        max_rel = max_rel.max(relative_gap(&synth.values, &mv.values));
    }
    if max_rel > cfg.tol_verify_rel {
        return Err(RecoveryError::VerificationFailed {
            max_err: max_rel,
            tol: cfg.tol_verify_rel,
        });
    }

    Ok(RecoveryReport {
        kind: ModelKind::Points,
        dim: n,
        model: SourceModel::Points(model),
        sensors: rec.sensors,
        assignments: rec.assignments,
        verification: Verification {
            max_rel_error: max_rel,
            tol: cfg.tol_verify_rel,
        },
        warnings: Vec::new(),
        truth_errors: None,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn build_point_model(
    moments: &[MomentVector],
    n: usize,
    m: usize,
    rec: &NodeRecovery,
    cfg: &PipelineConfig,
) -> Result<PointSources, RecoveryError> {
    let anchors: Vec<Vec<f64>> = rec
        .good
        .iter()
        .map(|&i| moments[i].sensor.clone())
        .collect();
    let mut nodes = Vec::with_capacity(m);
    for (i, dists) in rec.distances.iter().enumerate() {
        let x = geometry::trilaterate(&anchors, dists, &cfg.geometry)
            .map_err(|source| RecoveryError::Geometry { node: i, source })?;
        nodes.push(x);
    }
    let model = PointSources::new(n, nodes, rec.amplitudes.clone())?;
    if !model.is_valid() {
        return Err(RecoveryError::InvalidModel {
            flags: model.flags().to_vec(),
        });
    }
    Ok(model)
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max)
        / scale
}

// ---------------------------------------------------------------------------
// Hyperplane recovery
// ---------------------------------------------------------------------------

/// Recovers hyperplane sources from normalized Gaussian-probe moments.
pub fn recover_hyperplanes(
    moments: &[MomentVector],
    n: usize,
    m: usize,
    cfg: &PipelineConfig,
) -> Result<RecoveryReport, RecoveryError> {
    let started = Instant::now();
    if m == 0 {
        return Err(RecoveryError::Model(ModelError::EmptyModel));
    }
    if moments.is_empty() {
        return Err(RecoveryError::NoData);
    }
    for (idx, mv) in moments.iter().enumerate() {
        if mv.probe != ProbeFamily::Gaussian || mv.first_index != 1 || !mv.normalized {
            return Err(RecoveryError::ProbeMismatch {
                sensor: idx,
                expected: ProbeFamily::Gaussian,
                first_index: 1,
            });
        }
        if mv.sensor.len() != n {
            return Err(RecoveryError::DimensionMismatch {
                sensor: idx,
                expected: n,
                got: mv.sensor.len(),
            });
        }
    }
    let use_count = required_good_sensors(ModelKind::Hyperplanes, n);
    // Gaussian roots are λ = e^{−d²}; clamp the log at 0 so λ = 1 (a sensor
    // on the hyperplane) converts to distance 0.
    let rec = recover_prony_nodes(moments, m, use_count, cfg, |root| {
        (-root.ln()).max(0.0).sqrt()
    })?;

    let anchors: Vec<Vec<f64>> = rec
        .good
        .iter()
        .map(|&i| moments[i].sensor.clone())
        .collect();
    let mut normals = Vec::with_capacity(m);
    let mut offsets = Vec::with_capacity(m);
    for (i, dists) in rec.distances.iter().enumerate() {
        let plane = geometry::hyperplane_from_unsigned_distances(&anchors, dists, &cfg.geometry)
            .map_err(|source| RecoveryError::Geometry { node: i, source })?;
        normals.push(plane.normal().to_vec());
        offsets.push(plane.offset());
    }
    let model = HyperplaneSources::new(n, normals, offsets, rec.amplitudes.clone())?;
    // ρ = 0 is admissible here (a source through a sensor), so only
    // collision-type flags are fatal.
    let fatal: Vec<ModelFlag> = model
        .flags()
        .iter()
        .copied()
        .filter(|f| *f != ModelFlag::NonPositiveOffset)
        .collect();
    if !fatal.is_empty() {
        return Err(RecoveryError::InvalidModel { flags: fatal });
    }

    let mut max_rel = 0.0_f64;
    for mv in moments {
        let synth = forward::hyperplane_moments(&model, &mv.sensor, m)?;
        let count = mv.len().min(synth.len());
        max_rel = max_rel.max(relative_gap(&synth.values[..count], &mv.values[..count]));
    }
    if max_rel > cfg.tol_verify_rel {
        return Err(RecoveryError::VerificationFailed {
            max_err: max_rel,
            tol: cfg.tol_verify_rel,
        });
    }

    Ok(RecoveryReport {
        kind: ModelKind::Hyperplanes,
        dim: n,
        model: SourceModel::Hyperplanes(model),
        sensors: rec.sensors,
        assignments: rec.assignments,
        verification: Verification {
            max_rel_error: max_rel,
            tol: cfg.tol_verify_rel,
        },
        warnings: Vec::new(),
        truth_errors: None,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

// ---------------------------------------------------------------------------
// Radial recovery
// ---------------------------------------------------------------------------

/// Extraction grid cap for one trace: keep λ·d below the configured bound
/// (d estimated from where the trace decays) and stay where G is usable.
///
/// The decay threshold matches the kernel's support definition, so the
/// distance estimate errs high — the safe direction for the even-moment
/// fit, whose truncation bias grows with λ·d.
fn radial_lambda_max(
    trace: &SphericalMeanTrace,
    kernel: &RadialKernel,
    n: usize,
    cfg: &PipelineConfig,
) -> Result<f64, HankelError> {
    let decay_grid = hankel::default_lambda_grid(kernel, n, 64, cfg.extract.g_min_rel)?;
    let v_max = trace.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let t_dec = trace
        .radii
        .iter()
        .zip(&trace.values)
        .rev()
        .find(|(_, v)| v.abs() > 1e-12 * v_max)
        .map(|(t, _)| *t)
        .unwrap_or(0.0);
    let d_est = (t_dec - kernel.support_radius()).max(0.25);
    Ok(decay_grid.last().unwrap().min(cfg.radial_z_max / d_est))
}

/// Extracts the even moments of one trace, shrinking the λ grid when the
/// fit-residual gate reports truncation bias.
fn extract_trace_moments(
    trace: &SphericalMeanTrace,
    kernel: &RadialKernel,
    n: usize,
    m: usize,
    cfg: &PipelineConfig,
) -> Result<Vec<f64>, HankelError> {
    let mut lambda_max = radial_lambda_max(trace, kernel, n, cfg)?;
    let mut last_err = HankelError::ProfileVanishes;
    for _ in 0..5 {
        let grid: Vec<f64> = (0..64).map(|i| lambda_max * i as f64 / 63.0).collect();
        let profile = hankel::hankel_transform(kernel, n, &grid)?;
        match hankel::extract_even_moments(trace, &profile, n, m, &cfg.extract) {
            Ok(mu) => return Ok(mu),
            Err(e @ HankelError::GridTooCoarse { .. }) if lambda_max > 1e-3 => {
                last_err = e;
                lambda_max *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

/// Recovers radial sources from sampled traces, one per sensor: even
/// moments extracted per sensor form a Prony system in the squared
/// distances, which then follows the point-source path.
pub fn recover_radial(
    traces: &[SphericalMeanTrace],
    kernel: &RadialKernel,
    n: usize,
    m: usize,
    cfg: &PipelineConfig,
) -> Result<RecoveryReport, RecoveryError> {
    let started = Instant::now();
    if m == 0 {
        return Err(RecoveryError::Model(ModelError::EmptyModel));
    }
    if traces.is_empty() {
        return Err(RecoveryError::NoData);
    }
    let mut warnings = Vec::new();
    let mut moments = Vec::with_capacity(traces.len());
    for (idx, trace) in traces.iter().enumerate() {
        if trace.sensor.len() != n {
            return Err(RecoveryError::DimensionMismatch {
                sensor: idx,
                expected: n,
                got: trace.sensor.len(),
            });
        }
        let v_max = trace.values.iter().fold(0.0_f64, |mx, v| mx.max(v.abs()));
        let tail_start = trace.radii.len().saturating_sub(trace.radii.len() / 50 + 1);
        if trace.values[tail_start..]
            .iter()
            .any(|v| v.abs() > 1e-6 * v_max)
        {
            warnings.push(format!(
                "sensor {idx}: trace has not decayed at the end of the radius grid; \
                 moments may be biased"
            ));
        }
        let mu = extract_trace_moments(trace, kernel, n, m, cfg).map_err(|source| {
            RecoveryError::Extraction {
                sensor: idx,
                source,
            }
        })?;
        moments.push(MomentVector {
            sensor: trace.sensor.clone(),
            probe: ProbeFamily::Monomial,
            normalized: false,
            first_index: 0,
            values: mu,
        });
    }

    let use_count = required_good_sensors(ModelKind::Radial, n);
    // Prony nodes are squared distances here; the moments are only as good
    // as the extraction, so the consistency gates are opened up accordingly.
    let mut radial_cfg = cfg.clone();
    radial_cfg.matching.tol_match_rel = cfg.radial_match_rel;
    radial_cfg.prony.tol_res = cfg.radial_moment_res;
    let rec = recover_prony_nodes(&moments, m, use_count, &radial_cfg, |root| {
        root.max(0.0).sqrt()
    })?;
    let points = build_point_model(&moments, n, m, &rec, cfg)?;
    let model = RadialSources::new(
        n,
        points.nodes().to_vec(),
        points.amplitudes().to_vec(),
        kernel.clone(),
    )?;

    let mut max_rel = 0.0_f64;
    for trace in traces {
        let synth = forward::radial_trace(&model, &trace.sensor, &trace.radii)?;
        max_rel = max_rel.max(relative_gap(&synth.values, &trace.values));
    }
    if max_rel > cfg.tol_verify_trace_rel {
        return Err(RecoveryError::VerificationFailed {
            max_err: max_rel,
            tol: cfg.tol_verify_trace_rel,
        });
    }

    Ok(RecoveryReport {
        kind: ModelKind::Radial,
        dim: n,
        model: SourceModel::Radial(model),
        sensors: rec.sensors,
        assignments: rec.assignments,
        verification: Verification {
            max_rel_error: max_rel,
            tol: cfg.tol_verify_trace_rel,
        },
        warnings,
        truth_errors: None,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}
