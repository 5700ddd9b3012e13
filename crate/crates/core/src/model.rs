//! Domain types for sources and sensors, their admissibility conditions, and
//! the sensor-count formulas that guarantee recoverability.
//!
//! Models that violate a theorem hypothesis needed only for *uniqueness*
//! (colliding amplitudes, zero offsets, coincident nodes) are still
//! constructible — the negative-control scenarios require them — but carry
//! [`ModelFlag`]s. Recovery refuses flagged models with a typed error instead
//! of silently proceeding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hankel::RadialKernel;

/// Relative singular-value threshold deciding affine rank in
/// [`validate_general_position`]. Exact data is synthetic, so this only
/// guards against float noise.
pub const EPS_GENERAL_POSITION: f64 = 1e-9;

/// How far a stored unit normal may deviate from unit length.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;

/// Kernel values beyond the declared support radius must stay below this.
pub const KERNEL_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ambient dimension must be at least 2 (got {0})")]
    UnsupportedDimension(usize),
    #[error("model must contain at least one source")]
    EmptyModel,
    #[error("sensor set must contain at least one point")]
    EmptySensors,
    #[error("sensor points must be pairwise distinct (indices {0} and {1})")]
    DuplicateSensors(usize, usize),
    #[error("normal vector {index} has length {norm} (must be 1 within {UNIT_NORMAL_TOL:e})")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("field `{0}` has length {1}, expected {2}")]
    LengthMismatch(&'static str, usize, usize),
    #[error("non-finite coordinate or parameter encountered")]
    NonFinite,
}

/// A violated theorem hypothesis carried by an otherwise valid model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelFlag {
    /// Some amplitude is zero.
    ZeroAmplitude,
    /// Two amplitudes coincide; root-to-source assignment loses uniqueness.
    AmplitudeCollision,
    /// Two nodes coincide.
    CoincidentNodes,
    /// Two hyperplanes coincide as sets.
    DuplicateHyperplanes,
    /// A hyperplane offset is not strictly positive.
    NonPositiveOffset,
    /// The kernel does not decay below the tail threshold past its declared
    /// support radius.
    SlowKernelDecay,
}

// ---------------------------------------------------------------------------
// Small vector helpers shared across the crate.
// ---------------------------------------------------------------------------

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean length.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn all_finite(points: &[Vec<f64>]) -> bool {
    points.iter().flatten().all(|v| v.is_finite())
}

fn check_points(points: &[Vec<f64>], dim: usize) -> Result<(), ModelError> {
    for p in points {
        if p.len() != dim {
            return Err(ModelError::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    if !all_finite(points) {
        return Err(ModelError::NonFinite);
    }
    Ok(())
}

fn amplitude_flags(amplitudes: &[f64], flags: &mut Vec<ModelFlag>) {
    if amplitudes.contains(&0.0) {
        flags.push(ModelFlag::ZeroAmplitude);
    }
    let collision = amplitudes.iter().enumerate().any(|(i, a)| {
        amplitudes[i + 1..]
            .iter()
            .any(|b| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0))
    });
    if collision {
        flags.push(ModelFlag::AmplitudeCollision);
    }
}

// ---------------------------------------------------------------------------
// Source models
// ---------------------------------------------------------------------------

/// A weighted sum of point masses `Σ a_k δ_{x_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSources {
    dim: usize,
    nodes: Vec<Vec<f64>>,
    amplitudes: Vec<f64>,
    flags: Vec<ModelFlag>,
}

impl PointSources {
    pub fn new(dim: usize, nodes: Vec<Vec<f64>>, amplitudes: Vec<f64>) -> Result<Self, ModelError> {
        if dim < 2 {
            return Err(ModelError::UnsupportedDimension(dim));
        }
        if nodes.is_empty() {
            return Err(ModelError::EmptyModel);
        }
        if amplitudes.len() != nodes.len() {
            return Err(ModelError::LengthMismatch(
                "amplitudes",
                amplitudes.len(),
                nodes.len(),
            ));
        }
        check_points(&nodes, dim)?;
        if !amplitudes.iter().all(|a| a.is_finite()) {
            return Err(ModelError::NonFinite);
        }

        let mut flags = Vec::new();
        amplitude_flags(&amplitudes, &mut flags);
        let coincident = nodes
            .iter()
            .enumerate()
            .any(|(i, p)| nodes[i + 1..].iter().any(|q| dist(p, q) == 0.0));
        if coincident {
            flags.push(ModelFlag::CoincidentNodes);
        }
        Ok(Self {
            dim,
            nodes,
            amplitudes,
            flags,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn flags(&self) -> &[ModelFlag] {
        &self.flags
    }

    /// True when every theorem hypothesis holds.
    pub fn is_valid(&self) -> bool {
        self.flags.is_empty()
    }
}

/// A canonical hyperplane `⟨x, normal⟩ = offset` with unit normal.
///
/// `(θ, ρ)` and `(−θ, −ρ)` denote the same set; the canonical form has
/// `offset ≥ 0`, and when `offset = 0` the first nonzero component of the
/// normal is positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self, ModelError> {
        if normal.len() < 2 {
            return Err(ModelError::UnsupportedDimension(normal.len()));
        }
        if !normal.iter().all(|v| v.is_finite()) || !offset.is_finite() {
            return Err(ModelError::NonFinite);
        }
        let n = norm(&normal);
        if (n - 1.0).abs() > UNIT_NORMAL_TOL {
            return Err(ModelError::NonUnitNormal { index: 0, norm: n });
        }
        let mut plane = Self { normal, offset };
        plane.canonicalize();
        Ok(plane)
    }

    /// Builds a hyperplane from any nonzero normal, normalizing it and the
    /// offset together.
    pub fn from_unnormalized(normal: Vec<f64>, offset: f64) -> Result<Self, ModelError> {
        let n = norm(&normal);
        if n == 0.0 || !n.is_finite() {
            return Err(ModelError::NonFinite);
        }
        let scaled: Vec<f64> = normal.iter().map(|v| v / n).collect();
        // Renormalize once more: x/||x|| can be 1 ulp off unit length.
        let n2 = norm(&scaled);
        let scaled: Vec<f64> = scaled.iter().map(|v| v / n2).collect();
        let mut plane = Self {
            normal: scaled,
            offset: offset / n / n2,
        };
        plane.canonicalize();
        Ok(plane)
    }

    fn canonicalize(&mut self) {
        let flip = if self.offset < 0.0 {
            true
        } else if self.offset == 0.0 {
            match self.normal.iter().find(|v| **v != 0.0) {
                Some(first) => *first < 0.0,
                None => false,
            }
        } else {
            false
        };
        if flip {
            for v in &mut self.normal {
                *v = -*v;
            }
            self.offset = -self.offset;
        }
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// True when the two hyperplanes are the same point set within `tol`,
    /// regardless of orientation.
    pub fn same_locus(&self, other: &Hyperplane, tol: f64) -> bool {
        let direct = self
            .normal
            .iter()
            .zip(&other.normal)
            .all(|(a, b)| (a - b).abs() <= tol)
            && (self.offset - other.offset).abs() <= tol;
        let flipped = self
            .normal
            .iter()
            .zip(&other.normal)
            .all(|(a, b)| (a + b).abs() <= tol)
            && (self.offset + other.offset).abs() <= tol;
        direct || flipped
    }
}

/// A weighted sum of hyperplane measures `Σ a_k δ_{(θ_k, ρ_k)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSources {
    dim: usize,
    planes: Vec<Hyperplane>,
    amplitudes: Vec<f64>,
    flags: Vec<ModelFlag>,
}

impl HyperplaneSources {
    pub fn new(
        dim: usize,
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        amplitudes: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if dim < 2 {
            return Err(ModelError::UnsupportedDimension(dim));
        }
        if normals.is_empty() {
            return Err(ModelError::EmptyModel);
        }
        if offsets.len() != normals.len() {
            return Err(ModelError::LengthMismatch(
                "offsets",
                offsets.len(),
                normals.len(),
            ));
        }
        if amplitudes.len() != normals.len() {
            return Err(ModelError::LengthMismatch(
                "amplitudes",
                amplitudes.len(),
                normals.len(),
            ));
        }
        check_points(&normals, dim)?;
        if !offsets.iter().chain(&amplitudes).all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let mut planes = Vec::with_capacity(normals.len());
        for (i, (normal, &offset)) in normals.into_iter().zip(&offsets).enumerate() {
            let n = norm(&normal);
            if (n - 1.0).abs() > UNIT_NORMAL_TOL {
                return Err(ModelError::NonUnitNormal { index: i, norm: n });
            }
            planes.push(Hyperplane::new(normal, offset)?);
        }

        let mut flags = Vec::new();
        amplitude_flags(&amplitudes, &mut flags);
        if planes.iter().any(|p| p.offset() <= 0.0) {
            flags.push(ModelFlag::NonPositiveOffset);
        }
        let duplicate = planes
            .iter()
            .enumerate()
            .any(|(i, p)| planes[i + 1..].iter().any(|q| p.same_locus(q, 1e-12)));
        if duplicate {
            flags.push(ModelFlag::DuplicateHyperplanes);
        }
        Ok(Self {
            dim,
            planes,
            amplitudes,
            flags,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn planes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn flags(&self) -> &[ModelFlag] {
        &self.flags
    }

    pub fn is_valid(&self) -> bool {
        self.flags.is_empty()
    }
}

/// A sum of translated radial kernels `f(x) = Σ a_k g(|x − x_k|)`.
#[derive(Debug, Clone)]
pub struct RadialSources {
    points: PointSources,
    kernel: RadialKernel,
    flags: Vec<ModelFlag>,
}

impl RadialSources {
    pub fn new(
        dim: usize,
        nodes: Vec<Vec<f64>>,
        amplitudes: Vec<f64>,
        kernel: RadialKernel,
    ) -> Result<Self, ModelError> {
        let points = PointSources::new(dim, nodes, amplitudes)?;
        let mut flags = points.flags().to_vec();
        let support = kernel.support_radius();
        let tail_ok = [1.0, 1.1, 1.5, 2.0]
            .iter()
            .all(|&c| kernel.eval(c * support).abs() < KERNEL_TAIL_TOL);
        if !tail_ok {
            flags.push(ModelFlag::SlowKernelDecay);
        }
        Ok(Self {
            points,
            kernel,
            flags,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        self.points.nodes()
    }

    pub fn amplitudes(&self) -> &[f64] {
        self.points.amplitudes()
    }

    pub fn kernel(&self) -> &RadialKernel {
        &self.kernel
    }

    pub fn flags(&self) -> &[ModelFlag] {
        &self.flags
    }

    pub fn is_valid(&self) -> bool {
        self.flags.is_empty()
    }
}

/// The finite set Γ of sensor points at which the transform is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl SensorSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if dim < 2 {
            return Err(ModelError::UnsupportedDimension(dim));
        }
        if points.is_empty() {
            return Err(ModelError::EmptySensors);
        }
        check_points(&points, dim)?;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(ModelError::DuplicateSensors(i, j));
                }
            }
        }
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

// ---------------------------------------------------------------------------
// Admissibility and counting
// ---------------------------------------------------------------------------

/// Which source family a scenario or recovery run concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Points,
    Hyperplanes,
    Radial,
}

/// Visits every k-subset of `0..n` in lexicographic order; stops early when
/// the callback returns `false`.
pub(crate) fn for_each_combination(
    n: usize,
    k: usize,
    mut f: impl FnMut(&[usize]) -> bool,
) -> bool {
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return false;
        }
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return true;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// True iff every subset of n+1 sensor points is affinely independent —
/// equivalently, no hyperplane contains n+1 of them. Vacuously true when
/// there are at most n sensors.
///
/// Decided by the singular values of the n×n difference matrix of each
/// subset against its first point, with relative threshold
/// [`EPS_GENERAL_POSITION`].
pub fn validate_general_position(sensors: &SensorSet) -> bool {
    let n = sensors.dim();
    let pts = sensors.points();
    if pts.len() <= n {
        return true;
    }
    for_each_combination(pts.len(), n + 1, |subset| {
        let base = &pts[subset[0]];
        let diffs = DMatrix::from_fn(n, n, |r, c| pts[subset[r + 1]][c] - base[c]);
        let sv = diffs.singular_values();
        let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        smax > 0.0 && smin >= EPS_GENERAL_POSITION * smax
    })
}

/// Number of sensors sufficient for unique recovery of an m-source model in
/// dimension n.
pub fn min_sensor_count(kind: ModelKind, n: usize, m: usize) -> usize {
    debug_assert!(n >= 2 && m >= 1);
    match kind {
        // n·m(m−1) is always even, so the division is exact.
        ModelKind::Points | ModelKind::Radial => (n * m * (m - 1) + 2 * n + 2) / 2,
        ModelKind::Hyperplanes => n * m * (m - 1) + 2 * n + 1,
    }
}

/// Number of non-degenerate sensors the recovery procedure consumes.
pub fn required_good_sensors(kind: ModelKind, n: usize) -> usize {
    match kind {
        ModelKind::Points | ModelKind::Radial => n + 1,
        ModelKind::Hyperplanes => 2 * n + 1,
    }
}

// ---------------------------------------------------------------------------
// Scenario (model + sensors) with its JSON schema
// ---------------------------------------------------------------------------

/// Any of the three supported source models.
#[derive(Debug, Clone)]
pub enum SourceModel {
    Points(PointSources),
    Hyperplanes(HyperplaneSources),
    Radial(RadialSources),
}

impl SourceModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            SourceModel::Points(_) => ModelKind::Points,
            SourceModel::Hyperplanes(_) => ModelKind::Hyperplanes,
            SourceModel::Radial(_) => ModelKind::Radial,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SourceModel::Points(m) => m.dim(),
            SourceModel::Hyperplanes(m) => m.dim(),
            SourceModel::Radial(m) => m.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SourceModel::Points(m) => m.len(),
            SourceModel::Hyperplanes(m) => m.len(),
            SourceModel::Radial(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flags(&self) -> &[ModelFlag] {
        match self {
            SourceModel::Points(m) => m.flags(),
            SourceModel::Hyperplanes(m) => m.flags(),
            SourceModel::Radial(m) => m.flags(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.flags().is_empty()
    }
}

/// A complete problem instance: the unknown model plus the sensor set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    pub dim: usize,
    pub model: SourceModel,
    pub sensors: SensorSet,
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    dim: usize,
    model: RawModel,
    sensors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawModel {
    Points {
        nodes: Vec<Vec<f64>>,
        amplitudes: Vec<f64>,
    },
    Hyperplanes {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        amplitudes: Vec<f64>,
    },
    Radial {
        nodes: Vec<Vec<f64>>,
        amplitudes: Vec<f64>,
        kernel: RadialKernel,
    },
}

impl TryFrom<RawScenario> for Scenario {
    type Error = ModelError;

    fn try_from(raw: RawScenario) -> Result<Self, ModelError> {
        let model = match raw.model {
            RawModel::Points { nodes, amplitudes } => {
                SourceModel::Points(PointSources::new(raw.dim, nodes, amplitudes)?)
            }
            RawModel::Hyperplanes {
                normals,
                offsets,
                amplitudes,
            } => SourceModel::Hyperplanes(HyperplaneSources::new(
                raw.dim, normals, offsets, amplitudes,
            )?),
            RawModel::Radial {
                nodes,
                amplitudes,
                kernel,
            } => SourceModel::Radial(RadialSources::new(raw.dim, nodes, amplitudes, kernel)?),
        };
        let sensors = SensorSet::new(raw.dim, raw.sensors)?;
        Ok(Scenario {
            dim: raw.dim,
            model,
            sensors,
        })
    }
}

fn raw_model(model: &SourceModel) -> RawModel {
    match model {
        SourceModel::Points(m) => RawModel::Points {
            nodes: m.nodes.clone(),
            amplitudes: m.amplitudes.clone(),
        },
        SourceModel::Hyperplanes(m) => RawModel::Hyperplanes {
            normals: m.planes.iter().map(|p| p.normal().to_vec()).collect(),
            offsets: m.planes.iter().map(|p| p.offset()).collect(),
            amplitudes: m.amplitudes.clone(),
        },
        SourceModel::Radial(m) => RawModel::Radial {
            nodes: m.nodes().to_vec(),
            amplitudes: m.amplitudes().to_vec(),
            kernel: m.kernel().clone(),
        },
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> RawScenario {
        RawScenario {
            dim: s.dim,
            model: raw_model(&s.model),
            sensors: s.sensors.points.clone(),
        }
    }
}

impl Serialize for SourceModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        raw_model(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SourceModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawModel::deserialize(deserializer)?;
        let model = match raw {
            RawModel::Points { nodes, amplitudes } => {
                let dim = nodes.first().map(|p| p.len()).unwrap_or(0);
                SourceModel::Points(
                    PointSources::new(dim, nodes, amplitudes).map_err(D::Error::custom)?,
                )
            }
            RawModel::Hyperplanes {
                normals,
                offsets,
                amplitudes,
            } => {
                let dim = normals.first().map(|p| p.len()).unwrap_or(0);
                SourceModel::Hyperplanes(
                    HyperplaneSources::new(dim, normals, offsets, amplitudes)
                        .map_err(D::Error::custom)?,
                )
            }
            RawModel::Radial {
                nodes,
                amplitudes,
                kernel,
            } => {
                let dim = nodes.first().map(|p| p.len()).unwrap_or(0);
                SourceModel::Radial(
                    RadialSources::new(dim, nodes, amplitudes, kernel).map_err(D::Error::custom)?,
                )
            }
        };
        Ok(model)
    }
}
