//! Exact synthetic data for the recovery procedures: per-sensor moment
//! vectors for point and hyperplane sources, sampled spherical-mean traces
//! for radial sources, and the colliding-amplitude counterexample scenarios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    dist, dot, HyperplaneSources, ModelError, PointSources, RadialSources, SensorSet,
};
use crate::quad::{self, QuadError};

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("only ambient dimensions 2 and 3 are supported for traces (got {0})")]
    UnsupportedDimension(usize),
    #[error("radius grid must be strictly increasing and nonnegative")]
    BadGrid,
    #[error("quadrature failure: {0}")]
    Quadrature(#[from] QuadError),
}

/// Which probe family produced a moment sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeFamily {
    /// `h_l(t) = t^l`, indices l = 0, 1, ...
    Monomial,
    /// `h_l(t) = e^{−l t²}`, indices l = 1, 2, ...
    Gaussian,
}

/// A per-sensor sequence of probe evaluations `τ_l` of the transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub sensor: Vec<f64>,
    pub probe: ProbeFamily,
    /// For Gaussian probes: whether the factor (π/l)^{−(n−1)/2} has been
    /// applied. Monomial probes carry no normalization.
    pub normalized: bool,
    /// Index of the first stored value (0 for monomial, 1 for Gaussian).
    pub first_index: usize,
    pub values: Vec<f64>,
}

impl MomentVector {
    /// The moment τ_l, if l lies in the stored index range.
    pub fn tau(&self, l: usize) -> Option<f64> {
        l.checked_sub(self.first_index)
            .and_then(|i| self.values.get(i))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values with the Gaussian normalization removed, matching the raw
    /// transform evaluations `(R_y f)(h_l)`. Needs the ambient dimension for
    /// the (π/l)^{(n−1)/2} factor.
    pub fn raw_values(&self, dim: usize) -> Vec<f64> {
        match (self.probe, self.normalized) {
            (ProbeFamily::Gaussian, true) => self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let l = (i + self.first_index) as f64;
                    (std::f64::consts::PI / l).powf((dim as f64 - 1.0) / 2.0) * v
                })
                .collect(),
            _ => self.values.clone(),
        }
    }
}

/// Samples of `(R_y f)(t)` on a radius grid, including the `t^{n−1}` factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalMeanTrace {
    pub sensor: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Point-source moments
// ---------------------------------------------------------------------------

/// Monomial moments `τ_l = Σ_k a_k |y − x_k|^l` for l = 0 .. count−1.
pub fn point_moments(
    model: &PointSources,
    sensor: &[f64],
    count: usize,
) -> Result<MomentVector, ForwardError> {
    if sensor.len() != model.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: model.dim(),
            got: sensor.len(),
        }
        .into());
    }
    let distances: Vec<f64> = model.nodes().iter().map(|x| dist(x, sensor)).collect();
    let values = (0..count)
        .map(|l| {
            model
                .amplitudes()
                .iter()
                .zip(&distances)
                .map(|(a, d)| a * d.powi(l as i32))
                .sum()
        })
        .collect();
    Ok(MomentVector {
        sensor: sensor.to_vec(),
        probe: ProbeFamily::Monomial,
        normalized: false,
        first_index: 0,
        values,
    })
}

// ---------------------------------------------------------------------------
// Hyperplane-source moments
// ---------------------------------------------------------------------------

/// Normalized Gaussian-probe moments `τ_l = Σ_k a_k λ_k^l` for l = 1 .. 2m,
/// with `λ_k = exp(−(ρ_k − ⟨y, θ_k⟩)²)`.
///
/// The raw transform values `(R_y f)(h_l)` carry the extra factor
/// `(π/l)^{(n−1)/2}` and are recovered by [`MomentVector::raw_values`].
pub fn hyperplane_moments(
    model: &HyperplaneSources,
    sensor: &[f64],
    m: usize,
) -> Result<MomentVector, ForwardError> {
    if sensor.len() != model.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: model.dim(),
            got: sensor.len(),
        }
        .into());
    }
    let lambdas: Vec<f64> = model
        .planes()
        .iter()
        .map(|p| {
            let signed = p.offset() - dot(sensor, p.normal());
            (-signed * signed).exp()
        })
        .collect();
    let values = (1..=2 * m)
        .map(|l| {
            model
                .amplitudes()
                .iter()
                .zip(&lambdas)
                .map(|(a, lam)| a * lam.powi(l as i32))
                .sum()
        })
        .collect();
    Ok(MomentVector {
        sensor: sensor.to_vec(),
        probe: ProbeFamily::Gaussian,
        normalized: true,
        first_index: 1,
        values,
    })
}

// ---------------------------------------------------------------------------
// Radial-source traces
// ---------------------------------------------------------------------------

/// Mean of `g(|c + tθ|)` over the unit circle, times 2π (4096-point
/// periodic trapezoid; spectrally accurate for smooth kernels).
fn sphere_integral_2d(kernel: &crate::hankel::RadialKernel, d: f64, t: f64) -> f64 {
    const N: usize = 4096;
    let mut sum = 0.0;
    for i in 0..N {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / N as f64;
        let r2 = d * d + t * t + 2.0 * d * t * phi.cos();
        sum += kernel.eval(r2.max(0.0).sqrt());
    }
    sum * 2.0 * std::f64::consts::PI / N as f64
}

/// `∫_{S²} g(|c + tθ|) dθ` via the exact radial reduction
/// `(2π/(dt)) ∫_{|d−t|}^{d+t} g(u) u du`.
fn sphere_integral_3d(
    kernel: &crate::hankel::RadialKernel,
    d: f64,
    t: f64,
) -> Result<f64, ForwardError> {
    if d == 0.0 {
        return Ok(4.0 * std::f64::consts::PI * kernel.eval(t));
    }
    let inner = quad::integrate(|u| kernel.eval(u) * u, (d - t).abs(), d + t, 1e-12, 1e-10)?;
    Ok(2.0 * std::f64::consts::PI / (d * t) * inner)
}

/// The spherical-mean trace `(R_y f)(t) = t^{n−1} ∫_{S^{n−1}} f(y + tθ) dθ`
/// sampled on the given radius grid. Supports n ∈ {2, 3}.
pub fn radial_trace(
    model: &RadialSources,
    sensor: &[f64],
    radii: &[f64],
) -> Result<SphericalMeanTrace, ForwardError> {
    let n = model.dim();
    if sensor.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            got: sensor.len(),
        }
        .into());
    }
    if !matches!(n, 2 | 3) {
        return Err(ForwardError::UnsupportedDimension(n));
    }
    if radii.is_empty() || radii[0] < 0.0 || !radii.windows(2).all(|w| w[1] > w[0]) {
        return Err(ForwardError::BadGrid);
    }
    let distances: Vec<f64> = model.nodes().iter().map(|x| dist(x, sensor)).collect();
    let mut values = Vec::with_capacity(radii.len());
    for &t in radii {
        if t == 0.0 {
            values.push(0.0);
            continue;
        }
        let mut total = 0.0;
        for (a, &d) in model.amplitudes().iter().zip(&distances) {
            let sphere = match n {
                2 => sphere_integral_2d(model.kernel(), d, t),
                _ => sphere_integral_3d(model.kernel(), d, t)?,
            };
            total += a * sphere;
        }
        values.push(t.powi(n as i32 - 1) * total);
    }
    Ok(SphericalMeanTrace {
        sensor: sensor.to_vec(),
        radii: radii.to_vec(),
        values,
    })
}

/// Uniform grid of `count` radii on [0, T] with
/// `T = max_k |y − x_k| + kernel support radius + 1`.
pub fn default_radial_grid(model: &RadialSources, sensor: &[f64], count: usize) -> Vec<f64> {
    let d_max = model
        .nodes()
        .iter()
        .map(|x| dist(x, sensor))
        .fold(0.0_f64, f64::max);
    let t_max = d_max + model.kernel().support_radius() + 1.0;
    (0..count)
        .map(|i| t_max * i as f64 / (count - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Colliding-amplitude counterexamples
// ---------------------------------------------------------------------------

/// Two distinct unit-amplitude point pairs that feed identical moments to
/// three non-collinear sensors. Equal amplitudes break root-to-node
/// assignment, so the two signals cannot be told apart from this data.
pub fn counterexample_points() -> (PointSources, PointSources, SensorSet) {
    let f1 = PointSources::new(2, vec![vec![0.0, 1.0], vec![2.0, -1.0]], vec![1.0, 1.0]).unwrap();
    let f2 = PointSources::new(2, vec![vec![0.0, -1.0], vec![2.0, 1.0]], vec![1.0, 1.0]).unwrap();
    let sensors = SensorSet::new(2, vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
    (f1, f2, sensors)
}

/// Two distinct unit-amplitude line pairs through the origin that feed
/// identical Gaussian-probe moments to five sensors in general position.
/// The zero offsets also sit outside the ρ > 0 hypothesis, so these models
/// carry validity flags.
pub fn counterexample_hyperplanes() -> (HyperplaneSources, HyperplaneSources, SensorSet) {
    let s5 = 5.0_f64.sqrt();
    let f1 = HyperplaneSources::new(
        2,
        vec![vec![1.0 / s5, -2.0 / s5], vec![2.0 / s5, 1.0 / s5]],
        vec![0.0, 0.0],
        vec![1.0, 1.0],
    )
    .unwrap();
    let f2 = HyperplaneSources::new(
        2,
        vec![vec![1.0 / s5, 2.0 / s5], vec![2.0 / s5, -1.0 / s5]],
        vec![0.0, 0.0],
        vec![1.0, 1.0],
    )
    .unwrap();
    let sensors = SensorSet::new(
        2,
        vec![
            vec![-1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, -1.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ],
    )
    .unwrap();
    (f1, f2, sensors)
}
