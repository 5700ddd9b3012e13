//! Seeded random scenario synthesis. Every generated scenario honors the
//! model invariants (amplitude and node gaps, general position) and keeps
//! the sensor geometry inside the well-conditioned regime the exact-data
//! recovery suites expect. Generation is a pure function of the options.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::hankel::RadialKernel;
use crate::model::{
    dist, min_sensor_count, validate_general_position, HyperplaneSources, ModelError, ModelKind,
    PointSources, RadialSources, Scenario, SensorSet, SourceModel,
};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("no admissible scenario found in {0} attempts")]
    ExhaustedAttempts(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const MAX_ATTEMPTS: usize = 100;
/// Minimum gap between any two amplitudes and between any two nodes.
const AMPLITUDE_GAP: f64 = 0.3;
const NODE_GAP: f64 = 0.3;

/// What to generate and from which seed.
#[derive(Debug, Clone)]
pub struct GenOptions {
    pub kind: ModelKind,
    pub dim: usize,
    pub sources: usize,
    pub seed: u64,
    /// Kernel for radial scenarios (unit Gaussian when absent).
    pub kernel: Option<RadialKernel>,
}

fn draw_point(rng: &mut ChaCha20Rng, dim: usize, half_box: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-half_box..half_box))
        .collect()
}

fn draw_separated_points(
    rng: &mut ChaCha20Rng,
    count: usize,
    dim: usize,
    half_box: f64,
    gap: f64,
) -> Option<Vec<Vec<f64>>> {
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ok = false;
        for _ in 0..200 {
            let p = draw_point(rng, dim, half_box);
            if points.iter().all(|q| dist(&p, q) >= gap) {
                points.push(p);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    Some(points)
}

fn draw_amplitudes(rng: &mut ChaCha20Rng, count: usize) -> Option<Vec<f64>> {
    let mut amps: Vec<f64> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ok = false;
        for _ in 0..200 {
            let a: f64 = rng.random_range(0.5..4.0);
            if amps.iter().all(|b| (a - b).abs() >= AMPLITUDE_GAP) {
                amps.push(a);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    Some(amps)
}

fn min_gap(values: &[f64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).abs());
        }
    }
    gap
}

/// Sensors for point/radial scenarios: general position, distances to the
/// nodes bounded away from 0, and per-sensor distance gaps so the Hankel
/// systems stay comfortably regular.
fn draw_point_sensors(
    rng: &mut ChaCha20Rng,
    nodes: &[Vec<f64>],
    dim: usize,
    count: usize,
    dist_gap: f64,
) -> Option<SensorSet> {
    let mut sensors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ok = false;
        for _ in 0..500 {
            let y = draw_point(rng, dim, 3.0);
            let d: Vec<f64> = nodes.iter().map(|x| dist(x, &y)).collect();
            let d_max = d.iter().cloned().fold(0.0_f64, f64::max);
            // Gaps relative to the largest distance drive the conditioning
            // of the scaled Prony system at this sensor.
            if d.iter().all(|&v| v >= 0.5)
                && min_gap(&d) >= dist_gap.max(0.08 * d_max)
                && sensors.iter().all(|s| dist(s, &y) >= 1e-3)
            {
                sensors.push(y);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    let set = SensorSet::new(dim, sensors).ok()?;
    validate_general_position(&set).then_some(set)
}

fn draw_hyperplane_model(rng: &mut ChaCha20Rng, dim: usize, m: usize) -> Option<HyperplaneSources> {
    let mut normals: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut offsets: Vec<f64> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut ok = false;
        for _ in 0..200 {
            let raw = draw_point(rng, dim, 1.0);
            let len = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if len < 0.1 {
                continue;
            }
            let normal: Vec<f64> = raw.iter().map(|v| v / len).collect();
            let offset: f64 = rng.random_range(0.2..2.0);
            // Keep the new plane clearly distinct from the previous ones.
            let distinct = normals.iter().zip(&offsets).all(|(n2, &o2)| {
                let cosine: f64 = normal.iter().zip(n2).map(|(a, b)| a * b).sum();
                (cosine.abs() - 1.0).abs() > 1e-2 || (offset - o2).abs() > 0.2
            });
            if distinct {
                normals.push(normal);
                offsets.push(offset);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    // Re-normalize exactly enough for the 1e-12 constructor gate.
    let normals = normals
        .into_iter()
        .map(|n| {
            let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            n.into_iter().map(|v| v / len).collect()
        })
        .collect();
    let amplitudes = draw_amplitudes(rng, m)?;
    HyperplaneSources::new(dim, normals, offsets, amplitudes).ok()
}

/// Sensors for hyperplane scenarios: all unsigned distances small enough to
/// keep the Gaussian nodes λ = e^{−d²} away from 0, with per-sensor gaps.
fn draw_hyperplane_sensors(
    rng: &mut ChaCha20Rng,
    model: &HyperplaneSources,
    dim: usize,
    count: usize,
) -> Option<SensorSet> {
    let mut sensors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut ok = false;
        for _ in 0..500 {
            let y = draw_point(rng, dim, 2.5);
            let lambdas: Vec<f64> = model
                .planes()
                .iter()
                .map(|p| {
                    let d = crate::geometry::unsigned_distance(&y, p);
                    (-d * d).exp()
                })
                .collect();
            if lambdas.iter().all(|&l| l >= 0.05)
                && min_gap(&lambdas) >= 0.02
                && sensors.iter().all(|s| dist(s, &y) >= 1e-3)
            {
                sensors.push(y);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    let set = SensorSet::new(dim, sensors).ok()?;
    validate_general_position(&set).then_some(set)
}

/// Generates a valid scenario for the given options, retrying the draw up
/// to 100 times before giving up.
pub fn generate(opts: &GenOptions) -> Result<Scenario, GenError> {
    if opts.dim < 2 {
        return Err(GenError::Model(ModelError::UnsupportedDimension(opts.dim)));
    }
    if opts.sources == 0 {
        return Err(GenError::Model(ModelError::EmptyModel));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let count = min_sensor_count(opts.kind, opts.dim, opts.sources);
    for _ in 0..MAX_ATTEMPTS {
        let scenario = match opts.kind {
            ModelKind::Points => try_points(&mut rng, opts, count, 0.15, false),
            ModelKind::Radial => try_points(&mut rng, opts, count, 0.2, true),
            ModelKind::Hyperplanes => try_hyperplanes(&mut rng, opts, count),
        };
        if let Some(s) = scenario {
            return Ok(s);
        }
    }
    Err(GenError::ExhaustedAttempts(MAX_ATTEMPTS))
}

fn try_points(
    rng: &mut ChaCha20Rng,
    opts: &GenOptions,
    count: usize,
    dist_gap: f64,
    radial: bool,
) -> Option<Scenario> {
    let nodes = draw_separated_points(rng, opts.sources, opts.dim, 2.0, NODE_GAP)?;
    let amplitudes = draw_amplitudes(rng, opts.sources)?;
    let sensors = draw_point_sensors(rng, &nodes, opts.dim, count, dist_gap)?;
    let model = if radial {
        let kernel = opts.kernel.clone().unwrap_or(RadialKernel::gaussian(1.0));
        SourceModel::Radial(RadialSources::new(opts.dim, nodes, amplitudes, kernel).ok()?)
    } else {
        SourceModel::Points(PointSources::new(opts.dim, nodes, amplitudes).ok()?)
    };
    model.is_valid().then_some(Scenario {
        dim: opts.dim,
        model,
        sensors,
    })
}

fn try_hyperplanes(rng: &mut ChaCha20Rng, opts: &GenOptions, count: usize) -> Option<Scenario> {
    let model = draw_hyperplane_model(rng, opts.dim, opts.sources)?;
    let sensors = draw_hyperplane_sensors(rng, &model, opts.dim, count)?;
    if !model.is_valid() {
        return None;
    }
    Some(Scenario {
        dim: opts.dim,
        model: SourceModel::Hyperplanes(model),
        sensors,
    })
}
