//! Geometric inversion: a point from its distances to n+1 affinely
//! independent anchors, a hyperplane from its unsigned distances to 2n+1
//! anchors in general position, and the bisector/equidistance loci used for
//! degeneracy diagnostics.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{dist, dot, norm, Hyperplane, ModelError};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("anchors are affinely dependent")]
    AffinelyDependentAnchors,
    #[error(
        "recovered point misses the given distances (worst residual {residual:e}, tol {tol:e})"
    )]
    InconsistentDistances { residual: f64, tol: f64 },
    #[error("the two points coincide; no bisector exists")]
    CoincidentPoints,
    #[error("the two hyperplanes coincide as sets")]
    IdenticalHyperplanes,
    #[error("expected {expected} anchors/distances, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("need at least {need} anchors, got {got}")]
    NeedMoreAnchors { need: usize, got: usize },
    #[error("no hyperplane is consistent with the unsigned distances")]
    NoConsistentHyperplane,
    #[error("{} hyperplanes are consistent with the unsigned distances", candidates.len())]
    MultipleCandidates { candidates: Vec<Hyperplane> },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Tolerances for the geometric solvers.
#[derive(Debug, Clone)]
pub struct GeometryConfig {
    /// Accepted deviation of a candidate normal from unit length.
    pub tol_unit: f64,
    /// Distance residuals are checked against `tol_geo_rel · (1 + ‖d‖)`.
    pub tol_geo_rel: f64,
    /// Affine-rank threshold (relative to σ_max).
    pub eps_rank: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            tol_unit: 1e-6,
            tol_geo_rel: 1e-6,
            eps_rank: 1e-9,
        }
    }
}

fn affinely_independent(anchors: &[Vec<f64>], eps: f64) -> bool {
    let n = anchors[0].len();
    let rows = anchors.len() - 1;
    let diffs = DMatrix::from_fn(rows, n, |r, c| anchors[r + 1][c] - anchors[0][c]);
    let sv = diffs.singular_values();
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    smax > 0.0 && smin >= eps * smax
}

/// Recovers the point with the given distances to n+1 affinely independent
/// anchors, by linearizing the squared-distance differences against the
/// first anchor. All n+1 distance residuals are verified on the result.
pub fn trilaterate(
    anchors: &[Vec<f64>],
    distances: &[f64],
    cfg: &GeometryConfig,
) -> Result<Vec<f64>, GeometryError> {
    let n = anchors
        .first()
        .ok_or(GeometryError::NeedMoreAnchors { need: 1, got: 0 })?
        .len();
    if anchors.len() != n + 1 {
        return Err(GeometryError::CountMismatch {
            expected: n + 1,
            got: anchors.len(),
        });
    }
    if distances.len() != anchors.len() {
        return Err(GeometryError::CountMismatch {
            expected: anchors.len(),
            got: distances.len(),
        });
    }
    if !affinely_independent(anchors, cfg.eps_rank) {
        return Err(GeometryError::AffinelyDependentAnchors);
    }

    // 2 (y_l − y_1) · x = (‖y_l‖² − ‖y_1‖²) − (d_l² − d_1²), l = 2..n+1.
    let y1 = &anchors[0];
    let d1 = distances[0];
    let a = DMatrix::from_fn(n, n, |r, c| 2.0 * (anchors[r + 1][c] - y1[c]));
    let b = DVector::from_fn(n, |r, _| {
        let yl = &anchors[r + 1];
        (dot(yl, yl) - dot(y1, y1)) - (distances[r + 1] * distances[r + 1] - d1 * d1)
    });
    let x = a
        .lu()
        .solve(&b)
        .ok_or(GeometryError::AffinelyDependentAnchors)?;
    let point: Vec<f64> = x.iter().cloned().collect();

    let d_norm = distances.iter().map(|d| d * d).sum::<f64>().sqrt();
    let tol = cfg.tol_geo_rel * (1.0 + d_norm);
    let worst = anchors
        .iter()
        .zip(distances)
        .map(|(y, &d)| (dist(&point, y) - d).abs())
        .fold(0.0_f64, f64::max);
    if worst > tol {
        return Err(GeometryError::InconsistentDistances {
            residual: worst,
            tol,
        });
    }
    Ok(point)
}

/// The hyperplane of points equidistant from `a` and `b`: through the
/// midpoint, normal along `a − b`.
pub fn bisector_hyperplane(a: &[f64], b: &[f64]) -> Result<Hyperplane, GeometryError> {
    if a == b {
        return Err(GeometryError::CoincidentPoints);
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mid_dot = 0.5 * (dot(a, a) - dot(b, b));
    Ok(Hyperplane::from_unnormalized(diff, mid_dot)?)
}

/// The loci where the unsigned distances to two hyperplanes agree: two
/// hyperplanes in general (`⟨x, θ_i ∓ θ_j⟩ = ρ_i ∓ ρ_j`), one when the
/// normals are parallel.
pub fn equidistance_hyperplanes(
    a: &Hyperplane,
    b: &Hyperplane,
) -> Result<Vec<Hyperplane>, GeometryError> {
    if a.same_locus(b, 1e-12) {
        return Err(GeometryError::IdenticalHyperplanes);
    }
    let mut out = Vec::new();
    for sign in [-1.0, 1.0] {
        let normal: Vec<f64> = a
            .normal()
            .iter()
            .zip(b.normal())
            .map(|(x, y)| x + sign * y)
            .collect();
        if norm(&normal) <= 1e-9 {
            continue; // parallel normals collapse this branch
        }
        let plane = Hyperplane::from_unnormalized(normal, a.offset() + sign * b.offset())?;
        if !out.iter().any(|p: &Hyperplane| p.same_locus(&plane, 1e-9)) {
            out.push(plane);
        }
    }
    Ok(out)
}

/// `|ρ − ⟨y, θ⟩|`, the distance from a point to a hyperplane.
pub fn unsigned_distance(y: &[f64], plane: &Hyperplane) -> f64 {
    (plane.offset() - dot(y, plane.normal())).abs()
}

/// Recovers a hyperplane from its unsigned distances to at least n+1
/// anchors, no more than n of which lie on any hyperplane.
///
/// Enumerates the 2^{n+1} sign vectors on the first n+1 anchors, solves the
/// linear system `⟨y_l, θ⟩ − ρ = −ε_l d_l` for (θ, ρ), keeps solutions with
/// a unit normal, and validates each candidate against the remaining
/// anchors. Exactly one candidate must survive; with 2n+1 anchors in general
/// position this is guaranteed, since a second consistent hyperplane would
/// put n+1 anchors onto one equidistance hyperplane.
pub fn hyperplane_from_unsigned_distances(
    anchors: &[Vec<f64>],
    distances: &[f64],
    cfg: &GeometryConfig,
) -> Result<Hyperplane, GeometryError> {
    let n = anchors
        .first()
        .ok_or(GeometryError::NeedMoreAnchors { need: 1, got: 0 })?
        .len();
    if anchors.len() < n + 1 {
        return Err(GeometryError::NeedMoreAnchors {
            need: n + 1,
            got: anchors.len(),
        });
    }
    if distances.len() != anchors.len() {
        return Err(GeometryError::CountMismatch {
            expected: anchors.len(),
            got: distances.len(),
        });
    }
    if !affinely_independent(&anchors[..n + 1], cfg.eps_rank) {
        return Err(GeometryError::AffinelyDependentAnchors);
    }

    let d_norm = distances.iter().map(|d| d * d).sum::<f64>().sqrt();
    let tol_dist = cfg.tol_geo_rel * (1.0 + d_norm);

    // Rows [y_l | −1] · (θ, ρ)ᵀ = −ε_l d_l over the first n+1 anchors.
    let base = DMatrix::from_fn(
        n + 1,
        n + 1,
        |r, c| {
            if c < n {
                anchors[r][c]
            } else {
                -1.0
            }
        },
    );
    let lu = base.lu();

    let mut candidates: Vec<Hyperplane> = Vec::new();
    for signs in 0u32..(1 << (n + 1)) {
        let rhs = DVector::from_fn(n + 1, |r, _| {
            let eps = if signs & (1 << r) != 0 { 1.0 } else { -1.0 };
            -eps * distances[r]
        });
        let sol = match lu.solve(&rhs) {
            Some(s) => s,
            None => return Err(GeometryError::AffinelyDependentAnchors),
        };
        let theta: Vec<f64> = sol.iter().take(n).cloned().collect();
        let rho = sol[n];
        if (norm(&theta) - 1.0).abs() > cfg.tol_unit {
            continue;
        }
        let plane = Hyperplane::from_unnormalized(theta, rho)?;
        let consistent = anchors
            .iter()
            .zip(distances)
            .skip(n + 1)
            .all(|(y, &d)| (unsigned_distance(y, &plane) - d).abs() <= tol_dist);
        if !consistent {
            continue;
        }
        // ε and −ε produce mirrored (−θ, −ρ): keep one representative.
        if !candidates.iter().any(|p| p.same_locus(&plane, 1e-6)) {
            candidates.push(plane);
        }
    }

    match candidates.len() {
        0 => Err(GeometryError::NoConsistentHyperplane),
        1 => Ok(candidates.pop().unwrap()),
        _ => Err(GeometryError::MultipleCandidates { candidates }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> GeometryConfig {
        GeometryConfig::default()
    }

    #[test]
    fn trilaterate_demo_point() {
        let anchors = vec![vec![-1.0, 1.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        // Rounded published distances leave ~1e-3 residuals, so the
        // consistency gate is relaxed for this check.
        let loose = GeometryConfig {
            tol_geo_rel: 1e-2,
            ..GeometryConfig::default()
        };
        let x = trilaterate(&anchors, &[1.0, 2.235, 2.828], &loose).unwrap();
        assert!((x[0] - (-0.998)).abs() < 2e-3, "{x:?}");
        assert!((x[1] - 0.001).abs() < 3e-3, "{x:?}");

        // Exact distances give the exact node.
        let exact = [1.0, 5.0_f64.sqrt(), 8.0_f64.sqrt()];
        let x = trilaterate(&anchors, &exact, &cfg()).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn trilaterate_zero_distance_anchor() {
        let anchors = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let x = trilaterate(&anchors, &[0.0, 1.0, 1.0], &cfg()).unwrap();
        assert!(x[0].abs() < 1e-14 && x[1].abs() < 1e-14);
    }

    #[test]
    fn trilaterate_random_r3_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let target: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let anchors: Vec<Vec<f64>> = loop {
                let a: Vec<Vec<f64>> = (0..4)
                    .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
                    .collect();
                if affinely_independent(&a, 1e-6) {
                    break a;
                }
            };
            let d: Vec<f64> = anchors.iter().map(|y| dist(y, &target)).collect();
            let x = trilaterate(&anchors, &d, &cfg()).unwrap();
            for (a, b) in x.iter().zip(&target) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trilaterate_rejects_bad_inputs() {
        let collinear = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(matches!(
            trilaterate(&collinear, &[1.0, 1.0, 1.0], &cfg()),
            Err(GeometryError::AffinelyDependentAnchors)
        ));

        let anchors = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(
            trilaterate(&anchors, &[5.0, 1.0, 1.0], &cfg()),
            Err(GeometryError::InconsistentDistances { .. })
        ));
    }

    #[test]
    fn bisector_of_demo_nodes() {
        let h = bisector_hyperplane(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        // Canonical sign: normal (1, 0), offset 0.
        assert!((h.normal()[0] - 1.0).abs() < 1e-15);
        assert!(h.normal()[1].abs() < 1e-15);
        assert_eq!(h.offset(), 0.0);
        // The two equidistant demo sensors lie on it.
        assert!(unsigned_distance(&[0.0, 0.0], &h) < 1e-15);
        assert!(unsigned_distance(&[0.0, 2.0], &h) < 1e-15);
    }

    #[test]
    fn bisector_by_symmetry() {
        let h = bisector_hyperplane(&[0.0, 0.0], &[0.0, 2.0]).unwrap();
        assert!((h.offset() - 1.0).abs() < 1e-15);
        assert!((h.normal()[1].abs() - 1.0).abs() < 1e-15);

        assert!(matches!(
            bisector_hyperplane(&[1.0, 2.0], &[1.0, 2.0]),
            Err(GeometryError::CoincidentPoints)
        ));
    }

    #[test]
    fn bisector_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let a: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
            if dist(&a, &b) < 1e-3 {
                continue;
            }
            let h = bisector_hyperplane(&a, &b).unwrap();
            for _ in 0..20 {
                // A random point of the hyperplane.
                let v: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
                let along = dot(&v, h.normal());
                let p: Vec<f64> = (0..3)
                    .map(|i| v[i] - along * h.normal()[i] + h.offset() * h.normal()[i])
                    .collect();
                let gap = (dist(&p, &a) - dist(&p, &b)).abs();
                assert!(gap < 1e-12 * (1.0 + dist(&p, &a)), "gap {gap:e}");
            }
        }
    }

    #[test]
    fn equidistance_parallel_lines() {
        let a = Hyperplane::new(vec![1.0, 0.0], 1.0).unwrap();
        let b = Hyperplane::new(vec![1.0, 0.0], 3.0).unwrap();
        let loci = equidistance_hyperplanes(&a, &b).unwrap();
        assert_eq!(loci.len(), 1);
        assert!((loci[0].offset() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn equidistance_counterexample_lines() {
        let s5 = 5.0_f64.sqrt();
        let l1 = Hyperplane::new(vec![1.0 / s5, -2.0 / s5], 0.0).unwrap();
        let l2 = Hyperplane::new(vec![2.0 / s5, 1.0 / s5], 0.0).unwrap();
        let loci = equidistance_hyperplanes(&l1, &l2).unwrap();
        assert_eq!(loci.len(), 2);
        for locus in &loci {
            assert!(locus.offset().abs() < 1e-15, "must pass through the origin");
        }

        assert!(matches!(
            equidistance_hyperplanes(&l1, &l1.clone()),
            Err(GeometryError::IdenticalHyperplanes)
        ));
    }

    #[test]
    fn equidistance_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..25 {
            let mk = |rng: &mut ChaCha8Rng| {
                let v: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                Hyperplane::from_unnormalized(v, rng.random_range(-2.0..2.0))
            };
            let (a, b) = loop {
                if let (Ok(a), Ok(b)) = (mk(&mut rng), mk(&mut rng)) {
                    if !a.same_locus(&b, 1e-6) {
                        break (a, b);
                    }
                }
            };
            for locus in equidistance_hyperplanes(&a, &b).unwrap() {
                for _ in 0..20 {
                    let t: f64 = rng.random_range(-5.0..5.0);
                    let tangent = [-locus.normal()[1], locus.normal()[0]];
                    let p = [
                        locus.offset() * locus.normal()[0] + t * tangent[0],
                        locus.offset() * locus.normal()[1] + t * tangent[1],
                    ];
                    let gap = (unsigned_distance(&p, &a) - unsigned_distance(&p, &b)).abs();
                    assert!(gap < 1e-12 * (1.0 + t.abs()), "gap {gap:e}");
                }
            }
        }
    }

    #[test]
    fn unsigned_distance_examples() {
        let s5 = 5.0_f64.sqrt();
        let l1 = Hyperplane::new(vec![1.0 / s5, -2.0 / s5], 0.0).unwrap();
        assert!((unsigned_distance(&[1.0, 1.0], &l1) - 1.0 / s5).abs() < 1e-15);

        // A point on the hyperplane.
        assert!(unsigned_distance(&[2.0, 1.0], &l1) < 1e-15);

        // Brute minimization over sampled hyperplane points.
        let y = [0.7, -1.3];
        let d = unsigned_distance(&y, &l1);
        let tangent = [-l1.normal()[1], l1.normal()[0]];
        let brute = (0..20001)
            .map(|i| {
                let t = -10.0 + i as f64 * 1e-3;
                let p = [t * tangent[0], t * tangent[1]];
                dist(&p, &y)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((d - brute).abs() < 1e-6, "{d} vs {brute}");
    }

    #[test]
    fn hyperplane_recovery_axis_aligned() {
        let anchors = vec![
            vec![0.0, 0.0],
            vec![3.0, 0.0],
            vec![0.0, 1.0],
            vec![2.0, 2.0],
            vec![-1.0, 2.0],
        ];
        let d = [1.0, 2.0, 1.0, 1.0, 2.0];
        let h = hyperplane_from_unsigned_distances(&anchors, &d, &cfg()).unwrap();
        assert!((h.normal()[0] - 1.0).abs() < 1e-12);
        assert!(h.normal()[1].abs() < 1e-12);
        assert!((h.offset() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperplane_recovery_random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for n in [2usize, 3] {
            for _ in 0..40 {
                let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                if norm(&raw) < 1e-2 {
                    continue;
                }
                let truth = Hyperplane::from_unnormalized(raw, rng.random_range(0.1..5.0)).unwrap();
                let anchors: Vec<Vec<f64>> = loop {
                    let a: Vec<Vec<f64>> = (0..2 * n + 1)
                        .map(|_| (0..n).map(|_| rng.random_range(-4.0..4.0)).collect())
                        .collect();
                    if affinely_independent(&a[..n + 1], 1e-3) {
                        break a;
                    }
                };
                let d: Vec<f64> = anchors
                    .iter()
                    .map(|y| unsigned_distance(y, &truth))
                    .collect();
                match hyperplane_from_unsigned_distances(&anchors, &d, &cfg()) {
                    Ok(h) => {
                        assert!(h.same_locus(&truth, 1e-9), "{h:?} vs {truth:?}");
                    }
                    // Random anchor draws can admit a second consistent
                    // hyperplane; that outcome is correct, not a failure.
                    Err(GeometryError::MultipleCandidates { candidates }) => {
                        assert!(candidates.iter().any(|h| h.same_locus(&truth, 1e-9)));
                    }
                    Err(other) => panic!("unexpected error: {other}"),
                }
            }
        }
    }

    #[test]
    fn anchors_on_equidistance_loci_admit_two_hyperplanes() {
        // Three anchors sitting on the two equidistance lines of the
        // counterexample pair (x = y and x = −y) share their unsigned
        // distances to both lines, so neither can win.
        let s5 = 5.0_f64.sqrt();
        let l1 = Hyperplane::new(vec![1.0 / s5, -2.0 / s5], 0.0).unwrap();
        let k2 = Hyperplane::new(vec![2.0 / s5, -1.0 / s5], 0.0).unwrap();
        let anchors = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]];
        let d: Vec<f64> = anchors.iter().map(|y| unsigned_distance(y, &l1)).collect();
        for (y, &di) in anchors.iter().zip(&d) {
            assert!((unsigned_distance(y, &k2) - di).abs() < 1e-15);
        }
        match hyperplane_from_unsigned_distances(&anchors, &d, &cfg()) {
            Err(GeometryError::MultipleCandidates { candidates }) => {
                assert!(candidates.iter().any(|h| h.same_locus(&l1, 1e-9)));
                assert!(candidates.iter().any(|h| h.same_locus(&k2, 1e-9)));
            }
            other => panic!("expected MultipleCandidates, got {other:?}"),
        }
    }

    #[test]
    fn generic_three_anchor_data_recovers_uniquely() {
        // The counterexample line's own distances at three generic sensors
        // pin it down even without validation anchors.
        let s5 = 5.0_f64.sqrt();
        let l1 = Hyperplane::new(vec![1.0 / s5, -2.0 / s5], 0.0).unwrap();
        let anchors = vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let d: Vec<f64> = anchors.iter().map(|y| unsigned_distance(y, &l1)).collect();
        let h = hyperplane_from_unsigned_distances(&anchors, &d, &cfg()).unwrap();
        assert!(h.same_locus(&l1, 1e-12));
    }

    #[test]
    fn inconsistent_distances_have_no_hyperplane() {
        let anchors = vec![
            vec![0.0, 0.0],
            vec![3.0, 0.0],
            vec![0.0, 1.0],
            vec![2.0, 2.0],
            vec![-1.0, 2.0],
        ];
        let d = [1.0, 2.0, 1.0, 1.0, 0.3];
        assert!(matches!(
            hyperplane_from_unsigned_distances(&anchors, &d, &cfg()),
            Err(GeometryError::NoConsistentHyperplane)
        ));
    }
}
