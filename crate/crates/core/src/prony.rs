//! The Prony engine: Hankel system assembly, degeneracy detection,
//! coefficient solve, companion-matrix root extraction, and the Vandermonde
//! amplitude solve.
//!
//! Moment sequences `τ_l = Σ_k a_k ξ_k^l` are turned into the monic
//! polynomial with roots `ξ_k` by solving the square Hankel system built
//! from 2m consecutive moments. The probe family fixes the index offset:
//! monomial probes start at l = 0, Gaussian probes at l = 1. Degeneracy of
//! the Hankel matrix is exactly the collision of two nodes (or a vanishing
//! weight), via its Vandermonde factorization `U = V Λ Vᵀ` (symmetric form)
//! or `U = V₁ Λ V₂` (shifted form).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::forward::{MomentVector, ProbeFamily};

#[derive(Debug, Error)]
pub enum PronyError {
    #[error("need at least {need} moments, got {got}")]
    InsufficientMoments { need: usize, got: usize },
    #[error("Hankel system is degenerate (σ_min/σ_max = {ratio:e})")]
    DegenerateSystem { ratio: f64 },
    #[error("polynomial roots have non-negligible imaginary part (max |Im| = {max_imag:e})")]
    ComplexRoots { max_imag: f64 },
    #[error("root {root} lies outside the admissible range for {probe:?} probes")]
    OutOfRangeRoots { root: f64, probe: ProbeFamily },
    #[error("roots too close to separate (gap {gap:e} below {tol:e})")]
    RepeatedRoots { gap: f64, tol: f64 },
    #[error("amplitude solve leaves relative residual {residual:e} on the held-out moments")]
    InconsistentMoments { residual: f64 },
    #[error("linear solve failed on a non-degenerate system")]
    SolveFailed,
}

/// Tolerances for the Prony stage. All data here is synthetic double
/// precision; the defaults reflect that and are freely adjustable.
#[derive(Debug, Clone)]
pub struct PronyConfig {
    /// `σ_min < eps · σ_max` declares the Hankel matrix degenerate.
    pub eps_degenerate: f64,
    /// Relative imaginary-part tolerance when projecting roots to the axis.
    pub tol_im: f64,
    /// Minimum gap between roots for the amplitude solve.
    pub tol_sep: f64,
    /// Relative residual allowed on the held-out moment rows.
    pub tol_res: f64,
    /// Polynomial-evaluation tolerance in [`PronySolution::check`].
    pub tol_root: f64,
}

impl Default for PronyConfig {
    fn default() -> Self {
        Self {
            eps_degenerate: 1e-8,
            tol_im: 1e-7,
            tol_sep: 1e-6,
            tol_res: 1e-6,
            tol_root: 1e-7,
        }
    }
}

/// The m×m Hankel system `U c = rhs` for the coefficients of the monic
/// node polynomial, with `U[i][j] = τ_{i+j+s}` and `rhs_i = −τ_{m+i+s}`
/// (offset s = 0 for monomial probes, s = 1 for Gaussian probes).
#[derive(Debug, Clone)]
pub struct HankelSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub offset: usize,
    pub probe: ProbeFamily,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// σ_min/σ_max of the scale-normalized system (moments divided by
    /// powers of the estimated node magnitude). Node spread inflates the
    /// raw condition number even for cleanly separated nodes; the
    /// normalized ratio separates true degeneracy from scale.
    pub scaled_sigma_ratio: f64,
    /// The 2m-moment window τ_s .. τ_{2m−1+s} the system was built from.
    moments: Vec<f64>,
}

impl HankelSystem {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Moment window backing the system.
    pub fn window(&self) -> &[f64] {
        &self.moments
    }
}

/// Assembles the Hankel system for an order-m model from a moment vector.
pub fn build_hankel(moments: &MomentVector, m: usize) -> Result<HankelSystem, PronyError> {
    if moments.len() < 2 * m {
        return Err(PronyError::InsufficientMoments {
            need: 2 * m,
            got: moments.len(),
        });
    }
    let offset = match moments.probe {
        ProbeFamily::Monomial => 0,
        ProbeFamily::Gaussian => 1,
    };
    let w = &moments.values[..2 * m];
    let matrix = DMatrix::from_fn(m, m, |i, j| w[i + j]);
    let rhs = DVector::from_fn(m, |i, _| -w[m + i]);
    let sv = matrix.singular_values();
    let sigma_max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let sigma_min = sv.iter().cloned().fold(f64::INFINITY, f64::min);

    let scale = node_scale(w);
    let scaled = DMatrix::from_fn(m, m, |i, j| w[i + j] / scale.powi((i + j) as i32));
    let ssv = scaled.singular_values();
    let s_max = ssv.iter().cloned().fold(0.0_f64, f64::max);
    let s_min = ssv.iter().cloned().fold(f64::INFINITY, f64::min);
    let scaled_sigma_ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };

    Ok(HankelSystem {
        matrix,
        rhs,
        offset,
        probe: moments.probe,
        sigma_min,
        sigma_max,
        scaled_sigma_ratio,
        moments: w.to_vec(),
    })
}

/// True iff `σ_min(U) < eps · σ_max(U)`. A degenerate system signals a
/// sensor equidistant from two sources (or a vanishing amplitude).
pub fn is_degenerate(system: &HankelSystem, eps: f64) -> bool {
    system.sigma_max == 0.0 || system.sigma_min < eps * system.sigma_max
}

/// Rough magnitude of the Prony nodes, used to rescale the solve. Any
/// positive value is algebraically neutral; a good one tames conditioning.
fn node_scale(w: &[f64]) -> f64 {
    let w_max = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if w_max == 0.0 {
        return 1.0;
    }
    let (base, shift) = if w[0].abs() > 1e-12 * w_max {
        (w[0].abs(), 0usize)
    } else {
        (w[1].abs().max(1e-300), 1usize)
    };
    let mut best = 0.0_f64;
    for (j, v) in w.iter().enumerate().skip(shift + 1) {
        let r = (v.abs() / base).powf(1.0 / (j - shift) as f64);
        if r.is_finite() {
            best = best.max(r);
        }
    }
    if best.is_finite() && best > 1e-9 && best < 1e9 {
        best
    } else {
        1.0
    }
}

/// Solves the Hankel system for the monic-polynomial coefficients
/// `c_0 .. c_{m−1}` by partial-pivot elimination, internally rescaled by the
/// estimated node magnitude.
pub fn solve_coefficients(
    system: &HankelSystem,
    cfg: &PronyConfig,
) -> Result<Vec<f64>, PronyError> {
    if system.scaled_sigma_ratio < cfg.eps_degenerate {
        return Err(PronyError::DegenerateSystem {
            ratio: system.scaled_sigma_ratio,
        });
    }
    let m = system.size();
    let w = &system.moments;
    let s = node_scale(w);
    let scaled = DMatrix::from_fn(m, m, |i, j| w[i + j] / s.powi((i + j) as i32));
    let rhs = DVector::from_fn(m, |i, _| -w[m + i] / s.powi((m + i) as i32));
    let solved = scaled.lu().solve(&rhs).ok_or(PronyError::SolveFailed)?;
    // Coefficients of p(t) from those of p(s·t')/s^m.
    let coeffs: Vec<f64> = (0..m).map(|j| solved[j] * s.powi((m - j) as i32)).collect();
    Ok(coeffs)
}

/// Residual `‖U c − rhs‖ / ‖rhs‖` of a coefficient vector on the original
/// (unscaled) system.
pub fn coefficient_residual(system: &HankelSystem, coeffs: &[f64]) -> f64 {
    let c = DVector::from_column_slice(coeffs);
    let r = &system.matrix * c - &system.rhs;
    r.norm() / system.rhs.norm().max(f64::MIN_POSITIVE)
}

/// Admissible range for Prony roots, fixed by the probe family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootDomain {
    /// Roots are distances: real and nonnegative.
    Distances,
    /// Roots are values e^{−d²}: real, in (0, 1].
    GaussianValues,
}

impl RootDomain {
    pub fn for_probe(probe: ProbeFamily) -> Self {
        match probe {
            ProbeFamily::Monomial => RootDomain::Distances,
            ProbeFamily::Gaussian => RootDomain::GaussianValues,
        }
    }
}

pub(crate) fn find_roots_full(
    coeffs: &[f64],
    domain: RootDomain,
    cfg: &PronyConfig,
) -> Result<(Vec<f64>, f64), PronyError> {
    let m = coeffs.len();
    // Balance: roots of p(t) are s times the roots of p(s t') / s^m.
    let mut s = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c.abs().powf(1.0 / (m - j) as f64))
        .fold(0.0_f64, f64::max);
    if !(s.is_finite() && s > 0.0) {
        s = 1.0;
    }
    let companion = DMatrix::from_fn(m, m, |i, j| {
        if j + 1 == m {
            -coeffs[i] / s.powi((m - i) as i32)
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eigen = companion.complex_eigenvalues();

    let mut max_imag = 0.0_f64;
    let mut roots = Vec::with_capacity(m);
    for z in eigen.iter() {
        let re = z.re * s;
        let im = z.im * s;
        if im.abs() > cfg.tol_im * (1.0 + re.abs()) {
            max_imag = max_imag.max(im.abs());
        }
        roots.push((re, im.abs()));
    }
    if max_imag > 0.0 {
        return Err(PronyError::ComplexRoots { max_imag });
    }
    let mut out: Vec<f64> = Vec::with_capacity(m);
    for (re, im) in roots {
        let _ = im;
        let projected = match domain {
            RootDomain::Distances => {
                if re < -cfg.tol_im {
                    return Err(PronyError::OutOfRangeRoots {
                        root: re,
                        probe: ProbeFamily::Monomial,
                    });
                }
                re.max(0.0)
            }
            RootDomain::GaussianValues => {
                if re <= 0.0 || re > 1.0 + cfg.tol_im {
                    return Err(PronyError::OutOfRangeRoots {
                        root: re,
                        probe: ProbeFamily::Gaussian,
                    });
                }
                re.min(1.0)
            }
        };
        out.push(projected);
    }
    out.sort_by(f64::total_cmp);
    Ok((out, max_imag))
}

/// All m roots of the monic polynomial `c_0 + c_1 t + … + t^m` via
/// companion-matrix eigenvalues, projected to the real axis and sorted
/// ascending. Roots must be real within `tol_im` and lie in the admissible
/// domain for the probe family.
pub fn find_roots(
    coeffs: &[f64],
    domain: RootDomain,
    cfg: &PronyConfig,
) -> Result<Vec<f64>, PronyError> {
    find_roots_full(coeffs, domain, cfg).map(|(roots, _)| roots)
}

/// Result of the Vandermonde amplitude solve.
#[derive(Debug, Clone)]
pub struct AmplitudeSolve {
    /// Weights aligned with the root order they were solved against.
    pub amplitudes: Vec<f64>,
    /// Relative residual on the held-out (upper) moment rows.
    pub residual: f64,
}

/// Solves the top m×m Vandermonde system for the weights: rows `ξ^0..ξ^{m−1}`
/// against `τ_0..τ_{m−1}` for monomial probes, rows `ξ^1..ξ^m` against
/// `τ_1..τ_m` for Gaussian probes. The remaining moments are used only to
/// report a consistency residual.
pub fn solve_amplitudes(
    roots: &[f64],
    moments: &MomentVector,
    cfg: &PronyConfig,
) -> Result<AmplitudeSolve, PronyError> {
    let m = roots.len();
    if moments.len() < m {
        return Err(PronyError::InsufficientMoments {
            need: m,
            got: moments.len(),
        });
    }
    for i in 0..m {
        for j in i + 1..m {
            let gap = (roots[i] - roots[j]).abs();
            if gap <= cfg.tol_sep {
                return Err(PronyError::RepeatedRoots {
                    gap,
                    tol: cfg.tol_sep,
                });
            }
        }
    }
    let power_shift = match moments.probe {
        ProbeFamily::Monomial => 0i32,
        ProbeFamily::Gaussian => 1i32,
    };
    let vand = DMatrix::from_fn(m, m, |r, k| roots[k].powi(r as i32 + power_shift));
    let rhs = DVector::from_fn(m, |r, _| moments.values[r]);
    let amplitudes = vand.lu().solve(&rhs).ok_or(PronyError::SolveFailed)?;

    // Residual over whatever held-out rows the vector provides.
    let mut sq = 0.0;
    for r in m..moments.len() {
        let predicted: f64 = amplitudes
            .iter()
            .zip(roots)
            .map(|(a, x)| a * x.powi(r as i32 + power_shift))
            .sum();
        sq += (predicted - moments.values[r]).powi(2);
    }
    let scale = moments
        .values
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let residual = sq.sqrt() / scale;
    if residual > cfg.tol_res {
        return Err(PronyError::InconsistentMoments { residual });
    }
    Ok(AmplitudeSolve {
        amplitudes: amplitudes.iter().cloned().collect(),
        residual,
    })
}

/// Numerical diagnostics captured along a full Prony solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PronyDiagnostics {
    pub coeff_residual: f64,
    pub amp_residual: f64,
    pub max_imag_discarded: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Coefficients, roots, and weights of one solved Prony system.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PronySolution {
    /// Coefficients c_0 .. c_{m−1} of the monic node polynomial.
    pub coefficients: Vec<f64>,
    /// Roots sorted ascending.
    pub roots: Vec<f64>,
    /// Weights aligned with `roots`.
    pub amplitudes: Vec<f64>,
    pub diagnostics: PronyDiagnostics,
}

impl PronySolution {
    /// Full solve: Hankel assembly, coefficient solve, rooting, amplitudes.
    pub fn solve(moments: &MomentVector, m: usize, cfg: &PronyConfig) -> Result<Self, PronyError> {
        let system = build_hankel(moments, m)?;
        let coefficients = solve_coefficients(&system, cfg)?;
        let (roots, max_imag) =
            find_roots_full(&coefficients, RootDomain::for_probe(moments.probe), cfg)?;
        let amp = solve_amplitudes(&roots, moments, cfg)?;
        let diagnostics = PronyDiagnostics {
            coeff_residual: coefficient_residual(&system, &coefficients),
            amp_residual: amp.residual,
            max_imag_discarded: max_imag,
            sigma_min: system.sigma_min,
            sigma_max: system.sigma_max,
        };
        Ok(Self {
            coefficients,
            roots,
            amplitudes: amp.amplitudes,
            diagnostics,
        })
    }

    /// Evaluates the monic polynomial at t.
    pub fn poly_at(&self, t: f64) -> f64 {
        let mut acc = 1.0;
        for c in self.coefficients.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Checks the solution invariants: each root annihilates the polynomial
    /// within `tol_root`, and (monomial case) the weights reproduce τ_0.
    pub fn check(&self, moments: &MomentVector, cfg: &PronyConfig) -> bool {
        let m = self.roots.len();
        let roots_ok = self
            .roots
            .iter()
            .all(|&x| self.poly_at(x).abs() <= cfg.tol_root * (1.0 + x.abs().powi(m as i32)));
        let head_ok = match moments.probe {
            ProbeFamily::Monomial => {
                let sum: f64 = self.amplitudes.iter().sum();
                let tau0 = moments.values[0];
                (sum - tau0).abs() <= cfg.tol_res * tau0.abs().max(1.0)
            }
            ProbeFamily::Gaussian => true,
        };
        roots_ok && head_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{point_moments, ProbeFamily};
    use crate::model::PointSources;

    fn monomial(values: Vec<f64>) -> MomentVector {
        MomentVector {
            sensor: vec![0.0, 0.0],
            probe: ProbeFamily::Monomial,
            normalized: false,
            first_index: 0,
            values,
        }
    }

    fn demo_moments(sensor: [f64; 2]) -> MomentVector {
        let model =
            PointSources::new(2, vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![3.0, 2.0]).unwrap();
        point_moments(&model, &sensor, 4).unwrap()
    }

    #[test]
    fn hankel_assembly_demo_sensor() {
        let mv = monomial(vec![5.0, 7.472, 13.0, 25.36]);
        let sys = build_hankel(&mv, 2).unwrap();
        assert_eq!(sys.matrix[(0, 0)], 5.0);
        assert_eq!(sys.matrix[(0, 1)], 7.472);
        assert_eq!(sys.matrix[(1, 0)], 7.472);
        assert_eq!(sys.matrix[(1, 1)], 13.0);
        assert_eq!(sys.rhs[0], -13.0);
        assert_eq!(sys.rhs[1], -25.36);
        assert!(!is_degenerate(&sys, 1e-8));
    }

    #[test]
    fn hankel_assembly_equidistant_sensor() {
        let mv = monomial(vec![5.0, 5.0, 5.0, 5.0]);
        let sys = build_hankel(&mv, 2).unwrap();
        assert_eq!(sys.matrix[(0, 1)], 5.0);
        assert!(is_degenerate(&sys, 1e-8));
        // Exact-data determinant vanishes identically.
        assert!(sys.matrix.determinant().abs() < 1e-12);
    }

    #[test]
    fn hankel_assembly_order_one() {
        let mv = monomial(vec![3.0, 6.0]);
        let sys = build_hankel(&mv, 1).unwrap();
        assert_eq!(sys.matrix[(0, 0)], 3.0);
        assert_eq!(sys.rhs[0], -6.0);
        let c = solve_coefficients(&sys, &PronyConfig::default()).unwrap();
        assert!((c[0] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonally_dominant_hankel_not_degenerate() {
        let mv = monomial(vec![2.0, 1.0, 2.0, 1.0]);
        let sys = build_hankel(&mv, 2).unwrap();
        assert!(!is_degenerate(&sys, 1e-8));
    }

    #[test]
    fn insufficient_moments_rejected() {
        let mv = monomial(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            build_hankel(&mv, 2),
            Err(PronyError::InsufficientMoments { need: 4, got: 3 })
        ));
    }

    #[test]
    fn demo_polynomials_from_exact_moments() {
        let cfg = PronyConfig::default();
        // Published values are 3-decimal roundings of the exact solve.
        let sys3 = build_hankel(&demo_moments([-1.0, 1.0]), 2).unwrap();
        let c3 = solve_coefficients(&sys3, &cfg).unwrap();
        assert!((c3[0] - 2.234).abs() < 5e-3, "c0 = {}", c3[0]);
        assert!((c3[1] + 3.235).abs() < 5e-3, "c1 = {}", c3[1]);

        let sys5 = build_hankel(&demo_moments([1.0, 2.0]), 2).unwrap();
        let c5 = solve_coefficients(&sys5, &cfg).unwrap();
        assert!((c5[0] - 5.656).abs() < 5e-3, "c0 = {}", c5[0]);
        assert!((c5[1] + 4.828).abs() < 5e-3, "c1 = {}", c5[1]);

        let sys1 = build_hankel(&demo_moments([0.0, 0.0]), 2).unwrap();
        assert!(matches!(
            solve_coefficients(&sys1, &cfg),
            Err(PronyError::DegenerateSystem { .. })
        ));
    }

    #[test]
    fn roots_of_demo_polynomials() {
        let cfg = PronyConfig::default();
        let r = find_roots(&[2.234, -3.235], RootDomain::Distances, &cfg).unwrap();
        assert!(
            (r[0] - 1.0).abs() < 2e-3 && (r[1] - 2.235).abs() < 2e-3,
            "{r:?}"
        );

        let r = find_roots(&[5.656, -4.828], RootDomain::Distances, &cfg).unwrap();
        assert!(
            (r[0] - 2.0).abs() < 2e-3 && (r[1] - 2.828).abs() < 2e-3,
            "{r:?}"
        );

        let r = find_roots(&[-2.0], RootDomain::Distances, &cfg).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn complex_roots_rejected() {
        // t² + 1 has roots ±i.
        let cfg = PronyConfig::default();
        assert!(matches!(
            find_roots(&[1.0, 0.0], RootDomain::Distances, &cfg),
            Err(PronyError::ComplexRoots { .. })
        ));
    }

    #[test]
    fn out_of_range_roots_rejected() {
        let cfg = PronyConfig::default();
        // t² − t − 2 = (t − 2)(t + 1): root −1 is no distance.
        assert!(matches!(
            find_roots(&[-2.0, -1.0], RootDomain::Distances, &cfg),
            Err(PronyError::OutOfRangeRoots { .. })
        ));
        // (t − 2)(t − 0.5): 2 exceeds the Gaussian range.
        assert!(matches!(
            find_roots(&[1.0, -2.5], RootDomain::GaussianValues, &cfg),
            Err(PronyError::OutOfRangeRoots { .. })
        ));
        // Gaussian root exactly at 1 (sensor on the hyperplane) is fine.
        let r = find_roots(&[0.5, -1.5], RootDomain::GaussianValues, &cfg).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitudes_from_rounded_demo_data() {
        // Rounded inputs leave a visible residual on the held-out rows, so
        // the consistency gate is relaxed for this check.
        let cfg = PronyConfig {
            tol_res: 1e-2,
            ..PronyConfig::default()
        };
        let mv = monomial(vec![5.0, 7.472, 13.0, 25.36]);
        let solve = solve_amplitudes(&[1.0, 2.235], &mv, &cfg).unwrap();
        assert!((solve.amplitudes[0] - 2.998).abs() < 2e-3);
        assert!((solve.amplitudes[1] - 2.001).abs() < 2e-3);
    }

    #[test]
    fn amplitude_order_one() {
        let cfg = PronyConfig::default();
        let mv = monomial(vec![3.0, 6.0]);
        let solve = solve_amplitudes(&[2.0], &mv, &cfg).unwrap();
        assert!((solve.amplitudes[0] - 3.0).abs() < 1e-14);
        assert!(solve.residual < 1e-14);
    }

    #[test]
    fn repeated_roots_rejected() {
        let cfg = PronyConfig::default();
        let mv = monomial(vec![5.0, 7.0, 11.0, 19.0]);
        assert!(matches!(
            solve_amplitudes(&[1.0, 1.0 + 1e-9], &mv, &cfg),
            Err(PronyError::RepeatedRoots { .. })
        ));
    }

    fn synth_moments(nodes: &[f64], amps: &[f64], count: usize) -> MomentVector {
        let values = (0..count)
            .map(|l| {
                nodes
                    .iter()
                    .zip(amps)
                    .map(|(x, a)| a * x.powi(l as i32))
                    .sum()
            })
            .collect();
        monomial(values)
    }

    #[test]
    fn random_order_three_amplitude_recovery() {
        // Forward-synthesis oracle with a deterministic congruential draw.
        let cfg = PronyConfig::default();
        let mut state: u64 = 42;
        let mut uniform = |lo: f64, hi: f64| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            lo + (hi - lo) * ((state >> 11) as f64 / (1u64 << 53) as f64)
        };
        for _ in 0..50 {
            let nodes = [uniform(0.3, 1.2), uniform(1.4, 2.6), uniform(2.8, 4.0)];
            let amps = [uniform(0.5, 1.4), uniform(2.0, 2.9), uniform(3.5, 4.4)];
            let mv = synth_moments(&nodes, &amps, 6);
            let solve = solve_amplitudes(&nodes, &mv, &cfg).unwrap();
            for (got, want) in solve.amplitudes.iter().zip(&amps) {
                assert!((got - want).abs() < 1e-8, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn full_solve_round_trip() {
        let cfg = PronyConfig::default();
        let mut state: u64 = 7;
        let mut uniform = |lo: f64, hi: f64| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            lo + (hi - lo) * ((state >> 11) as f64 / (1u64 << 53) as f64)
        };
        for m in 1..=4usize {
            for _ in 0..25 {
                // Nodes separated by at least 0.1 by construction.
                let mut nodes: Vec<f64> = (0..m)
                    .map(|k| 0.4 + k as f64 * 1.1 + uniform(0.0, 0.9))
                    .collect();
                nodes.sort_by(f64::total_cmp);
                let amps: Vec<f64> = (0..m)
                    .map(|k| 0.5 + k as f64 * 0.8 + uniform(0.0, 0.25))
                    .collect();
                let mv = synth_moments(&nodes, &amps, 2 * m);
                let sol = PronySolution::solve(&mv, m, &cfg).unwrap();
                assert!(sol.check(&mv, &cfg));
                for (got, want) in sol.roots.iter().zip(&nodes) {
                    assert!((got - want).abs() < 1e-7, "m={m}: {got} vs {want}");
                }
                for (got, want) in sol.amplitudes.iter().zip(&amps) {
                    assert!((got - want).abs() < 1e-7, "m={m}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn vandermonde_factorization_reproduces_hankel() {
        // Monomial (symmetric) form: U = V Λ Vᵀ with V[i][k] = ξ_k^i.
        let nodes = [0.8, 1.7, 2.9];
        let amps = [1.5, -2.0, 0.7];
        let m = 3;
        let mv = synth_moments(&nodes, &amps, 2 * m);
        let sys = build_hankel(&mv, m).unwrap();
        let v = DMatrix::from_fn(m, m, |i, k| nodes[k].powi(i as i32));
        let lam = DMatrix::from_fn(m, m, |i, j| if i == j { amps[i] } else { 0.0 });
        let rebuilt = &v * lam * v.transpose();
        for i in 0..m {
            for j in 0..m {
                assert!((rebuilt[(i, j)] - sys.matrix[(i, j)]).abs() < 1e-10);
            }
        }

        // Gaussian (shifted) form: U = V₁ Λ V₂ with V₁[i][k] = ξ_k^{i+1},
        // V₂[k][j] = ξ_k^j.
        let lambdas = [0.3_f64, 0.55, 0.9];
        let gauss = MomentVector {
            sensor: vec![0.0, 0.0],
            probe: ProbeFamily::Gaussian,
            normalized: true,
            first_index: 1,
            values: (1..=2 * m)
                .map(|l| {
                    lambdas
                        .iter()
                        .zip(&amps)
                        .map(|(x, a)| a * x.powi(l as i32))
                        .sum()
                })
                .collect(),
        };
        let sys = build_hankel(&gauss, m).unwrap();
        assert_eq!(sys.offset, 1);
        let v1 = DMatrix::from_fn(m, m, |i, k| lambdas[k].powi(i as i32 + 1));
        let v2 = DMatrix::from_fn(m, m, |k, j| lambdas[k].powi(j as i32));
        let lam = DMatrix::from_fn(m, m, |i, j| if i == j { amps[i] } else { 0.0 });
        let rebuilt = v1 * lam * v2;
        for i in 0..m {
            for j in 0..m {
                assert!((rebuilt[(i, j)] - sys.matrix[(i, j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bisector_sensors_are_degenerate() {
        // Sensors equidistant from the two nodes give singular systems.
        let model =
            PointSources::new(2, vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![3.0, 2.0]).unwrap();
        for t in [0.0, 0.5, 2.0, -3.0] {
            let mv = point_moments(&model, &[0.0, t], 4).unwrap();
            let sys = build_hankel(&mv, 2).unwrap();
            assert!(is_degenerate(&sys, 1e-8), "sensor (0, {t})");
        }
    }

    #[test]
    fn amplitude_scaling_leaves_roots_unchanged() {
        let cfg = PronyConfig::default();
        let nodes = [0.9, 2.1];
        let amps = [1.0, 2.5];
        let scaled: Vec<f64> = amps.iter().map(|a| 3.0 * a).collect();
        let sol1 = PronySolution::solve(&synth_moments(&nodes, &amps, 4), 2, &cfg).unwrap();
        let sol2 = PronySolution::solve(&synth_moments(&nodes, &scaled, 4), 2, &cfg).unwrap();
        for (a, b) in sol1.coefficients.iter().zip(&sol2.coefficients) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        }
        for (a, b) in sol1.roots.iter().zip(&sol2.roots) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in sol1.amplitudes.iter().zip(&sol2.amplitudes) {
            assert!((3.0 * a - b).abs() < 1e-8);
        }
    }
}
