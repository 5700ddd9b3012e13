//! Root-to-source correspondence: at auxiliary sensors the Prony roots come
//! back unordered, and the known amplitudes decide which root belongs to
//! which source by exhaustive permutation search over the full moment rows.
//!
//! Discrimination lives in the held-out rows: the top m rows alone are
//! solvable for any permutation (Vandermonde), so every permutation is
//! scored against all available rows. Uniqueness of the winner rests on the
//! power-difference kernel property ([`lemma52_matrix`],
//! [`kernel_equal_pair_holds`]): a second consistent permutation would force
//! two amplitudes to coincide.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::forward::{MomentVector, ProbeFamily};

/// Exhaustive search is capped here; source counts are small by design.
pub const MAX_PERMUTATION_SOURCES: usize = 8;

#[derive(Debug, Error)]
pub enum CorrespondenceError {
    #[error(
        "assignment ambiguous: runner-up residual {runner_up:e} within 2x of winner {winner:e} \
         (colliding amplitudes or noisy data)"
    )]
    AmbiguousAssignment { winner: f64, runner_up: f64 },
    #[error("no permutation fits the moments (best residual {residual:e}, tolerance {tol:e})")]
    NoMatch { residual: f64, tol: f64 },
    #[error("repeated lambda values (gap {gap:e})")]
    RepeatedLambdas { gap: f64 },
    #[error("permutation must differ from the identity")]
    IdentityPermutation,
    #[error("{0} sources exceed the permutation-search cap {MAX_PERMUTATION_SOURCES}")]
    TooManySources(usize),
    #[error("amplitudes, roots and moments must agree on the source count")]
    SizeMismatch,
    #[error("sigma is not a permutation of 0..{0}")]
    NotAPermutation(usize),
}

/// Tolerances for the permutation search.
#[derive(Debug, Clone)]
pub struct MatchConfig {
    /// Winning residual must stay below `tol_match_rel · ‖τ‖`.
    pub tol_match_rel: f64,
    /// Amplitude pairs closer than this are treated as colliding.
    pub tol_amp: f64,
    /// Runner-up residual must exceed this multiple of the winner's.
    pub separation: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            tol_match_rel: 1e-6,
            tol_amp: 1e-9,
            separation: 2.0,
        }
    }
}

/// The winning root order at one auxiliary sensor.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Assignment {
    /// `permutation[i]` is the index (into the sorted root list) assigned to
    /// source i.
    pub permutation: Vec<usize>,
    /// Residual of the winning permutation over all moment rows.
    pub residual: f64,
    /// Residual of the second-best permutation (absent when m = 1).
    pub runner_up: Option<f64>,
}

pub(crate) fn heap_permutations(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut items: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(&items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Finds the unique root order consistent with the known amplitudes by
/// scoring every permutation against all moment rows.
pub fn match_roots(
    amplitudes: &[f64],
    roots: &[f64],
    moments: &MomentVector,
    cfg: &MatchConfig,
) -> Result<Assignment, CorrespondenceError> {
    let m = amplitudes.len();
    if m != roots.len() || moments.len() < m {
        return Err(CorrespondenceError::SizeMismatch);
    }
    if m > MAX_PERMUTATION_SOURCES {
        return Err(CorrespondenceError::TooManySources(m));
    }
    let scale = moments
        .values
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    // Colliding known amplitudes make two permutations equally valid.
    for i in 0..m {
        for j in i + 1..m {
            if (amplitudes[i] - amplitudes[j]).abs() <= cfg.tol_amp {
                return Err(CorrespondenceError::AmbiguousAssignment {
                    winner: 0.0,
                    runner_up: 0.0,
                });
            }
        }
    }

    let power_shift = match moments.probe {
        ProbeFamily::Monomial => 0i32,
        ProbeFamily::Gaussian => 1i32,
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut second = f64::INFINITY;
    heap_permutations(m, |perm| {
        let mut sq = 0.0;
        for (r, tau) in moments.values.iter().enumerate() {
            let p = r as i32 + power_shift;
            let predicted: f64 = (0..m).map(|i| amplitudes[i] * roots[perm[i]].powi(p)).sum();
            sq += (predicted - tau) * (predicted - tau);
        }
        let residual = sq.sqrt();
        match &mut best {
            Some((perm_best, res_best)) => {
                if residual < *res_best {
                    second = *res_best;
                    *res_best = residual;
                    perm_best.copy_from_slice(perm);
                } else if residual < second {
                    second = residual;
                }
            }
            None => best = Some((perm.to_vec(), residual)),
        }
    });
    let (permutation, winner) = best.expect("m >= 1");

    let tol = cfg.tol_match_rel * scale;
    if winner > tol {
        return Err(CorrespondenceError::NoMatch {
            residual: winner,
            tol,
        });
    }
    let runner_up = (m > 1).then_some(second);
    if let Some(r) = runner_up {
        // The floor keeps exact ties ambiguous even when the winner is 0.
        if r < cfg.separation * winner.max(1e-15 * scale) {
            return Err(CorrespondenceError::AmbiguousAssignment {
                winner,
                runner_up: r,
            });
        }
    }
    Ok(Assignment {
        permutation,
        residual: winner,
        runner_up,
    })
}

// ---------------------------------------------------------------------------
// Power-difference matrices and their kernel property
// ---------------------------------------------------------------------------

/// The matrix with entries `λ_j^p − λ_{σ(j)}^p` over a row range of powers.
#[derive(Debug, Clone)]
pub struct PermDiffMatrix {
    pub matrix: DMatrix<f64>,
    /// Power of the first row (rows carry consecutive powers).
    pub first_power: u32,
    pub sigma: Vec<usize>,
}

fn check_sigma(n: usize, sigma: &[usize]) -> Result<(), CorrespondenceError> {
    if sigma.len() != n || {
        let mut seen = vec![false; n];
        sigma.iter().any(|&s| {
            if s >= n || seen[s] {
                true
            } else {
                seen[s] = true;
                false
            }
        })
    } {
        return Err(CorrespondenceError::NotAPermutation(n));
    }
    Ok(())
}

/// Builds the power-difference matrix with rows p = first_power ..= last.
pub fn perm_diff_matrix(
    lambdas: &[f64],
    sigma: &[usize],
    first_power: u32,
    last_power: u32,
) -> Result<PermDiffMatrix, CorrespondenceError> {
    let n = lambdas.len();
    check_sigma(n, sigma)?;
    let scale = lambdas.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            let gap = (lambdas[i] - lambdas[j]).abs();
            if gap <= 1e-12 * scale {
                return Err(CorrespondenceError::RepeatedLambdas { gap });
            }
        }
    }
    let rows = (last_power - first_power + 1) as usize;
    let matrix = DMatrix::from_fn(rows, n, |p, j| {
        let power = (first_power + p as u32) as i32;
        lambdas[j].powi(power) - lambdas[sigma[j]].powi(power)
    });
    Ok(PermDiffMatrix {
        matrix,
        first_power,
        sigma: sigma.to_vec(),
    })
}

/// The square n×n power-difference matrix (powers 1..n) whose kernel
/// property underpins assignment uniqueness.
pub fn lemma52_matrix(
    lambdas: &[f64],
    sigma: &[usize],
) -> Result<PermDiffMatrix, CorrespondenceError> {
    let n = lambdas.len();
    check_sigma(n, sigma)?;
    if sigma.iter().enumerate().all(|(i, &s)| s == i) {
        return Err(CorrespondenceError::IdentityPermutation);
    }
    perm_diff_matrix(lambdas, sigma, 1, n as u32)
}

/// Orthonormal basis of the numerical kernel of M.
pub fn kernel_basis(matrix: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let cols = matrix.ncols();
    let svd = matrix.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if sigma_max == 0.0 || s <= 1e-10 * sigma_max {
            basis.push(v_t.row(i).transpose());
        }
    }
    // Rank-deficient wide shapes keep extra right-singular directions.
    for i in svd.singular_values.len()..cols {
        basis.push(v_t.row(i).transpose());
    }
    basis
}

fn has_equal_pair(v: &DVector<f64>) -> bool {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max < 1e-12 {
        return true; // the zero vector has all components equal
    }
    let tol = 1e-9 * max;
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if (v[i] - v[j]).abs() <= tol {
                return true;
            }
        }
    }
    false
}

/// True iff every kernel vector of M — checked on a basis and on `trials`
/// seeded random combinations — has two equal components with different
/// indices.
pub fn kernel_equal_pair_holds(m: &PermDiffMatrix, trials: usize) -> bool {
    let basis = kernel_basis(&m.matrix);
    if basis.is_empty() {
        return true;
    }
    if !basis.iter().all(has_equal_pair) {
        return false;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6b65726e);
    for _ in 0..trials {
        let mut combo = DVector::zeros(m.matrix.ncols());
        for b in &basis {
            let c: f64 = rng.random_range(-1.0..1.0);
            combo += b * c;
        }
        if !has_equal_pair(&combo) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::point_moments;
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

    #[test]
    fn demo_sensor_assignment() {
        // Rounded inputs: the valid permutation swaps the roots.
        let cfg = MatchConfig {
            tol_match_rel: 1e-2,
            ..MatchConfig::default()
        };
        let mv = monomial(vec![5.0, 8.708, 17.0, 35.541]);
        let asg = match_roots(&[2.998, 2.001], &[1.0, 2.235], &mv, &cfg).unwrap();
        assert_eq!(asg.permutation, vec![1, 0]);
        assert!(asg.runner_up.unwrap() >= 2.0 * asg.residual);
    }

    #[test]
    fn single_source_is_identity() {
        let cfg = MatchConfig::default();
        let mv = monomial(vec![3.0, 6.0]);
        let asg = match_roots(&[3.0], &[2.0], &mv, &cfg).unwrap();
        assert_eq!(asg.permutation, vec![0]);
        assert!(asg.residual < 1e-12);
        assert!(asg.runner_up.is_none());
    }

    fn synth(nodes: &[f64], amps: &[f64]) -> MomentVector {
        let values = (0..2 * nodes.len())
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
    fn random_order_three_matches_ground_truth() {
        let cfg = MatchConfig::default();
        let mut state: u64 = 99;
        let mut uniform = |lo: f64, hi: f64| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            lo + (hi - lo) * ((state >> 11) as f64 / (1u64 << 53) as f64)
        };
        for _ in 0..40 {
            // Distances and amplitudes with comfortable gaps.
            let truth = [uniform(0.4, 1.0), uniform(1.5, 2.1), uniform(2.6, 3.2)];
            let amps = [uniform(0.5, 0.9), uniform(1.5, 1.9), uniform(2.5, 2.9)];
            let mv = synth(&truth, &amps);
            // Present the roots sorted (as the Prony stage would).
            let asg = match_roots(&amps, &truth, &mv, &cfg).unwrap();
            assert_eq!(asg.permutation, vec![0, 1, 2]);
            assert!(asg.residual <= 1e-8 * 100.0);
        }
    }

    #[test]
    fn relabeling_roots_relabels_permutation_consistently() {
        let cfg = MatchConfig::default();
        let truth = [0.7, 1.9, 3.1];
        let amps = [1.0, 2.0, 3.5];
        let mv = synth(&truth, &amps);

        let shuffled = [truth[2], truth[0], truth[1]];
        let asg = match_roots(&amps, &shuffled, &mv, &cfg).unwrap();
        // The node -> distance map is unchanged by the relabeling.
        for (i, &want) in truth.iter().enumerate() {
            assert_eq!(shuffled[asg.permutation[i]], want);
        }
    }

    #[test]
    fn colliding_amplitudes_are_ambiguous() {
        // The two-point counterexample at its third sensor.
        let cfg = MatchConfig::default();
        let (f1, _, sensors) = crate::forward::counterexample_points();
        let y = &sensors.points()[2];
        let mv = point_moments(&f1, y, 4).unwrap();
        let mut d: Vec<f64> = f1
            .nodes()
            .iter()
            .map(|x| crate::model::dist(x, y))
            .collect();
        d.sort_by(f64::total_cmp);
        let err = match_roots(&[1.0, 1.0], &d, &mv, &cfg);
        assert!(matches!(
            err,
            Err(CorrespondenceError::AmbiguousAssignment { .. })
        ));
    }

    #[test]
    fn wrong_roots_yield_no_match() {
        let cfg = MatchConfig::default();
        let truth = [0.7, 1.9];
        let amps = [1.0, 2.0];
        let mv = synth(&truth, &amps);
        let err = match_roots(&amps, &[0.9, 2.4], &mv, &cfg);
        assert!(matches!(err, Err(CorrespondenceError::NoMatch { .. })));
    }

    #[test]
    fn exact_data_winning_residual_is_tiny() {
        let cfg = MatchConfig::default();
        let model = PointSources::new(
            2,
            vec![vec![-1.0, 0.0], vec![1.0, 0.5], vec![0.3, -1.2]],
            vec![3.0, 2.0, 1.0],
        )
        .unwrap();
        let y = [2.0, 1.0];
        let mv = point_moments(&model, &y, 6).unwrap();
        let mut roots: Vec<f64> = model
            .nodes()
            .iter()
            .map(|x| crate::model::dist(x, &y))
            .collect();
        roots.sort_by(f64::total_cmp);
        let asg = match_roots(&[3.0, 2.0, 1.0], &roots, &mv, &cfg).unwrap();
        let scale = mv.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(asg.residual <= 1e-8 * scale);
    }

    #[test]
    fn swap_matrix_kernel_contains_ones() {
        let (l1, l2) = (1.3, -0.4);
        let m = lemma52_matrix(&[l1, l2], &[1, 0]).unwrap();
        assert_eq!(m.matrix[(0, 0)], l1 - l2);
        assert_eq!(m.matrix[(0, 1)], l2 - l1);
        assert_eq!(m.matrix[(1, 0)], l1 * l1 - l2 * l2);
        let ones = DVector::from_element(2, 1.0);
        assert!((&m.matrix * ones).norm() < 1e-12);
        assert!(kernel_equal_pair_holds(&m, 50));
    }

    #[test]
    fn fixed_point_gives_zero_column() {
        let m = perm_diff_matrix(&[0.5, 1.5, 2.5], &[1, 0, 2], 1, 3).unwrap();
        for p in 0..3 {
            assert_eq!(m.matrix[(p, 2)], 0.0);
        }
        assert!(m.matrix.column(0).norm() > 0.0);
    }

    #[test]
    fn identity_and_repeated_lambdas_rejected() {
        assert!(matches!(
            lemma52_matrix(&[1.0, 2.0], &[0, 1]),
            Err(CorrespondenceError::IdentityPermutation)
        ));
        assert!(matches!(
            lemma52_matrix(&[1.0, 1.0], &[1, 0]),
            Err(CorrespondenceError::RepeatedLambdas { .. })
        ));
        assert!(matches!(
            lemma52_matrix(&[1.0, 2.0], &[1, 1]),
            Err(CorrespondenceError::NotAPermutation(2))
        ));
    }

    /// Test-side null space by Gauss-Jordan elimination, independent of the
    /// SVD path used by the implementation.
    fn elimination_nullspace(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        let (rows, cols) = m.shape();
        let mut a: Vec<Vec<f64>> = (0..rows)
            .map(|r| (0..cols).map(|c| m[(r, c)]).collect())
            .collect();
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..cols {
            let piv = (rank..rows)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .filter(|&x| a[x][col].abs() > 1e-9);
            if let Some(p) = piv {
                a.swap(rank, p);
                let scale = a[rank][col];
                for v in &mut a[rank] {
                    *v /= scale;
                }
                for r in 0..rows {
                    if r != rank && a[r][col].abs() > 0.0 {
                        let f = a[r][col];
                        let pivot_row = a[rank].clone();
                        for (value, pivot) in a[r].iter_mut().zip(&pivot_row) {
                            *value -= f * pivot;
                        }
                    }
                }
                pivot_cols.push(col);
                rank += 1;
            }
        }
        let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0.0; cols];
                v[f] = 1.0;
                for (r, &p) in pivot_cols.iter().enumerate() {
                    v[p] = -a[r][f];
                }
                v
            })
            .collect()
    }

    #[test]
    fn double_swap_kernel_pairs() {
        let m = lemma52_matrix(&[1.0, 2.0, 3.0, 4.0], &[1, 0, 3, 2]).unwrap();
        // Oracle: elimination-based kernel; every vector must pair up inside
        // a swapped block.
        let basis = elimination_nullspace(&m.matrix);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let ok = (v[0] - v[1]).abs() < 1e-9 || (v[2] - v[3]).abs() < 1e-9;
            assert!(ok, "oracle vector {v:?}");
        }
        assert!(kernel_equal_pair_holds(&m, 200));
    }

    #[test]
    fn seeded_kernel_property_sample() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31337);
        for _ in 0..100 {
            let n = rng.random_range(2..=6usize);
            let mut lambdas: Vec<f64>;
            loop {
                lambdas = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                let mut ok = true;
                for i in 0..n {
                    for j in i + 1..n {
                        ok &= (lambdas[i] - lambdas[j]).abs() >= 1e-2;
                    }
                }
                if ok {
                    break;
                }
            }
            let mut sigma: Vec<usize> = (0..n).collect();
            while sigma.iter().enumerate().all(|(i, &s)| s == i) {
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    sigma.swap(i, j);
                }
            }
            let m = lemma52_matrix(&lambdas, &sigma).unwrap();
            assert!(
                kernel_equal_pair_holds(&m, 20),
                "λ = {lambdas:?}, σ = {sigma:?}"
            );
        }
    }
}
