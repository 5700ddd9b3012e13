//! Reference reproductions for `demo-paper`: the worked two-point example
//! and the two colliding-amplitude counterexamples, printed step by step and
//! checked against the published values. Any deviation beyond the tolerance
//! makes the command exit nonzero.

use prony_smt::correspondence::{match_roots, CorrespondenceError, MatchConfig};
use prony_smt::forward::{self, point_moments, MomentVector};
use prony_smt::geometry::{trilaterate, unsigned_distance, GeometryConfig};
use prony_smt::model::SourceModel;
use prony_smt::model::{dist, PointSources, SensorSet};
use prony_smt::pipeline::{recover_points, PipelineConfig, RecoveryError};
use prony_smt::prony::{
    build_hankel, find_roots, is_degenerate, solve_amplitudes, solve_coefficients, PronyConfig,
    RootDomain,
};

use crate::CliError;

/// Reference values are printed with 3 decimals; everything must agree
/// within this absolute tolerance.
const TOL: f64 = 5e-3;

struct Checker {
    deviations: usize,
}

impl Checker {
    fn new() -> Self {
        Self { deviations: 0 }
    }

    fn value(&mut self, label: &str, got: f64, reference: f64, tol: f64) {
        let dev = (got - reference).abs();
        if dev <= tol {
            println!("  {label}: {got:.4}  (reference {reference})");
        } else {
            println!("  {label}: {got:.4}  (reference {reference})  ** deviates by {dev:.2e}");
            self.deviations += 1;
        }
    }

    fn claim(&mut self, label: &str, ok: bool) {
        if ok {
            println!("  {label}: ok");
        } else {
            println!("  {label}: ** FAILED");
            self.deviations += 1;
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if self.deviations == 0 {
            println!("\nall printed quantities within tolerance");
            Ok(())
        } else {
            println!("\n{} value(s) deviate beyond tolerance", self.deviations);
            Err(CliError::DemoMismatch(self.deviations))
        }
    }
}

fn demo_scenario() -> (PointSources, SensorSet) {
    let model =
        PointSources::new(2, vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![3.0, 2.0]).unwrap();
    let sensors = SensorSet::new(
        2,
        vec![
            vec![0.0, 0.0],
            vec![0.0, 2.0],
            vec![-1.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
        ],
    )
    .unwrap();
    (model, sensors)
}

/// The worked two-point example: moment tables, Hankel degeneracy,
/// polynomials, roots, amplitudes, assignment checks, and the recovered
/// first node.
pub fn example42() -> Result<(), CliError> {
    let mut check = Checker::new();
    let (model, sensors) = demo_scenario();
    let prony_cfg = PronyConfig::default();

    println!("model: a = (3, 2) at x1 = (-1, 0), x2 = (1, 0)");
    println!("sensors: y1..y5 = (0,0), (0,2), (-1,1), (1,1), (1,2)\n");

    // Reference moment tables. The last value of the y5 row is 83.882: the
    // printed source gives 75.882 there, which contradicts the linear
    // system and polynomial it prints for that same sensor immediately
    // after, so the internally consistent value is used as the reference.
    let reference_tau = [
        [5.0, 5.0, 5.0, 5.0],
        [5.0, 11.18, 25.0, 55.901],
        [5.0, 7.472, 13.0, 25.36],
        [5.0, 8.708, 17.0, 35.541],
        [5.0, 12.485, 32.0, 83.882],
    ];
    println!("moment tables (tau_0..tau_3 per sensor):");
    let moments: Vec<MomentVector> = sensors
        .points()
        .iter()
        .map(|y| point_moments(&model, y, 4).unwrap())
        .collect();
    for (i, mv) in moments.iter().enumerate() {
        for (l, &reference) in reference_tau[i].iter().enumerate() {
            check.value(
                &format!("tau_{l} at y{}", i + 1),
                mv.values[l],
                reference,
                TOL,
            );
        }
    }

    println!("\nHankel systems (y1, y2 degenerate; y3..y5 regular):");
    let expect_degenerate = [true, true, false, false, false];
    let mut systems = Vec::new();
    for (i, mv) in moments.iter().enumerate() {
        let system = build_hankel(mv, 2).unwrap();
        let degenerate = is_degenerate(&system, prony_cfg.eps_degenerate);
        check.claim(
            &format!(
                "y{} {}",
                i + 1,
                if degenerate { "degenerate" } else { "regular" }
            ),
            degenerate == expect_degenerate[i],
        );
        systems.push(system);
    }

    println!("\nnode polynomials P(x) = c0 + c1 x + x^2 at the regular sensors:");
    let reference_coeffs = [(2.234, -3.235), (2.234, -3.235), (5.656, -4.828)];
    let reference_roots = [(1.0, 2.235), (1.0, 2.235), (2.0, 2.828)];
    let mut roots_by_sensor = Vec::new();
    for (slot, sensor) in (2..5).enumerate() {
        let coeffs = solve_coefficients(&systems[sensor], &prony_cfg).unwrap();
        check.value(
            &format!("c0 at y{}", sensor + 1),
            coeffs[0],
            reference_coeffs[slot].0,
            TOL,
        );
        check.value(
            &format!("c1 at y{}", sensor + 1),
            coeffs[1],
            reference_coeffs[slot].1,
            TOL,
        );
        let roots = find_roots(&coeffs, RootDomain::Distances, &prony_cfg).unwrap();
        check.value(
            &format!("root 1 at y{}", sensor + 1),
            roots[0],
            reference_roots[slot].0,
            TOL,
        );
        check.value(
            &format!("root 2 at y{}", sensor + 1),
            roots[1],
            reference_roots[slot].1,
            TOL,
        );
        roots_by_sensor.push(roots);
    }

    println!("\namplitudes from the first regular sensor (y3):");
    let amp = solve_amplitudes(&roots_by_sensor[0], &moments[2], &prony_cfg).unwrap();
    check.value("a1", amp.amplitudes[0], 2.998, TOL);
    check.value("a2", amp.amplitudes[1], 2.001, TOL);

    println!("\nmatching roots to sources at y4 and y5 (known amplitudes):");
    let match_cfg = MatchConfig::default();
    let mut matched = Vec::new();
    for (slot, sensor) in (3..5).enumerate() {
        let roots = &roots_by_sensor[slot + 1];
        let assignment = match_roots(&amp.amplitudes, roots, &moments[sensor], &match_cfg).unwrap();
        println!(
            "  y{}: winning order assigns source 1 -> root {:.3}, source 2 -> root {:.3} \
             (residual {:.2e}, runner-up {:.2e})",
            sensor + 1,
            roots[assignment.permutation[0]],
            roots[assignment.permutation[1]],
            assignment.residual,
            assignment.runner_up.unwrap_or(f64::INFINITY),
        );
        // The published check: only the swapped system is valid.
        check.claim(
            &format!("y{}: source 1 takes the larger root", sensor + 1),
            assignment.permutation == vec![1, 0],
        );
        matched.push(assignment.permutation);
    }

    println!("\ntrilateration of x1 from its three matched distances:");
    let anchors: Vec<Vec<f64>> = sensors.points()[2..5].to_vec();
    let d1 = vec![
        roots_by_sensor[0][0],
        roots_by_sensor[1][matched[0][0]],
        roots_by_sensor[2][matched[1][0]],
    ];
    let x1 = trilaterate(&anchors, &d1, &GeometryConfig::default()).unwrap();
    check.value("x1[0]", x1[0], -0.998, TOL);
    check.value("x1[1]", x1[1], 0.001, TOL);

    let d2 = vec![
        roots_by_sensor[0][1],
        roots_by_sensor[1][matched[0][1]],
        roots_by_sensor[2][matched[1][1]],
    ];
    let x2 = trilaterate(&anchors, &d2, &GeometryConfig::default()).unwrap();
    check.value("x2[0]", x2[0], 1.0, 1e-2);
    check.value("x2[1]", x2[1], 0.0, 1e-2);

    println!("\nfull pipeline run:");
    let report = recover_points(&moments, 2, 2, &PipelineConfig::new()).unwrap();
    let SourceModel::Points(recovered) = &report.model else {
        unreachable!()
    };
    check.claim(
        "pipeline reproduces both sources",
        dist(&recovered.nodes()[0], &[-1.0, 0.0]) < TOL
            && dist(&recovered.nodes()[1], &[1.0, 0.0]) < TOL,
    );
    check.finish()
}

/// The two-point colliding-amplitude counterexample: identical data at
/// three sensors, recovery must refuse rather than guess.
pub fn counterexample_points() -> Result<(), CliError> {
    let mut check = Checker::new();
    let (f1, f2, sensors) = forward::counterexample_points();

    println!("f1: unit masses at (0, 1) and (2, -1)");
    println!("f2: unit masses at (0, -1) and (2, 1)");
    println!("sensors: (0,0), (2,0), (1,1)\n");

    for (i, y) in sensors.points().iter().enumerate() {
        let m1 = point_moments(&f1, y, 4).unwrap();
        let m2 = point_moments(&f2, y, 4).unwrap();
        let gap = m1
            .values
            .iter()
            .zip(&m2.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        println!(
            "  y{}: tau(f1) = {:?}",
            i + 1,
            m1.values
                .iter()
                .map(|v| (v * 1e3).round() / 1e3)
                .collect::<Vec<_>>()
        );
        check.claim(&format!("y{}: moment vectors identical", i + 1), gap == 0.0);
        let d: Vec<f64> = f1.nodes().iter().map(|x| dist(x, y)).collect();
        check.claim(
            &format!("y{}: distances to the two nodes differ", i + 1),
            (d[0] - d[1]).abs() > 1e-9,
        );
    }

    println!("\nattempting recovery from f1's moments:");
    let moments: Vec<MomentVector> = sensors
        .points()
        .iter()
        .map(|y| point_moments(&f1, y, 4).unwrap())
        .collect();
    let outcome = recover_points(&moments, 2, 2, &PipelineConfig::new());
    let refused = matches!(
        outcome,
        Err(RecoveryError::Assignment {
            source: CorrespondenceError::AmbiguousAssignment { .. },
            ..
        })
    );
    println!(
        "  outcome: {}",
        match &outcome {
            Ok(_) => "recovered a model".to_string(),
            Err(e) => e.to_string(),
        }
    );
    check.claim("recovery terminates with AmbiguousAssignment", refused);
    check.finish()
}

/// The two-line counterexample: five sensors receive identical data from
/// two distinct line pairs.
pub fn counterexample_lines() -> Result<(), CliError> {
    let mut check = Checker::new();
    let (f1, f2, sensors) = forward::counterexample_hyperplanes();

    println!("f1: unit masses on l1: x - 2y = 0 and l2: 2x + y = 0");
    println!("f2: unit masses on k1: x + 2y = 0 and k2: 2x - y = 0");
    println!("sensors: (-1,0), (1,0), (0,-1), (0,1), (1,1)\n");

    println!("unsigned distance table (rows: sensors; columns: l1 l2 k1 k2):");
    let planes: Vec<_> = f1.planes().iter().chain(f2.planes()).collect();
    for (i, y) in sensors.points().iter().enumerate() {
        let row: Vec<f64> = planes.iter().map(|p| unsigned_distance(y, p)).collect();
        println!(
            "  y{}:  {}",
            i + 1,
            row.iter()
                .map(|d| format!("{d:.4}"))
                .collect::<Vec<_>>()
                .join("  ")
        );
    }

    // The first four sensors pair l_i with k_i; the fifth crosses over.
    for i in 0..4 {
        let y = &sensors.points()[i];
        let ok = (unsigned_distance(y, &f1.planes()[0]) - unsigned_distance(y, &f2.planes()[0]))
            .abs()
            < 1e-15
            && (unsigned_distance(y, &f1.planes()[1]) - unsigned_distance(y, &f2.planes()[1]))
                .abs()
                < 1e-15;
        check.claim(&format!("y{}: d(l1) = d(k1) and d(l2) = d(k2)", i + 1), ok);
    }
    let y5 = &sensors.points()[4];
    let d_l1 = unsigned_distance(y5, &f1.planes()[0]);
    let d_k2 = unsigned_distance(y5, &f2.planes()[1]);
    check.value("d(y5, l1)", d_l1, 1.0 / 5.0_f64.sqrt(), 1e-12);
    check.claim("d(y5, l1) = d(y5, k2)", (d_l1 - d_k2).abs() < 1e-15);

    println!("\nGaussian-probe moments of f1 and f2 at every sensor:");
    for (i, y) in sensors.points().iter().enumerate() {
        let m1 = forward::hyperplane_moments(&f1, y, 2).unwrap();
        let m2 = forward::hyperplane_moments(&f2, y, 2).unwrap();
        let gap = m1
            .values
            .iter()
            .zip(&m2.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        check.claim(
            &format!("y{}: moment vectors agree to 1e-12", i + 1),
            gap < 1e-12,
        );
    }
    check.finish()
}
