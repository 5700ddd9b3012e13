//! Scalar quadrature helpers shared by the forward model and the Hankel
//! machinery: an adaptive Gauss–Kronrod rule for smooth integrands on a
//! finite interval, and composite Newton–Cotes rules for sampled data.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature did not reach the requested tolerance (estimated error {estimate:e})")]
    NotConverged { estimate: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

// 7-point Gauss / 15-point Kronrod pair on [-1, 1] (QUADPACK dqk15 values).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One G7/K15 evaluation on [a, b]; returns (kronrod value, |K15 - G7|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Subdivides until the summed error estimate is below
/// `abs_tol + rel_tol * |integral|` or the interval budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, QuadError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::BadInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };

    // Max-heap on error estimate, as (err, a, b, value) tuples.
    let (v0, e0) = gk15(&f, lo, hi);
    let mut segments: Vec<(f64, f64, f64, f64)> = vec![(e0, lo, hi, v0)];
    let mut total = v0;
    let mut total_err = e0;
    const MAX_SEGMENTS: usize = 4096;

    while total_err > abs_tol + rel_tol * total.abs() {
        if segments.len() >= MAX_SEGMENTS {
            return Err(QuadError::NotConverged {
                estimate: total_err,
            });
        }
        // Split the segment with the largest error estimate.
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .unwrap();
        let (err, sa, sb, sv) = segments.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            // Interval no longer splittable in f64; accept its estimate.
            segments.push((0.0, sa, sb, sv));
            total_err -= err;
            continue;
        }
        let (vl, el) = gk15(&f, sa, mid);
        let (vr, er) = gk15(&f, mid, sb);
        total += vl + vr - sv;
        total_err += el + er - err;
        segments.push((el, sa, mid, vl));
        segments.push((er, mid, sb, vr));
    }
    Ok(sign * total)
}

/// Integral of uniformly sampled data by composite Boole's rule (O(h^6)),
/// with a Simpson/trapezoid finish on whatever intervals remain.
fn integrate_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1; // interval count
    let mut total = 0.0;
    let mut i = 0;
    while i + 4 <= n {
        total += h / 45.0
            * (14.0 * (values[i] + values[i + 4])
                + 64.0 * (values[i + 1] + values[i + 3])
                + 24.0 * values[i + 2]);
        i += 4;
    }
    if i + 2 <= n {
        total += h / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        i += 2;
    }
    if i < n {
        total += 0.5 * h * (values[i] + values[i + 1]);
    }
    total
}

/// Integral of sampled data `(x_i, y_i)` over the sampled range.
///
/// Uses composite Boole on uniform grids and a parabola-per-interval-pair
/// (irregular Simpson) rule otherwise. The grid must be strictly increasing
/// with at least two points.
pub fn integrate_samples(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two samples");
    let h0 = x[1] - x[0];
    let uniform = x
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h0).abs() <= 1e-9 * h0.abs().max(1.0));
    if uniform {
        return integrate_uniform(y, h0);
    }

    // Irregular composite Simpson: exact for quadratics on each point triple.
    let n = x.len() - 1;
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 <= n {
        let (x0, x1, x2) = (x[i], x[i + 1], x[i + 2]);
        let (y0, y1, y2) = (y[i], y[i + 1], y[i + 2]);
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let common = (h1 + h2) / 6.0;
        total += common
            * ((2.0 - h2 / h1) * y0
                + (h1 + h2) * (h1 + h2) / (h1 * h2) * y1
                + (2.0 - h1 / h2) * y2);
        i += 2;
    }
    if i < n {
        total += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    }
    total
}
