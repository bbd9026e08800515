//! Shapiro-Wilk W test for normality, following Royston's AS R94
//! approximation (Applied Statistics 44, 1995): polynomial-corrected
//! normal-scores weights for W and a three-branch p-value transform.

use crate::error::{Error, Result};
use crate::stats::normal::{std_normal_cdf, std_normal_quantile};
use crate::stats::TestReport;

const MIN_N: usize = 3;
const MAX_N: usize = 5000;

// Royston's published polynomial coefficients (ascending powers).
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// W statistic and p-value for the hypothesis that `sample` is normally
/// distributed (any mean and variance; W is affine invariant).
///
/// Supported for `3 <= n <= 5000`. A sample with zero range is degenerate.
pub fn shapiro_wilk(sample: &[f64]) -> Result<TestReport> {
    let n = sample.len();
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(Error::UnsupportedSampleSize { n, min: MIN_N, max: MAX_N });
    }
    let mut x: Vec<f64> = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(Error::DegenerateSample("all observations are equal".into()));
    }

    let weights = lower_half_weights(n);
    let nn2 = n / 2;

    // Correlation form of W between the full antisymmetric weight vector
    // and the order statistics; x is scaled by its range for stability.
    let nf = n as f64;
    let mut sa = 0.0;
    let mut sx = 0.0;
    for (i, xi) in x.iter().enumerate() {
        sa += full_weight(&weights, n, i);
        sx += xi / range;
    }
    sa /= nf;
    sx /= nf;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        let da = full_weight(&weights, n, i) - sa;
        let dx = xi / range - sx;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p_value = p_value_for(w, w1, n);
    debug_assert!(nn2 == weights.len());
    Ok(TestReport { statistic: w, p_value, test_name: "shapiro-wilk".into() })
}

/// Weights for the lower half of the ordered sample; the upper half is the
/// negated mirror image and the middle weight (odd n) is zero.
fn lower_half_weights(n: usize) -> Vec<f64> {
    let nn2 = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an25 = n as f64 + 0.25;
    let mut m: Vec<f64> = (0..nn2)
        .map(|i| std_normal_quantile((i as f64 + 1.0 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let (start, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        m[1] = a2;
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    m[0] = a1;
    for v in m.iter_mut().skip(start) {
        *v = -*v / fac;
    }
    m
}

fn full_weight(lower: &[f64], n: usize, i: usize) -> f64 {
    let nn2 = n / 2;
    if i < nn2 {
        -lower[i]
    } else if n - 1 - i < nn2 {
        lower[n - 1 - i]
    } else {
        0.0
    }
}

fn p_value_for(w: f64, w1: f64, n: usize) -> f64 {
    if n == 3 {
        // Exact for n = 3.
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::PI / 3.0;
        return (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0);
    }
    let y = w1.ln();
    let an = n as f64;
    if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-19;
        }
        let y = -(gamma - y).ln();
        let mu = poly(&C3, an);
        let sigma = poly(&C4, an).exp();
        (1.0 - std_normal_cdf((y - mu) / sigma)).clamp(0.0, 1.0)
    } else {
        let xx = an.ln();
        let mu = poly(&C5, xx);
        let sigma = poly(&C6, xx).exp();
        (1.0 - std_normal_cdf((y - mu) / sigma)).clamp(0.0, 1.0)
    }
}
