//! Standard normal CDF/quantile and the Kolmogorov distribution, built on a
//! series + continued-fraction error function. No external math crates; the
//! values are checked against reference implementations in the tests.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_SQRT_PI, PI};

const SQRT_2PI: f64 = 2.5066282746310005;

/// Error function. Series expansion on `|x| <= 2`, continued fraction for
/// the complement beyond; absolute error well under 1e-14.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= 2.0 {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

/// Complementary error function, relatively accurate in the tail.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Confluent series `erf(x) = (2x/sqrt(pi)) e^{-x^2} sum (2x^2)^n / (2n+1)!!`;
/// all terms positive, so no cancellation.
fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let two_x2 = 2.0 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= two_x2 / (2 * n + 1) as f64;
        sum += term;
        if term < 1e-18 * sum || n > 200 {
            break;
        }
    }
    FRAC_2_SQRT_PI * x * (-x * x).exp() * sum
}

/// Laplace continued fraction for `erfc`, evaluated by backward recurrence:
/// `erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
fn erfc_cf(x: f64) -> f64 {
    let mut t = 0.0;
    for k in (1..=120).rev() {
        t = (0.5 * k as f64) / (x + t);
    }
    (-x * x).exp() / (PI.sqrt() * (x + t))
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - 0.5 * erfc(x * FRAC_1_SQRT_2)
    } else {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal quantile: Acklam's rational approximation refined by one
/// Newton step against the CDF above.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    // Work in the lower tail and reflect, so the Newton residual never
    // suffers cancellation against values near one.
    if p > 0.5 {
        return -std_normal_quantile(1.0 - p);
    }

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut z = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    let pdf = std_normal_pdf(z);
    if pdf > 0.0 {
        z -= (std_normal_cdf(z) - p) / pdf;
    }
    z
}

/// Survival function of the Kolmogorov distribution,
/// `Q(t) = P(sup |B(s)| > t)` for the Brownian bridge limit. Uses the
/// theta-function form for small `t` and the alternating series otherwise.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.18 {
        let factor = SQRT_2PI / t;
        let w = PI * PI / (8.0 * t * t);
        let mut cdf = 0.0;
        for j in 0..20 {
            let k = (2 * j + 1) as f64;
            let term = (-k * k * w).exp();
            cdf += term;
            if term < 1e-18 {
                break;
            }
        }
        (1.0 - factor * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * t * t).exp();
            if k % 2 == 1 {
                sf += term;
            } else {
                sf -= term;
            }
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}
