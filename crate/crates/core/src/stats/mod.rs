//! Test statistics for the fitted networks: the residual variance
//! estimator, the normalized sum statistic of the fit error, one-sample
//! Kolmogorov-Smirnov and Shapiro-Wilk normality tests, and normal Q-Q
//! plot coordinates.

pub mod normal;
mod swilk;

pub use normal::{erf, erfc, kolmogorov_sf, std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use swilk::shapiro_wilk;

use crate::error::{Error, Result};

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub test_name: String,
}

/// Residual variance estimator `n^-1 sum r_i^2`. Applied to the residuals
/// of a fit this equals the achieved empirical squared error loss.
pub fn sigma_hat_sq(residuals: &[f64]) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::InvalidInput("sigma_hat_sq of empty residuals".into()));
    }
    Ok(residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64)
}

/// Normalized sum statistic `(sigma sqrt(n))^-1 sum (fhat_i - f0_i)`.
///
/// With `sigma = 1` this is the unstandardized statistic whose limit is
/// normal with the error variance; with the plug-in estimate it is
/// asymptotically standard normal.
pub fn normality_statistic(fhat_values: &[f64], f0_values: &[f64], sigma: f64) -> Result<f64> {
    if fhat_values.is_empty() || fhat_values.len() != f0_values.len() {
        return Err(Error::InvalidInput(format!(
            "need equal nonempty value sequences, got {} and {}",
            fhat_values.len(),
            f0_values.len()
        )));
    }
    if sigma <= 0.0 {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let n = fhat_values.len() as f64;
    let sum: f64 = fhat_values.iter().zip(f0_values).map(|(f, g)| f - g).sum();
    Ok(sum / (sigma * n.sqrt()))
}

/// One-sample Kolmogorov-Smirnov test against the fully specified standard
/// normal. `D = sup |F_n - Phi|` over the order statistics; the p-value
/// comes from the asymptotic Kolmogorov distribution at `sqrt(n) D`.
pub fn ks_test_std_normal(sample: &[f64]) -> Result<TestReport> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("KS test on empty sample".into()));
    }
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &xi) in x.iter().enumerate() {
        let cdf = std_normal_cdf(xi);
        let upper = (i + 1) as f64 / n - cdf;
        let lower = cdf - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    let p_value = kolmogorov_sf(n.sqrt() * d);
    Ok(TestReport { statistic: d, p_value, test_name: "kolmogorov-smirnov".into() })
}

/// Normal Q-Q coordinates: `(Phi^-1((i - 0.5)/n), x_(i))` for the sorted
/// sample, one pair per observation.
pub fn qq_points(sample: &[f64]) -> Vec<(f64, f64)> {
    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("sample contains NaN"));
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &xi)| (std_normal_quantile((i as f64 + 0.5) / n), xi))
        .collect()
}
