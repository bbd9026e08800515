//! Sieve growth schedules, feasibility of a parameter vector within a sieve
//! level, a covering-number (metric entropy) upper bound for the network
//! class, and growth-rate diagnostics for the consistency and normality
//! regimes.

use crate::error::{Error, Result};
use crate::network::Theta;

/// Rule producing the hidden-weight l1 budget `M_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MRule {
    /// `M_n = max(10, V_n)`. Training constrains only the output weights,
    /// so this budget is reported rather than enforced.
    Auto,
    Constant(f64),
}

/// Growth rules mapping a sample size `n` to the sieve level
/// `(r_n, V_n, M_n)`:
///
/// * `r_n = floor(n^r_exponent)` hidden units,
/// * `V_n = v_scale * n^v_exponent` output-weight l1 budget,
/// * `M_n` from [`MRule`].
#[derive(Debug, Clone, PartialEq)]
pub struct SieveSchedule {
    pub r_exponent: f64,
    pub v_scale: f64,
    pub v_exponent: f64,
    pub m_rule: MRule,
    /// Input dimension of the design.
    pub d: usize,
}

/// Sieve level at a concrete sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveDims {
    pub r_n: usize,
    pub v_n: f64,
    pub m_n: f64,
    /// Parameter count `r_n (d + 2) + 1`.
    pub p_n: usize,
}

impl SieveSchedule {
    /// Validates that the rules produce `r_n >= 1`, `V_n > 4` and `M_n > 0`
    /// for every `n >= 1`, all nondecreasing in `n`.
    pub fn new(r_exponent: f64, v_scale: f64, v_exponent: f64, m_rule: MRule, d: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&r_exponent) {
            return Err(Error::InvalidInput(format!(
                "hidden-unit exponent must be in [0, 1), got {r_exponent}"
            )));
        }
        if v_scale <= 4.0 {
            return Err(Error::InvalidInput(format!(
                "v_scale must exceed 4 so that V_n > 4 for all n, got {v_scale}"
            )));
        }
        if !(0.0..1.0).contains(&v_exponent) {
            return Err(Error::InvalidInput(format!(
                "v_exponent must be in [0, 1), got {v_exponent}"
            )));
        }
        if let MRule::Constant(m) = m_rule {
            if m <= 0.0 {
                return Err(Error::InvalidInput(format!("M_n must be positive, got {m}")));
            }
        }
        if d == 0 {
            return Err(Error::InvalidInput("input dimension must be >= 1".into()));
        }
        Ok(Self { r_exponent, v_scale, v_exponent, m_rule, d })
    }

    /// The growth schedule used for the consistency experiments:
    /// `r_n = n^(1/4)`, `V_n = 10 n^(1/4)`.
    pub fn consistency(d: usize) -> Self {
        Self::new(0.25, 10.0, 0.25, MRule::Auto, d).unwrap()
    }

    /// The slower schedule used for the normality experiments:
    /// `r_n = n^(1/8)`, `V_n = 10 n^(1/10)`.
    pub fn normality(d: usize) -> Self {
        Self::new(0.125, 10.0, 0.1, MRule::Auto, d).unwrap()
    }

    /// Sieve level at sample size `n >= 1`.
    pub fn dims(&self, n: usize) -> SieveDims {
        let nf = n as f64;
        let r_n = (nf.powf(self.r_exponent).floor() as usize).max(1);
        let v_n = self.v_scale * nf.powf(self.v_exponent);
        let m_n = match self.m_rule {
            MRule::Auto => v_n.max(10.0),
            MRule::Constant(m) => m,
        };
        SieveDims { r_n, v_n, m_n, p_n: r_n * (self.d + 2) + 1 }
    }

    /// Consistency-regime diagnostic over a grid of sample sizes; the fit
    /// error vanishes when this ratio tends to zero.
    pub fn check_consistency_rate(&self, n_grid: &[usize]) -> Vec<f64> {
        n_grid
            .iter()
            .map(|&n| {
                let dims = self.dims(n);
                consistency_ratio(dims.r_n, dims.v_n, self.d, n)
            })
            .collect()
    }

    /// Normality-regime diagnostic over a grid of sample sizes; the scaled
    /// fit error is asymptotically normal under this (stricter) condition.
    pub fn check_normality_rate(&self, n_grid: &[usize]) -> Vec<f64> {
        n_grid
            .iter()
            .map(|&n| {
                let dims = self.dims(n);
                normality_ratio(dims.r_n, dims.v_n, self.d, n)
            })
            .collect()
    }

    /// Moment-condition diagnostic `r_n (d + 2) log n / V_n^lambda` over a
    /// grid. `lambda` is tied to the error moment order `E|eps|^(2+lambda)`
    /// and has no universal default, so it must be supplied explicitly.
    pub fn check_moment_rate(&self, lambda: f64, n_grid: &[usize]) -> Result<Vec<f64>> {
        if lambda <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "moment order lambda must be positive, got {lambda}"
            )));
        }
        Ok(n_grid
            .iter()
            .map(|&n| {
                let dims = self.dims(n);
                dims.r_n as f64 * (self.d + 2) as f64 * (n as f64).ln() / dims.v_n.powf(lambda)
            })
            .collect())
    }

    /// Stochastic term of the convergence rate, `sqrt(r_n (d + 2) log n / n)`.
    /// The approximation error of the sieve class is not computable and is
    /// not included.
    pub fn predicted_rate(&self, n: usize) -> f64 {
        let dims = self.dims(n);
        let nf = n as f64;
        (dims.r_n as f64 * (self.d + 2) as f64 * nf.ln() / nf).sqrt()
    }
}

/// Raw consistency-regime ratio `p_n V_n^2 log(V_n p_n) / n` with
/// `p_n = r_n (d + 2) + 1`.
pub fn consistency_ratio(r_n: usize, v_n: f64, d: usize, n: usize) -> f64 {
    let p = (r_n * (d + 2) + 1) as f64;
    p * v_n * v_n * (v_n * p).ln() / n as f64
}

/// Raw normality-regime ratio `r_n (d + 2) V_n log(r_n V_n (d + 2)) / n^(1/4)`.
pub fn normality_ratio(r_n: usize, v_n: f64, d: usize, n: usize) -> f64 {
    let rd = (r_n * (d + 2)) as f64;
    rd * v_n * (rd * v_n).ln() / (n as f64).powf(0.25)
}

/// True when `theta` lies inside the sieve level: at most `r_n` hidden
/// units, output-weight l1 norm within `V_n`, and every hidden unit's l1
/// norm within `M_n`. Invariant under permutation of hidden units.
pub fn is_feasible(theta: &Theta, r_n: usize, v_n: f64, m_n: f64) -> bool {
    theta.hidden_units() <= r_n && theta.alpha_l1() <= v_n && theta.hidden_l1_max() <= m_n
}

/// A covering-number query: ball radius `epsilon` at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyQuery {
    pub epsilon: f64,
    pub n: usize,
}

impl EntropyQuery {
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        if epsilon <= 0.0 {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be >= 1".into()));
        }
        Ok(Self { epsilon, n })
    }
}

/// Upper bound on the sup-norm metric entropy of the sieve class:
///
/// `log N(eps) <= p log( 4 e p (V/4)^2 / (eps (V/4 - 1)) )`, `p = r (d+2) + 1`.
///
/// Nonincreasing in `eps`; requires `V > 4` for the denominator.
pub fn log_covering_bound(query: &EntropyQuery, r_n: usize, v_n: f64, d: usize) -> Result<f64> {
    if v_n <= 4.0 {
        return Err(Error::Domain(format!(
            "covering bound needs V_n > 4, got {v_n}"
        )));
    }
    let p = (r_n * (d + 2) + 1) as f64;
    let quarter_v = 0.25 * v_n;
    let inner = 4.0 * std::f64::consts::E * p * quarter_v * quarter_v
        / (query.epsilon * (quarter_v - 1.0));
    Ok(p * inner.ln())
}
