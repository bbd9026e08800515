//! Single-hidden-layer sigmoid networks: parameter vector, evaluation,
//! analytic gradients of the mean squared error, the empirical pseudo-norm
//! over a fixed design, and total variation of univariate networks.

use crate::error::{Error, Result};

/// Logistic sigmoid `1 / (1 + e^{-z})`.
///
/// Evaluated through `e^{-|z|}` so neither branch can overflow; the result
/// is always finite and inside `(0, 1)` up to floating-point rounding.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Derivative of the sigmoid expressed through its value: `s (1 - s)`.
#[inline]
pub fn sigmoid_prime(z: f64) -> f64 {
    let s = sigmoid(z);
    s * (1.0 - s)
}

/// Full parameter vector of a single-hidden-layer network with `r` hidden
/// units on `d`-dimensional inputs:
///
/// `f(x) = alpha0 + sum_j alpha[j] * sigmoid(gamma[j] . x + gamma0[j])`
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    /// Output bias.
    pub alpha0: f64,
    /// Output weights, one per hidden unit.
    pub alpha: Vec<f64>,
    /// Hidden biases, one per hidden unit.
    pub gamma0: Vec<f64>,
    /// Hidden weight vectors, one length-`d` row per hidden unit.
    pub gamma: Vec<Vec<f64>>,
}

impl Theta {
    /// Builds a parameter vector, checking that all per-unit containers
    /// agree on the hidden-unit count `r >= 1` and that every hidden weight
    /// row has the same length `d >= 1`.
    pub fn new(alpha0: f64, alpha: Vec<f64>, gamma0: Vec<f64>, gamma: Vec<Vec<f64>>) -> Result<Self> {
        let r = alpha.len();
        if r == 0 {
            return Err(Error::InvalidInput("need at least one hidden unit".into()));
        }
        if gamma0.len() != r || gamma.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "alpha has {r} units but gamma0 has {} and gamma has {}",
                gamma0.len(),
                gamma.len()
            )));
        }
        let d = gamma[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("input dimension must be >= 1".into()));
        }
        if gamma.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch(
                "hidden weight rows have unequal lengths".into(),
            ));
        }
        Ok(Self { alpha0, alpha, gamma0, gamma })
    }

    /// All-zero parameters with `r` hidden units in dimension `d`.
    pub fn zeros(r: usize, d: usize) -> Self {
        Self {
            alpha0: 0.0,
            alpha: vec![0.0; r],
            gamma0: vec![0.0; r],
            gamma: vec![vec![0.0; d]; r],
        }
    }

    /// Number of hidden units `r`.
    pub fn hidden_units(&self) -> usize {
        self.alpha.len()
    }

    /// Input dimension `d`.
    pub fn input_dim(&self) -> usize {
        self.gamma[0].len()
    }

    /// Total number of free parameters, `r (d + 2) + 1`.
    pub fn param_count(&self) -> usize {
        self.hidden_units() * (self.input_dim() + 2) + 1
    }

    /// `sum_{j=0..r} |alpha_j|`, the l1 norm of output weights and bias.
    pub fn alpha_l1(&self) -> f64 {
        self.alpha0.abs() + self.alpha.iter().map(|a| a.abs()).sum::<f64>()
    }

    /// `max_j (|gamma0_j| + sum_i |gamma_{i,j}|)` over hidden units.
    pub fn hidden_l1_max(&self) -> f64 {
        self.gamma0
            .iter()
            .zip(&self.gamma)
            .map(|(g0, g)| g0.abs() + g.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Network output at a single point.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has dimension {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut out = self.alpha0;
        for j in 0..self.alpha.len() {
            let mut z = self.gamma0[j];
            for (w, xi) in self.gamma[j].iter().zip(x) {
                z += w * xi;
            }
            out += self.alpha[j] * sigmoid(z);
        }
        out
    }

    /// Network outputs at every point of a dataset's design.
    pub fn eval_design(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "design has dimension {}, network expects {}",
                data.dim(),
                self.input_dim()
            )));
        }
        Ok(data.x.iter().map(|p| self.eval_unchecked(p)).collect())
    }
}

/// Fixed design points with responses, plus (for simulated data) the true
/// function values at the design.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub f0_values: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, f0_values: Option<Vec<f64>>) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset must be nonempty".into()));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} design points but {} responses",
                n,
                y.len()
            )));
        }
        if let Some(f0) = &f0_values {
            if f0.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} design points but {} true-function values",
                    n,
                    f0.len()
                )));
            }
        }
        let d = x[0].len();
        if d == 0 || x.iter().any(|p| p.len() != d) {
            return Err(Error::DimensionMismatch(
                "design points have unequal or zero dimensions".into(),
            ));
        }
        Ok(Self { x, y, f0_values })
    }

    /// Convenience constructor for univariate designs.
    pub fn univariate(x: Vec<f64>, y: Vec<f64>, f0_values: Option<Vec<f64>>) -> Result<Self> {
        Self::new(x.into_iter().map(|v| vec![v]).collect(), y, f0_values)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }
}

/// Gradient of the empirical squared error loss `n^-1 sum (y_i - f(x_i))^2`
/// with respect to every parameter, returned in the same shape as `Theta`.
pub fn grad(theta: &Theta, data: &Dataset) -> Result<Theta> {
    grad_with_loss(theta, data).map(|(g, _)| g)
}

/// Gradient together with the loss value; both come from one forward pass.
#[allow(clippy::needless_range_loop)] // j indexes four parallel per-unit arrays
pub(crate) fn grad_with_loss(theta: &Theta, data: &Dataset) -> Result<(Theta, f64)> {
    if data.dim() != theta.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "design has dimension {}, network expects {}",
            data.dim(),
            theta.input_dim()
        )));
    }
    let n = data.len();
    let r = theta.hidden_units();
    let d = theta.input_dim();
    let mut g = Theta::zeros(r, d);
    let mut sum_sq = 0.0;

    for (x, &y) in data.x.iter().zip(&data.y) {
        let mut fx = theta.alpha0;
        let mut s = vec![0.0; r];
        for j in 0..r {
            let mut z = theta.gamma0[j];
            for (w, xi) in theta.gamma[j].iter().zip(x) {
                z += w * xi;
            }
            s[j] = sigmoid(z);
            fx += theta.alpha[j] * s[j];
        }
        let e = y - fx;
        sum_sq += e * e;
        g.alpha0 += e;
        for j in 0..r {
            g.alpha[j] += e * s[j];
            let back = e * theta.alpha[j] * s[j] * (1.0 - s[j]);
            g.gamma0[j] += back;
            for (gk, xi) in g.gamma[j].iter_mut().zip(x) {
                *gk += back * xi;
            }
        }
    }

    let scale = -2.0 / n as f64;
    g.alpha0 *= scale;
    for j in 0..r {
        g.alpha[j] *= scale;
        g.gamma0[j] *= scale;
        for gk in g.gamma[j].iter_mut() {
            *gk *= scale;
        }
    }
    Ok((g, sum_sq / n as f64))
}

/// Empirical pseudo-norm `sqrt(n^-1 sum f_i^2)` of a value sequence.
pub fn empirical_norm(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empirical norm of empty sequence".into()));
    }
    let n = values.len() as f64;
    Ok((values.iter().map(|v| v * v).sum::<f64>() / n).sqrt())
}

/// Empirical pseudo-norm of the pointwise difference `f - g`.
pub fn empirical_distance(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "sequences of lengths {} and {}",
            f.len(),
            g.len()
        )));
    }
    let diff: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    empirical_norm(&diff)
}

/// Empirical pseudo-inner product `n^-1 sum f_i g_i`; satisfies
/// `empirical_norm(f)^2 == inner_product(f, f)`.
pub fn inner_product(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::InvalidInput("inner product of empty sequences".into()));
    }
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "sequences of lengths {} and {}",
            f.len(),
            g.len()
        )));
    }
    let n = f.len() as f64;
    Ok(f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / n)
}

/// Half-width, in units of `z`, outside which the remaining sigmoid
/// derivative mass is below 1e-17 and can be ignored by the quadrature.
const TV_CUTOFF: f64 = 40.0;

/// Total variation `int |f'(x)| dx` of a univariate network, by adaptive
/// quadrature over the region where the units' sigmoid derivatives have
/// non-negligible mass. Bounded by `sum_j |alpha_j|` up to quadrature
/// tolerance because each unit's derivative integrates to exactly one.
pub fn total_variation(theta: &Theta) -> Result<f64> {
    if theta.input_dim() != 1 {
        return Err(Error::UnsupportedDimension(theta.input_dim()));
    }
    let r = theta.hidden_units();

    // Units with zero output weight or zero slope contribute nothing.
    let active: Vec<usize> = (0..r)
        .filter(|&j| theta.alpha[j] != 0.0 && theta.gamma[j][0] != 0.0)
        .collect();
    if active.is_empty() {
        return Ok(0.0);
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    // Knots at each unit's center and a few slope-scaled offsets keep the
    // adaptive pass from stepping over narrow derivative spikes.
    let mut knots: Vec<f64> = Vec::new();
    for &j in &active {
        let gj = theta.gamma[j][0];
        let g0 = theta.gamma0[j];
        let a = (-TV_CUTOFF - g0) / gj;
        let b = (TV_CUTOFF - g0) / gj;
        lo = lo.min(a.min(b));
        hi = hi.max(a.max(b));
        let center = -g0 / gj;
        let width = 1.0 / gj.abs();
        for m in [-8.0, -2.0, 0.0, 2.0, 8.0] {
            knots.push(center + m * width);
        }
    }
    knots.retain(|k| *k > lo && *k < hi);
    knots.push(lo);
    knots.push(hi);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();

    let deriv_abs = |x: f64| -> f64 {
        let mut df = 0.0;
        for &j in &active {
            let z = theta.gamma[j][0] * x + theta.gamma0[j];
            df += theta.alpha[j] * theta.gamma[j][0] * sigmoid_prime(z);
        }
        df.abs()
    };

    let mut total = 0.0;
    for w in knots.windows(2) {
        total += adaptive_simpson(&deriv_abs, w[0], w[1], 1e-10, 48);
    }
    Ok(total)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
