//! Subgradient training of a network inside a sieve level: loss-gradient
//! steps on the output weights while their l1 constraint holds, sign-vector
//! subgradient steps when it is violated, with a nonsummable diminishing
//! step size. Hidden-layer parameters follow plain gradient descent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{grad_with_loss, Dataset, Theta};

/// Training hyperparameters. Defaults follow the simulation setup:
/// step size `0.1 / log(e + k)` on the output weights and a constant 0.1
/// learning rate on the hidden layer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    /// Numerator of the diminishing step size for the output weights.
    pub alpha_step_scale: f64,
    /// Constant learning rate for hidden weights and biases.
    pub gamma_learning_rate: f64,
    /// Parameters start uniform on `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub seed: u64,
    /// Tolerance of the approximate minimizer. Best-iterate reporting makes
    /// the realized slack zero; the field records the contract.
    pub eta_n: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            alpha_step_scale: 0.1,
            gamma_learning_rate: 0.1,
            init_scale: 0.5,
            seed: 0,
            eta_n: 0.0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iteration budget must be >= 1".into()));
        }
        if self.alpha_step_scale <= 0.0 || self.gamma_learning_rate <= 0.0 {
            return Err(Error::InvalidInput("step scales must be positive".into()));
        }
        if self.init_scale < 0.0 || self.eta_n < 0.0 {
            return Err(Error::InvalidInput("init_scale and eta_n must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Fit outcome: the best feasible iterate by loss, its loss, and the loss
/// trajectory of every visited iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Theta,
    pub final_loss: f64,
    pub loss_trace: Vec<f64>,
    /// Whether `theta_hat` satisfies the output-weight constraint; true by
    /// construction because the search starts feasible.
    pub feasible: bool,
    pub iterations_run: usize,
}

/// Nonsummable diminishing step size `scale / log(e + k)`: positive,
/// strictly decreasing, with divergent sum.
pub fn step_size(k: usize, scale: f64) -> f64 {
    scale / (std::f64::consts::E + k as f64).ln()
}

/// Subgradient step direction for the output weights `(alpha_0 .. alpha_r)`:
/// the loss gradient while `sum_j |alpha_j| <= V_n`, otherwise a subgradient
/// of the l1 constraint (the sign vector, taking 0 at exact zeros).
pub fn alpha_subgradient(theta: &Theta, data: &Dataset, v_n: f64) -> Result<Vec<f64>> {
    if theta.alpha_l1() <= v_n {
        let (g, _) = grad_with_loss(theta, data)?;
        let mut out = Vec::with_capacity(theta.hidden_units() + 1);
        out.push(g.alpha0);
        out.extend_from_slice(&g.alpha);
        Ok(out)
    } else {
        let mut out = Vec::with_capacity(theta.hidden_units() + 1);
        out.push(sign(theta.alpha0));
        out.extend(theta.alpha.iter().map(|&a| sign(a)));
        Ok(out)
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Random initialization, uniform on `[-init_scale, init_scale]` for every
/// parameter, deterministic in the seed.
pub fn initialize(r_n: usize, d: usize, config: &TrainConfig) -> Theta {
    if config.init_scale == 0.0 {
        return Theta::zeros(r_n.max(1), d.max(1));
    }
    let s = config.init_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draw = |rng: &mut ChaCha8Rng| rng.random_range(-s..=s);
    let alpha0 = draw(&mut rng);
    let alpha: Vec<f64> = (0..r_n).map(|_| draw(&mut rng)).collect();
    let gamma0: Vec<f64> = (0..r_n).map(|_| draw(&mut rng)).collect();
    let gamma: Vec<Vec<f64>> = (0..r_n)
        .map(|_| (0..d).map(|_| draw(&mut rng)).collect())
        .collect();
    Theta { alpha0, alpha, gamma0, gamma }
}

/// Fits a network with `r_n` hidden units under the output-weight budget
/// `v_n` by the subgradient method, reporting the minimum-loss feasible
/// iterate seen along the trajectory.
pub fn fit(data: &Dataset, r_n: usize, v_n: f64, config: &TrainConfig) -> Result<FitResult> {
    config.validate()?;
    if r_n == 0 {
        return Err(Error::InvalidInput("need at least one hidden unit".into()));
    }
    if v_n <= 4.0 {
        return Err(Error::InvalidInput(format!("V_n must exceed 4, got {v_n}")));
    }

    let d = data.dim();
    let mut theta = initialize(r_n, d, config);
    // Start strictly inside the constraint so a feasible iterate always exists.
    let l1 = theta.alpha_l1();
    if l1 > v_n {
        let shrink = 0.5 * v_n / l1;
        theta.alpha0 *= shrink;
        for a in theta.alpha.iter_mut() {
            *a *= shrink;
        }
    }

    let lr = config.gamma_learning_rate;
    let mut loss_trace = Vec::with_capacity(config.iterations + 1);
    let mut best_loss = f64::INFINITY;
    let mut best_theta = theta.clone();

    for k in 0..config.iterations {
        let (g, loss) = grad_with_loss(&theta, data)?;
        loss_trace.push(loss);
        let feasible = theta.alpha_l1() <= v_n;
        if feasible && loss < best_loss {
            best_loss = loss;
            best_theta = theta.clone();
        }

        let delta = step_size(k, config.alpha_step_scale);
        if feasible {
            theta.alpha0 -= delta * g.alpha0;
            for (a, ga) in theta.alpha.iter_mut().zip(&g.alpha) {
                *a -= delta * ga;
            }
        } else {
            theta.alpha0 -= delta * sign(theta.alpha0);
            for a in theta.alpha.iter_mut() {
                *a -= delta * sign(*a);
            }
        }
        for j in 0..r_n {
            theta.gamma0[j] -= lr * g.gamma0[j];
            for (w, gw) in theta.gamma[j].iter_mut().zip(&g.gamma[j]) {
                *w -= lr * gw;
            }
        }
    }

    // The final update produced one more iterate worth considering.
    let (_, last_loss) = grad_with_loss(&theta, data)?;
    loss_trace.push(last_loss);
    if theta.alpha_l1() <= v_n && last_loss < best_loss {
        best_loss = last_loss;
        best_theta = theta;
    }

    let feasible = best_theta.alpha_l1() <= v_n && best_theta.hidden_units() <= r_n;
    Ok(FitResult {
        theta_hat: best_theta,
        final_loss: best_loss,
        loss_trace,
        feasible,
        iterations_run: config.iterations,
    })
}
