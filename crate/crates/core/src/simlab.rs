//! Simulation laboratory: the three true regression functions, seeded data
//! generation, and the experiment pipelines (parameter inconsistency,
//! fit-error consistency over growing samples, and normality of the scaled
//! fit error over replicated runs).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{empirical_distance, Dataset, Theta};
use crate::sieve::{is_feasible, SieveSchedule};
use crate::stats::{ks_test_std_normal, normality_statistic, qq_points, shapiro_wilk, TestReport};
use crate::trainer::{fit, TrainConfig};

/// The three simulated true functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    /// A two-hidden-unit network; the estimable case whose parameters are
    /// nevertheless unidentifiable.
    Nn,
    /// A smooth trigonometric function.
    Trig,
    /// A continuous function with a non-differentiable point at the origin.
    Nd,
}

impl Truth {
    pub const ALL: [Truth; 3] = [Truth::Nn, Truth::Trig, Truth::Nd];

    pub fn label(&self) -> &'static str {
        match self {
            Truth::Nn => "nn",
            Truth::Trig => "trig",
            Truth::Nd => "nd",
        }
    }
}

impl std::str::FromStr for Truth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(Truth::Nn),
            "trig" | "tri" | "sine" => Ok(Truth::Trig),
            "nd" => Ok(Truth::Nd),
            other => Err(Error::InvalidInput(format!("unknown truth kind '{other}'"))),
        }
    }
}

/// True function value at a univariate design point.
pub fn true_function(kind: Truth, x: f64) -> f64 {
    use crate::network::sigmoid;
    match kind {
        Truth::Nn => -1.0 + sigmoid(2.0 * x + 1.0) - sigmoid(-x + 1.0),
        Truth::Trig => (std::f64::consts::PI / 3.0 * x).sin()
            + (std::f64::consts::PI / 4.0 * x + 1.0).cos() / 3.0,
        Truth::Nd => {
            if x <= 0.0 {
                -2.0 * x
            } else {
                x.sqrt() * (x - 0.25)
            }
        }
    }
}

/// The parameter vector realizing the `Truth::Nn` function.
pub fn nn_truth_theta() -> Theta {
    Theta::new(-1.0, vec![1.0, -1.0], vec![1.0, 1.0], vec![vec![2.0], vec![-1.0]]).unwrap()
}

/// One simulation setting: truth, noise level, sample size, sieve schedule,
/// training configuration and replicate count. The training seed doubles as
/// the master seed for replicate derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub truth: Truth,
    pub noise_sd: f64,
    pub n: usize,
    pub schedule: SieveSchedule,
    pub train: TrainConfig,
    pub replicates: usize,
}

impl Scenario {
    pub fn new(
        truth: Truth,
        noise_sd: f64,
        n: usize,
        schedule: SieveSchedule,
        train: TrainConfig,
        replicates: usize,
    ) -> Result<Self> {
        if noise_sd < 0.0 {
            return Err(Error::InvalidInput(format!("noise sd must be >= 0, got {noise_sd}")));
        }
        if n == 0 || replicates == 0 {
            return Err(Error::InvalidInput("need n >= 1 and replicates >= 1".into()));
        }
        if schedule.d != 1 {
            return Err(Error::UnsupportedDimension(schedule.d));
        }
        Ok(Self { truth, noise_sd, n, schedule, train, replicates })
    }
}

/// Stable seed derivation: a SplitMix64 chain over the master seed and a
/// path of counters, so any replicate is reproducible in isolation.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut s = splitmix64(master);
    for &p in parts {
        s = splitmix64(s ^ splitmix64(p));
    }
    s
}

/// Draws a dataset for the scenario: `x_i` standard normal, noise normal
/// with the scenario's standard deviation, true values recorded alongside.
/// Deterministic in the seed.
///
/// The covariates come from an unbounded distribution but are treated as a
/// fixed design once drawn, mirroring the simulation setup; the estimation
/// theory itself assumes a fixed design on a compact set.
pub fn generate(scenario: &Scenario, seed: u64) -> Dataset {
    generate_raw(scenario.truth, scenario.n, scenario.noise_sd, seed)
}

fn generate_raw(truth: Truth, n: usize, noise_sd: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let f0: Vec<f64> = xs.iter().map(|&x| true_function(truth, x)).collect();
    let ys: Vec<f64> = f0
        .iter()
        .map(|&f| f + noise_sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    Dataset::univariate(xs, ys, Some(f0)).unwrap()
}

/// Per-replicate outcome of a fitted cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    /// Squared empirical distance between fit and truth at the design.
    pub err: f64,
    /// Achieved empirical squared error loss.
    pub loss: f64,
    /// Normalized sum statistic with the error scale known (sigma = 1).
    pub t_n: f64,
    /// Plug-in variant standardized by the residual variance estimate.
    pub t_n_plugin: f64,
    /// Feasibility of the reported parameters within the full sieve level,
    /// hidden-weight budget included.
    pub feasible: bool,
    pub theta: Theta,
    /// Canonically matched distance to the generating parameters; only for
    /// the network truth.
    pub param_distance: Option<f64>,
}

/// Aggregates for one (truth, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub truth: Truth,
    pub n: usize,
    pub r_n: usize,
    pub v_n: f64,
    pub m_n: f64,
    pub records: Vec<ReplicateRecord>,
    pub mean_err: f64,
    pub mean_loss: f64,
    pub t_mean: f64,
    pub t_sd: f64,
    pub ks: Option<TestReport>,
    pub shapiro: Option<TestReport>,
    pub qq: Vec<(f64, f64)>,
    pub qq_plugin: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Inconsistency,
    Consistency,
    Normality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    /// Structural invariants relied on by downstream writers.
    pub fn validate(&self, expected_replicates: usize) -> Result<()> {
        for cell in &self.cells {
            if cell.records.len() != expected_replicates {
                return Err(Error::InvalidInput(format!(
                    "cell ({}, {}) has {} records, expected {expected_replicates}",
                    cell.truth.label(),
                    cell.n,
                    cell.records.len()
                )));
            }
            if cell.records.iter().any(|r| r.err < 0.0 || r.loss < 0.0) {
                return Err(Error::InvalidInput("negative error or loss".into()));
            }
            for report in [&cell.ks, &cell.shapiro].into_iter().flatten() {
                if !(0.0..=1.0).contains(&report.p_value) {
                    return Err(Error::InvalidInput("p-value outside [0, 1]".into()));
                }
            }
        }
        Ok(())
    }
}

/// One (truth, n) cell of an experiment at a fixed sieve level.
#[derive(Debug, Clone, Copy)]
struct CellSpec {
    truth: Truth,
    n: usize,
    r_n: usize,
    v_n: f64,
    m_n: f64,
    /// Seed-derivation tag; distinct per cell so replicate streams never
    /// collide across cells.
    tag: u64,
}

/// Runs one replicate: generate, fit with the cell's hidden-unit count and
/// budget, and summarize.
fn run_replicate(scenario: &Scenario, cell: CellSpec, replicate: usize) -> Result<ReplicateRecord> {
    let master = scenario.train.seed;
    let data_seed = derive_seed(master, &[cell.tag, replicate as u64, 0]);
    let init_seed = derive_seed(master, &[cell.tag, replicate as u64, 1]);
    let data = generate_raw(cell.truth, cell.n, scenario.noise_sd, data_seed);

    let config = TrainConfig { seed: init_seed, ..scenario.train.clone() };
    let result = fit(&data, cell.r_n, cell.v_n, &config)?;

    let fhat = result.theta_hat.eval_design(&data)?;
    let f0 = data.f0_values.as_ref().expect("simulated data carries true values");
    let dist = empirical_distance(&fhat, f0)?;
    let err = dist * dist;
    let t_n = normality_statistic(&fhat, f0, 1.0)?;
    let sigma_hat = result.final_loss.sqrt();
    let t_n_plugin =
        if sigma_hat > 0.0 { normality_statistic(&fhat, f0, sigma_hat)? } else { 0.0 };
    let param_distance = if cell.truth == Truth::Nn && cell.r_n == 2 {
        Some(matched_parameter_distance(&result.theta_hat, &nn_truth_theta())?)
    } else {
        None
    };

    Ok(ReplicateRecord {
        replicate,
        err,
        loss: result.final_loss,
        t_n,
        t_n_plugin,
        feasible: is_feasible(&result.theta_hat, cell.r_n, cell.v_n, cell.m_n),
        theta: result.theta_hat,
        param_distance,
    })
}

/// Minimum over hidden-unit permutations and per-unit sign flips of the
/// max-norm distance between two parameter vectors. Sign flipping uses the
/// sigmoid identity `sigma(z) = 1 - sigma(-z)`: negating a unit's weights
/// and folding its output weight into the bias realizes the same function.
pub fn matched_parameter_distance(estimate: &Theta, truth: &Theta) -> Result<f64> {
    let r = truth.hidden_units();
    if estimate.hidden_units() != r || estimate.input_dim() != truth.input_dim() {
        return Err(Error::DimensionMismatch(
            "parameter vectors must share hidden-unit count and dimension".into(),
        ));
    }
    if r > 8 {
        return Err(Error::InvalidInput(format!(
            "canonical matching enumerates permutations; r = {r} is too large"
        )));
    }
    let perms = permutations(r);
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << r) {
        let flipped = apply_sign_flips(estimate, mask);
        for perm in &perms {
            let mut dist: f64 = (flipped.alpha0 - truth.alpha0).abs();
            for (k, &j) in perm.iter().enumerate() {
                dist = dist
                    .max((flipped.alpha[j] - truth.alpha[k]).abs())
                    .max((flipped.gamma0[j] - truth.gamma0[k]).abs());
                for (a, b) in flipped.gamma[j].iter().zip(&truth.gamma[k]) {
                    dist = dist.max((a - b).abs());
                }
            }
            best = best.min(dist);
        }
    }
    Ok(best)
}

fn apply_sign_flips(theta: &Theta, mask: u32) -> Theta {
    let mut out = theta.clone();
    for j in 0..theta.hidden_units() {
        if mask & (1 << j) != 0 {
            out.alpha0 += out.alpha[j];
            out.alpha[j] = -out.alpha[j];
            out.gamma0[j] = -out.gamma0[j];
            for w in out.gamma[j].iter_mut() {
                *w = -*w;
            }
        }
    }
    out
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..r).collect();
    let mut out = Vec::new();
    heap_permute(&mut items, r, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn summarize_cell(cell: CellSpec, records: Vec<ReplicateRecord>, with_tests: bool) -> CellReport {
    let reps = records.len() as f64;
    let mean_err = records.iter().map(|r| r.err).sum::<f64>() / reps;
    let mean_loss = records.iter().map(|r| r.loss).sum::<f64>() / reps;
    let t: Vec<f64> = records.iter().map(|r| r.t_n).collect();
    let t_mean = t.iter().sum::<f64>() / reps;
    let t_sd = if records.len() > 1 {
        (t.iter().map(|v| (v - t_mean) * (v - t_mean)).sum::<f64>() / (reps - 1.0)).sqrt()
    } else {
        0.0
    };
    let (ks, shapiro, qq, qq_plugin) = if with_tests {
        let plugin: Vec<f64> = records.iter().map(|r| r.t_n_plugin).collect();
        (
            ks_test_std_normal(&t).ok(),
            shapiro_wilk(&t).ok(),
            qq_points(&t),
            qq_points(&plugin),
        )
    } else {
        (None, None, Vec::new(), Vec::new())
    };
    CellReport {
        truth: cell.truth,
        n: cell.n,
        r_n: cell.r_n,
        v_n: cell.v_n,
        m_n: cell.m_n,
        records,
        mean_err,
        mean_loss,
        t_mean,
        t_sd,
        ks,
        shapiro,
        qq,
        qq_plugin,
    }
}

fn run_cell(scenario: &Scenario, cell: CellSpec, with_tests: bool) -> Result<CellReport> {
    let records: Result<Vec<ReplicateRecord>> = (0..scenario.replicates)
        .into_par_iter()
        .map(|rep| run_replicate(scenario, cell, rep))
        .collect();
    Ok(summarize_cell(cell, records?, with_tests))
}

/// Fits a two-hidden-unit network to data from the scenario truth and
/// reports the canonically matched parameter distance next to the
/// function-space error: the parameters stay far from the generating ones
/// even when the fitted function is close.
pub fn run_inconsistency(scenario: &Scenario) -> Result<ExperimentReport> {
    let dims = scenario.schedule.dims(scenario.n);
    let cell = run_cell(
        scenario,
        CellSpec {
            truth: scenario.truth,
            n: scenario.n,
            r_n: 2, // fixed two hidden units; no sieve growth in this study
            v_n: dims.v_n,
            m_n: dims.m_n,
            tag: 0,
        },
        false,
    )?;
    Ok(ExperimentReport {
        kind: ExperimentKind::Inconsistency,
        master_seed: scenario.train.seed,
        cells: vec![cell],
    })
}

/// Fit error and loss across sample sizes for each requested truth, with
/// the sieve level growing according to the scenario schedule.
pub fn run_consistency(
    scenario: &Scenario,
    n_grid: &[usize],
    truths: &[Truth],
) -> Result<ExperimentReport> {
    let mut cells = Vec::with_capacity(n_grid.len() * truths.len());
    for spec in cell_specs(scenario, n_grid, truths) {
        cells.push(run_cell(scenario, spec, false)?);
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Consistency,
        master_seed: scenario.train.seed,
        cells,
    })
}

fn cell_specs(scenario: &Scenario, n_grid: &[usize], truths: &[Truth]) -> Vec<CellSpec> {
    let mut specs = Vec::with_capacity(n_grid.len() * truths.len());
    for (ti, &truth) in truths.iter().enumerate() {
        for (ni, &n) in n_grid.iter().enumerate() {
            let dims = scenario.schedule.dims(n);
            specs.push(CellSpec {
                truth,
                n,
                r_n: dims.r_n,
                v_n: dims.v_n,
                m_n: dims.m_n,
                tag: ((ti as u64) << 32) | ni as u64,
            });
        }
    }
    specs
}

/// Replicated fits per (truth, n), followed by normality tests and Q-Q
/// coordinates of the scaled fit-error statistic.
pub fn run_normality(
    scenario: &Scenario,
    n_grid: &[usize],
    truths: &[Truth],
) -> Result<ExperimentReport> {
    let mut cells = Vec::with_capacity(n_grid.len() * truths.len());
    for spec in cell_specs(scenario, n_grid, truths) {
        cells.push(run_cell(scenario, spec, true)?);
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Normality,
        master_seed: scenario.train.seed,
        cells,
    })
}
