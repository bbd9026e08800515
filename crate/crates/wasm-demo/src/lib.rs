//! Browser bindings for the sieve-network estimator. Three operations back
//! the demo page: fit a network to freshly simulated data and return the
//! curves, replicate fits and return the scaled-error statistic with its
//! normality tests, and evaluate growth-rate diagnostics for a schedule.
//!
//! Every function returns a JSON string so the page stays framework-free.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use nn_sieve::sieve::MRule;
use nn_sieve::simlab::{self, derive_seed, generate, true_function, Truth};
use nn_sieve::stats::{ks_test_std_normal, qq_points, shapiro_wilk};
use nn_sieve::trainer::fit;
use nn_sieve::{Scenario, SieveSchedule, TrainConfig};

#[derive(Serialize)]
struct FitCurve {
    design_x: Vec<f64>,
    design_y: Vec<f64>,
    grid_x: Vec<f64>,
    f0: Vec<f64>,
    fhat: Vec<f64>,
    err: f64,
    loss: f64,
    r_n: usize,
    v_n: f64,
    loss_trace: Vec<f64>,
}

#[derive(Serialize)]
struct NormalityDemo {
    t_values: Vec<f64>,
    qq_theoretical: Vec<f64>,
    qq_empirical: Vec<f64>,
    ks_statistic: f64,
    ks_p: f64,
    sw_statistic: f64,
    sw_p: f64,
    mean: f64,
    sd: f64,
    r_n: usize,
    v_n: f64,
}

#[derive(Serialize)]
struct Diagnostics {
    n: Vec<usize>,
    r_n: Vec<usize>,
    v_n: Vec<f64>,
    consistency_ratio: Vec<f64>,
    normality_ratio: Vec<f64>,
    predicted_rate: Vec<f64>,
}

fn schedule(r_exponent: f64, v_scale: f64, v_exponent: f64) -> Result<SieveSchedule, String> {
    SieveSchedule::new(r_exponent, v_scale, v_exponent, MRule::Auto, 1).map_err(|e| e.to_string())
}

fn scenario(
    truth: &str,
    n: usize,
    noise_sd: f64,
    iterations: usize,
    seed: u64,
    sched: SieveSchedule,
) -> Result<Scenario, String> {
    let truth: Truth = truth.parse().map_err(|e: nn_sieve::Error| e.to_string())?;
    let train = TrainConfig { iterations, seed, ..TrainConfig::default() };
    Scenario::new(truth, noise_sd, n, sched, train, 1).map_err(|e| e.to_string())
}

/// Fit one network to simulated data and sample the true and fitted curves
/// on an even grid spanning the design.
#[allow(clippy::too_many_arguments)]
pub fn fit_curve_json(
    truth: &str,
    n: usize,
    noise_sd: f64,
    iterations: usize,
    seed: u64,
    r_exponent: f64,
    v_scale: f64,
    v_exponent: f64,
) -> Result<String, String> {
    if n == 0 || n > 20_000 || iterations == 0 || iterations > 200_000 {
        return Err("n must be in 1..=20000 and iterations in 1..=200000".into());
    }
    let sched = schedule(r_exponent, v_scale, v_exponent)?;
    let sc = scenario(truth, n, noise_sd, iterations, seed, sched)?;
    let dims = sc.schedule.dims(n);

    let data = generate(&sc, derive_seed(seed, &[0]));
    let config = TrainConfig { seed: derive_seed(seed, &[1]), ..sc.train.clone() };
    let result = fit(&data, dims.r_n, dims.v_n, &config).map_err(|e| e.to_string())?;

    let design_x: Vec<f64> = data.x.iter().map(|p| p[0]).collect();
    let lo = design_x.iter().copied().fold(f64::INFINITY, f64::min) - 0.5;
    let hi = design_x.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let grid_x: Vec<f64> = (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
    let f0: Vec<f64> = grid_x.iter().map(|&x| true_function(sc.truth, x)).collect();
    let fhat: Vec<f64> = grid_x
        .iter()
        .map(|&x| result.theta_hat.eval(&[x]).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;

    let fhat_design = result.theta_hat.eval_design(&data).map_err(|e| e.to_string())?;
    let f0_design = data.f0_values.as_ref().expect("simulated data");
    let dist = nn_sieve::network::empirical_distance(&fhat_design, f0_design)
        .map_err(|e| e.to_string())?;

    let trace = downsample(&result.loss_trace, 200);
    let payload = FitCurve {
        design_x,
        design_y: data.y.clone(),
        grid_x,
        f0,
        fhat,
        err: dist * dist,
        loss: result.final_loss,
        r_n: dims.r_n,
        v_n: dims.v_n,
        loss_trace: trace,
    };
    serde_json::to_string(&payload).map_err(|e| e.to_string())
}

/// Replicate the fit, collect the scaled fit-error statistic, and test it
/// against the standard normal.
pub fn normality_demo_json(
    truth: &str,
    n: usize,
    replicates: usize,
    iterations: usize,
    seed: u64,
) -> Result<String, String> {
    if !(3..=1000).contains(&replicates) || n == 0 || n > 2000 || iterations > 100_000 {
        return Err("need 3..=1000 replicates, n in 1..=2000, iterations <= 100000".into());
    }
    let sched = SieveSchedule::normality(1);
    let truth_kind: Truth = truth.parse().map_err(|e: nn_sieve::Error| e.to_string())?;
    let train = TrainConfig { iterations, seed, ..TrainConfig::default() };
    let sc = Scenario::new(truth_kind, 1.0, n, sched, train, replicates)
        .map_err(|e| e.to_string())?;
    let report = simlab::run_normality(&sc, &[n], &[truth_kind]).map_err(|e| e.to_string())?;
    let cell = &report.cells[0];

    let t_values: Vec<f64> = cell.records.iter().map(|r| r.t_n).collect();
    let ks = ks_test_std_normal(&t_values).map_err(|e| e.to_string())?;
    let sw = shapiro_wilk(&t_values).map_err(|e| e.to_string())?;
    let qq = qq_points(&t_values);
    let payload = NormalityDemo {
        qq_theoretical: qq.iter().map(|p| p.0).collect(),
        qq_empirical: qq.iter().map(|p| p.1).collect(),
        t_values,
        ks_statistic: ks.statistic,
        ks_p: ks.p_value,
        sw_statistic: sw.statistic,
        sw_p: sw.p_value,
        mean: cell.t_mean,
        sd: cell.t_sd,
        r_n: cell.r_n,
        v_n: cell.v_n,
    };
    serde_json::to_string(&payload).map_err(|e| e.to_string())
}

/// Growth-rate diagnostics over a log-spaced sample-size grid.
pub fn diagnostics_json(
    r_exponent: f64,
    v_scale: f64,
    v_exponent: f64,
    min_exp: u32,
    max_exp: u32,
) -> Result<String, String> {
    if min_exp < 1 || max_exp <= min_exp || max_exp > 12 {
        return Err("need 1 <= min_exp < max_exp <= 12".into());
    }
    let sched = schedule(r_exponent, v_scale, v_exponent)?;
    let grid: Vec<usize> = (min_exp..=max_exp).map(|e| 10usize.pow(e)).collect();
    let payload = Diagnostics {
        r_n: grid.iter().map(|&n| sched.dims(n).r_n).collect(),
        v_n: grid.iter().map(|&n| sched.dims(n).v_n).collect(),
        consistency_ratio: sched.check_consistency_rate(&grid),
        normality_ratio: sched.check_normality_rate(&grid),
        predicted_rate: grid.iter().map(|&n| sched.predicted_rate(n)).collect(),
        n: grid,
    };
    serde_json::to_string(&payload).map_err(|e| e.to_string())
}

fn downsample(values: &[f64], max_points: usize) -> Vec<f64> {
    if values.len() <= max_points {
        return values.to_vec();
    }
    let step = values.len() as f64 / max_points as f64;
    (0..max_points).map(|i| values[(i as f64 * step) as usize]).collect()
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn fit_curve(
    truth: &str,
    n: usize,
    noise_sd: f64,
    iterations: usize,
    seed: u64,
    r_exponent: f64,
    v_scale: f64,
    v_exponent: f64,
) -> Result<String, JsError> {
    fit_curve_json(truth, n, noise_sd, iterations, seed, r_exponent, v_scale, v_exponent)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn normality_demo(
    truth: &str,
    n: usize,
    replicates: usize,
    iterations: usize,
    seed: u64,
) -> Result<String, JsError> {
    normality_demo_json(truth, n, replicates, iterations, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn diagnostics(
    r_exponent: f64,
    v_scale: f64,
    v_exponent: f64,
    min_exp: u32,
    max_exp: u32,
) -> Result<String, JsError> {
    diagnostics_json(r_exponent, v_scale, v_exponent, min_exp, max_exp)
        .map_err(|e| JsError::new(&e))
}
