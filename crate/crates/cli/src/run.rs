//! Experiment execution: builds scenarios from the resolved configuration,
//! runs the corresponding pipeline, checks report invariants, and writes
//! the result tables, Q-Q data and manifest.

use std::fs;

use nn_sieve::sieve::MRule;
use nn_sieve::simlab::{self, ExperimentReport};
use nn_sieve::{Scenario, SieveSchedule, TrainConfig, Truth};

use crate::config::{Command, RunConfig};
use crate::output::{write_manifest, Field, Table};
use crate::CliError;

pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", config.out.display())))?;

    let mut outputs: Vec<String> = Vec::new();
    match config.command {
        Command::Diagnostics => outputs.push(diagnostics_table(config)?),
        Command::Inconsistency => {
            let report = simlab::run_inconsistency(&scenario(config, config.n_grid[0])?)
                .map_err(|e| CliError::Invariant(e.to_string()))?;
            check(&report, config)?;
            outputs.push(inconsistency_table(config, &report)?);
        }
        Command::Consistency => {
            let report = simlab::run_consistency(
                &scenario(config, config.n_grid[0])?,
                &config.n_grid,
                &config.truths(),
            )
            .map_err(|e| CliError::Invariant(e.to_string()))?;
            check(&report, config)?;
            outputs.push(consistency_table(config, &report)?);
        }
        Command::Normality => {
            let report = simlab::run_normality(
                &scenario(config, config.n_grid[0])?,
                &config.n_grid,
                &config.truths(),
            )
            .map_err(|e| CliError::Invariant(e.to_string()))?;
            check(&report, config)?;
            outputs.push(normality_tests_table(config, &report)?);
            outputs.push(normality_statistic_table(config, &report)?);
            outputs.extend(qq_files(config, &report)?);
        }
    }

    let manifest = write_manifest(config, &outputs)?;
    println!("wrote {}", manifest.display());
    for name in &outputs {
        println!("wrote {}", config.out.join(name).display());
    }
    Ok(())
}

fn scenario(config: &RunConfig, n: usize) -> Result<Scenario, CliError> {
    let schedule =
        SieveSchedule::new(config.r_exponent, config.v_scale, config.v_exponent, MRule::Auto, 1)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    let train = TrainConfig {
        iterations: config.iterations,
        seed: config.seed,
        ..TrainConfig::default()
    };
    Scenario::new(
        config.truth.unwrap_or(Truth::Nn),
        config.noise_sd,
        n,
        schedule,
        train,
        config.replicates,
    )
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn check(report: &ExperimentReport, config: &RunConfig) -> Result<(), CliError> {
    report
        .validate(config.replicates)
        .map_err(|e| CliError::Invariant(e.to_string()))?;
    let finite = report.cells.iter().all(|c| {
        c.records
            .iter()
            .all(|r| r.err.is_finite() && r.loss.is_finite() && r.t_n.is_finite())
    });
    if !finite {
        return Err(CliError::Invariant("non-finite value in report".into()));
    }
    Ok(())
}

fn diagnostics_table(config: &RunConfig) -> Result<String, CliError> {
    let schedule =
        SieveSchedule::new(config.r_exponent, config.v_scale, config.v_exponent, MRule::Auto, 1)
            .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut table = Table::new(vec![
        "n",
        "r_n",
        "v_n",
        "p_n",
        "consistency_ratio",
        "normality_ratio",
        "predicted_rate",
    ]);
    let consistency = schedule.check_consistency_rate(&config.n_grid);
    let normality = schedule.check_normality_rate(&config.n_grid);
    for (i, &n) in config.n_grid.iter().enumerate() {
        let dims = schedule.dims(n);
        table.push(vec![
            Field::Int(n as i64),
            Field::Int(dims.r_n as i64),
            Field::Num(dims.v_n),
            Field::Int(dims.p_n as i64),
            Field::Num(consistency[i]),
            Field::Num(normality[i]),
            Field::Num(schedule.predicted_rate(n.max(2))),
        ]);
    }
    table.write(&config.out, "diagnostics", config.format)
}

fn inconsistency_table(config: &RunConfig, report: &ExperimentReport) -> Result<String, CliError> {
    let mut table = Table::new(vec![
        "role",
        "replicate",
        "gamma1",
        "gamma2",
        "alpha1",
        "alpha2",
        "gamma01",
        "gamma02",
        "alpha0",
        "err",
        "loss",
        "param_distance",
    ]);
    let truth = simlab::nn_truth_theta();
    table.push(vec![
        Field::Str("true".into()),
        Field::Blank,
        Field::Num(truth.gamma[0][0]),
        Field::Num(truth.gamma[1][0]),
        Field::Num(truth.alpha[0]),
        Field::Num(truth.alpha[1]),
        Field::Num(truth.gamma0[0]),
        Field::Num(truth.gamma0[1]),
        Field::Num(truth.alpha0),
        Field::Blank,
        Field::Blank,
        Field::Blank,
    ]);
    for cell in &report.cells {
        for rec in &cell.records {
            let t = &rec.theta;
            table.push(vec![
                Field::Str("estimated".into()),
                Field::Int(rec.replicate as i64),
                Field::Num(t.gamma[0][0]),
                Field::Num(t.gamma[1][0]),
                Field::Num(t.alpha[0]),
                Field::Num(t.alpha[1]),
                Field::Num(t.gamma0[0]),
                Field::Num(t.gamma0[1]),
                Field::Num(t.alpha0),
                Field::Num(rec.err),
                Field::Num(rec.loss),
                match rec.param_distance {
                    Some(d) => Field::Num(d),
                    None => Field::Blank,
                },
            ]);
        }
    }
    table.write(&config.out, "inconsistency", config.format)
}

fn consistency_table(config: &RunConfig, report: &ExperimentReport) -> Result<String, CliError> {
    let mut table = Table::new(vec!["n", "truth", "err", "loss"]);
    for cell in &report.cells {
        table.push(vec![
            Field::Int(cell.n as i64),
            Field::Str(cell.truth.label().into()),
            Field::Num(cell.mean_err),
            Field::Num(cell.mean_loss),
        ]);
    }
    table.write(&config.out, "consistency", config.format)
}

fn normality_tests_table(config: &RunConfig, report: &ExperimentReport) -> Result<String, CliError> {
    let mut table = Table::new(vec!["test", "truth", "n", "statistic", "p_value"]);
    for cell in &report.cells {
        for (name, test) in [("shapiro-wilk", &cell.shapiro), ("kolmogorov-smirnov", &cell.ks)] {
            if let Some(t) = test {
                table.push(vec![
                    Field::Str(name.into()),
                    Field::Str(cell.truth.label().into()),
                    Field::Int(cell.n as i64),
                    Field::Num(t.statistic),
                    Field::Num(t.p_value),
                ]);
            }
        }
    }
    table.write(&config.out, "normality_tests", config.format)
}

/// Raw statistic values per replicate, both the scale-known variant and the
/// plug-in variant standardized by the residual variance estimate.
fn normality_statistic_table(
    config: &RunConfig,
    report: &ExperimentReport,
) -> Result<String, CliError> {
    let mut table = Table::new(vec!["truth", "n", "replicate", "t_n", "t_n_plugin"]);
    for cell in &report.cells {
        for rec in &cell.records {
            table.push(vec![
                Field::Str(cell.truth.label().into()),
                Field::Int(cell.n as i64),
                Field::Int(rec.replicate as i64),
                Field::Num(rec.t_n),
                Field::Num(rec.t_n_plugin),
            ]);
        }
    }
    table.write(&config.out, "normality_tn", config.format)
}

/// One Q-Q CSV per (truth, n) with the theoretical and empirical quantiles
/// of the scale-known statistic.
fn qq_files(config: &RunConfig, report: &ExperimentReport) -> Result<Vec<String>, CliError> {
    let mut names = Vec::new();
    for cell in &report.cells {
        let mut table = Table::new(vec!["theoretical", "empirical"]);
        for &(theo, emp) in &cell.qq {
            table.push(vec![Field::Num(theo), Field::Num(emp)]);
        }
        let stem = format!("qq_{}_{}", cell.truth.label(), cell.n);
        // Q-Q data stays CSV regardless of the table format; it feeds plots.
        let name = table.write(&config.out, &stem, crate::config::OutputFormat::Csv)?;
        names.push(name);
    }
    Ok(names)
}
