//! Run configuration: per-command defaults matching the simulation studies,
//! overridden first by an optional flat key-value JSON config file and then
//! by command-line flags.

use std::path::PathBuf;

use nn_sieve::Truth;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Inconsistency,
    Consistency,
    Normality,
    Diagnostics,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Inconsistency => "inconsistency",
            Command::Consistency => "consistency",
            Command::Normality => "normality",
            Command::Diagnostics => "diagnostics",
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "inconsistency" => Ok(Command::Inconsistency),
            "consistency" => Ok(Command::Consistency),
            "normality" => Ok(Command::Normality),
            "diagnostics" => Ok(Command::Diagnostics),
            other => Err(CliError::Usage(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` means every truth kind the command covers.
    pub truth: Option<Truth>,
    pub n_grid: Vec<usize>,
    pub noise_sd: f64,
    pub r_exponent: f64,
    pub v_scale: f64,
    pub v_exponent: f64,
    pub iterations: usize,
    pub replicates: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
    /// 0 = leave the worker pool at its default size.
    pub workers: usize,
}

impl RunConfig {
    /// Defaults reproducing the corresponding simulation study.
    fn defaults(command: Command) -> Self {
        let base = Self {
            command,
            truth: None,
            n_grid: vec![],
            noise_sd: 0.0,
            r_exponent: 0.25,
            v_scale: 10.0,
            v_exponent: 0.25,
            iterations: 20_000,
            replicates: 1,
            seed: 1,
            out: PathBuf::from("."),
            format: OutputFormat::Csv,
            workers: 0,
        };
        match command {
            Command::Inconsistency => Self {
                truth: Some(Truth::Nn),
                n_grid: vec![500],
                noise_sd: 0.1,
                iterations: 30_000,
                ..base
            },
            Command::Consistency => Self {
                n_grid: vec![50, 100, 200, 500, 1000, 2000],
                noise_sd: 0.7,
                ..base
            },
            Command::Normality => Self {
                n_grid: vec![50, 100, 200, 300, 400, 500],
                noise_sd: 1.0,
                r_exponent: 0.125,
                v_exponent: 0.1,
                replicates: 200,
                ..base
            },
            Command::Diagnostics => Self {
                n_grid: vec![100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000],
                ..base
            },
        }
    }

    pub fn truths(&self) -> Vec<Truth> {
        match self.truth {
            Some(t) => vec![t],
            None => Truth::ALL.to_vec(),
        }
    }
}

/// One key=value assignment from either a flag or a config file.
#[derive(Debug, Clone)]
struct Assignment {
    key: String,
    value: String,
}

/// Parses arguments plus an optional `--config` file into a resolved
/// configuration. Flag values override file values, which override the
/// command defaults.
pub fn parse_config(args: &[String]) -> Result<RunConfig, CliError> {
    let mut command: Option<Command> = None;
    let mut config_path: Option<PathBuf> = None;
    let mut flag_assignments: Vec<Assignment> = Vec::new();

    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        if let Some(flag) = arg.strip_prefix("--") {
            let needs_value = |it: &mut std::iter::Peekable<std::slice::Iter<String>>| {
                it.next()
                    .cloned()
                    .ok_or_else(|| CliError::Usage(format!("flag --{flag} needs a value")))
            };
            match flag {
                "config" => config_path = Some(PathBuf::from(needs_value(&mut it)?)),
                "command" => command = Some(Command::parse(&needs_value(&mut it)?)?),
                "truth" | "n" | "n-grid" | "noise-sd" | "r-exponent" | "v-scale"
                | "v-exponent" | "iterations" | "replicates" | "seed" | "out" | "format"
                | "workers" => {
                    flag_assignments.push(Assignment {
                        key: flag.replace('-', "_"),
                        value: needs_value(&mut it)?,
                    });
                }
                other => return Err(CliError::Usage(format!("unknown flag --{other}"))),
            }
        } else if command.is_none() {
            command = Some(Command::parse(arg)?);
        } else {
            return Err(CliError::Usage(format!("unexpected argument '{arg}'")));
        }
    }

    // File assignments sit between defaults and flags.
    let mut file_assignments: Vec<Assignment> = Vec::new();
    if let Some(path) = &config_path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::Usage("config file must be a JSON object".into()))?;
        for (key, val) in obj {
            // Manifests carry bookkeeping keys a re-run can ignore.
            if key == "crate_version" || key == "outputs" {
                continue;
            }
            if key == "command" {
                let s = val
                    .as_str()
                    .ok_or_else(|| CliError::Usage("config 'command' must be a string".into()))?;
                if command.is_none() {
                    command = Some(Command::parse(s)?);
                }
                continue;
            }
            let rendered = match val {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                other => {
                    return Err(CliError::Usage(format!(
                        "config key '{key}' has unsupported value {other}"
                    )))
                }
            };
            file_assignments.push(Assignment { key: key.clone(), value: rendered });
        }
    }

    let command = command.ok_or_else(|| {
        CliError::Usage("missing command: inconsistency | consistency | normality | diagnostics".into())
    })?;
    let mut config = RunConfig::defaults(command);
    for assignment in file_assignments.iter().chain(&flag_assignments) {
        apply(&mut config, assignment)?;
    }
    validate(&config)?;
    Ok(config)
}

fn apply(config: &mut RunConfig, assignment: &Assignment) -> Result<(), CliError> {
    let Assignment { key, value } = assignment;
    let bad = |what: &str| CliError::Usage(format!("invalid {what} '{value}' for --{key}"));
    match key.as_str() {
        "truth" => {
            config.truth = if value.eq_ignore_ascii_case("all") {
                None
            } else {
                Some(value.parse::<Truth>().map_err(|_| bad("truth kind"))?)
            };
        }
        "n" => config.n_grid = vec![value.parse().map_err(|_| bad("sample size"))?],
        "n_grid" => {
            let grid: Result<Vec<usize>, _> =
                value.split(',').map(|t| t.trim().parse::<usize>()).collect();
            config.n_grid = grid.map_err(|_| bad("grid"))?;
        }
        "noise_sd" => config.noise_sd = value.parse().map_err(|_| bad("number"))?,
        "r_exponent" => config.r_exponent = value.parse().map_err(|_| bad("number"))?,
        "v_scale" => config.v_scale = value.parse().map_err(|_| bad("number"))?,
        "v_exponent" => config.v_exponent = value.parse().map_err(|_| bad("number"))?,
        "iterations" => config.iterations = value.parse().map_err(|_| bad("count"))?,
        "replicates" => config.replicates = value.parse().map_err(|_| bad("count"))?,
        "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
        "out" => config.out = PathBuf::from(value),
        "format" => {
            config.format = match value.to_ascii_lowercase().as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                _ => return Err(bad("format")),
            };
        }
        "workers" => config.workers = value.parse().map_err(|_| bad("count"))?,
        other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
    }
    Ok(())
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    if config.n_grid.is_empty() {
        return Err(CliError::Usage("empty sample-size grid".into()));
    }
    if config.n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Usage(format!(
            "sample-size grid must be strictly increasing, got {:?}",
            config.n_grid
        )));
    }
    if config.n_grid.contains(&0) {
        return Err(CliError::Usage("sample sizes must be >= 1".into()));
    }
    if config.noise_sd < 0.0 {
        return Err(CliError::Usage("noise sd must be >= 0".into()));
    }
    if config.replicates == 0 || config.iterations == 0 {
        return Err(CliError::Usage("replicates and iterations must be >= 1".into()));
    }
    if config.v_scale <= 4.0 {
        return Err(CliError::Usage("v-scale must exceed 4".into()));
    }
    // The parameter-comparison study needs the generating parameters, which
    // only the network truth has.
    if config.command == Command::Inconsistency && config.truth != Some(Truth::Nn) {
        return Err(CliError::Usage("the inconsistency study requires --truth nn".into()));
    }
    Ok(())
}
