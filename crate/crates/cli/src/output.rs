//! Locale-independent table and manifest writers. CSV numbers carry six
//! significant digits; JSON numbers carry seventeen, enough to reproduce
//! the exact f64 values in regression comparisons.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

/// Six significant digits, scientific, stable across platforms.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.5e}")
}

/// Seventeen significant digits; parses back to the identical f64.
pub fn fmt_json(x: f64) -> String {
    format!("{x:.16e}")
}

/// A value in a table row.
pub enum Field {
    Str(String),
    Int(i64),
    Num(f64),
    /// Not applicable; rendered empty in CSV and null in JSON.
    Blank,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|f| match f {
                    Field::Str(s) => s.clone(),
                    Field::Int(i) => i.to_string(),
                    Field::Num(x) => fmt_csv(*x),
                    Field::Blank => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (name, field)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: ", json_string(name));
                match field {
                    Field::Str(s) => out.push_str(&json_string(s)),
                    Field::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Field::Num(x) => out.push_str(&fmt_json(*x)),
                    Field::Blank => out.push_str("null"),
                }
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    /// Writes the table under `dir` with the format's extension and returns
    /// the file name.
    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat) -> Result<String, CliError> {
        let (name, body) = match format {
            OutputFormat::Csv => (format!("{stem}.csv"), self.render_csv()),
            OutputFormat::Json => (format!("{stem}.json"), self.render_json()),
        };
        write_file(&dir.join(&name), &body)?;
        Ok(name)
    }
}

pub fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Writes the run manifest: every key needed to re-run the experiment, the
/// crate version, and the list of produced files. Feeding the manifest back
/// through `--config` reproduces the outputs byte for byte.
pub fn write_manifest(config: &RunConfig, outputs: &[String]) -> Result<PathBuf, CliError> {
    let grid: Vec<String> = config.n_grid.iter().map(|n| n.to_string()).collect();
    let truth = config.truth.map(|t| t.label().to_string()).unwrap_or_else(|| "all".into());
    let mut body = String::from("{\n");
    let mut put = |key: &str, value: String, last: bool| {
        body.push_str("  ");
        body.push_str(&json_string(key));
        body.push_str(": ");
        body.push_str(&value);
        if !last {
            body.push(',');
        }
        body.push('\n');
    };
    put("command", json_string(config.command.name()), false);
    put("truth", json_string(&truth), false);
    put("n_grid", json_string(&grid.join(",")), false);
    put("noise_sd", fmt_json(config.noise_sd), false);
    put("r_exponent", fmt_json(config.r_exponent), false);
    put("v_scale", fmt_json(config.v_scale), false);
    put("v_exponent", fmt_json(config.v_exponent), false);
    put("iterations", config.iterations.to_string(), false);
    put("replicates", config.replicates.to_string(), false);
    put("seed", config.seed.to_string(), false);
    put("format", json_string(config.format.name()), false);
    put("workers", config.workers.to_string(), false);
    put("crate_version", json_string(env!("CARGO_PKG_VERSION")), false);
    put(
        "outputs",
        json_string(&outputs.join(",")),
        true,
    );
    body.push_str("}\n");

    let path = config.out.join("manifest.json");
    write_file(&path, &body)?;
    Ok(path)
}
