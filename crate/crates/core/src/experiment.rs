//! Grid experiments over sampled regular graphs, written as CSV rows of
//! `n,d,k,seed,lambda,ratio,trace,bound_log`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    eigenvalues, sample_regular, shifted_trace_from_spectrum, SamplerMethod,
    MAX_SPECTRUM_VERTICES,
};
use crate::walks::aggregate_trace_bound;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    #[default]
    Auto,
    Pairing,
    Switch,
}

impl From<SamplerChoice> for SamplerMethod {
    fn from(c: SamplerChoice) -> Self {
        match c {
            SamplerChoice::Auto => SamplerMethod::Auto,
            SamplerChoice::Pairing => SamplerMethod::PairingRejection,
            SamplerChoice::Switch => SamplerMethod::switch_chain(),
        }
    }
}

fn default_subcommand() -> String {
    "trace-experiment".into()
}

/// A parameter grid. Each seed yields one sampled graph per `(n, d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_subcommand")]
    pub subcommand: String,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub k: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub sampler: SamplerChoice,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every grid value before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.subcommand != "trace-experiment" {
            return Err(Error::Config(format!(
                "unsupported subcommand {:?}",
                self.subcommand
            )));
        }
        for (name, empty) in [
            ("n", self.n.is_empty()),
            ("d", self.d.is_empty()),
            ("k", self.k.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(Error::Config(format!("grid list {name} is empty")));
            }
        }
        for &k in &self.k {
            if k == 0 || k % 2 == 1 {
                return Err(Error::Config(format!("k = {k} must be positive and even")));
            }
        }
        for (n, d) in self.points() {
            if !(2..=MAX_SPECTRUM_VERTICES).contains(&n) {
                return Err(Error::Config(format!(
                    "n = {n} outside 2..={MAX_SPECTRUM_VERTICES}"
                )));
            }
            if d >= n || (n * d) % 2 == 1 {
                return Err(Error::Config(format!("no {d}-regular graph on {n} vertices")));
            }
            if self.sampler == SamplerChoice::Pairing && d > 6 {
                return Err(Error::Config(format!(
                    "pairing rejection is impractical at d = {d}"
                )));
            }
        }
        Ok(())
    }

    /// `(n, d)` pairs in grid order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.n
            .iter()
            .flat_map(|&n| self.d.iter().map(move |&d| (n, d)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub seed: u64,
    pub lambda: f64,
    pub ratio: f64,
    pub trace: f64,
    pub bound_log: f64,
}

/// Rows for one `(n, d)` grid point, ordered by seed then `k`.
pub fn run_point(
    n: usize,
    d: usize,
    ks: &[usize],
    seeds: &[u64],
    method: SamplerMethod,
) -> Result<Vec<TraceRow>> {
    let p = d as f64 / (n - 1) as f64;
    let per_seed: Vec<Vec<TraceRow>> = seeds
        .par_iter()
        .map(|&seed| {
            let spectrum = eigenvalues(&sample_regular(n, d, seed, method)?)?;
            Ok(ks
                .iter()
                .map(|&k| TraceRow {
                    n,
                    d,
                    k,
                    seed,
                    lambda: spectrum.lambda,
                    ratio: spectrum.ratio,
                    trace: shifted_trace_from_spectrum(&spectrum, p, k),
                    bound_log: aggregate_trace_bound(n, d, k),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}

/// Streams rows to `out`, flushing after every grid point. `header` is an
/// optional comment line written first (for example a timestamp).
pub fn write_csv(
    cfg: &ExperimentConfig,
    out: &mut impl Write,
    header: Option<&str>,
) -> Result<usize> {
    cfg.validate()?;
    if let Some(h) = header {
        writeln!(out, "# {h}")?;
    }
    let mut rows = 0;
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["n", "d", "k", "seed", "lambda", "ratio", "trace", "bound_log"])
        .map_err(csv_error)?;
    for (n, d) in cfg.points() {
        for row in run_point(n, d, &cfg.k, &cfg.seeds, cfg.sampler.into())? {
            writer
                .write_record(&[
                    row.n.to_string(),
                    row.d.to_string(),
                    row.k.to_string(),
                    row.seed.to_string(),
                    format!("{:.10}", row.lambda),
                    format!("{:.10}", row.ratio),
                    format!("{:.10e}", row.trace),
                    format!("{:.10}", row.bound_log),
                ])
                .map_err(csv_error)?;
            rows += 1;
        }
        writer.flush()?;
    }
    Ok(rows)
}

/// All rows as a JSON array.
pub fn run_json(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let mut all = Vec::new();
    for (n, d) in cfg.points() {
        all.extend(run_point(n, d, &cfg.k, &cfg.seeds, cfg.sampler.into())?);
    }
    Ok(serde_json::to_string_pretty(&all)?)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
