//! Run a small shifted-trace grid from an inline JSON config and print the
//! CSV, then compare each row's trace with its aggregate bound.
//!
//!     cargo run --release --example trace_experiment

use rrg_spectra::experiment::{run_point, write_csv, ExperimentConfig};

const GRID: &str = r#"{
    "n": [40, 80],
    "d": [3, 4],
    "k": [2, 4, 6],
    "seeds": [1, 2, 3]
}"#;

fn main() -> rrg_spectra::Result<()> {
    let cfg = ExperimentConfig::from_json(GRID)?;
    let mut out = std::io::stdout().lock();
    let rows = write_csv(&cfg, &mut out, None)?;
    drop(out);
    println!("{rows} rows");

    let mut worst = f64::NEG_INFINITY;
    for (n, d) in cfg.points() {
        for row in run_point(n, d, &cfg.k, &cfg.seeds, cfg.sampler.into())? {
            worst = worst.max(row.trace.ln() - row.bound_log);
        }
    }
    println!("largest ln(trace) - ln(bound) over the grid: {worst:.3}");
    Ok(())
}
