use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rrg_spectra::estimator::{estimate_cherry, estimate_edge};
use rrg_spectra::experiment::{write_csv, run_json, ExperimentConfig, OutputFormat};
use rrg_spectra::fourier::{reciprocal_coeffs, transform, BooleanTable, DEFAULT_MAX_TERMS, DEFAULT_TOL};
use rrg_spectra::graph::io::{read_edge_list, write_edge_list};
use rrg_spectra::graph::{ConstraintSet, DegreeSpec, EdgeKey};
use rrg_spectra::oracle::{Oracle, MAX_VERTICES};
use rrg_spectra::spectral::{
    density_compare, eigenvalues, sample_regular, shifted_trace_from_spectrum, SamplerMethod,
};
use rrg_spectra::verify;
use rrg_spectra::walks::{aggregate_trace_bound, class_table};
use rrg_spectra::Error;

#[derive(Parser)]
#[command(name = "rrg", version, about = "Exact oracles, estimators and spectral experiments for random regular graphs")]
struct Cli {
    /// Base seed for every sampler.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "RRG_JOBS")]
    jobs: Option<usize>,
    /// Omit the timestamp comment line from CSV output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Auto,
    Pairing,
    Switch,
}

impl From<Sampler> for SamplerMethod {
    fn from(s: Sampler) -> Self {
        match s {
            Sampler::Auto => SamplerMethod::Auto,
            Sampler::Pairing => SamplerMethod::PairingRejection,
            Sampler::Switch => SamplerMethod::switch_chain(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact probabilities on the d-regular class of K_n minus some edges.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Edge excluded from the allowed set, as `u,v`; repeatable.
        #[arg(long, value_parser = parse_edge)]
        missing: Vec<EdgeKey>,
        /// P(uv).
        #[arg(long, value_parser = parse_edge)]
        edge: Option<EdgeKey>,
        /// Y(abc) = P(ab and bc), as `a,b,c`.
        #[arg(long, value_parser = parse_triple)]
        cherry: Option<(usize, usize, usize)>,
        /// Required edge for a joint query; repeatable.
        #[arg(long = "in", value_parser = parse_edge)]
        required_in: Vec<EdgeKey>,
        /// Forbidden edge for a joint query; repeatable.
        #[arg(long = "out", value_parser = parse_edge)]
        required_out: Vec<EdgeKey>,
        /// Number of graphs in the class.
        #[arg(long)]
        count: bool,
    },
    /// Monomial-basis coefficients of a table read from JSON `{t, values}`.
    Fourier {
        #[arg(long)]
        input: PathBuf,
        /// Also print the coefficients of 1/f.
        #[arg(long)]
        reciprocal: bool,
    },
    /// Refined estimates against exact values. JSON input:
    /// `{n, d, missing: [[u,v]], rounds, queries: [{edge: [a,b]} | {cherry: [a,b,c]}]}`.
    Estimate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Walk classes with counts, enumeration bounds and contribution ratios.
    Walks {
        #[arg(long)]
        n: usize,
        /// Walk lengths.
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5, 6])]
        k: Vec<usize>,
        /// Degree for exact walk contributions (n ≤ 10).
        #[arg(long)]
        d: Option<usize>,
    },
    /// Sample d-regular graphs (or read one) and report λ and the shifted trace.
    Spectrum {
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "graph")]
        d: Option<usize>,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value = "auto")]
        sampler: Sampler,
        /// Edge-list file (`n d` header, one `u v` per line) instead of sampling.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Write the first sampled graph as an edge list.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Shifted-trace grid from a JSON config.
    TraceExperiment {
        #[arg(long)]
        grid: PathBuf,
        /// Overrides the config's output path; `-` for stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Histogram of scaled eigenvalues against the semicircle and McKay laws.
    Density {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 60)]
        bins: usize,
        #[arg(long, value_enum, default_value = "auto")]
        sampler: Sampler,
    },
    /// Run the acceptance battery and print a pass/fail table.
    Verify {
        /// Criteria to run (default all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect()
}

fn parse_edge(s: &str) -> Result<EdgeKey, String> {
    match parse_list(s)?.as_slice() {
        &[u, v] => EdgeKey::new(u, v).map_err(|e| e.to_string()),
        _ => Err(format!("expected u,v but got {s:?}")),
    }
}

fn parse_triple(s: &str) -> Result<(usize, usize, usize), String> {
    match parse_list(s)?.as_slice() {
        &[a, b, c] => Ok((a, b, c)),
        _ => Err(format!("expected a,b,c but got {s:?}")),
    }
}

fn timestamp_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("generated unix_time={secs}")
}

fn print_json(v: &Value) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(v)?);
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    let format = cli.format;
    let header = (!cli.no_timestamp).then(timestamp_line);
    match cli.command {
        Command::Oracle {
            n,
            d,
            missing,
            edge,
            cherry,
            required_in,
            required_out,
            count,
        } => {
            let spec = DegreeSpec::regular_without(n, d, &missing)?;
            let oracle = Oracle::new();
            let spec_json = json!({ "n": n, "d": d, "missing": missing });
            let (query, value) = if let Some(e) = edge {
                (json!({ "edge": e }), oracle.edge_probability(&spec, e.u(), e.v())?.to_string())
            } else if let Some((a, b, c)) = cherry {
                (json!({ "cherry": [a, b, c] }), oracle.cherry_probability(&spec, a, b, c)?.to_string())
            } else if !required_in.is_empty() || !required_out.is_empty() {
                let cs = ConstraintSet::new(required_in.clone(), required_out.clone())?;
                (
                    json!({ "in": required_in, "out": required_out }),
                    oracle.joint_probability(&spec, &cs)?.to_string(),
                )
            } else if count {
                (json!("count"), oracle.count(&spec)?.to_string())
            } else {
                bail!(Error::Config("give one of --edge, --cherry, --in/--out, --count".into()));
            };
            print_json(&json!({ "spec": spec_json, "query": query, "value": value }))?;
        }
        Command::Fourier { input, reciprocal } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let raw: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let t = raw["t"].as_u64().ok_or_else(|| Error::Parse("missing integer field t".into()))?;
            let values: Vec<f64> = serde_json::from_value(raw["values"].clone())
                .map_err(|e| Error::Parse(format!("values: {e}")))?;
            let table = BooleanTable::new(t as usize, values)?;
            let coeffs = transform(&table);
            let mut out = json!({ "t": t, "coefficients": (0..1usize << t).map(|s| coeffs.get(s)).collect::<Vec<_>>() });
            if reciprocal {
                let inv = reciprocal_coeffs(&coeffs, DEFAULT_MAX_TERMS, DEFAULT_TOL)?;
                out["reciprocal"] = json!((0..1usize << t).map(|s| inv.get(s)).collect::<Vec<_>>());
            }
            print_json(&out)?;
        }
        Command::Estimate { input } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let q: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let field = |k: &str| q[k].as_u64().map(|v| v as usize).ok_or_else(|| Error::Parse(format!("missing integer field {k}")));
            let (n, d) = (field("n")?, field("d")?);
            let rounds = q["rounds"].as_u64().unwrap_or(3) as usize;
            let missing: Vec<EdgeKey> = serde_json::from_value(q.get("missing").cloned().unwrap_or(json!([])))
                .map_err(|e| Error::Parse(format!("missing: {e}")))?;
            let queries = q["queries"].as_array().ok_or_else(|| Error::Parse("missing array queries".into()))?;
            let spec = DegreeSpec::regular_without(n, d, &missing)?;
            let oracle = Oracle::new();
            let mut results = Vec::new();
            for query in queries {
                let (estimate, exact) = if let Some(e) = query.get("edge") {
                    let [a, b]: [usize; 2] = serde_json::from_value(e.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                    let exact = (n <= MAX_VERTICES).then(|| oracle.edge_probability(&spec, a, b)).transpose()?;
                    (estimate_edge(n, d, &missing, rounds, a, b)?, exact)
                } else if let Some(c) = query.get("cherry") {
                    let [a, b, c]: [usize; 3] = serde_json::from_value(c.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                    let exact = (n <= MAX_VERTICES).then(|| oracle.cherry_probability(&spec, a, b, c)).transpose()?;
                    (estimate_cherry(n, d, &missing, rounds, (a, b, c))?, exact)
                } else {
                    bail!(Error::Parse(format!("unknown query {query}")));
                };
                let exact_f = exact.as_ref().map(|e| e.to_f64());
                results.push(json!({
                    "query": query,
                    "estimate": estimate,
                    "oracle": exact.map(|e| e.to_string()),
                    "relative_error": exact_f.map(|x| (estimate - x).abs() / x.abs().max(1e-300)),
                }));
            }
            print_json(&json!({ "n": n, "d": d, "missing": missing, "rounds": rounds, "results": results }))?;
        }
        Command::Walks { n, k, d } => {
            let oracle = Oracle::new();
            let mut rows = Vec::new();
            for len in k {
                rows.extend(class_table(&oracle, n, len, d)?);
            }
            if format == Some(Format::Json) {
                print_json(&serde_json::to_value(&rows)?)?;
            } else {
                let mut out = io::stdout().lock();
                if let Some(h) = &header {
                    writeln!(out, "# {h}")?;
                }
                writeln!(out, "k,t,t2,m,b,r,count,bound_log,worst_ratio")?;
                for row in rows {
                    let p = row.params;
                    let worst = row.worst_ratio.map(|w| format!("{w:.6}")).unwrap_or_default();
                    writeln!(out, "{},{},{},{},{},{},{},{:.6},{}", p.k, p.t, p.t2, p.m, p.b, p.r, row.count, row.bound_log, worst)?;
                }
            }
        }
        Command::Spectrum { n, d, samples, k, sampler, graph, save } => {
            if k % 2 == 1 {
                bail!(Error::Config(format!("k = {k} must be even")));
            }
            let mut graphs = Vec::new();
            if let Some(path) = graph {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                graphs.push((cli.seed, read_edge_list(&text)?));
            } else {
                let (n, d) = (n.unwrap(), d.unwrap());
                for i in 0..samples {
                    let seed = cli.seed + i;
                    graphs.push((seed, sample_regular(n, d, seed, sampler.into())?));
                }
            }
            if let (Some(path), Some((_, g))) = (save, graphs.first()) {
                fs::write(&path, write_edge_list(g)?).with_context(|| format!("writing {}", path.display()))?;
            }
            let mut rows = Vec::new();
            for (seed, g) in &graphs {
                let d = g.regular_degree().ok_or_else(|| Error::Precondition("graph is not regular".into()))?;
                let n = g.n();
                let s = eigenvalues(g)?;
                let p = d as f64 / (n - 1) as f64;
                rows.push((n, d, *seed, shifted_trace_from_spectrum(&s, p, k), aggregate_trace_bound(n, d, k), s));
            }
            if format == Some(Format::Json) {
                let v: Vec<Value> = rows
                    .iter()
                    .map(|(n, d, seed, trace, bound, s)| {
                        json!({ "n": n, "d": d, "k": k, "seed": seed, "lambda": s.lambda, "ratio": s.ratio,
                                "trace": trace, "bound_log": bound, "eigenvalues": s.eigenvalues })
                    })
                    .collect();
                print_json(&Value::Array(v))?;
            } else {
                let mut out = io::stdout().lock();
                if let Some(h) = &header {
                    writeln!(out, "# {h}")?;
                }
                writeln!(out, "n,d,k,seed,lambda,ratio,trace,bound_log")?;
                for (n, d, seed, trace, bound, s) in rows {
                    writeln!(out, "{n},{d},{k},{seed},{:.10},{:.10},{trace:.10e},{bound:.10}", s.lambda, s.ratio)?;
                }
            }
        }
        Command::TraceExperiment { grid, out } => {
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(f) = format {
                cfg.format = match f {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                };
            }
            let target = out.or(cfg.output.clone()).filter(|p| p != "-");
            let mut sink: Box<dyn Write> = match &target {
                Some(path) => Box::new(io::BufWriter::new(
                    fs::File::create(path).with_context(|| format!("creating {path}"))?,
                )),
                None => Box::new(io::stdout().lock()),
            };
            match cfg.format {
                OutputFormat::Csv => {
                    let rows = write_csv(&cfg, &mut sink, header.as_deref())?;
                    eprintln!("{rows} rows");
                }
                OutputFormat::Json => writeln!(sink, "{}", run_json(&cfg)?)?,
            }
            sink.flush()?;
        }
        Command::Density { n, d, samples, bins, sampler } => {
            let r = density_compare(n, d, samples, cli.seed, bins, sampler.into())?;
            if format == Some(Format::Json) {
                print_json(&serde_json::to_value(&r)?)?;
            } else {
                let mut out = io::stdout().lock();
                if let Some(h) = &header {
                    writeln!(out, "# {h}")?;
                }
                writeln!(out, "# n={n} d={d} samples={samples} seed={} tv_semicircle={:.6} tv_mckay={:.6}", cli.seed, r.tv_semicircle, r.tv_mckay)?;
                writeln!(out, "lo,hi,empirical,semicircle,mckay")?;
                for (i, w) in r.edges.windows(2).enumerate() {
                    writeln!(out, "{:.4},{:.4},{:.6},{:.6},{:.6}", w[0], w[1], r.empirical[i], r.semicircle[i], r.mckay[i])?;
                }
            }
        }
        Command::Verify { only } => {
            let ids: Vec<u8> = if only.is_empty() {
                verify::CRITERIA.iter().map(|&(id, _)| id).collect()
            } else {
                only
            };
            let mut all_passed = true;
            let mut results = Vec::new();
            for id in ids {
                let r = verify::run(id);
                if format != Some(Format::Json) {
                    println!("{r}");
                }
                all_passed &= r.passed;
                results.push(r);
            }
            if format == Some(Format::Json) {
                print_json(&serde_json::to_value(&results)?)?;
            }
            if !all_passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Assertion(_)) => 1,
        Some(
            Error::Config(_)
            | Error::Parse(_)
            | Error::Precondition(_)
            | Error::InvalidSpec(_)
            | Error::VertexOutOfRange { .. }
            | Error::SelfLoop(_)
            | Error::EdgeNotAllowed(_)
            | Error::TooLarge(_)
            | Error::DuplicateEdge(_)
            | Error::InvalidWalk(_),
        ) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<io::Error>().is_some() => 2,
        None => 1,
    }
}

/// A downstream reader such as `head` closed stdout early.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>()
            .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || c.to_string().contains("Broken pipe")
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
