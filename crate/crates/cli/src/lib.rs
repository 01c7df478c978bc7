//! `sgrg`: constructions, metrics, certificates, sampling and sweeps from the
//! command line.
//!
//! Every command writes its outputs and a `manifest.json` into the output
//! directory (`--out`, else `$SGRG_OUT`, else `./sgrg-out`). `--config FILE`
//! reads a JSON object whose keys are flag names (`n_grid` for `--n-grid`);
//! flags given after `--config` override it.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 I/O or internal error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use spatial_gibbs::certify::{certify_long_edge_mass, level3_layers, CertParams, CertifyError};
use spatial_gibbs::constructions::{bottomup_construction, critical_construction, topdown_construction};
use spatial_gibbs::cutpoints::{best_h1_lower_bound, cutpoint_sequence, local_cutpoints};
use spatial_gibbs::distance::apsp;
use spatial_gibbs::gibbs::{enumerate_exact, run_chain, sample_reference, write_jsonl, ChainHeader};
use spatial_gibbs::harness::{
    ldp_check, staircase_sweep, sweep, write_csv, Estimator, LdpConfig, Manifest, SweepConfig,
};
use spatial_gibbs::{Graph, ModelParams, PathExponent};

pub const OUT_ENV: &str = "SGRG_OUT";
const DEFAULT_OUT: &str = "sgrg-out";

#[derive(Parser, Debug)]
#[command(name = "sgrg", version, about = "Spatial Gibbs random graph experiments", args_override_self = true)]
struct Cli {
    /// Output directory [default: $SGRG_OUT or ./sgrg-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON object of flag values, applied where it appears on the command line
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a deterministic hierarchical graph
    Construct(ConstructArgs),
    /// Path length, diameter and cost of a graph
    Metrics(MetricsArgs),
    /// σ-cutpoints or local cutpoints of a graph
    Cutpoints(CutpointsArgs),
    /// Layer certificate and long-edge mass check
    Certify(CertifyArgs),
    /// Run a Metropolis chain or draw reference samples
    Sample(SampleArgs),
    /// Exact partition function for N <= 7
    Enumerate(ModelArgs),
    /// Exponent estimates over an (N, b) grid
    Sweep(SweepArgs),
    /// Stretched-tail deviation probabilities
    Ldp(LdpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Topdown,
    Bottomup,
    Critical,
}

#[derive(Args, Debug, Serialize)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Target exponent for the dyadic constructions
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of levels for the critical construction
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
struct MetricsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "1")]
    p: PathExponent<f64>,
    /// Also report the cost Σ|e|^γ
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CutpointsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1)]
    sigma: usize,
    /// Local cutpoints in [a, b] instead, given as `a,b`
    #[arg(long, value_delimiter = ',', num_args = 2)]
    interval: Option<Vec<usize>>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    p: PathExponent<f64>,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    delta: f64,
    /// Regularity exponent [default: (1 + pη - δ)/(k + p), or η for p = inf]
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long, allow_hyphen_values = true)]
    b: f64,
    #[arg(long)]
    p: PathExponent<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    #[arg(long, default_value_t = 100)]
    thin: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw this many reference-measure graphs instead of running a chain
    #[arg(long)]
    reference: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    b_grid: Vec<f64>,
    #[arg(long, default_value = "inf")]
    p: PathExponent<f64>,
    #[arg(long, default_value_t = 2)]
    chains_per_cell: usize,
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value_t = spatial_gibbs::harness::DEFAULT_BURN_IN)]
    burn_in: u64,
    #[arg(long, default_value_t = spatial_gibbs::harness::DEFAULT_THIN)]
    thin: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EstimatorArg {
    Naive,
    Tilted,
    Auto,
}

#[derive(Args, Debug, Serialize)]
struct LdpArgs {
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    estimator: EstimatorArg,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Replace `--config FILE` by the flags it encodes.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut out = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let path = if arg == "--config" {
            it.next().ok_or_else(|| usage("--config needs a file"))?
        } else if let Some(p) = arg.strip_prefix("--config=") {
            p.to_string()
        } else {
            out.push(arg);
            continue;
        };
        let text = std::fs::read_to_string(&path).map_err(|e| internal(format!("reading {path}: {e}")))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{path}: {e}")))?;
        let Value::Object(map) = value else {
            return Err(usage(format!("{path}: expected a JSON object")));
        };
        for (key, v) in map {
            let flag = format!("--{}", key.replace('_', "-"));
            match v {
                Value::Bool(true) => out.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    let parts: Result<Vec<String>, CliError> = items.iter().map(|x| scalar_text(&key, x)).collect();
                    out.push(format!("{flag}={}", parts?.join(",")));
                }
                other => out.push(format!("{flag}={}", scalar_text(&key, &other)?)),
            }
        }
    }
    Ok(out)
}

fn scalar_text(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        _ => Err(usage(format!("config key {key}: expected numbers or strings"))),
    }
}

fn out_dir(cli_out: Option<PathBuf>) -> PathBuf {
    cli_out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| internal(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(internal)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| internal(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| internal(format!("creating {}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| internal(format!("writing {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| internal(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn manifest<A: Serialize>(dir: &Path, command: &str, seed: Option<u64>, args: &A) -> Result<Manifest, CliError> {
    let m = Manifest::new(command, seed, serde_json::to_value(args).map_err(internal)?);
    m.write_to(dir).map_err(|e| internal(format!("writing manifest: {e}")))?;
    Ok(m)
}

fn model(a: &ModelArgs) -> Result<ModelParams, CliError> {
    ModelParams::new(a.n, a.gamma, a.b, a.p).map_err(usage)
}

fn construct(a: &ConstructArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let summary = match a.kind {
        Kind::Topdown | Kind::Bottomup => {
            let alpha = a.alpha.ok_or_else(|| usage("--alpha is required for dyadic constructions"))?;
            let c = match a.kind {
                Kind::Topdown => topdown_construction(a.n, alpha),
                _ => bottomup_construction(a.n, alpha),
            }
            .map_err(usage)?;
            write_json(dir, "graph.json", &c.graph)?;
            json!({"n": a.n, "k": c.k, "depth": c.depth, "edges": c.graph.num_long_edges(),
                   "diameter_bound": c.diameter_bound})
        }
        Kind::Critical => {
            let k = a.k.ok_or_else(|| usage("--k is required for the critical construction"))?;
            let c = critical_construction(a.n, k).map_err(usage)?;
            write_json(dir, "graph.json", &c.graph)?;
            json!({"n": a.n, "k": c.k, "base": c.base, "edges": c.graph.num_long_edges(), "cost": c.cost,
                   "cost_bound": c.cost_bound, "diameter": c.diameter, "diameter_bound": c.diameter_bound})
        }
    };
    write_json(dir, "construction.json", &summary)?;
    writeln!(out, "{summary}").map_err(internal)?;
    manifest(dir, "construct", None, a)?;
    Ok(())
}

fn metrics(a: &MetricsArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let g = read_graph(&a.graph)?;
    let cache = apsp(&g, a.p);
    let mut m = json!({"n": g.n(), "edges": g.num_long_edges(), "p": a.p, "h_p": cache.h_p(),
                       "diameter": cache.diameter(), "linear_cost": g.linear_cost()});
    writeln!(out, "H_{} = {}", a.p, cache.h_p()).map_err(internal)?;
    writeln!(out, "diameter = {}", cache.diameter()).map_err(internal)?;
    if let Some(gamma) = a.gamma {
        let c: f64 = g.cost(gamma);
        m["cost"] = json!(c);
        writeln!(out, "cost = {c}").map_err(internal)?;
    }
    write_json(dir, "metrics.json", &m)?;
    manifest(dir, "metrics", None, a)?;
    Ok(())
}

fn cutpoints(a: &CutpointsArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let g = read_graph(&a.graph)?;
    let result = match &a.interval {
        Some(iv) => {
            let r = local_cutpoints(&g, (iv[0], iv[1])).map_err(usage)?;
            writeln!(out, "local cutpoints in [{}, {}]: {}", iv[0], iv[1], r.t_count()).map_err(internal)?;
            serde_json::to_value(&r).map_err(internal)?
        }
        None => {
            let r = cutpoint_sequence(&g, a.sigma).map_err(usage)?;
            writeln!(out, "T = {}", r.t_count).map_err(internal)?;
            let bound = best_h1_lower_bound(&r);
            let mut v = serde_json::to_value(&r).map_err(internal)?;
            if let Some((b, t1, t2)) = bound {
                writeln!(out, "H_1 >= {b} (T1 = {t1}, T2 = {t2})").map_err(internal)?;
                v["h1_lower_bound"] = json!({"value": b, "t1": t1, "t2": t2});
            }
            v
        }
    };
    write_json(dir, "cutpoints.json", &result)?;
    manifest(dir, "cutpoints", None, a)?;
    Ok(())
}

fn certify(a: &CertifyArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let g = read_graph(&a.graph)?;
    let params = match a.sigma {
        Some(s) => CertParams::with_sigma(a.p, a.k, a.eta, a.delta, s),
        None => CertParams::new(a.p, a.k, a.eta, a.delta),
    }
    .map_err(usage)?;
    let cache = apsp(&g, a.p);
    let mass = certify_long_edge_mass(&g, &cache, a.p, a.k, a.eta, a.delta).map_err(usage)?;
    write_json(dir, "mass.json", &mass)?;
    manifest(dir, "certify", None, a)?;
    writeln!(
        out,
        "hypothesis H_p <= N^eta: {} ({} vs {}); long-edge mass {} vs threshold {}",
        mass.hypothesis, mass.h_p, mass.h_threshold, mass.long_edge_mass, mass.mass_threshold
    )
    .map_err(internal)?;
    match level3_layers(&g, &cache, &params) {
        Ok(cert) => {
            write_json(dir, "certificate.json", &cert)?;
            let failed = cert.audit.failures().count();
            writeln!(out, "certificate: {} checks, {failed} failed", cert.audit.checks.len()).map_err(internal)?;
        }
        Err(CertifyError::AuditFailed { failed, certificate }) => {
            write_json(dir, "certificate.json", &certificate)?;
            return Err(internal(format!("{failed} audits failed under a true hypothesis")));
        }
        Err(e) => return Err(usage(e)),
    }
    if !mass.implication_holds() {
        return Err(internal("long-edge mass conclusion fails under a true hypothesis"));
    }
    Ok(())
}

fn sample(a: &SampleArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let params = model(&a.model)?;
    manifest(dir, "sample", Some(a.seed), a)?;
    if let Some(count) = a.reference {
        let mut w = create(dir, "reference.jsonl")?;
        for i in 0..count {
            let g = sample_reference(&params, a.seed.wrapping_add(i as u64));
            serde_json::to_writer(&mut w, &g).map_err(internal)?;
            w.write_all(b"\n").map_err(internal)?;
        }
        w.flush().map_err(internal)?;
        writeln!(out, "{count} reference graphs written").map_err(internal)?;
        return Ok(());
    }
    let records = run_chain(params, a.steps, a.seed, a.thin).map_err(|e| match e {
        spatial_gibbs::gibbs::ChainError::EnergyDrift { .. } => internal(e),
        _ => usage(e),
    })?;
    let mut w = create(dir, "chain.jsonl")?;
    write_jsonl(&mut w, &ChainHeader::new(&params, a.seed, a.steps, a.thin), &records).map_err(internal)?;
    w.flush().map_err(internal)?;
    if let Some(last) = records.last() {
        writeln!(out, "step {}: H_p = {}, edges = {}, energy = {}", last.step, last.h_p, last.edges, last.energy)
            .map_err(internal)?;
    }
    Ok(())
}

fn enumerate(a: &ModelArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let params = model(a)?;
    let s = enumerate_exact(&params).map_err(usage)?;
    writeln!(out, "Z = {:.6}", s.partition_value).map_err(internal)?;
    for (k, v) in &s.expectations {
        writeln!(out, "E[{k}] = {v}").map_err(internal)?;
    }
    write_json(dir, "enumerate.json", &s)?;
    manifest(dir, "enumerate", None, a)?;
    Ok(())
}

fn run_sweep(a: &SweepArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let config = SweepConfig {
        n_grid: a.n_grid.clone(),
        gamma: a.gamma,
        b_grid: a.b_grid.clone(),
        p: a.p,
        chains_per_cell: a.chains_per_cell,
        steps: a.steps,
        burn_in: a.burn_in,
        thin: a.thin,
        seed_base: a.seed_base,
    };
    config.validate().map_err(usage)?;
    let m = manifest(dir, "sweep", Some(a.seed_base), &config)?;
    let rows = if config.gamma == 1.0 { staircase_sweep(&config) } else { sweep(&config) }.map_err(internal)?;
    let mut w = create(dir, "results.csv")?;
    write_csv(&mut w, &rows, &m.hash()).map_err(internal)?;
    w.flush().map_err(internal)?;
    for r in &rows {
        let flag = if r.flagged { " [split-chain disagreement]" } else { "" };
        let pred = r.predicted.map_or_else(|| "none".to_string(), |v| v.to_string());
        writeln!(out, "N={} b={}: {:.4} ± {:.4} (prediction {pred}){flag}", r.n, r.b, r.mean_log_ratio, r.std_error)
            .map_err(internal)?;
    }
    Ok(())
}

fn ldp(a: &LdpArgs, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = LdpConfig {
        gamma: a.gamma,
        theta: a.theta,
        m: a.m,
        n_grid: a.n_grid.clone(),
        trials: a.trials,
        seed: a.seed,
        estimator: match a.estimator {
            EstimatorArg::Naive => Estimator::Naive,
            EstimatorArg::Tilted => Estimator::Tilted,
            EstimatorArg::Auto => Estimator::Auto,
        },
    };
    let rows = ldp_check(&cfg).map_err(usage)?;
    let m = manifest(dir, "ldp", Some(a.seed), &cfg)?;
    let mut w = csv_writer(create(dir, "ldp.csv")?);
    w.write_record(["n", "trials", "estimator", "hits", "probability", "stderr", "rate", "lower_bound", "manifest_hash"])
        .map_err(internal)?;
    let hash = m.hash();
    for r in &rows {
        let est = serde_json::to_value(r.estimator).map_err(internal)?;
        w.write_record([
            r.n.to_string(),
            r.trials.to_string(),
            est.as_str().unwrap_or_default().to_string(),
            r.hits.to_string(),
            r.probability.to_string(),
            r.std_error.to_string(),
            r.rate.to_string(),
            r.lower_bound.to_string(),
            hash.clone(),
        ])
        .map_err(internal)?;
        let bound = if r.lower_bound { " (lower bound, no hits)" } else { "" };
        writeln!(out, "N={}: p = {:e}, -ln p / N^gamma = {:.5}{bound}", r.n, r.probability, r.rate).map_err(internal)?;
    }
    w.flush().map_err(internal)?;
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

/// Parse `argv` (program name first), run the command, and return the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {}", message(&e));
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let dir = out_dir(cli.out);
    let result = match &cli.command {
        Command::Construct(a) => construct(a, &dir, out),
        Command::Metrics(a) => metrics(a, &dir, out),
        Command::Cutpoints(a) => cutpoints(a, &dir, out),
        Command::Certify(a) => certify(a, &dir, out),
        Command::Sample(a) => sample(a, &dir, out),
        Command::Enumerate(a) => enumerate(a, &dir, out),
        Command::Sweep(a) => run_sweep(a, &dir, out),
        Command::Ldp(a) => ldp(a, &dir, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", message(&e));
            e.code()
        }
    }
}

fn message(e: &CliError) -> &str {
    match e {
        CliError::Usage(m) | CliError::Internal(m) => m,
    }
}

/// `run_with` on the process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
