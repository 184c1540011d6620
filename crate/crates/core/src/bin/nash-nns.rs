//! `nash-nns`: attribute generation, benchmark runs and property verification.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nash_nns::bench::{self, parse_p_list, Algo, RunOptions};
use nash_nns::data::{self, DatasetBundle, Preset, SyntheticSpec};
use nash_nns::verify::{self, Suite, VerifyConfig};
use nash_nns::Error;

#[derive(Parser)]
#[command(name = "nash-nns", version, about = "Diversity-aware nearest neighbor search via welfare objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an attribute file for a dataset by k-means clusters or skewed random labels.
    GenAttrs(GenAttrs),
    /// Run a query batch and write per-query metrics as CSV.
    Run(Box<Run>),
    /// Run the randomized property suites.
    Verify(Verify),
    /// Write a synthetic Gaussian-mixture dataset (base, queries, attributes).
    GenSynthetic(GenSynthetic),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Clus,
    Prob,
}

#[derive(Args)]
struct GenAttrs {
    /// Dataset (.fvecs or .bvecs).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Number of clusters (clus mode).
    #[arg(long, default_value_t = 20)]
    c: usize,
    /// Cluster each of this many equal dimension slices separately (multi-attribute).
    #[arg(long)]
    chunks: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct Run {
    /// key=value defaults, overridden by flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset preset: similarity and default eta.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    base: Option<PathBuf>,
    /// Query vectors; without them the base is split 4:1.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    attrs: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write batch summaries as JSON.
    #[arg(long)]
    summary_json: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algo>,
    #[arg(long)]
    k: Option<usize>,
    /// One exponent or a comma-separated sweep.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    kprime: Option<usize>,
    /// Candidate pool size; fetch-union defaults to 200 x k.
    #[arg(long = "pool-L", alias = "pool-l")]
    pool_l: Option<usize>,
    /// Replace the exact oracle with an alpha-degraded one.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_queries: Option<usize>,
    /// Entropy in bits instead of nats.
    #[arg(long)]
    log2: bool,
    /// Leave timing columns empty so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct Verify {
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Oracle quality for the alpha suite (repeatable).
    #[arg(long)]
    alpha: Vec<f64>,
    /// Write the reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenSynthetic {
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 50)]
    centers: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory for base.fvecs, queries.fvecs and attrs.txt.
    #[arg(long, short)]
    out: PathBuf,
}

enum Failure {
    Verification,
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Format { .. } | Error::Csv(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_failure(path: &std::path::Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn gen_attrs(a: GenAttrs) -> Result<(), Failure> {
    let data = data::read_vectors(&a.data)?;
    let table = match a.mode {
        Mode::Prob => data::prob_attrs(data.len(), a.seed)?,
        Mode::Clus => {
            let threads = a.threads.unwrap_or(0);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            pool.install(|| data::cluster_attrs(&data, a.c, a.seed, a.chunks))?
        }
    };
    data::write_attrs(&a.out, &table)?;
    eprintln!(
        "wrote {} vectors over {} attributes to {}",
        table.num_vectors(),
        table.num_attributes(),
        a.out.display()
    );
    Ok(())
}

fn run(r: Run) -> Result<(), Failure> {
    let flags = RunOptions {
        preset: r.preset,
        base: r.base,
        queries: r.queries,
        attrs: r.attrs,
        out: r.out,
        summary_json: r.summary_json,
        algo: r.algo,
        k: r.k,
        p: r.p.as_deref().map(parse_p_list).transpose()?,
        eta: r.eta,
        kprime: r.kprime,
        pool_l: r.pool_l,
        alpha: r.alpha,
        threads: r.threads,
        seed: r.seed,
        max_queries: r.max_queries,
        log2: r.log2.then_some(true),
        timing: r.no_timing.then_some(false),
    };
    let opts = match &r.config {
        Some(path) => flags.or(RunOptions::read_config(path)?),
        None => flags,
    };
    let preset = Preset::named(opts.preset.as_deref().unwrap_or("synthetic"))?;
    let cfg = opts.resolve(&preset)?;
    let base = opts.base.as_deref().ok_or_else(|| Failure::Usage("--base is required".into()))?;
    let attrs = opts.attrs.as_deref().ok_or_else(|| Failure::Usage("--attrs is required".into()))?;
    let bundle = DatasetBundle::load(base, opts.queries.as_deref(), attrs, preset, cfg.seed)?;
    let batches = bench::run_batch(&bundle, &cfg)?;
    let classes = bundle.attrs.classes().map_or(1, <[Vec<usize>]>::len);
    match &opts.out {
        Some(path) => {
            let file = File::create(path).map_err(io_failure(path))?;
            bench::write_csv(BufWriter::new(file), &batches, classes, cfg.timing)?;
        }
        None => bench::write_csv(io::stdout().lock(), &batches, classes, cfg.timing)?,
    }
    if let Some(path) = &opts.summary_json {
        std::fs::write(path, bench::summaries_json(&cfg, &batches)?).map_err(io_failure(path))?;
    }
    for b in &batches {
        let s = b.summary();
        eprintln!(
            "{} k={} p={}: approx_ratio {:.4} ± {:.4}, entropy {:.4} ± {:.4}, qps {:.1}, p99.9 {:.0} us",
            s.algo,
            s.k,
            s.p.map_or("-".into(), |p| p.to_string()),
            s.approx_ratio.mean,
            s.approx_ratio.stddev,
            s.entropy.mean,
            s.entropy.stddev,
            s.qps,
            s.p999_latency_us
        );
    }
    Ok(())
}

fn verify(v: Verify) -> Result<(), Failure> {
    let cfg = VerifyConfig {
        suite: v.suite,
        trials: v.trials,
        seed: v.seed,
        alphas: if v.alpha.is_empty() { verify::DEFAULT_ALPHAS.to_vec() } else { v.alpha },
    };
    let reports = verify::run(&cfg)?;
    let mut out = io::stdout().lock();
    for r in &reports {
        writeln!(out, "{r}").map_err(|e| Failure::Io(e.to_string()))?;
    }
    if let Some(path) = &v.json {
        let text = serde_json::to_string_pretty(&reports).map_err(|e| Failure::Io(e.to_string()))?;
        std::fs::write(path, text).map_err(io_failure(path))?;
    }
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn gen_synthetic(g: GenSynthetic) -> Result<(), Failure> {
    let spec = SyntheticSpec {
        n_base: g.n,
        n_queries: g.queries,
        dim: g.dim,
        centers: g.centers,
        seed: g.seed,
        ..Default::default()
    };
    let b = DatasetBundle::synthetic(&spec)?;
    std::fs::create_dir_all(&g.out).map_err(io_failure(&g.out))?;
    data::write_fvecs(g.out.join("base.fvecs"), &b.base)?;
    data::write_fvecs(g.out.join("queries.fvecs"), &b.queries)?;
    data::write_attrs(g.out.join("attrs.txt"), &b.attrs)?;
    eprintln!("wrote {} base and {} query vectors to {}", g.n, g.queries, g.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::GenAttrs(a) => gen_attrs(a),
        Command::Run(r) => run(*r),
        Command::Verify(v) => verify(v),
        Command::GenSynthetic(g) => gen_synthetic(g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
