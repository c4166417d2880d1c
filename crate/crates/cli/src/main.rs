//! `drc`: exact checks, samplers and estimators from the command line.

mod config;
mod dumps;
mod estimate;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use drc_core::exact::{run_suite, CheckReport, Suite};
use drc_core::lattice::{critical_coupling, Bc};
use drc_core::report::content_id;
use drc_core::sampler::{builtin_collector, run_chains, Collector, Construction, RunConfig};
use drc_core::{Error, Result};

use config::Settings;
use dumps::{ClusterDump, RawDump};
use estimate::EstimateArgs;
use output::{default_out_dir, RunFiles};

const EXIT_FAIL: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Every key a config file may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "suite", "J", "U", "seed", "chains", "burn_in", "thinning", "samples", "sweeps", "size", "bc",
    "construction", "collect", "dump_raw", "dump_clusters", "sizes", "rs", "outer", "ns", "margin", "n", "m",
    "ratio", "domain_factor", "source", "f", "g", "eps", "k", "beta", "beta_n", "beta_m", "beta_samples",
    "expect", "tol",
];

#[derive(Parser, Debug)]
#[command(name = "drc", version, about = "Ising, double random current and Ashkin-Teller couplings")]
struct Cli {
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $DRC_OUT_DIR, else the working directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run exact checks by enumeration.
    Verify(VerifyArgs),
    /// Run Markov chains and write collector tables.
    Sample(SampleArgs),
    /// Run a Monte Carlo estimator.
    Estimate(EstimateArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// all, edwards_sokal, duality, switching, fkg, correlation or anticorrelation.
    #[arg(long, value_parser = parse_suite)]
    suite: Option<Suite>,
    /// Single Ising coupling instead of the default list.
    #[arg(long = "J")]
    j: Option<f64>,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Chain parameters shared by `sample` and `estimate`.
#[derive(Args, Debug)]
pub struct ChainArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long = "J")]
    pub j: Option<f64>,
    #[arg(long = "U", allow_hyphen_values = true)]
    pub u: Option<f64>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    bc: Option<Bc>,
    /// direct or current.
    #[arg(long)]
    construction: Option<Construction>,
    /// Total sweeps per chain, burn-in included.
    #[arg(long, conflicts_with = "samples")]
    sweeps: Option<usize>,
    /// Samples per chain; sets sweeps to burn_in + samples * thinning.
    #[arg(long)]
    samples: Option<usize>,
    /// Builtin collectors, comma separated.
    #[arg(long, value_delimiter = ',')]
    collect: Option<Vec<String>>,
    /// Write omega of every sample as a hex bitstring.
    #[arg(long)]
    dump_raw: bool,
    /// Write the clusters of omega of every sample.
    #[arg(long)]
    dump_clusters: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) => EXIT_USAGE,
                Error::ResourceLimit(_) => EXIT_RESOURCE,
                _ => EXIT_FAIL,
            })
        }
    }
}

/// Whether every check or expectation passed.
fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::InvalidArgument("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let settings = Settings::load(cli.config.as_deref())?;
    settings.check_known(KNOWN_KEYS)?;
    match cli.command {
        Command::Verify(a) => verify(a, settings, cli.out),
        Command::Sample(a) => sample(a, settings, cli.out.unwrap_or_else(default_out_dir)),
        Command::Estimate(a) => estimate::run(a, settings, cli.out.unwrap_or_else(default_out_dir)),
    }
}

fn verify(a: VerifyArgs, mut s: Settings, out: Option<PathBuf>) -> Result<bool> {
    let suite: String = s.get("suite", a.suite.map(suite_name), "all".into())?;
    let suite: Suite = suite.parse()?;
    let j = s.get_opt("J", a.j)?;
    let resolved = s.finish(KNOWN_KEYS)?;
    let checks: Vec<CheckReport> = run_suite(suite, j)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = serde_json::json!({
        "suite": suite,
        "config": resolved,
        "pass": failed == 0,
        "n_checks": checks.len(),
        "n_failed": failed,
        "checks": checks,
    });
    match out {
        Some(dir) => {
            let id = content_id(&serde_json::json!({ "command": "verify", "config": resolved }));
            let mut files = RunFiles::new(&dir, &id)?;
            let p = files.json("verify", &report)?;
            files.commit();
            eprintln!("{} checks, {failed} failed; report in {}", checks.len(), p.display());
        }
        None => emit(&serde_json::to_string_pretty(&report)?)?,
    }
    Ok(failed == 0)
}

fn suite_name(s: Suite) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Seed, chain count, burn-in, thinning and couplings from flags, file and defaults.
pub fn chain_settings(s: &mut Settings, a: &ChainArgs) -> Result<(u64, usize, usize, usize, f64, f64)> {
    Ok((
        s.get("seed", a.seed, 0)?,
        s.get("chains", a.chains, 1)?,
        s.get("burn_in", a.burn_in, 100)?,
        s.get("thinning", a.thinning, 10)?,
        s.get("J", a.j, critical_coupling())?,
        s.get("U", a.u, 0.0)?,
    ))
}

fn sample(a: SampleArgs, mut s: Settings, out: PathBuf) -> Result<bool> {
    let (seed, chains, burn_in, thinning, j, u) = chain_settings(&mut s, &a.chain)?;
    let defaults = RunConfig::default();
    let size = s.get("size", a.size, defaults.size)?;
    let bc = s.get("bc", a.bc, defaults.bc)?;
    let construction = s.get("construction", a.construction, defaults.construction)?;
    let sweeps_given = s.get_opt("sweeps", a.sweeps)?;
    let samples = s.get_opt("samples", a.samples)?;
    let sweeps = match (sweeps_given, samples) {
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("give sweeps or samples, not both".into())),
        (Some(w), None) => w,
        (None, Some(n)) => burn_in + n * thinning,
        (None, None) => defaults.sweeps,
    };
    s.record("sweeps", &sweeps);
    let collect: Vec<String> = s.get_list("collect", a.collect, Vec::new())?;
    let dump_raw = s.get("dump_raw", a.dump_raw.then_some(true), false)?;
    let dump_clusters = s.get("dump_clusters", a.dump_clusters.then_some(true), false)?;
    let resolved = s.finish(KNOWN_KEYS)?;

    let cfg = RunConfig {
        seed,
        chains,
        sweeps,
        burn_in,
        thinning,
        size,
        bc,
        j,
        u,
        construction,
    };
    let mut collectors: Vec<Box<dyn Collector>> =
        collect.iter().filter(|c| !c.is_empty()).map(|c| builtin_collector(c)).collect::<Result<_>>()?;
    let n_builtin = collectors.len();
    if dump_raw {
        collectors.push(Box::new(RawDump::default()));
    }
    if dump_clusters {
        collectors.push(Box::new(ClusterDump::default()));
    }
    let mut result = run_chains(&cfg, &collectors)?;
    let run_id = content_id(&serde_json::json!({ "command": "sample", "config": resolved }));
    result.manifest.run_id = run_id.clone();
    result.manifest.config = resolved;

    let mut files = RunFiles::new(&out, &run_id)?;
    let mut names = Vec::new();
    for (i, c) in result.collectors.iter().enumerate() {
        let any = c.as_any();
        if let Some(raw) = any.downcast_ref::<RawDump>() {
            files.lines("raw.txt", raw.lines.iter().cloned())?;
            names.push(format!("{run_id}_raw.txt"));
        } else if let Some(cl) = any.downcast_ref::<ClusterDump>() {
            files.table("clusters", &cl.table())?;
            files.table("cluster_map", &cl.map_table())?;
            names.push(format!("{run_id}_clusters.csv"));
            names.push(format!("{run_id}_cluster_map.csv"));
        } else {
            debug_assert!(i < n_builtin);
            files.table(&c.name(), &c.table())?;
            names.push(format!("{run_id}_{}.csv", c.name()));
        }
    }
    result.manifest.results.insert("files".into(), serde_json::json!(names));
    let p = files.json("manifest", &result.manifest)?;
    files.commit();
    emit(&p.display().to_string())?;
    Ok(true)
}

/// Print a line to stdout; a closed pipe is not an error.
pub fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
