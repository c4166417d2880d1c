//! `estimate` subcommand: dispatch to the Monte Carlo estimators.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use drc_core::lattice::{Bc, Domain};
use drc_core::report::{content_id, Table};
use drc_core::sampler::{Construction, RunManifest, SamplerContext};
use drc_core::stats::{
    beta_estimate, box_beta, chain_sources, circuit_probability, circuit_table, drc_one_arm, height_covariance_check,
    l2_discrepancy, one_point_scaling, two_point_scaling, BetaEstimate, CircuitSource, ExponentFit, McParams,
    TestFunction,
};
use drc_core::{Error, Result};

use crate::config::Settings;
use crate::output::RunFiles;
use crate::{chain_settings, ChainArgs, KNOWN_KEYS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Target {
    OnePoint,
    TwoPoint,
    DrcOneArm,
    Circuits,
    Beta,
    L2,
    HeightGff,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::OnePoint => "one_point",
            Target::TwoPoint => "two_point",
            Target::DrcOneArm => "drc_one_arm",
            Target::Circuits => "circuits",
            Target::Beta => "beta",
            Target::L2 => "l2",
            Target::HeightGff => "height_gff",
        }
    }
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    pub target: Target,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Total samples over all chains (per size or per boundary condition).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Box sizes for one_point.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Box size for two_point, l2 and height_gff.
    #[arg(long)]
    pub size: Option<usize>,
    /// Separations for two_point.
    #[arg(long, value_delimiter = ',')]
    pub rs: Option<Vec<usize>>,
    /// Outer radius N for drc_one_arm.
    #[arg(long)]
    pub outer: Option<usize>,
    /// Inner radii for drc_one_arm and circuits.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Extra layers around the annulus for drc_one_arm.
    #[arg(long)]
    pub margin: Option<usize>,
    /// Inner radius for beta.
    #[arg(long)]
    pub n: Option<usize>,
    /// Box radius for beta.
    #[arg(long)]
    pub m: Option<usize>,
    /// Annulus ratio N / n for circuits.
    #[arg(long)]
    pub ratio: Option<usize>,
    /// Domain radius over n for circuits.
    #[arg(long)]
    pub domain_factor: Option<usize>,
    /// omega, omega_plus or omega_minus.
    #[arg(long)]
    pub source: Option<CircuitSource>,
    /// Test function: const[:c], bump[:x,y,r] or box[:h].
    #[arg(long)]
    pub f: Option<TestFunction>,
    /// Second test function for height_gff.
    #[arg(long)]
    pub g: Option<TestFunction>,
    /// Dyadic scales for l2.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Cluster rank for l2 (0 is the boundary cluster).
    #[arg(long)]
    pub k: Option<usize>,
    /// Box-counting coefficient for l2; estimated from beta(beta_n, beta_m) when absent.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub beta_n: Option<usize>,
    #[arg(long)]
    pub beta_m: Option<usize>,
    #[arg(long)]
    pub beta_samples: Option<usize>,
    /// Expected headline value (fitted slope, beta, or covariance ratio).
    #[arg(long, allow_hyphen_values = true)]
    pub expect: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Tables to write plus the headline value compared against `--expect`.
struct Outcome {
    tables: Vec<(&'static str, Table)>,
    summary: serde_json::Value,
    headline: Option<f64>,
}

fn fit_outcome(name: &'static str, main: Table, fit: &ExponentFit, summary: serde_json::Value) -> Outcome {
    Outcome {
        tables: vec![(name, main), ("fit", fit.table())],
        summary,
        headline: Some(fit.slope),
    }
}

pub fn run(a: EstimateArgs, mut s: Settings, out: PathBuf) -> Result<bool> {
    let (seed, chains, burn_in, thinning, j, u) = chain_settings(&mut s, &a.chain)?;
    if u != 0.0 {
        return Err(Error::InvalidArgument("the estimators support U = 0 only".into()));
    }
    let samples = s.get("samples", a.samples, 10_000)?;
    let p = McParams {
        seed,
        chains,
        samples,
        burn_in,
        thinning,
    };
    p.validate()?;

    let mut expect = None;
    let outcome = match a.target {
        Target::OnePoint => {
            let sizes = s.get_list("sizes", a.sizes, vec![16, 32, 64, 128])?;
            expect = s.get_opt("expect", a.expect)?;
            let r = one_point_scaling(&sizes, j, &p)?;
            fit_outcome("one_point", r.table(), &r.fit, serde_json::to_value(&r)?)
        }
        Target::TwoPoint => {
            let size = s.get("size", a.size, 128)?;
            let rs = s.get_list("rs", a.rs, vec![4, 8, 16, 32])?;
            expect = s.get_opt("expect", a.expect)?;
            let r = two_point_scaling(size, &rs, j, &p)?;
            fit_outcome("two_point", r.table(), &r.fit, serde_json::to_value(&r)?)
        }
        Target::DrcOneArm => {
            let outer = s.get("outer", a.outer, 256)?;
            let ns = s.get_list("ns", a.ns, vec![4, 8, 16, 32, 64])?;
            let margin = s.get("margin", a.margin, 64)?;
            expect = s.get_opt("expect", a.expect)?;
            let r = drc_one_arm(outer, &ns, margin, j, &p)?;
            fit_outcome("drc_one_arm", r.table(), &r.fit, serde_json::to_value(&r)?)
        }
        Target::Circuits => {
            let ns = s.get_list("ns", a.ns, vec![8, 16, 32])?;
            let ratio = s.get("ratio", a.ratio, 2)?;
            let factor = s.get("domain_factor", a.domain_factor, 8)?;
            let source = s.get("source", a.source, CircuitSource::OmegaPlus)?;
            no_expect(a.target, a.expect)?;
            let rows = ns
                .iter()
                .map(|&n| circuit_probability(source, n, ratio, factor, j, &p))
                .collect::<Result<Vec<_>>>()?;
            Outcome {
                tables: vec![("circuits", circuit_table(&rows))],
                summary: serde_json::to_value(&rows)?,
                headline: None,
            }
        }
        Target::Beta => {
            let n = s.get("n", a.n, 8)?;
            let m = s.get("m", a.m, 64)?;
            expect = s.get_opt("expect", a.expect)?;
            let r = beta_estimate(n, m, j, &p)?;
            Outcome {
                tables: vec![("beta", BetaEstimate::table(std::slice::from_ref(&r)))],
                summary: serde_json::to_value(&r)?,
                headline: Some(r.estimate.mean),
            }
        }
        Target::L2 => {
            let size = s.get("size", a.size, 256)?;
            let k = s.get("k", a.k, 0)?;
            let f = s.get("f", a.f, TestFunction::Constant(1.0))?;
            let eps = s.get_list("eps", a.eps, vec![0.5, 0.25, 0.125])?;
            let given = s.get_opt("beta", a.beta)?;
            no_expect(a.target, a.expect)?;
            let (beta, beta_row) = match given {
                Some(b) => (b, None),
                None => {
                    let n = s.get("beta_n", a.beta_n, 16)?;
                    let m = s.get("beta_m", a.beta_m, 128)?;
                    let bs = s.get("beta_samples", a.beta_samples, samples)?;
                    let r = beta_estimate(n, m, j, &McParams { samples: bs, ..p.clone() })?;
                    (box_beta(r.estimate.mean), Some(r))
                }
            };
            let ctx = SamplerContext::new(Domain::square(size, Bc::Plus)?, j, Construction::Direct)?;
            let mut sources = chain_sources(&ctx, &p)?;
            let r = l2_discrepancy(&mut sources, k, f, &eps, Some(beta))?;
            let mut tables = vec![("l2", r.table())];
            if let Some(b) = &beta_row {
                tables.push(("beta", BetaEstimate::table(std::slice::from_ref(b))));
            }
            Outcome {
                tables,
                summary: serde_json::json!({ "discrepancy": r, "beta_estimate": beta_row }),
                headline: None,
            }
        }
        Target::HeightGff => {
            let size = s.get("size", a.size, 64)?;
            let f = s.get("f", a.f, "bump".parse::<TestFunction>()?)?;
            let g = s.get("g", a.g, "bump".parse::<TestFunction>()?)?;
            expect = s.get_opt("expect", a.expect)?;
            let r = height_covariance_check(size, f, g, j, &p)?;
            Outcome {
                tables: vec![("height_gff", r.table())],
                summary: serde_json::to_value(&r)?,
                headline: Some(r.ratio.mean),
            }
        }
    };
    let tol = s.get("tol", a.tol, 0.02)?;
    let resolved = s.finish(KNOWN_KEYS)?;

    let pass = match (expect, outcome.headline) {
        (Some(e), Some(h)) => Some((h - e).abs() <= tol),
        _ => None,
    };
    let run_id = content_id(&serde_json::json!({ "command": "estimate", "target": a.target.name(), "config": resolved }));
    let mut manifest = RunManifest::start(run_id.clone(), seed, resolved);
    manifest.results.insert("target".into(), a.target.name().into());
    manifest.results.insert("summary".into(), outcome.summary);
    manifest.results.insert("headline".into(), serde_json::json!(outcome.headline));
    manifest.results.insert("pass".into(), serde_json::json!(pass));

    let mut files = RunFiles::new(&out, &run_id)?;
    let mut names = Vec::new();
    for (name, t) in &outcome.tables {
        files.table(name, t)?;
        names.push(format!("{run_id}_{name}.csv"));
    }
    manifest.results.insert("files".into(), serde_json::json!(names));
    manifest.finish();
    let p = files.json("manifest", &manifest)?;
    files.commit();
    crate::emit(&p.display().to_string())?;
    Ok(pass.unwrap_or(true))
}

fn no_expect(target: Target, expect: Option<f64>) -> Result<()> {
    if expect.is_some() {
        return Err(Error::InvalidArgument(format!("{} has no headline value to compare", target.name())));
    }
    Ok(())
}
