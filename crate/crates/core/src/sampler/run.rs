use std::any::Any;
use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::master::{Construction, MasterSample, SamplerContext};
use crate::clusters::Components;
use crate::error::{invalid, Result};
use crate::lattice::{critical_coupling, Bc, Domain};
use crate::report::{fmt_f64, Table};
use crate::stats::ScalarSeries;

/// In release builds the invariants of one sample in this many are checked.
pub const RELEASE_CHECK_EVERY: usize = 100;

/// Random stream of chain `chain` under master seed `seed`.
pub fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Parameters of a sampling run on a square box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub chains: usize,
    /// Total sweeps per chain, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub size: usize,
    pub bc: Bc,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub construction: Construction,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            chains: 1,
            sweeps: 1100,
            burn_in: 100,
            thinning: 10,
            size: 32,
            bc: Bc::Plus,
            j: critical_coupling(),
            u: 0.0,
            construction: Construction::Direct,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return invalid("chains must be at least 1");
        }
        if self.sweeps <= self.burn_in {
            return invalid("sweeps must exceed burn_in");
        }
        if self.thinning == 0 {
            return invalid("thinning must be at least 1");
        }
        if self.size < 2 {
            return invalid("size must be at least 2");
        }
        if !self.j.is_finite() || self.j < 0.0 {
            return invalid("J must be finite and non-negative");
        }
        if self.u != 0.0 {
            return invalid("the samplers support U = 0 only");
        }
        Ok(())
    }

    pub fn samples_per_chain(&self) -> usize {
        (self.sweeps.saturating_sub(self.burn_in)) / self.thinning
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::square(self.size, self.bc)
    }

    pub fn context(&self) -> Result<SamplerContext> {
        self.validate()?;
        SamplerContext::new(self.domain()?, self.j, self.construction)
    }

    /// Short content hash of the configuration.
    pub fn run_id(&self) -> String {
        crate::report::content_id(&serde_json::to_value(self).expect("config serialises"))
    }
}

/// What a collector needs from the samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Requirement {
    Omega,
    /// Current trace and dual objects.
    Current,
    /// Height function: current construction with plus conditions.
    Height,
}

/// Fold-style statistic over master samples with an associative merge.
pub trait Collector: Any + Send + Sync {
    fn name(&self) -> String;
    fn requires(&self) -> Requirement {
        Requirement::Omega
    }
    /// Empty collector of the same kind.
    fn fresh(&self) -> Box<dyn Collector>;
    fn observe(&mut self, s: &MasterSample, ctx: &SamplerContext) -> Result<()>;
    /// Absorb `other`, which must be of the same kind.
    fn merge(&mut self, other: Box<dyn Collector>) -> Result<()>;
    fn summary(&self) -> serde_json::Value;
    fn table(&self) -> Table;
    fn as_any(&self) -> &dyn Any;
    fn into_any(self: Box<Self>) -> Box<dyn Any>;
}

/// Downcast helper for `Collector::merge`.
pub fn downcast_collector<T: Collector>(other: Box<dyn Collector>, name: &str) -> Result<T> {
    match other.into_any().downcast::<T>() {
        Ok(b) => Ok(*b),
        Err(_) => invalid(format!("cannot merge a different collector into '{name}'")),
    }
}

pub type ScalarFn = fn(&MasterSample, &SamplerContext) -> f64;

/// Time series of a scalar function of the samples.
#[derive(Clone)]
pub struct ScalarCollector {
    name: String,
    f: ScalarFn,
    requires: Requirement,
    pub series: ScalarSeries,
}

impl ScalarCollector {
    pub fn new(name: &str, f: ScalarFn) -> Self {
        ScalarCollector {
            name: name.into(),
            f,
            requires: Requirement::Omega,
            series: ScalarSeries::new(),
        }
    }

    pub fn requiring(mut self, r: Requirement) -> Self {
        self.requires = r;
        self
    }
}

impl Collector for ScalarCollector {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn requires(&self) -> Requirement {
        self.requires
    }

    fn fresh(&self) -> Box<dyn Collector> {
        Box::new(ScalarCollector {
            series: ScalarSeries::new(),
            ..self.clone()
        })
    }

    fn observe(&mut self, s: &MasterSample, ctx: &SamplerContext) -> Result<()> {
        self.series.push((self.f)(s, ctx));
        Ok(())
    }

    fn merge(&mut self, other: Box<dyn Collector>) -> Result<()> {
        let o: ScalarCollector = downcast_collector(other, &self.name)?;
        if o.name != self.name {
            return invalid(format!("cannot merge '{}' into '{}'", o.name, self.name));
        }
        self.series.merge(o.series);
        Ok(())
    }

    fn summary(&self) -> serde_json::Value {
        let e = self.series.estimate();
        serde_json::json!({ "mean": e.mean, "stderr": e.stderr, "n_samples": e.n_samples })
    }

    fn table(&self) -> Table {
        let e = self.series.estimate();
        let mut t = Table::new(&["observable", "mean", "stderr", "n_samples"]);
        t.push(vec![self.name.clone(), fmt_f64(e.mean), fmt_f64(e.stderr), e.n_samples.to_string()]);
        t
    }

    fn as_any(&self) -> &dyn Any {
        self
    }

    fn into_any(self: Box<Self>) -> Box<dyn Any> {
        self
    }
}

/// Fraction of open edges of `omega`.
pub fn edge_density(s: &MasterSample, _: &SamplerContext) -> f64 {
    s.omega.count_open() as f64 / s.omega.len().max(1) as f64
}

/// Indicator that the central vertex is joined to the boundary in `omega`.
pub fn center_connection(s: &MasterSample, ctx: &SamplerContext) -> f64 {
    let d = ctx.domain();
    let (cx, cy) = d.center();
    let c = d.vertex_at(cx, cy).expect("centre of a box is a vertex");
    let comps = Components::with(d.graph(), |e| s.omega.get(e));
    let hit = (0..d.n_vertices()).any(|v| d.is_boundary(v) && comps.connected(v, c));
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Mean of `sigma`.
pub fn magnetisation(s: &MasterSample, _: &SamplerContext) -> f64 {
    let sl = s.sigma.as_slice();
    sl.iter().map(|&x| x as f64).sum::<f64>() / sl.len() as f64
}

/// Fraction of odd edges in the double current.
pub fn odd_density(s: &MasterSample, _: &SamplerContext) -> f64 {
    let t = s.trace.as_ref().expect("collector requires the current construction");
    t.odd.count_open() as f64 / t.odd.len().max(1) as f64
}

/// Names accepted by [`builtin_collector`].
pub const BUILTIN_COLLECTORS: &[&str] = &["edge_density", "center_connection", "magnetisation", "odd_density"];

pub fn builtin_collector(name: &str) -> Result<Box<dyn Collector>> {
    let c = match name {
        "edge_density" => ScalarCollector::new(name, edge_density),
        "center_connection" => ScalarCollector::new(name, center_connection),
        "magnetisation" => ScalarCollector::new(name, magnetisation),
        "odd_density" => ScalarCollector::new(name, odd_density).requiring(Requirement::Current),
        _ => {
            return invalid(format!(
                "unknown collector '{name}' (expected one of {})",
                BUILTIN_COLLECTORS.join(", ")
            ))
        }
    };
    Ok(Box::new(c))
}

/// Provenance record attached to every run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub run_id: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub results: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn start(run_id: String, seed: u64, config: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            run_id,
            seed,
            config,
            started_unix: unix_now(),
            finished_unix: 0,
            results: BTreeMap::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix = unix_now();
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub struct RunResult {
    pub manifest: RunManifest,
    pub collectors: Vec<Box<dyn Collector>>,
}

impl RunResult {
    pub fn collector<T: Collector>(&self, i: usize) -> Option<&T> {
        self.collectors.get(i)?.as_any().downcast_ref::<T>()
    }
}

/// Check that `ctx` can serve every collector.
pub fn check_requirements(ctx: &SamplerContext, collectors: &[Box<dyn Collector>]) -> Result<()> {
    for c in collectors {
        let ok = match c.requires() {
            Requirement::Omega => true,
            Requirement::Current => ctx.construction() == Construction::Current,
            Requirement::Height => ctx.construction() == Construction::Current && ctx.domain().bc() == Bc::Plus,
        };
        if !ok {
            return invalid(format!(
                "collector '{}' needs {:?} but the run uses the {} construction with {} conditions",
                c.name(),
                c.requires(),
                ctx.construction(),
                ctx.domain().bc()
            ));
        }
    }
    Ok(())
}

/// Run one chain and feed every sample to fresh copies of `collectors`.
pub fn run_chain(
    ctx: &SamplerContext,
    cfg: &RunConfig,
    chain: u64,
    collectors: &[Box<dyn Collector>],
) -> Result<Vec<Box<dyn Collector>>> {
    let mut rng = chain_rng(cfg.seed, chain);
    let mut sampler = ctx.sampler()?;
    let mut local: Vec<Box<dyn Collector>> = collectors.iter().map(|c| c.fresh()).collect();
    sampler.advance(cfg.burn_in, &mut rng);
    for i in 0..cfg.samples_per_chain() {
        let s = sampler.next(cfg.thinning, &mut rng)?;
        if cfg!(debug_assertions) || i % RELEASE_CHECK_EVERY == 0 {
            ctx.check_invariants(&s)?;
        }
        for c in local.iter_mut() {
            c.observe(&s, ctx)?;
        }
    }
    Ok(local)
}

/// Run `cfg.chains` independent chains in parallel and merge their collectors in chain order.
pub fn run_chains(cfg: &RunConfig, collectors: &[Box<dyn Collector>]) -> Result<RunResult> {
    let ctx = cfg.context()?;
    run_chains_in(&ctx, cfg, collectors)
}

/// As [`run_chains`] with a prepared context (which must match `cfg`).
pub fn run_chains_in(ctx: &SamplerContext, cfg: &RunConfig, collectors: &[Box<dyn Collector>]) -> Result<RunResult> {
    cfg.validate()?;
    check_requirements(ctx, collectors)?;
    let mut manifest = RunManifest::start(cfg.run_id(), cfg.seed, serde_json::to_value(cfg)?);
    let per_chain: Vec<Result<Vec<Box<dyn Collector>>>> = (0..cfg.chains as u64)
        .into_par_iter()
        .map(|c| run_chain(ctx, cfg, c, collectors))
        .collect();
    let mut merged: Vec<Box<dyn Collector>> = collectors.iter().map(|c| c.fresh()).collect();
    for r in per_chain {
        for (m, c) in merged.iter_mut().zip(r?) {
            m.merge(c)?;
        }
    }
    for c in &merged {
        manifest.results.insert(c.name(), c.summary());
    }
    manifest.finish();
    Ok(RunResult {
        manifest,
        collectors: merged,
    })
}
