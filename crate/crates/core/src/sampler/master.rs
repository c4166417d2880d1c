use std::collections::VecDeque;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::fk::{bernoulli, threshold, FkIsingChain};
use crate::clusters::{coin_toss, CoinMode, Components};
use crate::error::{invalid, Error, Result};
use crate::lattice::{
    dual_structure, kramers_wannier, Bc, BondConfig, CurrentTrace, Domain, DualStructure, Graph, GraphTag,
    SpinConfig,
};

/// How `omega` is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    /// Two independent Ising samples and an independent percolation.
    Direct,
    /// Double random current, coin tosses and sprinkling; also yields the dual objects and the height.
    Current,
}

impl std::str::FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Construction::Direct),
            "current" => Ok(Construction::Current),
            _ => invalid(format!("unknown construction '{s}'")),
        }
    }
}

impl std::fmt::Display for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Construction::Direct => "direct",
            Construction::Current => "current",
        })
    }
}

/// Height function, stored as twice its value: even on primal vertices, odd on bounded faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightField {
    pub twice_primal: Vec<i32>,
    pub twice_dual: Vec<i32>,
}

impl HeightField {
    pub fn primal(&self, v: usize) -> f64 {
        self.twice_primal[v] as f64 / 2.0
    }

    pub fn dual(&self, f: usize) -> f64 {
        self.twice_dual[f] as f64 / 2.0
    }
}

/// One draw of the coupled objects on a domain.
///
/// Dual objects live on the weak dual under plus conditions and on the strong dual
/// under free conditions; the height exists only for the current construction with
/// plus conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct MasterSample {
    pub sigma: SpinConfig,
    pub sigma_tilde: SpinConfig,
    pub tau: SpinConfig,
    pub eta: Option<BondConfig>,
    pub omega: BondConfig,
    pub trace: Option<CurrentTrace>,
    pub tau_dagger: Option<SpinConfig>,
    pub omega_dagger: Option<BondConfig>,
    pub sigma_dagger: Option<SpinConfig>,
    pub height: Option<HeightField>,
}

/// Immutable data shared by all chains of a run.
#[derive(Clone, Debug)]
pub struct SamplerContext {
    domain: Domain,
    dual: DualStructure,
    construction: Construction,
    j: Vec<f64>,
    // percolation on top of the spins: 1 - exp(-4J) (direct) or 1 - exp(-2J) (current)
    eta_thresh: Vec<u64>,
    // current construction only
    dual_tag: GraphTag,
    j_dual: Vec<f64>,
    dual_of_primal: Vec<Option<u32>>,
    loop_odd_thresh: Vec<u64>,
    even_thresh: Vec<u64>,
    diamond_of_vertex: Vec<Vec<u32>>,
    diamond_of_face: Vec<Vec<u32>>,
}

impl SamplerContext {
    /// Uniform coupling `j` on every edge of `d`.
    pub fn new(d: Domain, j: f64, construction: Construction) -> Result<Self> {
        let m = d.n_edges();
        Self::with_couplings(d, vec![j; m], construction)
    }

    pub fn with_couplings(d: Domain, j: Vec<f64>, construction: Construction) -> Result<Self> {
        super::fk::check_couplings(d.graph(), &j)?;
        let g = d.graph();
        let dual = dual_structure(&d);
        let factor = match construction {
            Construction::Direct => 4.0,
            Construction::Current => 2.0,
        };
        let eta_thresh = (0..g.n_edges())
            .map(|e| if g.is_wired(e) { u64::MAX } else { threshold(1.0 - (-factor * j[e]).exp()) })
            .collect();
        let mut ctx = SamplerContext {
            dual_tag: match d.bc() {
                Bc::Plus => GraphTag::WeakDual,
                Bc::Free => GraphTag::StrongDual,
            },
            domain: d.clone(),
            dual,
            construction,
            j,
            eta_thresh,
            j_dual: Vec::new(),
            dual_of_primal: Vec::new(),
            loop_odd_thresh: Vec::new(),
            even_thresh: Vec::new(),
            diamond_of_vertex: Vec::new(),
            diamond_of_face: Vec::new(),
        };
        if construction == Construction::Current {
            if ctx.j.iter().any(|&x| x <= 0.0) {
                return invalid("the current construction needs positive couplings");
            }
            let m = ctx.j.len();
            ctx.dual_of_primal = match d.bc() {
                Bc::Plus => ctx.dual.weak_of_primal.clone(),
                Bc::Free => ctx.dual.edge_pairing.iter().map(|&e| Some(e)).collect(),
            };
            let dual_graph = ctx.dual_graph();
            let mut j_dual = vec![0.0; dual_graph.n_edges()];
            for e in 0..m {
                if let Some(k) = ctx.dual_of_primal[e] {
                    j_dual[k as usize] = kramers_wannier(ctx.j[e])?;
                }
            }
            ctx.j_dual = j_dual;
            ctx.loop_odd_thresh = ctx
                .j
                .iter()
                .map(|&x| {
                    let t = x.tanh();
                    threshold(t / (1.0 + t))
                })
                .collect();
            ctx.even_thresh = ctx.j.iter().map(|&x| threshold((x.cosh() - 1.0) / x.cosh())).collect();
            let (a, b) = ctx.dual.diamond_adjacency(d.n_vertices());
            ctx.diamond_of_vertex = a;
            ctx.diamond_of_face = b;
        }
        Ok(ctx)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dual(&self) -> &DualStructure {
        &self.dual
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    /// Graph carrying the dual objects: weak dual (plus) or strong dual (free).
    pub fn dual_graph(&self) -> &Graph {
        match self.dual_tag {
            GraphTag::WeakDual => &self.dual.weak,
            _ => &self.dual.strong,
        }
    }

    /// Dual edge crossing primal edge `e`, if it exists in the dual graph.
    pub fn dual_edge(&self, e: usize) -> Option<usize> {
        match self.domain.bc() {
            Bc::Plus => self.dual.weak_of_primal[e].map(|k| k as usize),
            Bc::Free => Some(self.dual.edge_pairing[e] as usize),
        }
    }

    pub fn sampler(&self) -> Result<MasterSampler<'_>> {
        MasterSampler::new(self)
    }

    /// Check every invariant of `s`.
    pub fn check_invariants(&self, s: &MasterSample) -> Result<()> {
        check_invariants(self, s)
    }
}

/// Markov chain producing master samples.
#[derive(Clone, Debug)]
pub struct MasterSampler<'c> {
    ctx: &'c SamplerContext,
    chains: [FkIsingChain<'c>; 2],
}

impl<'c> MasterSampler<'c> {
    pub fn new(ctx: &'c SamplerContext) -> Result<Self> {
        let chains = match ctx.construction {
            Construction::Direct => {
                let g = ctx.domain.graph();
                [FkIsingChain::new(g, &ctx.j)?, FkIsingChain::new(g, &ctx.j)?]
            }
            Construction::Current => {
                let g = ctx.dual_graph();
                [FkIsingChain::new(g, &ctx.j_dual)?, FkIsingChain::new(g, &ctx.j_dual)?]
            }
        };
        Ok(MasterSampler { ctx, chains })
    }

    pub fn context(&self) -> &'c SamplerContext {
        self.ctx
    }

    /// Advance both underlying Ising chains.
    pub fn advance<R: RngCore>(&mut self, sweeps: usize, rng: &mut R) {
        for _ in 0..sweeps {
            self.chains[0].sweep(rng);
            self.chains[1].sweep(rng);
        }
    }

    /// Advance `sweeps` and build a sample from the current chain states.
    pub fn next<R: RngCore>(&mut self, sweeps: usize, rng: &mut R) -> Result<MasterSample> {
        self.advance(sweeps, rng);
        match self.ctx.construction {
            Construction::Direct => Ok(self.direct(rng)),
            Construction::Current => self.current(rng),
        }
    }

    fn direct<R: RngCore>(&self, rng: &mut R) -> MasterSample {
        let g = self.ctx.domain.graph();
        let sigma = self.chains[0].spins().clone();
        let sigma_tilde = self.chains[1].spins().clone();
        let m = g.n_edges();
        let mut eta = BondConfig::empty(GraphTag::Primal, m);
        let mut omega = BondConfig::empty(GraphTag::Primal, m);
        let (a, b) = (sigma.as_slice(), sigma_tilde.as_slice());
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            let open = bernoulli(rng, self.ctx.eta_thresh[e]);
            eta.set(e, open);
            let (u, v) = (u as usize, v as usize);
            if open && a[u] == a[v] && b[u] == b[v] {
                omega.set(e, true);
            }
        }
        let tau = sigma.product(&sigma_tilde);
        MasterSample {
            sigma,
            sigma_tilde,
            tau,
            eta: Some(eta),
            omega,
            trace: None,
            tau_dagger: None,
            omega_dagger: None,
            sigma_dagger: None,
            height: None,
        }
    }

    /// Odd part of one current from the domain walls of a dual Ising chain, then the
    /// even sprinkling on the remaining edges.
    fn single_current<R: RngCore>(&self, chain: usize, rng: &mut R) -> (BondConfig, BondConfig) {
        let ctx = self.ctx;
        let m = ctx.j.len();
        let dual_g = ctx.dual_graph();
        let ds = self.chains[chain].spins().as_slice();
        let mut odd = BondConfig::empty(GraphTag::Primal, m);
        let mut support = BondConfig::empty(GraphTag::Primal, m);
        for e in 0..m {
            let is_odd = match ctx.dual_of_primal[e] {
                Some(k) => {
                    let (f, h) = dual_g.edge(k as usize);
                    ds[f] != ds[h]
                }
                // loops at the wired boundary vertex
                None => bernoulli(rng, ctx.loop_odd_thresh[e]),
            };
            if is_odd {
                odd.set(e, true);
                support.set(e, true);
            } else if bernoulli(rng, ctx.even_thresh[e]) {
                support.set(e, true);
            }
        }
        (odd, support)
    }

    fn current<R: RngCore>(&self, rng: &mut R) -> Result<MasterSample> {
        let ctx = self.ctx;
        let g = ctx.domain.graph();
        let m = g.n_edges();
        let mode = if g.has_plus() { CoinMode::Plus } else { CoinMode::Free };
        let (o1, s1) = self.single_current(0, rng);
        let (o2, s2) = self.single_current(1, rng);
        let mut odd = BondConfig::empty(GraphTag::Primal, m);
        let mut even = BondConfig::empty(GraphTag::Primal, m);
        let mut support = BondConfig::empty(GraphTag::Primal, m);
        for e in 0..m {
            let o = o1.get(e) != o2.get(e);
            let s = s1.get(e) || s2.get(e);
            odd.set(e, o);
            even.set(e, s && !o);
            support.set(e, s);
        }

        let trace_comps = Components::with(g, |e| support.get(e));
        let tau = coin_toss(&trace_comps, g, mode, rng);
        let mut omega = support.clone();
        let t = tau.as_slice();
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if !support.get(e) && t[u as usize] == t[v as usize] && bernoulli(rng, ctx.eta_thresh[e]) {
                omega.set(e, true);
            }
        }
        let omega_comps = Components::with(g, |e| omega.get(e));
        let sigma = coin_toss(&omega_comps, g, mode, rng);
        let sigma_tilde = sigma.product(&tau);

        let dual_g = ctx.dual_graph();
        let sign: i8 = if rng.next_u64() & 1 == 1 { -1 } else { 1 };
        let tau_dagger = SpinConfig::from_vec(
            self.chains[0]
                .spins()
                .as_slice()
                .iter()
                .zip(self.chains[1].spins().as_slice())
                .map(|(a, b)| a * b * sign)
                .collect(),
        )?;
        let mut omega_dagger = BondConfig::empty(ctx.dual_tag, dual_g.n_edges());
        for e in 0..m {
            if let Some(k) = ctx.dual_of_primal[e] {
                omega_dagger.set(k as usize, !support.get(e));
            }
        }
        let dual_comps = Components::with(dual_g, |k| omega_dagger.get(k));
        let sigma_dagger = coin_toss(&dual_comps, dual_g, CoinMode::Free, rng);
        let height = match ctx.domain.bc() {
            Bc::Plus => Some(integrate_height(ctx, &tau, &tau_dagger)?),
            Bc::Free => None,
        };
        Ok(MasterSample {
            sigma,
            sigma_tilde,
            tau,
            eta: None,
            omega,
            trace: Some(CurrentTrace { odd, even }),
            tau_dagger: Some(tau_dagger),
            omega_dagger: Some(omega_dagger),
            sigma_dagger: Some(sigma_dagger),
            height,
        })
    }
}

fn violation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvariantViolation(msg.into()))
}

/// Integrate `2H(f) - 2H(u) = tau_u tau†_f` over the diamond graph from `H = 0` on the
/// boundary, then check the rule on every diamond edge.
fn integrate_height(ctx: &SamplerContext, tau: &SpinConfig, tau_dagger: &SpinConfig) -> Result<HeightField> {
    const UNSET: i32 = i32::MIN;
    let d = &ctx.domain;
    let n = d.n_vertices();
    let nf = ctx.dual.n_bounded_faces();
    let mut hp = vec![UNSET; n];
    let mut hd = vec![UNSET; nf];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if d.is_boundary(v) {
            hp[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(x) = queue.pop_front() {
        if x < n {
            for &f in &ctx.diamond_of_vertex[x] {
                let f = f as usize;
                if hd[f] == UNSET {
                    hd[f] = hp[x] + (tau.get(x) * tau_dagger.get(f)) as i32;
                    queue.push_back(n + f);
                }
            }
        } else {
            let f = x - n;
            for &v in &ctx.diamond_of_face[f] {
                let v = v as usize;
                if hp[v] == UNSET {
                    hp[v] = hd[f] - (tau.get(v) * tau_dagger.get(f)) as i32;
                    queue.push_back(v);
                }
            }
        }
    }
    if hp.contains(&UNSET) || hd.contains(&UNSET) {
        return violation("diamond graph does not reach every vertex from the boundary");
    }
    for &[v, f] in &ctx.dual.diamond_edges {
        let (v, f) = (v as usize, f as usize);
        if hd[f] - hp[v] != (tau.get(v) * tau_dagger.get(f)) as i32 {
            return violation(format!("height is not closed at diamond edge ({v}, face {f})"));
        }
    }
    Ok(HeightField {
        twice_primal: hp,
        twice_dual: hd,
    })
}

fn constant_on(c: &BondConfig, g: &Graph, s: &SpinConfig) -> bool {
    c.open_edges().all(|e| {
        let (u, v) = g.edge(e);
        s.get(u) == s.get(v)
    })
}

fn check_invariants(ctx: &SamplerContext, s: &MasterSample) -> Result<()> {
    let d = &ctx.domain;
    let g = d.graph();
    let (n, m) = (g.n_vertices(), g.n_edges());
    if s.sigma.len() != n || s.sigma_tilde.len() != n || s.tau.len() != n || s.omega.len() != m {
        return invalid("sample does not match the domain");
    }
    if s.sigma.product(&s.sigma_tilde) != s.tau {
        return violation("tau differs from sigma * tilde sigma");
    }
    for (name, spins) in [("sigma", &s.sigma), ("tilde sigma", &s.sigma_tilde), ("tau", &s.tau)] {
        if !constant_on(&s.omega, g, spins) {
            return violation(format!("{name} is not constant on the clusters of omega"));
        }
    }
    if d.bc() == Bc::Plus {
        if (0..n).any(|v| g.is_plus(v) && (s.sigma.get(v) != 1 || s.sigma_tilde.get(v) != 1)) {
            return violation("spins on the plus set are not +1");
        }
        if (0..m).any(|e| g.is_wired(e) && !s.omega.get(e)) {
            return violation("a forced edge is closed in omega");
        }
    }
    if let Some(eta) = &s.eta {
        let a = &s.sigma;
        let b = &s.sigma_tilde;
        for e in 0..m {
            let (u, v) = g.edge(e);
            let want = eta.get(e) && a.get(u) == a.get(v) && b.get(u) == b.get(v);
            if want != s.omega.get(e) {
                return violation(format!("omega differs from xi(sigma) ∩ xi(tilde sigma) ∩ eta at edge {e}"));
            }
        }
    }
    let Some(trace) = &s.trace else {
        return Ok(());
    };
    let support = trace.support();
    if !support.is_subset(&s.omega) {
        return violation("the current trace is not contained in omega");
    }
    if trace.odd.intersection(&trace.even).count_open() != 0 {
        return violation("an edge is both odd and even");
    }
    let mut degree = vec![0u8; n];
    for e in trace.odd.open_edges() {
        let (u, v) = g.edge(e);
        degree[u] ^= 1;
        degree[v] ^= 1;
    }
    if (0..n).any(|v| degree[v] == 1 && !g.is_plus(v)) {
        return violation("the odd part has a source off the plus set");
    }
    let dual_g = ctx.dual_graph();
    if let Some(td) = &s.tau_dagger {
        if td.len() != dual_g.n_vertices() {
            return invalid("tau dagger does not match the dual graph");
        }
        for e in 0..m {
            let Some(k) = ctx.dual_edge(e) else { continue };
            let (f, h) = dual_g.edge(k);
            let dual_wall = td.get(f) != td.get(h);
            if dual_wall != trace.odd.get(e) {
                return violation(format!("boundary of tau dagger differs from the odd part at edge {e}"));
            }
            let (u, v) = g.edge(e);
            if dual_wall && s.tau.get(u) != s.tau.get(v) {
                return violation(format!("tau and tau dagger both jump across edge {e}"));
            }
        }
    }
    if let Some(od) = &s.omega_dagger {
        for e in 0..m {
            let Some(k) = ctx.dual_edge(e) else { continue };
            if od.get(k) == support.get(e) {
                return violation(format!("omega dagger is not the dual complement of the trace at edge {e}"));
            }
            if !od.get(k) && !s.omega.get(e) {
                return violation(format!("edge {e} is closed in omega and in omega dagger"));
            }
        }
        if let Some(sd) = &s.sigma_dagger {
            if !constant_on(od, dual_g, sd) {
                return violation("sigma dagger is not constant on the clusters of omega dagger");
            }
        }
    }
    if let (Some(h), Some(td)) = (&s.height, &s.tau_dagger) {
        if (0..n).any(|v| d.is_boundary(v) && h.twice_primal[v] != 0) {
            return violation("height is not zero on the boundary");
        }
        for &[v, f] in &ctx.dual.diamond_edges {
            let (v, f) = (v as usize, f as usize);
            if h.twice_dual[f] - h.twice_primal[v] != (s.tau.get(v) * td.get(f)) as i32 {
                return violation(format!("height rule fails at diamond edge ({v}, face {f})"));
            }
        }
        for v in 0..n {
            let hv = h.twice_primal[v];
            if hv % 2 != 0 || parity_sign(hv / 2) != s.tau.get(v) {
                return violation(format!("parity of the height fails at vertex {v}"));
            }
        }
        for f in 0..h.twice_dual.len() {
            let hf = h.twice_dual[f];
            if hf % 2 == 0 || parity_sign((hf - 1) / 2) != td.get(f) {
                return violation(format!("parity of the height fails at face {f}"));
            }
        }
    }
    Ok(())
}

fn parity_sign(k: i32) -> i8 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}
