use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::enumerate::*;
use super::law::FiniteLaw;
use super::maxflow::domination_flow;
use super::small::{product_table, submasks, Small, MAX_EDGES};
use crate::clusters::CoinMode;
use crate::error::{invalid, Error, Result};
use crate::lattice::{dual_structure, kramers_wannier, Bc, Couplings, Domain, Graph};

/// Outcome of one exact check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub graph: String,
    pub params: BTreeMap<String, f64>,
    pub metric: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CheckReport {
    fn new(name: &str, graph: &str, params: &[(&str, f64)], metric: f64, tolerance: f64) -> Self {
        CheckReport {
            check_name: name.into(),
            graph: graph.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            metric,
            tolerance,
            pass: metric.is_finite() && metric < tolerance,
            warnings: Vec::new(),
        }
    }

    fn at_least(name: &str, graph: &str, params: &[(&str, f64)], metric: f64, floor: f64) -> Self {
        let mut r = Self::new(name, graph, params, metric, floor);
        r.pass = metric.is_finite() && metric >= floor;
        r
    }
}

/// Tolerance on total variation distances between exactly enumerated laws.
pub const TV_TOLERANCE: f64 = 1e-10;

fn uniform_params(k: &Couplings) -> Vec<(&'static str, f64)> {
    let mut p = vec![("J", k.j.first().copied().unwrap_or(0.0))];
    if k.has_four_spin() {
        p.push(("U", k.u[0]));
    }
    p
}

fn coin_mode(g: &Graph) -> CoinMode {
    if g.has_plus() {
        CoinMode::Plus
    } else {
        CoinMode::Free
    }
}

/// Spins obtained by coin tosses on `omega` have the law of `sigma`.
pub fn verify_edwards_sokal(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    let omega = omega_law_masks(g, k)?;
    let pushed = coin_toss_pushforward_masks(&omega, g, coin_mode(g))?;
    let spins = spin_law_masks(g, k)?;
    let mut r = CheckReport::new("edwards_sokal", label, &uniform_params(k), pushed.total_variation(&spins), TV_TOLERANCE);
    if !k.in_at_regime() {
        r.warnings.push("couplings outside cosh(2J) >= exp(-2U)".into());
    }
    Ok(r)
}

/// Two-point and one-point functions equal connection probabilities in `omega`.
pub fn verify_correlation_identity(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    let omega = omega_law_masks(g, k)?;
    let spins = spin_law_masks(g, k)?;
    let s = Small::new(g, MAX_EDGES)?;
    let n = g.n_vertices();
    let mut worst = 0f64;
    let comps: Vec<(Vec<usize>, f64)> = omega.iter().map(|(&w, p)| (s.components(w, false).0, p)).collect();
    let plus_hit = |label: &Vec<usize>, x: usize| (0..n).any(|v| g.is_plus(v) && label[v] == label[x]);
    for x in 0..n {
        for y in x + 1..n {
            let corr = spins.expectation(|&m| if (m >> x ^ m >> y) & 1 == 1 { -1.0 } else { 1.0 });
            let conn: f64 = comps
                .iter()
                .filter(|(l, _)| l[x] == l[y] || (g.has_plus() && plus_hit(l, x) && plus_hit(l, y)))
                .map(|(_, p)| p)
                .sum();
            worst = worst.max((corr - conn).abs());
        }
        if g.has_plus() {
            let mean = spins.expectation(|&m| if m >> x & 1 == 1 { -1.0 } else { 1.0 });
            let conn: f64 = comps.iter().filter(|(l, _)| plus_hit(l, x)).map(|(_, p)| p).sum();
            worst = worst.max((mean - conn).abs());
        }
    }
    Ok(CheckReport::new("correlation_identity", label, &uniform_params(k), worst, TV_TOLERANCE))
}

/// `omega` under plus (free) conditions equals the dual complement of the double random
/// current trace on the weak (strong) dual at the Kramers-Wannier dual couplings.
pub fn verify_duality(d: &Domain, k: &Couplings, label: &str) -> Result<CheckReport> {
    if k.has_four_spin() {
        return invalid("duality check is for the Ising case U = 0");
    }
    k.check_len(d.n_edges())?;
    let s = dual_structure(d);
    let m = d.n_edges();
    let omega = omega_law_masks(d.graph(), k)?;
    let pushed = match d.bc() {
        Bc::Plus => {
            let jd = s
                .primal_of_weak
                .iter()
                .map(|&e| kramers_wannier(k.j[e as usize]))
                .collect::<Result<Vec<_>>>()?;
            let kd = Couplings::new(jd.clone(), vec![0.0; jd.len()])?;
            let trace = drc_trace_masks(&s.weak, &kd)?;
            trace.map(|&(o, e)| {
                let t = o | e;
                let mut w = (1u64 << m) - 1;
                for (kk, &pe) in s.primal_of_weak.iter().enumerate() {
                    if t >> kk & 1 == 1 {
                        w &= !(1 << pe);
                    }
                }
                w
            })
        }
        Bc::Free => {
            let jd = (0..m).map(|e| kramers_wannier(k.j[e])).collect::<Result<Vec<_>>>()?;
            let kd = Couplings::new(jd, vec![0.0; m])?;
            let trace = drc_trace_masks(&s.strong, &kd)?;
            trace.map(|&(o, e)| {
                let t = o | e;
                let mut w = (1u64 << m) - 1;
                for (pe, &de) in s.edge_pairing.iter().enumerate() {
                    if t >> de & 1 == 1 {
                        w &= !(1 << pe);
                    }
                }
                w
            })
        }
    };
    Ok(CheckReport::new("duality", label, &uniform_params(k), omega.total_variation(&pushed), TV_TOLERANCE))
}

/// The double random current trace has the law `2^k x^|odd| y^|even|`.
pub fn verify_trace_identity(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    if k.has_four_spin() {
        return invalid("trace identity is for U = 0");
    }
    let a = drc_trace_masks(g, k)?;
    let b = at_current_masks(g, k)?;
    Ok(CheckReport::new("drc_trace_identity", label, &uniform_params(k), a.total_variation(&b), TV_TOLERANCE))
}

/// `omega` built from the double random current has the same law as the direct construction.
pub fn verify_current_construction(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    if k.has_four_spin() {
        return invalid("current construction is for U = 0");
    }
    let a = omega_via_current_masks(g, k)?;
    let b = omega_law_masks(g, k)?;
    Ok(CheckReport::new("current_construction", label, &uniform_params(k), a.total_variation(&b), TV_TOLERANCE))
}

/// At `J = U` on the self-dual line, `omega` is the critical FK(4) model.
pub fn verify_fk4_point(g: &Graph, label: &str) -> Result<CheckReport> {
    let j = 3f64.ln() / 4.0;
    let k = Couplings::uniform_at(g.n_edges(), j, j)?;
    let a = omega_law_masks(g, &k)?;
    let s = Small::new(g, MAX_EDGES)?;
    let fk = FiniteLaw::from_weights((0..=s.full_edges()).filter(|&w| w & s.wired == s.wired).map(|w| {
        let kc = s.wired_cluster_count(w) as i32;
        (w, 4f64.powi(kc) * 2f64.powi((w & !s.wired).count_ones() as i32))
    }))?;
    Ok(CheckReport::new("fk4_self_dual_point", label, &[("J", j), ("U", j)], a.total_variation(&fk), TV_TOLERANCE))
}

/// Every parity class of even sub-multigraphs has `2^{sum (n_e - 1)}` elements.
pub fn verify_switching_count(g: &Graph, values: &[u32], label: &str) -> Result<CheckReport> {
    if values.len() != g.n_edges() {
        return invalid("one value per edge is required");
    }
    let total: u32 = values.iter().sum();
    if total > 24 {
        return Err(Error::ResourceLimit("at most 24 edge copies".into()));
    }
    let s = Small::new(g, MAX_EDGES)?;
    let mut copy_edge = Vec::new();
    for (e, &n) in values.iter().enumerate() {
        copy_edge.extend(std::iter::repeat(e).take(n as usize));
    }
    let mut classes: BTreeMap<u64, u64> = BTreeMap::new();
    for sub in 0u64..1 << copy_edge.len() {
        let mut odd = 0u64;
        for (c, &e) in copy_edge.iter().enumerate() {
            if sub >> c & 1 == 1 {
                odd ^= 1 << e;
            }
        }
        if s.odd_vertices(odd) == 0 {
            *classes.entry(odd).or_insert(0) += 1;
        }
    }
    let support = values.iter().enumerate().filter(|(_, &n)| n > 0).fold(0u64, |m, (e, _)| m | 1 << e);
    let expected_classes: Vec<u64> = submasks(support).filter(|&o| s.odd_vertices(o) == 0).collect();
    let expected_size = 1u64 << values.iter().filter(|&&n| n > 0).map(|&n| n - 1).sum::<u32>();
    let mut bad = (classes.len() as i64 - expected_classes.len() as i64).unsigned_abs() as f64;
    for o in expected_classes {
        let got = classes.get(&o).copied().unwrap_or(0);
        bad += (got as f64 - expected_size as f64).abs();
    }
    let mut r = CheckReport::new("switching_count", label, &[], bad, 0.5);
    r.params.insert("multiplicity".into(), expected_size as f64);
    Ok(r)
}

fn tau_marginal(g: &Graph, k: &Couplings) -> Result<FiniteLaw<u64>> {
    Ok(spin_pair_law_masks(g, k)?.map(|&(a, b)| a ^ b))
}

/// Smallest value of `nu(t v t') nu(t ^ t') - nu(t) nu(t')` over all pairs, for the law of `tau`.
pub fn verify_fkg_lattice(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    let nu = tau_marginal(g, k)?;
    let s = Small::new(g, MAX_EDGES)?;
    let table: std::collections::HashMap<u64, f64> = nu.iter().map(|(&t, p)| (t, p)).collect();
    let get = |t: u64| table.get(&t).copied().unwrap_or(0.0);
    let taus: Vec<u64> = s.spin_masks().collect();
    let mut worst = f64::INFINITY;
    for &a in &taus {
        for &b in &taus {
            // bit set = minus, so the maximum keeps minus only where both are minus
            let slack = get(a & b) * get(a | b) - get(a) * get(b);
            worst = worst.min(slack);
        }
    }
    let mut r = CheckReport::at_least("fkg_lattice_tau", label, &uniform_params(k), worst, -1e-12);
    r.tolerance = 1e-12;
    if !k.in_at_regime() {
        r.warnings.push("couplings outside cosh(2J) >= exp(-2U); the condition is not expected".into());
    }
    Ok(r)
}

/// Smallest FKG lattice slack `nu(w v w') nu(w ^ w') - nu(w) nu(w')` for the law of
/// `omega`. Whether `omega` is positively associated is open, so this is data: the
/// report always passes and a negative slack is noted as a warning.
pub fn omega_fkg_data(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    let nu = omega_law_masks(g, k)?;
    let table: std::collections::HashMap<u64, f64> = nu.iter().map(|(&w, p)| (w, p)).collect();
    let get = |w: u64| table.get(&w).copied().unwrap_or(0.0);
    let support: Vec<u64> = table.keys().copied().collect();
    let mut worst = f64::INFINITY;
    for &a in &support {
        for &b in &support {
            worst = worst.min(get(a | b) * get(a & b) - get(a) * get(b));
        }
    }
    let mut r = CheckReport::new("fkg_lattice_omega_data", label, &uniform_params(k), worst, f64::INFINITY);
    r.pass = true;
    if worst < -1e-12 {
        r.warnings.push(format!("omega violates the FKG lattice condition (slack {worst:e})"));
    }
    Ok(r)
}

struct TauFormula<'a> {
    s: &'a Small,
    k: &'a Couplings,
    spins: Vec<u64>,
}

impl TauFormula<'_> {
    /// `Z(x) = sum over plus-pinned sigma of prod_{disagreeing edges} x_e`.
    fn z(&self, x: &[f64]) -> f64 {
        let tab = product_table(x);
        self.spins.iter().map(|&sg| tab[self.s.disagree(sg) as usize]).sum()
    }

    /// Unnormalised `mu^eta(tau)` for `eta ⊆ h`; with `h = 0` this is the marginal of `tau`.
    fn weight(&self, tau: u64, h: u64, eta: u64, g: &Graph) -> f64 {
        let s = self.s;
        let mut pinned = s.plus;
        for e in 0..s.m {
            if eta >> e & 1 == 1 {
                let (u, v) = s.ends[e];
                pinned |= 1 << u | 1 << v;
            }
        }
        if tau & pinned != 0 {
            return 0.0;
        }
        let d = s.disagree(tau);
        let mut y = 1.0;
        let mut xp = vec![1.0; s.m];
        let mut xm = vec![1.0; s.m];
        for e in 0..s.m {
            let x = if g.is_wired(e) { 0.0 } else { (-4.0 * self.k.j[e]).exp() };
            if d >> e & 1 == 1 {
                y *= (-2.0 * (self.k.j[e] + self.k.u[e])).exp();
                continue;
            }
            let (u, _) = s.ends[e];
            if tau >> u & 1 == 0 {
                xp[e] = x;
            } else {
                xm[e] = x;
            }
        }
        for e in 0..s.m {
            if h >> e & 1 == 1 {
                xp[e] = if eta >> e & 1 == 1 { 0.0 } else { 1.0 };
            }
        }
        y * self.z(&xp) * self.z(&xm)
    }
}

/// The law of `tau` equals `y(tau) Z(x+) Z(x-)` up to normalisation.
pub fn verify_tau_marginal_formula(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    let s = Small::new(g, MAX_EDGES)?;
    let f = TauFormula { s: &s, k, spins: s.spin_masks().collect() };
    let formula = FiniteLaw::from_weights(f.spins.iter().map(|&t| (t, f.weight(t, 0, 0, g))))?;
    let nu = tau_marginal(g, k)?;
    Ok(CheckReport::new("tau_marginal_formula", label, &uniform_params(k), nu.total_variation(&formula), TV_TOLERANCE))
}

/// Generalised lattice condition `mu^eta(t v t') mu^eta'(t ^ t') >= mu^eta(t) mu^eta'(t')`
/// for `eta >= eta'` on each edge set `H` of `hs` (all subsets of `E` when `None`).
pub fn verify_fkg_conditional(g: &Graph, k: &Couplings, hs: Option<Vec<u64>>, label: &str) -> Result<CheckReport> {
    let s = Small::new(g, 10)?;
    if s.n > 8 {
        return Err(Error::ResourceLimit("conditional lattice check needs at most 8 vertices".into()));
    }
    let hs = hs.unwrap_or_else(|| (0..=s.full_edges()).collect());
    let f = TauFormula { s: &s, k, spins: s.spin_masks().collect() };
    let all_tau: Vec<u64> = (0u64..1 << s.n).collect();
    let mut worst = f64::INFINITY;
    for h in hs {
        let etas: Vec<u64> = submasks(h).collect();
        let mu: std::collections::HashMap<u64, Vec<f64>> = etas
            .iter()
            .map(|&eta| (eta, all_tau.iter().map(|&t| f.weight(t, h, eta, g)).collect()))
            .collect();
        // normalise each auxiliary measure so the slack is on the probability scale
        let mu: std::collections::HashMap<u64, Vec<f64>> = mu
            .into_iter()
            .map(|(eta, w)| {
                let z: f64 = w.iter().sum();
                (eta, w.into_iter().map(|x| if z > 0.0 { x / z } else { 0.0 }).collect())
            })
            .collect();
        for &eta in &etas {
            for eta2 in submasks(eta) {
                let (a, b) = (&mu[&eta], &mu[&eta2]);
                for &t in &all_tau {
                    if a[t as usize] == 0.0 {
                        continue;
                    }
                    for &t2 in &all_tau {
                        let slack = a[(t & t2) as usize] * b[(t | t2) as usize] - a[t as usize] * b[t2 as usize];
                        worst = worst.min(slack);
                    }
                }
            }
        }
    }
    let mut r = CheckReport::at_least("fkg_lattice_conditional", label, &uniform_params(k), worst, -1e-12);
    r.tolerance = 1e-12;
    Ok(r)
}

/// Increasing events used by the correlation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Connected(usize, usize),
    ConnectedToBoundary(usize),
    EdgeOpen(usize),
}

impl Event {
    fn holds(&self, s: &Small, w: u64) -> bool {
        match *self {
            Event::Connected(a, b) => s.connected_in(w, a, b),
            Event::ConnectedToBoundary(a) => s.connected_to_plus(w, a),
            Event::EdgeOpen(e) => w >> e & 1 == 1,
        }
    }
}

fn split_law(g: &Graph, k: &Couplings) -> Result<(Small, FiniteLaw<(u64, u64, u64)>)> {
    let s = Small::new(g, MAX_EDGES)?;
    let joint = tau_omega_masks(g, k)?;
    let law = joint.map(|&(tau, w)| {
        let mut plus = 0u64;
        for e in 0..s.m {
            if w >> e & 1 == 1 && tau >> s.ends[e].0 & 1 == 0 {
                plus |= 1 << e;
            }
        }
        (w, plus, w & !plus)
    });
    Ok((s, law))
}

/// For `A` increasing and primitive and `B` the complement of an increasing event:
/// `P(A ∩ B) <= 2 P(omega- in B) P(A)` and `P(omega+ in A) <= P(A) <= 2 P(omega+ in A)`.
/// The metric is the largest violation over the given pairs.
pub fn verify_anticorrelation(g: &Graph, k: &Couplings, pairs: &[(Event, Event)], label: &str) -> Result<CheckReport> {
    let (s, law) = split_law(g, k)?;
    let mut worst = f64::NEG_INFINITY;
    for &(a, b_up) in pairs {
        let p_ab = law.probability(|&(w, _, _)| a.holds(&s, w) && !b_up.holds(&s, w));
        let p_a = law.probability(|&(w, _, _)| a.holds(&s, w));
        let p_bm = law.probability(|&(_, _, wm)| !b_up.holds(&s, wm));
        let p_ap = law.probability(|&(_, wp, _)| a.holds(&s, wp));
        worst = worst.max(p_ab - 2.0 * p_bm * p_a).max(p_ap - p_a).max(p_a - 2.0 * p_ap);
    }
    let mut r = CheckReport::new("anticorrelation", label, &uniform_params(k), worst, 1e-12);
    r.pass = worst <= 1e-12;
    Ok(r)
}

/// `omega+` stochastically dominates `omega-`; the metric is the deficit of the best coupling.
pub fn verify_stochastic_domination(g: &Graph, k: &Couplings, label: &str) -> Result<CheckReport> {
    if g.n_edges() > 10 {
        return Err(Error::ResourceLimit("domination check needs at most 10 edges".into()));
    }
    let (_, law) = split_law(g, k)?;
    let up: Vec<(u64, f64)> = law.map(|&(_, p, _)| p).iter().map(|(&x, p)| (x, p)).collect();
    let down: Vec<(u64, f64)> = law.map(|&(_, _, m)| m).iter().map(|(&x, p)| (x, p)).collect();
    let flow = domination_flow(&up, &down);
    Ok(CheckReport::new("stochastic_domination", label, &uniform_params(k), 1.0 - flow, 1e-9))
}
