use std::collections::HashMap;

use super::law::FiniteLaw;
use super::small::{product_table, submasks, sum_table, Small, MAX_EDGES};
use crate::clusters::CoinMode;
use crate::error::{Error, Result};
use crate::lattice::{BondConfig, Couplings, CurrentTrace, Graph, GraphTag, SpinConfig};

/// Largest edge count for laws on edge configurations (dense tables of size `2^|E|`).
pub(crate) const MAX_BOND_EDGES: usize = 16;
/// Largest support size built by the current enumerations.
const MAX_SUPPORT: usize = 1 << 22;

fn prepare(g: &Graph, k: &Couplings, max_edges: usize) -> Result<Small> {
    k.check_len(g.n_edges())?;
    Small::new(g, max_edges)
}

/// Unnormalised weights of the spin pairs, indexed through the disagreement masks.
struct PairWeights {
    /// (minus-mask, disagreement edges, exp(sum J sigma sigma)) for every admissible sigma.
    spins: Vec<(u64, u64, f64)>,
    /// exp(sum U tau tau) as a function of the disagreement mask of tau.
    four_spin: Option<Vec<f64>>,
}

impl PairWeights {
    fn new(s: &Small, k: &Couplings) -> Self {
        let tj = sum_table(&k.j);
        let jtot = tj[s.full_edges() as usize];
        let spins = s
            .spin_masks()
            .map(|m| {
                let d = s.disagree(m);
                (m, d, (jtot - 2.0 * tj[d as usize]).exp())
            })
            .collect();
        let four_spin = k.has_four_spin().then(|| {
            let tu = sum_table(&k.u);
            let utot = tu[s.full_edges() as usize];
            tu.iter().map(|&x| (utot - 2.0 * x).exp()).collect()
        });
        PairWeights { spins, four_spin }
    }

    fn pair(&self, a: &(u64, u64, f64), b: &(u64, u64, f64)) -> f64 {
        let w = a.2 * b.2;
        match &self.four_spin {
            Some(t) => w * t[(a.1 ^ b.1) as usize],
            None => w,
        }
    }
}

pub(crate) fn spin_law_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<u64>> {
    let s = prepare(g, k, MAX_EDGES)?;
    let pw = PairWeights::new(&s, k);
    if pw.four_spin.is_none() {
        return FiniteLaw::from_weights(pw.spins.iter().map(|&(m, _, w)| (m, w)));
    }
    if s.free_vertices.len() > 12 {
        return Err(Error::ResourceLimit("four-spin marginal needs at most 12 free vertices".into()));
    }
    FiniteLaw::from_weights(
        pw.spins
            .iter()
            .map(|a| (a.0, pw.spins.iter().map(|b| pw.pair(a, b)).sum::<f64>())),
    )
}

/// Law of `sigma` in the model with couplings `k` on `g`, with spins fixed to +1 on the
/// plus set. With four-spin couplings this is the marginal of the first spin field.
pub fn ising_law(g: &Graph, k: &Couplings) -> Result<FiniteLaw<SpinConfig>> {
    let n = g.n_vertices();
    Ok(spin_law_masks(g, k)?.map(|&m| SpinConfig::from_mask(n, m)))
}

/// Law of the pair `(sigma, tilde sigma)` as minus-masks.
pub(crate) fn spin_pair_law_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<(u64, u64)>> {
    let s = prepare(g, k, MAX_EDGES)?;
    if s.free_vertices.len() > 12 {
        return Err(Error::ResourceLimit("pair enumeration needs at most 12 free vertices".into()));
    }
    let pw = PairWeights::new(&s, k);
    let mut items = Vec::with_capacity(pw.spins.len() * pw.spins.len());
    for a in &pw.spins {
        for b in &pw.spins {
            items.push(((a.0, b.0), pw.pair(a, b)));
        }
    }
    FiniteLaw::from_weights(items)
}

/// Percolation parameters `1 - exp(-4J)`, with probability one on forced edges.
fn omega_edge_probs(g: &Graph, k: &Couplings) -> Vec<f64> {
    (0..g.n_edges())
        .map(|e| if g.is_wired(e) { 1.0 } else { 1.0 - (-4.0 * k.j[e]).exp() })
        .collect()
}

/// Spread weight `w` sitting on the admissible set `allowed` over its subsets, each edge
/// kept independently with probability `p[e]`.
fn spread(acc: &mut [f64], allowed: u64, w: f64, p_tab: &[f64], q_tab: &[f64]) {
    for sub in submasks(allowed) {
        let rest = allowed & !sub;
        let f = p_tab[sub as usize] * q_tab[rest as usize];
        if f > 0.0 {
            acc[sub as usize] += w * f;
        }
    }
}

pub(crate) fn omega_law_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<u64>> {
    let s = prepare(g, k, MAX_BOND_EDGES)?;
    if s.free_vertices.len() > 12 {
        return Err(Error::ResourceLimit("pair enumeration needs at most 12 free vertices".into()));
    }
    let pw = PairWeights::new(&s, k);
    let full = s.full_edges();
    let mut agree = vec![0.0; 1 << s.m];
    for a in &pw.spins {
        for b in &pw.spins {
            agree[(full & !a.1 & !b.1) as usize] += pw.pair(a, b);
        }
    }
    let p = omega_edge_probs(g, k);
    let p_tab = product_table(&p);
    let q_tab = product_table(&p.iter().map(|x| 1.0 - x).collect::<Vec<_>>());
    let mut acc = vec![0.0; 1 << s.m];
    for (mask, &w) in agree.iter().enumerate() {
        if w > 0.0 {
            spread(&mut acc, mask as u64, w, &p_tab, &q_tab);
        }
    }
    FiniteLaw::from_weights(acc.into_iter().enumerate().map(|(m, w)| (m as u64, w)))
}

/// Exact law of the percolation `omega` together with a flag raised when the couplings
/// leave the regime `cosh(2J) >= exp(-2U)`.
#[derive(Clone, Debug)]
pub struct OmegaLaw {
    pub law: FiniteLaw<BondConfig>,
    pub outside_at_regime: bool,
}

/// Law of `omega = xi(sigma) ∩ xi(tilde sigma) ∩ eta` by enumeration of the spin pairs.
pub fn omega_law(g: &Graph, k: &Couplings) -> Result<OmegaLaw> {
    let m = g.n_edges();
    let law = omega_law_masks(g, k)?.map(|&x| BondConfig::from_mask(GraphTag::Primal, m, x));
    Ok(OmegaLaw {
        law,
        outside_at_regime: !k.in_at_regime(),
    })
}

pub(crate) fn coin_toss_pushforward_masks(
    law: &FiniteLaw<u64>,
    g: &Graph,
    mode: CoinMode,
) -> Result<FiniteLaw<u64>> {
    let s = Small::new(g, MAX_EDGES)?;
    let plus = mode == CoinMode::Plus && s.plus != 0;
    let mut items = Vec::new();
    for (&w, p) in law.iter() {
        let outs = s.coin_outcomes(w, plus);
        let share = p / outs.len() as f64;
        items.extend(outs.into_iter().map(|x| (x, share)));
    }
    FiniteLaw::from_weights(items)
}

/// Law of the spins obtained by tossing one fair coin per cluster.
pub fn coin_toss_pushforward(
    law: &FiniteLaw<BondConfig>,
    g: &Graph,
    mode: CoinMode,
) -> Result<FiniteLaw<SpinConfig>> {
    if law.support().iter().any(|c| c.len() != g.n_edges() || c.len() > 64) {
        return Err(Error::InvalidArgument("configurations do not match the graph".into()));
    }
    let masks = law.map(|c| c.to_mask());
    let n = g.n_vertices();
    Ok(coin_toss_pushforward_masks(&masks, g, mode)?.map(|&m| SpinConfig::from_mask(n, m)))
}

fn trace_key_to_value(m: usize, tag: GraphTag, key: &(u64, u64)) -> CurrentTrace {
    CurrentTrace {
        odd: BondConfig::from_mask(tag, m, key.0),
        even: BondConfig::from_mask(tag, m, key.1),
    }
}

/// Law of (odd part, even positive part) of a single sourceless current with weights
/// `J^n / n!`; sources are allowed on the plus set.
pub(crate) fn current_trace_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<(u64, u64)>> {
    let s = prepare(g, k, MAX_EDGES)?;
    let odd_w: Vec<f64> = k.j.iter().map(|j| j.sinh()).collect();
    let even_w: Vec<f64> = k.j.iter().map(|j| j.cosh() - 1.0).collect();
    let odd_tab = product_table(&odd_w);
    let even_tab = product_table(&even_w);
    let full = s.full_edges();
    let odds = s.valid_odd_sets();
    let size: usize = odds.iter().map(|&o| 1usize << (s.m - o.count_ones() as usize)).sum();
    if size > MAX_SUPPORT {
        return Err(Error::ResourceLimit(format!("current support of size {size} is too large")));
    }
    let mut items = Vec::with_capacity(size);
    for &o in &odds {
        let wo = odd_tab[o as usize];
        for ev in submasks(full & !o) {
            items.push(((o, ev), wo * even_tab[ev as usize]));
        }
    }
    FiniteLaw::from_weights(items)
}

pub fn current_trace_law(g: &Graph, k: &Couplings) -> Result<FiniteLaw<CurrentTrace>> {
    let m = g.n_edges();
    Ok(current_trace_masks(g, k)?.map(|key| trace_key_to_value(m, GraphTag::Primal, key)))
}

/// Trace of the sum of two independent sourceless currents.
pub(crate) fn drc_trace_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<(u64, u64)>> {
    let s = prepare(g, k, MAX_EDGES)?;
    let sh: Vec<f64> = k.j.iter().map(|j| j.sinh()).collect();
    let ch: Vec<f64> = k.j.iter().map(|j| j.cosh()).collect();
    let full = s.full_edges();
    let odds = s.valid_odd_sets();
    // exactly one current odd: the other one is zero or even, total weight sinh * cosh;
    // both odd: sinh^2; neither odd: zero (1) or positive ((cosh - 1)^2 + 2 (cosh - 1))
    let one_odd = product_table(&sh.iter().zip(&ch).map(|(a, b)| a * b).collect::<Vec<_>>());
    let both_odd = product_table(&sh.iter().map(|a| a * a).collect::<Vec<_>>());
    let neither = product_table(&ch.iter().map(|c| (c - 1.0) * (c - 1.0) + 2.0 * (c - 1.0)).collect::<Vec<_>>());
    let mut by_key: HashMap<(u64, u64), f64> = HashMap::new();
    for &a in &odds {
        for &b in &odds {
            let (x, i) = (a ^ b, a & b);
            *by_key.entry((x, i)).or_insert(0.0) += one_odd[x as usize] * both_odd[i as usize];
        }
    }
    let work: usize = by_key
        .keys()
        .map(|&(x, i)| 1usize << (s.m - (x | i).count_ones() as usize))
        .sum();
    if work > MAX_SUPPORT * 8 {
        return Err(Error::ResourceLimit(format!("double current enumeration of size {work} is too large")));
    }
    let mut keys: Vec<_> = by_key.into_iter().collect();
    keys.sort_by_key(|a| a.0);
    let mut acc: HashMap<(u64, u64), f64> = HashMap::new();
    for ((x, i), w) in keys {
        for f in submasks(full & !(x | i)) {
            *acc.entry((x, i | f)).or_insert(0.0) += w * neither[f as usize];
        }
    }
    let mut items: Vec<_> = acc.into_iter().collect();
    items.sort_by_key(|a| a.0);
    FiniteLaw::from_weights(items)
}

/// Law of the trace of the sum of two independent sourceless currents.
pub fn drc_trace_law(g: &Graph, k: &Couplings) -> Result<FiniteLaw<CurrentTrace>> {
    let m = g.n_edges();
    Ok(drc_trace_masks(g, k)?.map(|key| trace_key_to_value(m, GraphTag::Primal, key)))
}

/// Law of the current `P(n) ∝ 2^{k(n)} x^{|n_odd|} y^{|n_even|}` with
/// `x = exp(2U) sinh(2J)` and `y = exp(2U) cosh(2J) - 1`; clusters meeting the plus set
/// count once.
pub(crate) fn at_current_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<(u64, u64)>> {
    let s = prepare(g, k, MAX_EDGES)?;
    let x: Vec<f64> = k.j.iter().zip(&k.u).map(|(j, u)| (2.0 * u).exp() * (2.0 * j).sinh()).collect();
    let y: Vec<f64> = k
        .j
        .iter()
        .zip(&k.u)
        .map(|(j, u)| (2.0 * u).exp() * (2.0 * j).cosh() - 1.0)
        .collect();
    if y.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("negative even weight outside the AT regime".into()));
    }
    let x_tab = product_table(&x);
    let y_tab = product_table(&y);
    let full = s.full_edges();
    let odds = s.valid_odd_sets();
    let size: usize = odds.iter().map(|&o| 1usize << (s.m - o.count_ones() as usize)).sum();
    if size > MAX_SUPPORT {
        return Err(Error::ResourceLimit(format!("current support of size {size} is too large")));
    }
    let mut items = Vec::with_capacity(size);
    for &o in &odds {
        for ev in submasks(full & !o) {
            let kc = s.wired_cluster_count(o | ev) as i32;
            items.push(((o, ev), 2f64.powi(kc) * x_tab[o as usize] * y_tab[ev as usize]));
        }
    }
    FiniteLaw::from_weights(items)
}

pub fn at_current_law(g: &Graph, k: &Couplings) -> Result<FiniteLaw<CurrentTrace>> {
    let m = g.n_edges();
    Ok(at_current_masks(g, k)?.map(|key| trace_key_to_value(m, GraphTag::Primal, key)))
}

/// Law of `omega` built from the double random current: `tau` is a coin toss on the
/// trace clusters (plus-pinned when the graph has plus vertices), then every edge of
/// `xi(tau)` outside the trace is added with probability `1 - exp(-2J)` (always on
/// forced edges).
pub(crate) fn omega_via_current_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<u64>> {
    let s = prepare(g, k, MAX_BOND_EDGES)?;
    let trace = drc_trace_masks(g, k)?.map(|&(o, e)| o | e);
    let p: Vec<f64> = (0..s.m)
        .map(|e| if g.is_wired(e) { 1.0 } else { 1.0 - (-2.0 * k.j[e]).exp() })
        .collect();
    let p_tab = product_table(&p);
    let q_tab = product_table(&p.iter().map(|x| 1.0 - x).collect::<Vec<_>>());
    let full = s.full_edges();
    let mut acc = vec![0.0; 1 << s.m];
    for (&t, q) in trace.iter() {
        let taus = s.coin_outcomes(t, s.plus != 0);
        let share = q / taus.len() as f64;
        for tau in taus {
            let xi = full & !s.disagree(tau);
            let free = xi & !t;
            for sub in submasks(free) {
                let f = p_tab[sub as usize] * q_tab[(free & !sub) as usize];
                if f > 0.0 {
                    acc[(t | sub) as usize] += share * f;
                }
            }
        }
    }
    FiniteLaw::from_weights(acc.into_iter().enumerate().map(|(m, w)| (m as u64, w)))
}

/// Joint law of `(tau, omega)` from the density
/// `exp(-sum J tau tau + sum U tau tau) 2^{k(omega)} prod_omega p prod_{not omega} (1 - p)`
/// restricted to `omega ⊆ xi(tau)`.
pub(crate) fn tau_omega_masks(g: &Graph, k: &Couplings) -> Result<FiniteLaw<(u64, u64)>> {
    let s = prepare(g, k, MAX_BOND_EDGES)?;
    let tj = sum_table(&k.j);
    let tu = sum_table(&k.u);
    let full = s.full_edges();
    let (jtot, utot) = (tj[full as usize], tu[full as usize]);
    let p = omega_edge_probs(g, k);
    let p_tab = product_table(&p);
    let q_tab = product_table(&p.iter().map(|x| 1.0 - x).collect::<Vec<_>>());
    let mut items = Vec::new();
    for tau in s.spin_masks() {
        let d = s.disagree(tau);
        let base = (-(jtot - 2.0 * tj[d as usize]) + (utot - 2.0 * tu[d as usize])).exp();
        let xi = full & !d;
        for w in submasks(xi) {
            let f = p_tab[w as usize] * q_tab[(full & !w) as usize];
            if f == 0.0 {
                continue;
            }
            let kc = s.wired_cluster_count(w) as i32;
            items.push(((tau, w), base * f * 2f64.powi(kc)));
        }
    }
    FiniteLaw::from_weights(items)
}
