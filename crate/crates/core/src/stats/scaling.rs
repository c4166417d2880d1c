use serde::{Deserialize, Serialize};

use super::fit::ExponentFit;
use super::series::{ratio_estimate, Estimate, ScalarSeries};
use super::source::{gather, gather_chains, McParams, SampleSource};
use crate::clusters::{circuit_exists, innermost_dual_reach, split_by_tau, Annulus, Components};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Bc, BondConfig, Domain};
use crate::report::{fmt_f64, Table};
use crate::sampler::{Construction, MasterSample, SamplerContext};

/// Derived seed for the `k`-th sub-run of an estimator (splitmix64 finaliser).
pub fn sub_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Series of the `k`-th component of vector observations.
pub(crate) fn component(obs: &[Vec<Vec<f64>>], k: usize) -> ScalarSeries {
    ScalarSeries::from_chains(obs.iter().map(|c| c.iter().map(|o| o[k]).collect()).collect())
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn center_vertex(d: &Domain) -> usize {
    let (cx, cy) = d.center();
    d.vertex_at(cx, cy).expect("the centre of a box is a vertex")
}

/// Labels of the components of `c` that meet the boundary of `d`.
pub(crate) fn boundary_labels(comps: &Components, d: &Domain) -> Vec<bool> {
    let mut hit = vec![false; comps.count];
    for v in 0..d.n_vertices() {
        if d.is_boundary(v) {
            hit[comps.label[v] as usize] = true;
        }
    }
    hit
}

fn omega_components(s: &MasterSample, d: &Domain) -> Components {
    Components::with(d.graph(), |e| s.omega.get(e))
}

/// One scale of the one-point function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePointRow {
    pub size: usize,
    /// `P(centre <-> boundary)` in `omega`.
    pub connection: Estimate,
    /// Mean of `sigma` at the centre.
    pub spin: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePointReport {
    pub j: f64,
    pub rows: Vec<OnePointRow>,
    pub fit: ExponentFit,
}

impl OnePointReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["L", "estimate", "stderr", "n_samples", "spin_mean", "spin_stderr"]);
        for r in &self.rows {
            t.push(vec![
                r.size.to_string(),
                fmt_f64(r.connection.mean),
                fmt_f64(r.connection.stderr),
                r.connection.n_samples.to_string(),
                fmt_f64(r.spin.mean),
                fmt_f64(r.spin.stderr),
            ]);
        }
        t
    }
}

/// Connection of the centre to the boundary and the centre spin, per sample.
pub fn one_point_observation(s: &MasterSample, d: &Domain) -> Vec<f64> {
    let comps = omega_components(s, d);
    let hit = boundary_labels(&comps, d);
    let c = center_vertex(d);
    vec![indicator(hit[comps.label[c] as usize]), s.sigma.get(c) as f64]
}

/// One-point function at the centre of `L x L` boxes with plus conditions, and its
/// power-law fit against `L`.
pub fn one_point_scaling(sizes: &[usize], j: f64, p: &McParams) -> Result<OnePointReport> {
    if sizes.len() < super::fit::MIN_SCALES {
        return invalid(format!("one-point scaling needs at least {} sizes", super::fit::MIN_SCALES));
    }
    let mut rows = Vec::new();
    for (k, &size) in sizes.iter().enumerate() {
        let ctx = SamplerContext::new(Domain::square(size, Bc::Plus)?, j, Construction::Direct)?;
        let obs = gather_chains(&ctx, &p.reseeded(sub_seed(p.seed, k as u64)), |s, d| Ok(one_point_observation(s, d)))?;
        rows.push(OnePointRow {
            size,
            connection: component(&obs, 0).estimate(),
            spin: component(&obs, 1).estimate(),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.size as f64, r.connection.mean)).collect();
    let fit = ExponentFit::fit(&pts)?;
    Ok(OnePointReport { j, rows, fit })
}

/// Pairs `(x, y)` at distance `r`, centred on the middle of the box, horizontal and
/// vertical, shifted over a 3 x 3 block.
pub fn bulk_pairs(d: &Domain, r: usize) -> Result<Vec<(usize, usize)>> {
    let (cx, cy) = d.center();
    let r = r as i32;
    let mut out = Vec::new();
    for sy in -1..=1 {
        for sx in -1..=1 {
            let (ax, ay) = (cx - r / 2 + sx, cy + sy);
            let (bx, by) = (cx + sy, cy - r / 2 + sx);
            let h = (d.vertex_at(ax, ay), d.vertex_at(ax + r, ay));
            let v = (d.vertex_at(bx, by), d.vertex_at(bx, by + r));
            match (h, v) {
                ((Some(a), Some(b)), (Some(c), Some(e))) => {
                    out.push((a, b));
                    out.push((c, e));
                }
                _ => return invalid(format!("separation {r} does not fit in the domain")),
            }
        }
    }
    Ok(out)
}

/// Fraction of the given pairs joined in `omega`; with plus conditions the boundary is
/// one cluster through the forced edges.
pub fn pair_connection(s: &MasterSample, d: &Domain, pairs: &[Vec<(usize, usize)>]) -> Vec<f64> {
    let comps = omega_components(s, d);
    pairs
        .iter()
        .map(|ps| ps.iter().filter(|&&(a, b)| comps.connected(a, b)).count() as f64 / ps.len() as f64)
        .collect()
}

/// `E[sigma_x sigma_y]` at the given separations, as connection probabilities in `omega`.
pub fn two_point_function(size: usize, rs: &[usize], bc: Bc, j: f64, p: &McParams) -> Result<Vec<Estimate>> {
    let d = Domain::square(size, bc)?;
    let pairs = rs.iter().map(|&r| bulk_pairs(&d, r)).collect::<Result<Vec<_>>>()?;
    let ctx = SamplerContext::new(d, j, Construction::Direct)?;
    let obs = gather_chains(&ctx, p, |s, d| Ok(pair_connection(s, d, &pairs)))?;
    Ok((0..rs.len()).map(|k| component(&obs, k).estimate()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointRow {
    pub r: usize,
    /// Geometric mean of the plus and free estimates.
    pub combined: Estimate,
    pub plus: Estimate,
    pub free: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointReport {
    pub size: usize,
    pub rows: Vec<TwoPointRow>,
    pub fit: ExponentFit,
    pub fit_plus: ExponentFit,
    pub fit_free: ExponentFit,
}

impl TwoPointReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "r",
            "estimate",
            "stderr",
            "n_samples",
            "plus_estimate",
            "plus_stderr",
            "free_estimate",
            "free_stderr",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.r.to_string(),
                fmt_f64(r.combined.mean),
                fmt_f64(r.combined.stderr),
                (r.plus.n_samples + r.free.n_samples).to_string(),
                fmt_f64(r.plus.mean),
                fmt_f64(r.plus.stderr),
                fmt_f64(r.free.mean),
                fmt_f64(r.free.stderr),
            ]);
        }
        t
    }
}

/// Geometric mean of two positive estimates with a first-order error.
pub fn geometric_mean(a: &Estimate, b: &Estimate) -> Estimate {
    let m = (a.mean * b.mean).sqrt();
    let rel = (a.stderr / a.mean).hypot(b.stderr / b.mean) / 2.0;
    Estimate {
        mean: m,
        stderr: m * rel,
        n_samples: a.n_samples + b.n_samples,
    }
}

/// Bulk two-point function at the centre of an `L x L` box and its power-law fit.
///
/// Plus and free boundary conditions bias the bulk correlation in opposite directions
/// at first order in `r / L`; the fitted quantity is the geometric mean of the two.
pub fn two_point_scaling(size: usize, rs: &[usize], j: f64, p: &McParams) -> Result<TwoPointReport> {
    if rs.len() < super::fit::MIN_SCALES {
        return invalid(format!("two-point scaling needs at least {} separations", super::fit::MIN_SCALES));
    }
    if rs.contains(&0) {
        return invalid("separations must be positive for a fit");
    }
    let plus = two_point_function(size, rs, Bc::Plus, j, &p.reseeded(sub_seed(p.seed, 0)))?;
    let free = two_point_function(size, rs, Bc::Free, j, &p.reseeded(sub_seed(p.seed, 1)))?;
    let rows: Vec<TwoPointRow> = rs
        .iter()
        .zip(plus.iter().zip(&free))
        .map(|(&r, (a, b))| TwoPointRow {
            r,
            combined: geometric_mean(a, b),
            plus: *a,
            free: *b,
        })
        .collect();
    let fit_of = |f: &dyn Fn(&TwoPointRow) -> f64| {
        ExponentFit::fit(&rows.iter().map(|r| (r.r as f64, f(r))).collect::<Vec<_>>())
    };
    Ok(TwoPointReport {
        size,
        fit: fit_of(&|r| r.combined.mean)?,
        fit_plus: fit_of(&|r| r.plus.mean)?,
        fit_free: fit_of(&|r| r.free.mean)?,
        rows,
    })
}

/// Inner radii for an arm-exponent fit at outer radius `outer`.
fn check_ladder(outer: usize, ns: &[usize]) -> Result<()> {
    if ns.len() < super::fit::MIN_SCALES {
        return invalid(format!("the ladder needs at least {} inner radii", super::fit::MIN_SCALES));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return invalid("inner radii must be positive and increasing");
    }
    if ns.iter().any(|&n| 4 * n > outer) {
        return invalid("every inner radius must satisfy N / n >= 4");
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmRow {
    pub n: usize,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub outer: usize,
    pub bc: Bc,
    pub rows: Vec<ArmRow>,
    pub fit: ExponentFit,
}

impl ArmReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "N", "estimate", "stderr", "n_samples"]);
        for r in &self.rows {
            t.push(vec![
                r.n.to_string(),
                self.outer.to_string(),
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
                r.estimate.n_samples.to_string(),
            ]);
        }
        t
    }
}

/// Which configuration a circuit event is evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitSource {
    Omega,
    OmegaPlus,
    OmegaMinus,
}

impl std::str::FromStr for CircuitSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(CircuitSource::Omega),
            "omega_plus" => Ok(CircuitSource::OmegaPlus),
            "omega_minus" => Ok(CircuitSource::OmegaMinus),
            _ => invalid(format!("unknown circuit source '{s}'")),
        }
    }
}

impl std::fmt::Display for CircuitSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CircuitSource::Omega => "omega",
            CircuitSource::OmegaPlus => "omega_plus",
            CircuitSource::OmegaMinus => "omega_minus",
        })
    }
}

fn circuit_config(s: &MasterSample, d: &Domain, which: CircuitSource) -> Result<BondConfig> {
    Ok(match which {
        CircuitSource::Omega => s.omega.clone(),
        CircuitSource::OmegaPlus => split_by_tau(&s.omega, &s.tau, d.graph())?.0,
        CircuitSource::OmegaMinus => split_by_tau(&s.omega, &s.tau, d.graph())?.1,
    })
}

/// `P(no circuit of the chosen configuration in A(n, N))` for every `n` in `ns`, with
/// the annulus centred in the domain.
pub fn no_circuit_probabilities<S: SampleSource>(
    sources: &mut [(S, usize)],
    which: CircuitSource,
    outer: usize,
    ns: &[usize],
) -> Result<Vec<Estimate>> {
    if ns.iter().any(|&n| n == 0 || n > outer) {
        return invalid("inner radii must lie in [1, N]");
    }
    let obs = gather(sources, |s, d| {
        let c = circuit_config(s, d, which)?;
        let reach = innermost_dual_reach(&c, d, d.center(), outer as i32)?;
        Ok(ns.iter().map(|&n| indicator(reach < n as i32)).collect::<Vec<f64>>())
    })?;
    Ok((0..ns.len()).map(|k| component(&obs, k).estimate()).collect())
}

/// Arm-exponent fit of `P(no circuit in A(n, N))` over the ladder `ns`, with the chain
/// run on the centred box `L_{N + margin}`.
pub fn arm_exponent(
    which: CircuitSource,
    outer: usize,
    ns: &[usize],
    bc: Bc,
    margin: usize,
    j: f64,
    p: &McParams,
) -> Result<ArmReport> {
    check_ladder(outer, ns)?;
    let d = Domain::centered_box(outer + margin, bc)?;
    let ctx = SamplerContext::new(d, j, Construction::Direct)?;
    let mut sources = super::source::chain_sources(&ctx, p)?;
    let est = no_circuit_probabilities(&mut sources, which, outer, ns)?;
    let rows: Vec<ArmRow> = ns.iter().zip(est).map(|(&n, estimate)| ArmRow { n, estimate }).collect();
    let fit = ExponentFit::fit(&rows.iter().map(|r| (r.n as f64, r.estimate.mean)).collect::<Vec<_>>())?;
    Ok(ArmReport { outer, bc, rows, fit })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrcRow {
    pub n: usize,
    /// Geometric mean of the plus and free estimates.
    pub combined: Estimate,
    pub plus: Estimate,
    pub free: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrcReport {
    pub outer: usize,
    pub margin: usize,
    pub rows: Vec<DrcRow>,
    pub fit: ExponentFit,
    pub fit_plus: ExponentFit,
    pub fit_free: ExponentFit,
}

impl DrcReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "n",
            "N",
            "estimate",
            "stderr",
            "n_samples",
            "plus_estimate",
            "plus_stderr",
            "free_estimate",
            "free_stderr",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.n.to_string(),
                self.outer.to_string(),
                fmt_f64(r.combined.mean),
                fmt_f64(r.combined.stderr),
                (r.plus.n_samples + r.free.n_samples).to_string(),
                fmt_f64(r.plus.mean),
                fmt_f64(r.plus.stderr),
                fmt_f64(r.free.mean),
                fmt_f64(r.free.stderr),
            ]);
        }
        t
    }
}

/// One-arm exponent of the double random current through `P(omega ∉ A(n, N))`, on the
/// centred box `L_{N + margin}`.
///
/// Plus conditions favour circuits near `L_N` and free conditions suppress them; the
/// fitted quantity is the geometric mean of the two estimates.
pub fn drc_one_arm(outer: usize, ns: &[usize], margin: usize, j: f64, p: &McParams) -> Result<DrcReport> {
    let plus = arm_exponent(CircuitSource::Omega, outer, ns, Bc::Plus, margin, j, &p.reseeded(sub_seed(p.seed, 0)))?;
    let free = arm_exponent(CircuitSource::Omega, outer, ns, Bc::Free, margin, j, &p.reseeded(sub_seed(p.seed, 1)))?;
    let rows: Vec<DrcRow> = plus
        .rows
        .iter()
        .zip(&free.rows)
        .map(|(a, b)| DrcRow {
            n: a.n,
            combined: geometric_mean(&a.estimate, &b.estimate),
            plus: a.estimate,
            free: b.estimate,
        })
        .collect();
    let fit = ExponentFit::fit(&rows.iter().map(|r| (r.n as f64, r.combined.mean)).collect::<Vec<_>>())?;
    Ok(DrcReport {
        outer,
        margin,
        rows,
        fit,
        fit_plus: plus.fit,
        fit_free: free.fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitRow {
    pub source: CircuitSource,
    pub n: usize,
    pub outer: usize,
    pub domain_radius: usize,
    pub estimate: Estimate,
}

/// Probability that the chosen configuration has a circuit in `A(n, N)`, centred in the domain.
pub fn circuit_probability_from<S: SampleSource>(
    sources: &mut [(S, usize)],
    which: CircuitSource,
    n: usize,
    outer: usize,
) -> Result<Estimate> {
    let obs = gather(sources, |s, d| {
        let c = circuit_config(s, d, which)?;
        let a = Annulus::new(d.center(), n as i32, outer as i32)?;
        Ok(indicator(circuit_exists(&c, d, &a)?))
    })?;
    let series = ScalarSeries::from_chains(obs);
    let mut e = series.estimate();
    let binomial = (e.mean * (1.0 - e.mean) / e.n_samples as f64).sqrt();
    if !e.stderr.is_finite() || e.stderr < binomial {
        e.stderr = binomial;
    }
    Ok(e)
}

/// `P(circuit in A(n, ratio * n))` on the centred box `L_{domain_factor * n}` with plus conditions.
pub fn circuit_probability(
    which: CircuitSource,
    n: usize,
    ratio: usize,
    domain_factor: usize,
    j: f64,
    p: &McParams,
) -> Result<CircuitRow> {
    let outer = ratio * n;
    if domain_factor < ratio {
        return invalid("the annulus does not fit in the domain");
    }
    let d = Domain::centered_box(domain_factor * n, Bc::Plus)?;
    let ctx = SamplerContext::new(d, j, Construction::Direct)?;
    let mut sources = super::source::chain_sources(&ctx, p)?;
    let estimate = circuit_probability_from(&mut sources, which, n, outer)?;
    Ok(CircuitRow {
        source: which,
        n,
        outer,
        domain_radius: domain_factor * n,
        estimate,
    })
}

pub fn circuit_table(rows: &[CircuitRow]) -> Table {
    let mut t = Table::new(&["source", "n", "N", "domain_radius", "estimate", "stderr", "n_samples"]);
    for r in rows {
        t.push(vec![
            r.source.to_string(),
            r.n.to_string(),
            r.outer.to_string(),
            r.domain_radius.to_string(),
            fmt_f64(r.estimate.mean),
            fmt_f64(r.estimate.stderr),
            r.estimate.n_samples.to_string(),
        ]);
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub n: usize,
    pub m: usize,
    pub estimate: Estimate,
    pub acceptance_rate: f64,
    pub n_accepted: usize,
}

impl BetaEstimate {
    pub fn table(rows: &[BetaEstimate]) -> Table {
        let mut t = Table::new(&["n", "m", "estimate", "stderr", "acceptance_rate", "n_samples", "n_accepted"]);
        for r in rows {
            t.push(vec![
                r.n.to_string(),
                r.m.to_string(),
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
                fmt_f64(r.acceptance_rate),
                r.estimate.n_samples.to_string(),
                r.n_accepted.to_string(),
            ]);
        }
        t
    }
}

/// `(accepted, n^{1/8 - 2} |C_0 ∩ L_n| when accepted)` for one sample on `L_m`, where
/// `C_0` is the union of the clusters meeting the boundary.
pub fn beta_observation(s: &MasterSample, d: &Domain, n: usize) -> Vec<f64> {
    let comps = omega_components(s, d);
    let hit = boundary_labels(&comps, d);
    let count = (0..d.n_vertices())
        .filter(|&v| d.sup_radius(v) < n as i32 && hit[comps.label[v] as usize])
        .count();
    let acc = count > 0;
    vec![indicator(acc), (n as f64).powf(1.0 / 8.0 - 2.0) * count as f64]
}

pub fn beta_from<S: SampleSource>(sources: &mut [(S, usize)], n: usize, m: usize) -> Result<BetaEstimate> {
    if n == 0 || n > m {
        return invalid("beta needs 1 <= n <= m");
    }
    let obs = gather(sources, |s, d| Ok(beta_observation(s, d, n)))?;
    let acc = component(&obs, 0);
    let val = component(&obs, 1);
    let n_accepted = acc.values().filter(|&x| x > 0.0).count();
    if n_accepted == 0 {
        return Err(Error::InsufficientData(format!("no sample with L_{n} joined to the boundary")));
    }
    Ok(BetaEstimate {
        n,
        m,
        estimate: ratio_estimate(&val, &acc),
        acceptance_rate: acc.mean(),
        n_accepted,
    })
}

/// Rejection estimate of `n^{1/8-2} E[|C_0 ∩ L_n| | L_n <-> ∂L_m]` with plus conditions on `L_m`.
pub fn beta_estimate(n: usize, m: usize, j: f64, p: &McParams) -> Result<BetaEstimate> {
    let d = Domain::centered_box(m, Bc::Plus)?;
    let ctx = SamplerContext::new(d, j, Construction::Direct)?;
    let mut sources = super::source::chain_sources(&ctx, p)?;
    beta_from(&mut sources, n, m)
}

/// `beta` rescaled to boxes of side `s`: `E[|C ∩ A| | A meets C] ≈ box_beta * s^{2-1/8}`
/// when `beta` is normalised by the half-side `n` of `L_n`.
pub fn box_beta(beta: f64) -> f64 {
    beta * 2f64.powf(-(2.0 - 1.0 / 8.0))
}
