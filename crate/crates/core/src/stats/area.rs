use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::scaling::{component, sub_seed};
use super::series::{Estimate, ScalarSeries};
use super::source::{gather, gather_chains, McParams, SampleSource};
use crate::clusters::{decompose_components, Components};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Bc, BondConfig, Domain, SpinConfig};
use crate::report::{fmt_f64, Table};
use crate::sampler::{Construction, SamplerContext};

/// Exponent of the area normalisation `delta^{2 - 1/8}`.
pub const AREA_EXPONENT: f64 = 2.0 - 1.0 / 8.0;

/// Mesh `delta = 1 / L` of a domain rescaled to fit the unit square.
pub fn mesh(d: &Domain) -> f64 {
    let (w, h) = d.dims();
    1.0 / w.max(h) as f64
}

/// Position of vertex `v` in the unit square: site `i` sits at `(i + 1/2) delta`.
pub fn unit_position(d: &Domain, v: usize) -> (f64, f64) {
    let delta = mesh(d);
    let (x0, y0) = d.origin();
    let (x, y) = d.coords(v);
    ((x - x0) as f64 * delta + delta / 2.0, (y - y0) as f64 * delta + delta / 2.0)
}

/// Index of the dyadic box of side `2^{-j}` containing `v`, as `row * 2^j + col`.
pub fn dyadic_box(d: &Domain, v: usize, j: u32) -> u64 {
    let (px, py) = unit_position(d, v);
    let n = 1u64 << j;
    let clamp = |p: f64| ((p * n as f64).floor() as u64).min(n - 1);
    clamp(py) * n + clamp(px)
}

/// Dyadic level `j` with `epsilon = 2^{-j}`.
pub fn dyadic_level(epsilon: f64) -> Result<u32> {
    let j = -epsilon.log2();
    if !(epsilon > 0.0 && epsilon <= 1.0) || (j - j.round()).abs() > 1e-12 || j > 30.0 {
        return invalid(format!("epsilon {epsilon} is not a dyadic scale 2^-j"));
    }
    Ok(j.round() as u32)
}

/// Renormalised counting measure of one cluster at one dyadic scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaMeasure {
    pub cluster_rank: usize,
    pub epsilon: f64,
    pub total_mass: f64,
    /// Mass per dyadic box, keyed by [`dyadic_box`].
    pub box_masses: BTreeMap<u64, f64>,
}

/// Clusters of `omega` ranked for area measures: rank 0 is the union of the clusters
/// meeting the boundary, ranks `1..` are the remaining clusters by non-increasing diameter.
pub fn ranked_clusters(omega: &BondConfig, d: &Domain) -> Result<Vec<Vec<u32>>> {
    let comps = Components::of(d.graph(), omega)?;
    let dec = decompose_components(comps, d);
    let mut out = vec![Vec::new()];
    for c in &dec.clusters {
        if c.touches_boundary {
            out[0].extend_from_slice(&c.vertices);
        } else {
            out.push(c.vertices.clone());
        }
    }
    out[0].sort_unstable();
    Ok(out)
}

/// Area measures of the clusters of rank `0..=k_max` at every scale in `epsilons`.
pub fn area_measures(omega: &BondConfig, d: &Domain, k_max: usize, epsilons: &[f64]) -> Result<Vec<AreaMeasure>> {
    let levels = epsilons.iter().map(|&e| dyadic_level(e)).collect::<Result<Vec<_>>>()?;
    let ranked = ranked_clusters(omega, d)?;
    let unit = mesh(d).powf(AREA_EXPONENT);
    let mut out = Vec::new();
    for (k, verts) in ranked.iter().enumerate().take(k_max + 1) {
        for (&epsilon, &j) in epsilons.iter().zip(&levels) {
            let mut box_masses = BTreeMap::new();
            for &v in verts {
                *box_masses.entry(dyadic_box(d, v as usize, j)).or_insert(0.0) += unit;
            }
            out.push(AreaMeasure {
                cluster_rank: k,
                epsilon,
                total_mass: unit * verts.len() as f64,
                box_masses,
            });
        }
    }
    Ok(out)
}

/// Test functions on the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Constant(f64),
    /// Smooth bump `exp(1 - 1 / (1 - (r / radius)^2))` with peak 1.
    Bump { center: (f64, f64), radius: f64 },
    /// Indicator of the square of half-side `half_width` centred at `(1/2, 1/2)`.
    SubBox { half_width: f64 },
}

impl TestFunction {
    pub fn eval(&self, (x, y): (f64, f64)) -> f64 {
        match *self {
            TestFunction::Constant(c) => c,
            TestFunction::Bump { center, radius } => {
                let r2 = ((x - center.0).powi(2) + (y - center.1).powi(2)) / (radius * radius);
                if r2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            }
            TestFunction::SubBox { half_width } => {
                if (x - 0.5).abs() <= half_width && (y - 0.5).abs() <= half_width {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Values at every vertex of `d`.
    pub fn on(&self, d: &Domain) -> Vec<f64> {
        (0..d.n_vertices()).map(|v| self.eval(unit_position(d, v))).collect()
    }
}

/// Parses `const[:c]`, `bump[:x,y,r]` and `box[:h]`; the defaults are `1`, a bump of
/// radius `1/4` at the centre and the sub-box of half-side `1/4`.
impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number '{a}'"))))
                .collect::<Result<Vec<_>>>()?
        };
        let f = match (kind, nums.as_slice()) {
            ("const", []) => TestFunction::Constant(1.0),
            ("const", &[c]) => TestFunction::Constant(c),
            ("bump", []) => TestFunction::Bump {
                center: (0.5, 0.5),
                radius: 0.25,
            },
            ("bump", &[x, y, r]) if r > 0.0 => TestFunction::Bump { center: (x, y), radius: r },
            ("box", []) => TestFunction::SubBox { half_width: 0.25 },
            ("box", &[h]) if h > 0.0 => TestFunction::SubBox { half_width: h },
            _ => return invalid(format!("unknown test function '{s}'")),
        };
        Ok(f)
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "const:{c}"),
            TestFunction::Bump { center, radius } => write!(f, "bump:{},{},{radius}", center.0, center.1),
            TestFunction::SubBox { half_width } => write!(f, "box:{half_width}"),
        }
    }
}

/// Per-scale data of the box-counting approximation.
struct ScaleTable {
    weight: f64,
    box_of: Vec<u64>,
    /// Average of `f` over the vertices of each box.
    f_avg: BTreeMap<u64, f64>,
}

impl ScaleTable {
    fn new(d: &Domain, fv: &[f64], epsilon: f64, beta: f64) -> Result<Self> {
        let level = dyadic_level(epsilon)?;
        let box_of: Vec<u64> = (0..d.n_vertices()).map(|v| dyadic_box(d, v, level)).collect();
        let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        for (v, &b) in box_of.iter().enumerate() {
            let e = sums.entry(b).or_insert((0.0, 0));
            e.0 += fv[v];
            e.1 += 1;
        }
        Ok(ScaleTable {
            weight: beta * epsilon.powf(AREA_EXPONENT),
            box_of,
            f_avg: sums.into_iter().map(|(b, (s, n))| (b, s / n as f64)).collect(),
        })
    }

    fn approximation(&self, verts: &[u32]) -> f64 {
        let mut hit: Vec<u64> = verts.iter().map(|&v| self.box_of[v as usize]).collect();
        hit.sort_unstable();
        hit.dedup();
        self.weight * hit.iter().map(|b| self.f_avg[b]).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub epsilon: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub cluster_rank: usize,
    pub function: TestFunction,
    pub beta: f64,
    pub rows: Vec<DiscrepancyRow>,
}

impl DiscrepancyReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["epsilon", "estimate", "stderr", "n_samples", "beta", "cluster_rank", "f"]);
        for r in &self.rows {
            t.push(vec![
                fmt_f64(r.epsilon),
                fmt_f64(r.estimate.mean),
                fmt_f64(r.estimate.stderr),
                r.estimate.n_samples.to_string(),
                fmt_f64(self.beta),
                self.cluster_rank.to_string(),
                self.function.to_string(),
            ]);
        }
        t
    }
}

/// Empirical mean-square discrepancy `E[(mu[f] - beta eps^{2-1/8} sum_A f_A 1(A ∩ C_k))^2]` between the area measure of the rank-`k` cluster
/// and its box-counting approximation, per scale. `beta` is the coefficient of
/// `epsilon^{2-1/8}` per box met.
pub fn l2_discrepancy<S: SampleSource>(
    sources: &mut [(S, usize)],
    k: usize,
    f: TestFunction,
    epsilons: &[f64],
    beta: Option<f64>,
) -> Result<DiscrepancyReport> {
    let beta = beta.ok_or_else(|| Error::InvalidArgument("the discrepancy needs a beta estimate".into()))?;
    if !beta.is_finite() {
        return invalid("beta must be finite");
    }
    if epsilons.is_empty() {
        return invalid("no scales requested");
    }
    let Some((src, _)) = sources.first() else {
        return invalid("no sample sources");
    };
    let d = src.domain().clone();
    let fv = f.on(&d);
    let tables = epsilons
        .iter()
        .map(|&e| ScaleTable::new(&d, &fv, e, beta))
        .collect::<Result<Vec<_>>>()?;
    let unit = mesh(&d).powf(AREA_EXPONENT);
    let obs = gather(sources, |s, d| {
        let ranked = ranked_clusters(&s.omega, d)?;
        let verts: &[u32] = ranked.get(k).map(Vec::as_slice).unwrap_or(&[]);
        let mu = unit * verts.iter().map(|&v| fv[v as usize]).sum::<f64>();
        Ok(tables
            .iter()
            .map(|t| {
                let diff = mu - t.approximation(verts);
                diff * diff
            })
            .collect::<Vec<f64>>())
    })?;
    let rows = epsilons
        .iter()
        .enumerate()
        .map(|(i, &epsilon)| DiscrepancyRow {
            epsilon,
            estimate: component(&obs, i).estimate(),
        })
        .collect();
    Ok(DiscrepancyReport {
        cluster_rank: k,
        function: f,
        beta,
        rows,
    })
}

/// `Phi_delta[f] = delta^{2-1/8} sum_v sigma_v f(v)` evaluated directly and as
/// `sum_C xi_C mu_C[f]` over the clusters of `omega`, with `xi_C` the common spin of `C`.
/// The two must agree to `1e-12`.
pub fn magnetisation_field(sigma: &SpinConfig, omega: &BondConfig, d: &Domain, fv: &[f64]) -> Result<f64> {
    let unit = mesh(d).powf(AREA_EXPONENT);
    let direct = unit * (0..d.n_vertices()).map(|v| sigma.get(v) as f64 * fv[v]).sum::<f64>();
    let comps = Components::of(d.graph(), omega)?;
    let mut mass = vec![0.0; comps.count];
    let mut sign = vec![0i8; comps.count];
    for v in 0..d.n_vertices() {
        let l = comps.label[v] as usize;
        mass[l] += unit * fv[v];
        if sign[l] == 0 {
            sign[l] = sigma.get(v);
        } else if sign[l] != sigma.get(v) {
            return Err(Error::InvariantViolation(format!("sigma is not constant on the cluster of {v}")));
        }
    }
    let via_clusters: f64 = mass.iter().zip(&sign).map(|(m, &s)| s as f64 * m).sum();
    let scale = unit * fv.iter().map(|x| x.abs()).sum::<f64>();
    if (direct - via_clusters).abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "magnetisation field mismatch: {direct} directly, {via_clusters} via clusters"
        )));
    }
    Ok(direct)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentRow {
    pub size: usize,
    pub estimate: Estimate,
}

/// `E[Phi_delta[f]^2]` on `L x L` boxes with the given boundary condition.
pub fn magnetisation_second_moment(
    sizes: &[usize],
    f: TestFunction,
    bc: Bc,
    j: f64,
    p: &McParams,
) -> Result<Vec<SecondMomentRow>> {
    let mut rows = Vec::new();
    for (k, &size) in sizes.iter().enumerate() {
        let ctx = SamplerContext::new(Domain::square(size, bc)?, j, Construction::Direct)?;
        let fv = f.on(ctx.domain());
        let obs = gather_chains(&ctx, &p.reseeded(sub_seed(p.seed, k as u64)), |s, d| {
            let phi = magnetisation_field(&s.sigma, &s.omega, d, &fv)?;
            Ok(phi * phi)
        })?;
        rows.push(SecondMomentRow {
            size,
            estimate: ScalarSeries::from_chains(obs).estimate(),
        });
    }
    Ok(rows)
}

pub fn second_moment_table(rows: &[SecondMomentRow]) -> Table {
    let mut t = Table::new(&["L", "estimate", "stderr", "n_samples"]);
    for r in rows {
        t.push(vec![
            r.size.to_string(),
            fmt_f64(r.estimate.mean),
            fmt_f64(r.estimate.stderr),
            r.estimate.n_samples.to_string(),
        ]);
    }
    t
}
