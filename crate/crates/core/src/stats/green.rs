use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::area::{mesh, TestFunction};
use super::series::{Estimate, ScalarSeries};
use super::source::{chain_sources, gather, McParams, SampleSource};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Bc, Domain};
use crate::report::{fmt_f64, Table};
use crate::sampler::{Construction, SamplerContext};

/// Largest interior size for which [`GreenFunction::dense`] builds the full matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Relative residual at which conjugate gradients stops.
const CG_TOLERANCE: f64 = 1e-13;

/// Sine basis of one side of a box, `phi_k(i) = sqrt(2 / (n + 1)) sin(pi k (i + 1) / (n + 1))`.
#[derive(Clone, Debug)]
struct SineBasis {
    n: usize,
    phi: Vec<f64>,
    cos: Vec<f64>,
}

impl SineBasis {
    fn new(n: usize) -> Self {
        let m = (n + 1) as f64;
        let norm = (2.0 / m).sqrt();
        let mut phi = vec![0.0; n * n];
        for k in 0..n {
            for i in 0..n {
                phi[k * n + i] = norm * (PI * (k + 1) as f64 * (i + 1) as f64 / m).sin();
            }
        }
        let cos = (0..n).map(|k| (PI * (k + 1) as f64 / m).cos()).collect();
        SineBasis { n, phi, cos }
    }

    fn at(&self, k: usize, i: usize) -> f64 {
        self.phi[k * self.n + i]
    }
}

#[derive(Clone, Debug)]
enum Solver {
    /// Interior of a box, diagonalised by sine modes.
    Spectral { x: SineBasis, y: SineBasis },
    ConjugateGradient,
}

/// Green function of simple random walk killed on the boundary of a domain: `G(x, y)` is
/// the expected number of visits to `y` starting from `x` before hitting the boundary,
/// i.e. `4 (4I - A)^{-1}` on interior vertices and zero elsewhere.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    domain: Domain,
    /// Interior index of every vertex.
    interior: Vec<Option<usize>>,
    vertices: Vec<usize>,
    /// Interior neighbours of every interior vertex.
    neighbours: Vec<Vec<usize>>,
    solver: Solver,
}

impl GreenFunction {
    /// Spectral solver for boxes, conjugate gradients otherwise.
    pub fn new(d: &Domain) -> Result<Self> {
        let spectral = d.is_box() && d.dims().0 >= 3 && d.dims().1 >= 3;
        Self::build(d, spectral)
    }

    /// Conjugate gradients on any domain.
    pub fn iterative(d: &Domain) -> Result<Self> {
        Self::build(d, false)
    }

    fn build(d: &Domain, spectral: bool) -> Result<Self> {
        let mut interior = vec![None; d.n_vertices()];
        let mut vertices = Vec::new();
        if spectral {
            // row-major over the inner box
            let (x0, y0) = d.origin();
            let (w, h) = d.dims();
            for y in 1..h as i32 - 1 {
                for x in 1..w as i32 - 1 {
                    let v = d.vertex_at(x0 + x, y0 + y).expect("box vertex");
                    interior[v] = Some(vertices.len());
                    vertices.push(v);
                }
            }
        } else {
            for (v, slot) in interior.iter_mut().enumerate() {
                if !d.is_boundary(v) {
                    *slot = Some(vertices.len());
                    vertices.push(v);
                }
            }
        }
        if vertices.is_empty() {
            return invalid("the domain has no interior vertex");
        }
        let solver = if spectral {
            let (w, h) = d.dims();
            Solver::Spectral {
                x: SineBasis::new(w - 2),
                y: SineBasis::new(h - 2),
            }
        } else {
            Solver::ConjugateGradient
        };
        let adj = d.graph().adjacency();
        let neighbours = vertices
            .iter()
            .map(|&v| adj[v].iter().filter_map(|&(w, _)| interior[w]).collect())
            .collect();
        Ok(GreenFunction {
            domain: d.clone(),
            interior,
            vertices,
            neighbours,
            solver,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n_interior(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior[v].is_some()
    }

    /// `G(x, y)`.
    pub fn value(&self, x: usize, y: usize) -> f64 {
        let (Some(a), Some(b)) = (self.interior[x], self.interior[y]) else {
            return 0.0;
        };
        match &self.solver {
            Solver::Spectral { x: bx, y: by } => {
                let (ai, aj) = (a % bx.n, a / bx.n);
                let (bi, bj) = (b % bx.n, b / bx.n);
                let mut s = 0.0;
                for l in 0..by.n {
                    let py = by.at(l, aj) * by.at(l, bj);
                    for k in 0..bx.n {
                        s += bx.at(k, ai) * bx.at(k, bi) * py / (4.0 - 2.0 * bx.cos[k] - 2.0 * by.cos[l]);
                    }
                }
                4.0 * s
            }
            Solver::ConjugateGradient => self.column(y)[x],
        }
    }

    /// `y -> G(x, y)` over all vertices.
    pub fn column(&self, x: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.domain.n_vertices()];
        e[x] = 1.0;
        self.apply(&e)
    }

    /// `(G f)(x) = sum_y G(x, y) f(y)` over all vertices.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.vertices.iter().map(|&v| f[v]).collect();
        let sol = match &self.solver {
            Solver::Spectral { x, y } => spectral_solve(x, y, &rhs),
            Solver::ConjugateGradient => self.cg_solve(&rhs),
        };
        let mut out = vec![0.0; self.domain.n_vertices()];
        for (i, &v) in self.vertices.iter().enumerate() {
            out[v] = sol[i];
        }
        out
    }

    /// `sum_{x,y} f(x) G(x, y) g(y)`.
    pub fn bilinear(&self, f: &[f64], g: &[f64]) -> f64 {
        self.apply(g).iter().zip(f).map(|(a, b)| a * b).sum()
    }

    /// Full matrix over all vertices.
    pub fn dense(&self) -> Result<Vec<Vec<f64>>> {
        if self.n_interior() > DENSE_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "dense Green function with {} interior vertices exceeds {DENSE_LIMIT}",
                self.n_interior()
            )));
        }
        Ok((0..self.domain.n_vertices()).map(|x| self.column(x)).collect())
    }

    /// `(4I - A) u` on interior vectors.
    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.neighbours
            .iter()
            .enumerate()
            .map(|(i, nb)| 4.0 * u[i] - nb.iter().map(|&j| u[j]).sum::<f64>())
            .collect()
    }

    fn cg_solve(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let b: Vec<f64> = f.iter().map(|x| 4.0 * x).collect();
        let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return x;
        }
        let mut r = b;
        let mut p = r.clone();
        let mut rr: f64 = r.iter().map(|x| x * x).sum();
        for _ in 0..10 * n + 100 {
            if rr.sqrt() <= CG_TOLERANCE * bnorm {
                break;
            }
            let ap = self.laplacian(&p);
            let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|x| x * x).sum();
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        x
    }
}

/// Solve `(4I - A) u = 4 f` on an `nx x ny` grid in the sine basis.
fn spectral_solve(bx: &SineBasis, by: &SineBasis, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (bx.n, by.n);
    // t[j][k] = sum_i phi_k(i) f[j][i]
    let mut t = vec![0.0; nx * ny];
    for j in 0..ny {
        for k in 0..nx {
            t[j * nx + k] = (0..nx).map(|i| bx.at(k, i) * f[j * nx + i]).sum();
        }
    }
    let mut hat = vec![0.0; nx * ny];
    for l in 0..ny {
        for k in 0..nx {
            let c: f64 = (0..ny).map(|j| by.at(l, j) * t[j * nx + k]).sum();
            hat[l * nx + k] = 4.0 * c / (4.0 - 2.0 * bx.cos[k] - 2.0 * by.cos[l]);
        }
    }
    for j in 0..ny {
        for k in 0..nx {
            t[j * nx + k] = (0..ny).map(|l| by.at(l, j) * hat[l * nx + k]).sum();
        }
    }
    let mut u = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            u[j * nx + i] = (0..nx).map(|k| bx.at(k, i) * t[j * nx + k]).sum();
        }
    }
    u
}

/// Ratio between the continuum Green function normalised as `log(1 / |x - y|)` and the
/// random-walk Green function, which grows like `(2 / pi) log(1 / |x - y|)`.
pub const GREEN_NORMALIZATION: f64 = PI / 2.0;

/// Limiting covariance `(1 / (2 pi^2)) int int G_D f g` as a Riemann sum with mesh `delta`.
pub fn gff_covariance_target(green: &GreenFunction, fv: &[f64], gv: &[f64]) -> f64 {
    let delta = mesh(green.domain());
    GREEN_NORMALIZATION * green.bilinear(fv, gv) * delta.powi(4) / (2.0 * PI * PI)
}

/// Smallest number of samples accepted for a covariance estimate.
pub const MIN_COVARIANCE_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub f: TestFunction,
    pub g: TestFunction,
    /// `Cov((H, f), (H, g))` with `(H, f) = delta^2 sum_v H_v f(v)`.
    pub covariance: Estimate,
    pub variance_f: Estimate,
    pub variance_g: Estimate,
    pub correlation: f64,
    pub target: f64,
    /// `covariance / target`, NaN when the target vanishes.
    pub ratio: Estimate,
}

impl CovarianceReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "f",
            "g",
            "covariance",
            "stderr",
            "n_samples",
            "target",
            "ratio",
            "ratio_stderr",
            "correlation",
        ]);
        t.push(vec![
            self.f.to_string(),
            self.g.to_string(),
            fmt_f64(self.covariance.mean),
            fmt_f64(self.covariance.stderr),
            self.covariance.n_samples.to_string(),
            fmt_f64(self.target),
            fmt_f64(self.ratio.mean),
            fmt_f64(self.ratio.stderr),
            fmt_f64(self.correlation),
        ]);
        t
    }
}

fn centred_product(a: &[Vec<f64>], b: &[Vec<f64>]) -> Estimate {
    let n: usize = a.iter().map(Vec::len).sum();
    let ma = a.iter().flatten().sum::<f64>() / n as f64;
    let mb = b.iter().flatten().sum::<f64>() / n as f64;
    let prod = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - ma) * (q - mb)).collect())
        .collect();
    let mut e = ScalarSeries::from_chains(prod).estimate();
    e.mean *= n as f64 / (n as f64 - 1.0);
    e
}

/// Empirical covariance of the height field tested against `f` and `g`, compared with the
/// Green-function prediction on the domain of the sources.
pub fn height_covariance<S: SampleSource>(
    sources: &mut [(S, usize)],
    green: &GreenFunction,
    f: TestFunction,
    g: TestFunction,
) -> Result<CovarianceReport> {
    let d = green.domain().clone();
    let (fv, gv) = (f.on(&d), g.on(&d));
    let area = mesh(&d).powi(2);
    let obs = gather(sources, |s, d| {
        let h = s
            .height
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("samples carry no height field".into()))?;
        if h.twice_primal.len() != d.n_vertices() {
            return invalid("height field does not match the domain");
        }
        let pair = (0..d.n_vertices()).fold((0.0, 0.0), |(a, b), v| {
            let hv = h.primal(v);
            (a + hv * fv[v], b + hv * gv[v])
        });
        Ok((area * pair.0, area * pair.1))
    })?;
    let n: usize = obs.iter().map(Vec::len).sum();
    if n < MIN_COVARIANCE_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{n} samples; a covariance needs at least {MIN_COVARIANCE_SAMPLES}"
        )));
    }
    let a: Vec<Vec<f64>> = obs.iter().map(|c| c.iter().map(|p| p.0).collect()).collect();
    let b: Vec<Vec<f64>> = obs.iter().map(|c| c.iter().map(|p| p.1).collect()).collect();
    let covariance = centred_product(&a, &b);
    let variance_f = centred_product(&a, &a);
    let variance_g = centred_product(&b, &b);
    let correlation = covariance.mean / (variance_f.mean * variance_g.mean).sqrt();
    let target = gff_covariance_target(green, &fv, &gv);
    let ratio = Estimate {
        mean: covariance.mean / target,
        stderr: covariance.stderr / target.abs(),
        n_samples: n,
    };
    Ok(CovarianceReport {
        f,
        g,
        covariance,
        variance_f,
        variance_g,
        correlation,
        target,
        ratio,
    })
}

/// Height covariance on the `L x L` box with plus conditions, sampled with the current construction.
pub fn height_covariance_check(
    size: usize,
    f: TestFunction,
    g: TestFunction,
    j: f64,
    p: &McParams,
) -> Result<CovarianceReport> {
    let d = Domain::square(size, Bc::Plus)?;
    let green = GreenFunction::new(&d)?;
    let ctx = SamplerContext::new(d, j, Construction::Current)?;
    let mut sources = chain_sources(&ctx, p)?;
    height_covariance(&mut sources, &green, f, g)
}
