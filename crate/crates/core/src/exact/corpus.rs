use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::verify::*;
use crate::error::Result;
use crate::lattice::{at_critical_coupling, critical_coupling, Bc, Couplings, Domain};

/// Connected edge subsets of the 3x3 grid with at most `max_edges` edges, one per
/// translation class, as (label, domain) pairs.
pub fn grid_subgraph_corpus(max_edges: usize, bc: Bc) -> Vec<(String, Domain)> {
    let full = Domain::square(3, Bc::Free).expect("3x3 box");
    let m = full.n_edges();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u32..1 << m {
        if mask.count_ones() as usize > max_edges {
            continue;
        }
        let edges: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
        let mut verts: Vec<usize> = edges
            .iter()
            .flat_map(|&e| {
                let (u, v) = full.graph().edge(e);
                [u, v]
            })
            .collect();
        verts.sort();
        verts.dedup();
        let coords: Vec<(i32, i32)> = verts.iter().map(|&v| full.coords(v)).collect();
        let (mx, my) = (
            coords.iter().map(|c| c.0).min().unwrap(),
            coords.iter().map(|c| c.1).min().unwrap(),
        );
        let mut key: Vec<((i32, i32), (i32, i32))> = edges
            .iter()
            .map(|&e| {
                let (u, v) = full.graph().edge(e);
                let (a, b) = (full.coords(u), full.coords(v));
                ((a.0 - mx, a.1 - my), (b.0 - mx, b.1 - my))
            })
            .collect();
        key.sort();
        if !seen.insert(key) {
            continue;
        }
        let local: Vec<[u32; 2]> = edges
            .iter()
            .map(|&e| {
                let (u, v) = full.graph().edge(e);
                [verts.binary_search(&u).unwrap() as u32, verts.binary_search(&v).unwrap() as u32]
            })
            .collect();
        if let Ok(d) = Domain::from_edges(coords, local, bc) {
            out.push((format!("grid3x3[{mask:03x}] {bc}"), d));
        }
    }
    out
}

/// Which groups of checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    EdwardsSokal,
    Duality,
    Currents,
    Fkg,
    Correlation,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "edwards_sokal" | "es" => Suite::EdwardsSokal,
            "duality" => Suite::Duality,
            "currents" | "switching" => Suite::Currents,
            "fkg" | "anticorrelation" => Suite::Fkg,
            "correlation" => Suite::Correlation,
            _ => return crate::error::invalid(format!("unknown suite '{s}'")),
        })
    }
}

fn box_label(d: &Domain) -> String {
    let (w, h) = d.dims();
    format!("box {w}x{h} {}", d.bc())
}

/// Default coupling values: J in {0.2, J_c, 0.8}, plus four-spin points U = +-0.15 kept
/// only where `cosh(2J) >= exp(-2U)`.
pub fn default_couplings() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for j in [0.2, critical_coupling(), 0.8] {
        out.push((j, 0.0));
        for u in [0.15f64, -0.15] {
            if (2.0 * j).cosh() >= (-2.0 * u).exp() {
                out.push((j, u));
            }
        }
    }
    out
}

/// Run a suite of exact checks. `j_override` replaces the default coupling list by a
/// single Ising coupling.
pub fn run_suite(suite: Suite, j_override: Option<f64>) -> Result<Vec<CheckReport>> {
    let couplings = match j_override {
        Some(j) => vec![(j, 0.0)],
        None => default_couplings(),
    };
    let ising: Vec<f64> = couplings.iter().filter(|c| c.1 == 0.0).map(|c| c.0).collect();
    let on = |s: Suite| suite == Suite::All || suite == s;
    let mut out = Vec::new();
    let boxes: Vec<(usize, usize)> = vec![(1, 2), (2, 2), (3, 2), (2, 3), (3, 3)];

    if on(Suite::EdwardsSokal) || on(Suite::Correlation) {
        for bc in [Bc::Plus, Bc::Free] {
            let mut graphs = grid_subgraph_corpus(10, bc);
            for &(w, h) in &boxes {
                let d = Domain::rect(w, h, bc)?;
                graphs.push((box_label(&d), d));
            }
            for (label, d) in &graphs {
                for &(j, u) in &couplings {
                    let k = Couplings::uniform_at(d.n_edges(), j, u)?;
                    if on(Suite::EdwardsSokal) {
                        out.push(verify_edwards_sokal(d.graph(), &k, label)?);
                    }
                    if on(Suite::Correlation) {
                        out.push(verify_correlation_identity(d.graph(), &k, label)?);
                    }
                }
            }
        }
    }
    if on(Suite::Duality) {
        for bc in [Bc::Plus, Bc::Free] {
            for &(w, h) in &boxes {
                let d = Domain::rect(w, h, bc)?;
                for &j in &ising {
                    let k = Couplings::uniform(d.n_edges(), j)?;
                    out.push(verify_duality(&d, &k, &box_label(&d))?);
                }
            }
        }
    }
    if on(Suite::Currents) {
        for bc in [Bc::Plus, Bc::Free] {
            for &(w, h) in &[(2, 2), (3, 2), (3, 3)] {
                let d = Domain::rect(w, h, bc)?;
                for &j in &ising {
                    let k = Couplings::uniform(d.n_edges(), j)?;
                    out.push(verify_trace_identity(d.graph(), &k, &box_label(&d))?);
                    out.push(verify_current_construction(d.graph(), &k, &box_label(&d))?);
                }
            }
        }
        let path = Domain::rect(3, 1, Bc::Free)?;
        out.push(verify_switching_count(path.graph(), &[2, 2], "path of two edges")?);
        let sq = Domain::square(2, Bc::Free)?;
        out.push(verify_switching_count(sq.graph(), &[3, 1, 2, 2], "box 2x2 free")?);
        out.push(verify_switching_count(sq.graph(), &[2, 2, 2, 2], "box 2x2 free")?);
        let d = Domain::rect(3, 2, Bc::Free)?;
        out.push(verify_switching_count(d.graph(), &[1, 1, 1, 1, 2, 1, 3], "box 3x2 free")?);
        for bc in [Bc::Plus, Bc::Free] {
            let d = Domain::rect(3, 2, bc)?;
            out.push(verify_fk4_point(d.graph(), &box_label(&d))?);
        }
    }
    if on(Suite::Fkg) {
        let mut points: Vec<(f64, f64)> = couplings.clone();
        let uc = 0.2;
        points.push((at_critical_coupling(uc), uc));
        let jj = 3f64.ln() / 4.0;
        points.push((jj, jj));
        for &(w, h, bc) in &[(2, 2, Bc::Free), (3, 2, Bc::Free), (3, 3, Bc::Plus), (4, 3, Bc::Plus)] {
            let d = Domain::rect(w, h, bc)?;
            for &(j, u) in &points {
                let k = Couplings::uniform_at(d.n_edges(), j, u)?;
                if !k.in_at_regime() {
                    continue;
                }
                out.push(verify_fkg_lattice(d.graph(), &k, &box_label(&d))?);
                out.push(verify_tau_marginal_formula(d.graph(), &k, &box_label(&d))?);
            }
        }
        for &(w, h) in &[(2, 2), (3, 2)] {
            for bc in [Bc::Free, Bc::Plus] {
                let d = Domain::rect(w, h, bc)?;
                for &j in &ising {
                    let k = Couplings::uniform(d.n_edges(), j)?;
                    out.push(omega_fkg_data(d.graph(), &k, &box_label(&d))?);
                }
            }
        }
        let d = Domain::square(2, Bc::Free)?;
        for &(j, u) in &[(jj, jj), (at_critical_coupling(uc), uc), (critical_coupling(), 0.0)] {
            let k = Couplings::uniform_at(d.n_edges(), j, u)?;
            out.push(verify_fkg_conditional(d.graph(), &k, None, &box_label(&d))?);
        }
        for bc in [Bc::Free, Bc::Plus] {
            let d = Domain::rect(2, 3, bc)?;
            let d = if bc == Bc::Plus { Domain::rect(3, 4, bc)? } else { d };
            let pairs = anticorrelation_events(&d);
            for &(j, u) in &points {
                let k = Couplings::uniform_at(d.n_edges(), j, u)?;
                if !k.in_at_regime() || d.n_edges() > 16 {
                    continue;
                }
                out.push(verify_anticorrelation(d.graph(), &k, &pairs, &box_label(&d))?);
                if d.n_edges() <= 10 {
                    out.push(verify_stochastic_domination(d.graph(), &k, &box_label(&d))?);
                }
            }
        }
    }
    Ok(out)
}

/// Every (connection, closed-edge / disconnection) pair on the domain.
pub fn anticorrelation_events(d: &Domain) -> Vec<(Event, Event)> {
    let n = d.n_vertices();
    let mut incr = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            incr.push(Event::Connected(x, y));
        }
        if d.graph().has_plus() && !d.is_boundary(x) {
            incr.push(Event::ConnectedToBoundary(x));
        }
    }
    let mut decr: Vec<Event> = (0..d.n_edges()).map(Event::EdgeOpen).collect();
    decr.extend(incr.iter().copied());
    let mut out = Vec::new();
    for &a in &incr {
        for &b in &decr {
            out.push((a, b));
        }
    }
    out
}
