use super::config::{BondConfig, GraphTag};
use super::domain::Domain;
use super::graph::Graph;
use crate::error::{invalid, Error, Result};

/// Strong dual, weak dual and diamond graph of a lattice domain.
///
/// Strong-dual edge `e` crosses primal edge `e`. Weak-dual vertices are the bounded
/// faces, with the same indices as in the strong dual.
#[derive(Clone, Debug)]
pub struct DualStructure {
    pub strong: Graph,
    pub weak: Graph,
    pub outer_face: usize,
    /// Primal edge to strong-dual edge.
    pub edge_pairing: Vec<u32>,
    pub weak_of_primal: Vec<Option<u32>>,
    pub primal_of_weak: Vec<u32>,
    /// (primal vertex, bounded face) incidences.
    pub diamond_edges: Vec<[u32; 2]>,
    /// Centre of a representative unit cell of every bounded face.
    pub face_coords: Vec<(f64, f64)>,
}

impl DualStructure {
    pub fn n_bounded_faces(&self) -> usize {
        self.outer_face
    }

    /// Diamond adjacency: for each primal vertex the bounded faces around it, and for
    /// each bounded face its incident primal vertices.
    pub fn diamond_adjacency(&self, n_primal: usize) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
        let mut of_vertex = vec![Vec::new(); n_primal];
        let mut of_face = vec![Vec::new(); self.outer_face];
        for &[v, f] in &self.diamond_edges {
            of_vertex[v as usize].push(f);
            of_face[f as usize].push(v);
        }
        (of_vertex, of_face)
    }
}

/// Build the dual structures of a domain.
pub fn dual_structure(d: &Domain) -> DualStructure {
    let outer = d.outer_face();
    let m = d.n_edges();
    let mut strong_edges = Vec::with_capacity(m);
    let mut weak_edges = Vec::new();
    let mut weak_of_primal = vec![None; m];
    let mut primal_of_weak = Vec::new();
    for e in 0..m {
        let (f, g) = d.edge_faces(e);
        strong_edges.push([f as u32, g as u32]);
        if f != outer && g != outer {
            weak_of_primal[e] = Some(weak_edges.len() as u32);
            primal_of_weak.push(e as u32);
            weak_edges.push([f as u32, g as u32]);
        }
    }
    let strong = Graph::new(d.n_faces(), strong_edges).expect("face indices in range");
    let weak = Graph::new(outer, weak_edges).expect("bounded face indices in range");

    let (cx0, cx1, cy0, cy1) = d.cell_range();
    let mut face_coords = vec![(f64::NAN, f64::NAN); outer];
    let mut diamond = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for cy in cy0..=cy1 {
        for cx in cx0..=cx1 {
            let f = d.face_of_cell(cx, cy);
            if f == outer {
                continue;
            }
            if face_coords[f].0.is_nan() {
                face_coords[f] = (cx as f64 + 0.5, cy as f64 + 0.5);
            }
            for (x, y) in [(cx, cy), (cx + 1, cy), (cx, cy + 1), (cx + 1, cy + 1)] {
                if let Some(v) = d.vertex_at(x, y) {
                    if seen.insert((v, f)) {
                        diamond.push([v as u32, f as u32]);
                    }
                }
            }
        }
    }
    DualStructure {
        strong,
        weak,
        outer_face: outer,
        edge_pairing: (0..m as u32).collect(),
        weak_of_primal,
        primal_of_weak,
        diamond_edges: diamond,
        face_coords,
    }
}

fn check_len(c: &BondConfig, len: usize) -> Result<()> {
    if c.len() != len {
        return Err(Error::InvalidArgument(format!(
            "configuration has {} edges, graph has {len}",
            c.len()
        )));
    }
    Ok(())
}

/// Primal configuration to the complement of its dual on the strong dual.
pub fn complement_to_strong(c: &BondConfig, s: &DualStructure) -> Result<BondConfig> {
    if c.tag() != GraphTag::Primal {
        return invalid("expected a primal configuration");
    }
    check_len(c, s.edge_pairing.len())?;
    let mut out = BondConfig::full(GraphTag::StrongDual, s.strong.n_edges());
    for e in c.open_edges() {
        out.set(s.edge_pairing[e] as usize, false);
    }
    Ok(out)
}

/// Primal configuration to the complement of its dual on the weak dual; primal edges
/// without a weak-dual partner are ignored.
pub fn complement_to_weak(c: &BondConfig, s: &DualStructure) -> Result<BondConfig> {
    if c.tag() != GraphTag::Primal {
        return invalid("expected a primal configuration");
    }
    check_len(c, s.edge_pairing.len())?;
    let mut out = BondConfig::empty(GraphTag::WeakDual, s.weak.n_edges());
    for (k, &e) in s.primal_of_weak.iter().enumerate() {
        if !c.get(e as usize) {
            out.set(k, true);
        }
    }
    Ok(out)
}

/// Dual complement `e* open iff e closed`.
///
/// A primal configuration goes to the weak dual when it contains every edge on the
/// outer face and to the strong dual otherwise. Dual configurations go back to the
/// primal graph; primal edges with no weak-dual partner come back open.
pub fn dual_complement(c: &BondConfig, s: &DualStructure) -> Result<BondConfig> {
    match c.tag() {
        GraphTag::Primal => {
            check_len(c, s.edge_pairing.len())?;
            let has_outer = (0..c.len()).all(|e| s.weak_of_primal[e].is_some() || c.get(e));
            if has_outer {
                complement_to_weak(c, s)
            } else {
                complement_to_strong(c, s)
            }
        }
        GraphTag::StrongDual => {
            check_len(c, s.strong.n_edges())?;
            let mut out = BondConfig::full(GraphTag::Primal, s.edge_pairing.len());
            for (e, &de) in s.edge_pairing.iter().enumerate() {
                if c.get(de as usize) {
                    out.set(e, false);
                }
            }
            Ok(out)
        }
        GraphTag::WeakDual => {
            check_len(c, s.weak.n_edges())?;
            let mut out = BondConfig::full(GraphTag::Primal, s.edge_pairing.len());
            for (k, &e) in s.primal_of_weak.iter().enumerate() {
                if c.get(k) {
                    out.set(e as usize, false);
                }
            }
            Ok(out)
        }
    }
}
