//! Cluster decompositions, coin tosses and circuit detection.

mod circuits;
mod union_find;

pub use circuits::{circuit_exists, dual_crossing, innermost_dual_reach, Annulus};
pub use union_find::UnionFind;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{BondConfig, Domain, Graph, SpinConfig};

/// Component labels of a bond configuration; labels follow the smallest vertex of each component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub label: Vec<u32>,
    pub count: usize,
}

impl Components {
    /// Components of the open edges of `c` on `g`.
    pub fn of(g: &Graph, c: &BondConfig) -> Result<Self> {
        if c.len() != g.n_edges() {
            return invalid("configuration does not match the graph");
        }
        Ok(Self::with(g, |e| c.get(e)))
    }

    /// Components of the edges selected by `open`.
    pub fn with(g: &Graph, open: impl Fn(usize) -> bool) -> Self {
        let mut uf = UnionFind::new(g.n_vertices());
        for (e, &[u, v]) in g.edges().iter().enumerate() {
            if open(e) {
                uf.union(u as usize, v as usize);
            }
        }
        Self::from_union_find(&mut uf)
    }

    pub fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.len();
        let mut root_label = vec![u32::MAX; n];
        let mut label = vec![0u32; n];
        let mut count = 0u32;
        for v in 0..n {
            let r = uf.find(v);
            if root_label[r] == u32::MAX {
                root_label[r] = count;
                count += 1;
            }
            label[v] = root_label[r];
        }
        Components {
            label,
            count: count as usize,
        }
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.label[a] == self.label[b]
    }

    /// Labels of components meeting the plus set of `g`.
    pub fn plus_labels(&self, g: &Graph) -> Vec<bool> {
        let mut hit = vec![false; self.count];
        for v in 0..g.n_vertices() {
            if g.is_plus(v) {
                hit[self.label[v] as usize] = true;
            }
        }
        hit
    }
}

/// Spin assignment rule for clusters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoinMode {
    /// Every cluster gets an independent fair sign.
    Free,
    /// Clusters meeting the plus set get +1, the others a fair sign.
    Plus,
}

/// One fair sign per component, in label order; plus-pinned components consume no randomness.
pub fn coin_toss(
    comps: &Components,
    g: &Graph,
    mode: CoinMode,
    rng: &mut dyn RngCore,
) -> SpinConfig {
    let mut mode = mode;
    if mode == CoinMode::Plus && !g.has_plus() {
        log::warn!("plus coin toss on a graph without plus vertices; using free coins");
        mode = CoinMode::Free;
    }
    let pinned = match mode {
        CoinMode::Plus => comps.plus_labels(g),
        CoinMode::Free => vec![false; comps.count],
    };
    let mut sign = Vec::with_capacity(comps.count);
    let mut bits = 0u64;
    let mut left = 0;
    for &p in &pinned {
        if p {
            sign.push(1i8);
            continue;
        }
        if left == 0 {
            bits = rng.next_u64();
            left = 64;
        }
        sign.push(if bits & 1 == 1 { -1 } else { 1 });
        bits >>= 1;
        left -= 1;
    }
    let spins = comps.label.iter().map(|&l| sign[l as usize]).collect();
    SpinConfig::from_vec(spins).expect("signs are +-1")
}

/// Split `omega` into the edges where `tau` is +1 on both ends and where it is -1 on both ends.
pub fn split_by_tau(omega: &BondConfig, tau: &SpinConfig, g: &Graph) -> Result<(BondConfig, BondConfig)> {
    if omega.len() != g.n_edges() || tau.len() != g.n_vertices() {
        return invalid("configuration does not match the graph");
    }
    let mut plus = BondConfig::empty(omega.tag(), omega.len());
    let mut minus = plus.clone();
    for e in omega.open_edges() {
        let (u, v) = g.edge(e);
        let (a, b) = (tau.get(u), tau.get(v));
        if a != b {
            return Err(Error::InvariantViolation(format!(
                "tau changes sign across open edge {e}"
            )));
        }
        if a > 0 {
            plus.set(e, true);
        } else {
            minus.set(e, true);
        }
    }
    Ok((plus, minus))
}

/// Geometry of one cluster.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub vertices: Vec<u32>,
    pub min: (i32, i32),
    pub max: (i32, i32),
    pub touches_boundary: bool,
}

impl Cluster {
    /// Sup-norm extent of the bounding box.
    pub fn diameter(&self) -> i32 {
        (self.max.0 - self.min.0).max(self.max.1 - self.min.1)
    }

    pub fn size(&self) -> usize {
        self.vertices.len()
    }
}

/// Clusters of a primal configuration ordered by non-increasing diameter, ties broken
/// by the smallest vertex index.
#[derive(Clone, Debug)]
pub struct ClusterDecomposition {
    pub components: Components,
    pub clusters: Vec<Cluster>,
    /// Rank of the cluster containing each vertex.
    pub rank_of_vertex: Vec<u32>,
    pub boundary_cluster_ids: Vec<usize>,
}

impl ClusterDecomposition {
    pub fn cluster_of(&self, v: usize) -> usize {
        self.rank_of_vertex[v] as usize
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

pub fn decompose(c: &BondConfig, d: &Domain) -> Result<ClusterDecomposition> {
    let comps = Components::of(d.graph(), c)?;
    Ok(decompose_components(comps, d))
}

pub fn decompose_components(comps: Components, d: &Domain) -> ClusterDecomposition {
    let mut clusters: Vec<Cluster> = (0..comps.count)
        .map(|_| Cluster {
            vertices: Vec::new(),
            min: (i32::MAX, i32::MAX),
            max: (i32::MIN, i32::MIN),
            touches_boundary: false,
        })
        .collect();
    for v in 0..d.n_vertices() {
        let cl = &mut clusters[comps.label[v] as usize];
        let (x, y) = d.coords(v);
        cl.vertices.push(v as u32);
        cl.min = (cl.min.0.min(x), cl.min.1.min(y));
        cl.max = (cl.max.0.max(x), cl.max.1.max(y));
        cl.touches_boundary |= d.is_boundary(v);
    }
    // labels already follow the smallest vertex, so a stable sort settles ties
    let mut order: Vec<usize> = (0..comps.count).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(clusters[k].diameter()));
    let mut rank_of_label = vec![0u32; comps.count];
    for (r, &k) in order.iter().enumerate() {
        rank_of_label[k] = r as u32;
    }
    let rank_of_vertex = comps.label.iter().map(|&l| rank_of_label[l as usize]).collect();
    let mut slots: Vec<Option<Cluster>> = clusters.into_iter().map(Some).collect();
    let clusters: Vec<Cluster> = order.iter().map(|&k| slots[k].take().unwrap()).collect();
    let boundary_cluster_ids = clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| c.touches_boundary)
        .map(|(i, _)| i)
        .collect();
    ClusterDecomposition {
        components: comps,
        clusters,
        rank_of_vertex,
        boundary_cluster_ids,
    }
}
