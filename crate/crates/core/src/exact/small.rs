use crate::clusters::UnionFind;
use crate::error::{Error, Result};
use crate::lattice::Graph;

pub(crate) const MAX_VERTICES: usize = 24;
pub(crate) const MAX_EDGES: usize = 20;

/// Bit-mask view of a small graph.
#[derive(Clone, Debug)]
pub(crate) struct Small {
    pub n: usize,
    pub m: usize,
    pub ends: Vec<(usize, usize)>,
    /// Vertices whose degree parity an edge flips (zero for loops).
    pub parity: Vec<u64>,
    pub plus: u64,
    pub wired: u64,
    pub free_vertices: Vec<usize>,
}

impl Small {
    pub fn new(g: &Graph, max_edges: usize) -> Result<Self> {
        if g.n_vertices() > MAX_VERTICES {
            return Err(Error::ResourceLimit(format!(
                "exact enumeration supports at most {MAX_VERTICES} vertices, got {}",
                g.n_vertices()
            )));
        }
        if g.n_edges() > max_edges {
            return Err(Error::ResourceLimit(format!(
                "exact enumeration supports at most {max_edges} edges here, got {}",
                g.n_edges()
            )));
        }
        let ends: Vec<(usize, usize)> = (0..g.n_edges()).map(|e| g.edge(e)).collect();
        let parity = ends.iter().map(|&(u, v)| (1u64 << u) ^ (1u64 << v)).collect();
        let plus = (0..g.n_vertices()).filter(|&v| g.is_plus(v)).fold(0, |m, v| m | 1 << v);
        let wired = (0..g.n_edges()).filter(|&e| g.is_wired(e)).fold(0, |m, e| m | 1 << e);
        let free_vertices = (0..g.n_vertices()).filter(|&v| !g.is_plus(v)).collect();
        Ok(Small {
            n: g.n_vertices(),
            m: g.n_edges(),
            ends,
            parity,
            plus,
            wired,
            free_vertices,
        })
    }

    pub fn full_edges(&self) -> u64 {
        if self.m == 64 {
            u64::MAX
        } else {
            (1u64 << self.m) - 1
        }
    }

    /// Spin masks (bit set = spin -1) that are +1 on the plus set.
    pub fn spin_masks(&self) -> impl Iterator<Item = u64> + '_ {
        (0u64..1 << self.free_vertices.len()).map(move |k| {
            let mut m = 0u64;
            for (i, &v) in self.free_vertices.iter().enumerate() {
                if k >> i & 1 == 1 {
                    m |= 1 << v;
                }
            }
            m
        })
    }

    /// Edges whose endpoints carry different spins.
    pub fn disagree(&self, spins: u64) -> u64 {
        let mut d = 0u64;
        for (e, &(u, v)) in self.ends.iter().enumerate() {
            if (spins >> u ^ spins >> v) & 1 == 1 {
                d |= 1 << e;
            }
        }
        d
    }

    /// Vertices of odd degree in an edge set.
    pub fn odd_vertices(&self, edges: u64) -> u64 {
        let mut acc = 0u64;
        let mut rest = edges;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            acc ^= self.parity[e];
            rest &= rest - 1;
        }
        acc
    }

    /// Even degree off the plus set.
    pub fn is_sourceless(&self, edges: u64) -> bool {
        self.odd_vertices(edges) & !self.plus == 0
    }

    pub fn valid_odd_sets(&self) -> Vec<u64> {
        (0..=self.full_edges()).filter(|&o| self.is_sourceless(o)).collect()
    }

    /// Component labels of an edge set; with `merge_plus` the plus set counts as one vertex.
    pub fn components(&self, edges: u64, merge_plus: bool) -> (Vec<usize>, usize) {
        let mut uf = UnionFind::new(self.n);
        let mut rest = edges;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            let (u, v) = self.ends[e];
            uf.union(u, v);
            rest &= rest - 1;
        }
        if merge_plus {
            let mut first = None;
            for v in 0..self.n {
                if self.plus >> v & 1 == 1 {
                    match first {
                        None => first = Some(v),
                        Some(f) => {
                            uf.union(f, v);
                        }
                    }
                }
            }
        }
        let comps = crate::clusters::Components::from_union_find(&mut uf);
        (comps.label.iter().map(|&l| l as usize).collect(), comps.count)
    }

    /// Clusters of `edges` with the plus set merged, as a count.
    pub fn wired_cluster_count(&self, edges: u64) -> usize {
        self.components(edges, true).1
    }

    /// All spin masks constant on clusters of `edges`, +1 on clusters meeting the plus set
    /// when `plus` is set.
    pub fn coin_outcomes(&self, edges: u64, plus: bool) -> Vec<u64> {
        let (label, count) = self.components(edges, false);
        let mut pinned = vec![false; count];
        if plus {
            for v in 0..self.n {
                if self.plus >> v & 1 == 1 {
                    pinned[label[v]] = true;
                }
            }
        }
        let free: Vec<usize> = (0..count).filter(|&c| !pinned[c]).collect();
        (0u64..1 << free.len())
            .map(|k| {
                let mut minus_cluster = vec![false; count];
                for (i, &c) in free.iter().enumerate() {
                    minus_cluster[c] = k >> i & 1 == 1;
                }
                (0..self.n).filter(|&v| minus_cluster[label[v]]).fold(0, |m, v| m | 1 << v)
            })
            .collect()
    }

    pub fn connected_in(&self, edges: u64, a: usize, b: usize) -> bool {
        let (label, _) = self.components(edges, false);
        label[a] == label[b]
    }

    pub fn connected_to_plus(&self, edges: u64, a: usize) -> bool {
        let (label, _) = self.components(edges, false);
        (0..self.n).any(|v| self.plus >> v & 1 == 1 && label[v] == label[a])
    }
}

/// `t[mask] = sum of w[e] over e in mask`.
pub(crate) fn sum_table(w: &[f64]) -> Vec<f64> {
    let size = 1usize << w.len();
    let mut t = vec![0.0; size];
    for m in 1..size {
        let e = m.trailing_zeros() as usize;
        t[m] = t[m & (m - 1)] + w[e];
    }
    t
}

/// `t[mask] = product of w[e] over e in mask`.
pub(crate) fn product_table(w: &[f64]) -> Vec<f64> {
    let size = 1usize << w.len();
    let mut t = vec![1.0; size];
    for m in 1..size {
        let e = m.trailing_zeros() as usize;
        t[m] = t[m & (m - 1)] * w[e];
    }
    t
}

/// Iterate over all submasks of `m`, including `0` and `m`.
pub(crate) fn submasks(m: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}
