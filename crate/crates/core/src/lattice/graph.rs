use crate::error::{invalid, Result};

/// Finite multigraph with an optional set of plus vertices and of forced-open edges.
///
/// Self-loops and parallel edges are allowed, which is what strong duals need.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<[u32; 2]>,
    plus: Vec<bool>,
    wired: Vec<bool>,
}

impl Graph {
    /// Graph with free boundary conditions.
    pub fn new(n_vertices: usize, edges: Vec<[u32; 2]>) -> Result<Self> {
        if n_vertices > u32::MAX as usize {
            return invalid("too many vertices");
        }
        for (i, e) in edges.iter().enumerate() {
            if e[0] as usize >= n_vertices || e[1] as usize >= n_vertices {
                return invalid(format!("edge {i} has an endpoint out of range"));
            }
        }
        let m = edges.len();
        Ok(Graph {
            n_vertices,
            edges,
            plus: vec![false; n_vertices],
            wired: vec![false; m],
        })
    }

    /// Attach plus vertices and forced-open edges. Forced edges must join two plus vertices.
    pub fn with_boundary(mut self, plus: Vec<bool>, wired: Vec<bool>) -> Result<Self> {
        if plus.len() != self.n_vertices || wired.len() != self.edges.len() {
            return invalid("boundary masks have the wrong length");
        }
        for (e, &w) in wired.iter().enumerate() {
            let [u, v] = self.edges[e];
            if w && !(plus[u as usize] && plus[v as usize]) {
                return invalid(format!("forced edge {e} does not join two plus vertices"));
            }
        }
        self.plus = plus;
        self.wired = wired;
        Ok(self)
    }

    /// Same graph with the boundary data removed.
    pub fn freed(&self) -> Graph {
        Graph {
            n_vertices: self.n_vertices,
            edges: self.edges.clone(),
            plus: vec![false; self.n_vertices],
            wired: vec![false; self.edges.len()],
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let [u, v] = self.edges[e];
        (u as usize, v as usize)
    }

    pub fn is_plus(&self, v: usize) -> bool {
        self.plus[v]
    }

    pub fn plus_mask(&self) -> &[bool] {
        &self.plus
    }

    pub fn is_wired(&self, e: usize) -> bool {
        self.wired[e]
    }

    pub fn wired_mask(&self) -> &[bool] {
        &self.wired
    }

    pub fn has_plus(&self) -> bool {
        self.plus.iter().any(|&p| p)
    }

    pub fn plus_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices).filter(|&v| self.plus[v]).collect()
    }

    /// Adjacency lists of (neighbour, edge index); loops appear twice.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for (e, &[u, v]) in self.edges.iter().enumerate() {
            adj[u as usize].push((v as usize, e));
            adj[v as usize].push((u as usize, e));
        }
        adj
    }

    /// Connectedness of the underlying graph (ignoring boundary data).
    pub fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(w, _) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n_vertices
    }
}
