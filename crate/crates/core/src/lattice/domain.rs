use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::{invalid, Result};

/// Boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Plus,
    Free,
}

impl std::str::FromStr for Bc {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" => Ok(Bc::Plus),
            "free" => Ok(Bc::Free),
            _ => invalid(format!("unknown boundary condition '{s}'")),
        }
    }
}

impl std::fmt::Display for Bc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Bc::Plus => "plus",
            Bc::Free => "free",
        })
    }
}

pub(crate) const NONE: u32 = u32::MAX;

/// Connected subgraph of Z^2 together with its face structure.
///
/// Faces are the connected components of the complement of the drawing, computed
/// on unit cells; the unbounded one is the outer face and always has the largest
/// index. Edges of a box are numbered row by row, horizontal edges first.
#[derive(Clone, Debug)]
pub struct Domain {
    graph: Graph,
    bc: Bc,
    coords: Vec<(i32, i32)>,
    boundary: Vec<bool>,
    x0: i32,
    y0: i32,
    width: usize,
    height: usize,
    // vertex index per lattice site of the bounding box
    site: Vec<u32>,
    // cell grid covers [x0-1, x0+width-1] x [y0-1, y0+height-1]
    cell_face: Vec<u32>,
    n_faces: usize,
    edge_faces: Vec<[u32; 2]>,
    is_box: bool,
}

impl Domain {
    /// Rectangular box with `n_cols * n_rows` vertices at (x, y), 0 <= x < n_cols, 0 <= y < n_rows.
    pub fn rect(n_cols: usize, n_rows: usize, bc: Bc) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return invalid("box dimensions must be positive");
        }
        if n_cols.checked_mul(n_rows).map_or(true, |n| n > (1 << 28)) {
            return invalid("box is too large");
        }
        let mut coords = Vec::with_capacity(n_cols * n_rows);
        for y in 0..n_rows {
            for x in 0..n_cols {
                coords.push((x as i32, y as i32));
            }
        }
        let idx = |x: usize, y: usize| (y * n_cols + x) as u32;
        let mut edges = Vec::with_capacity(2 * n_cols * n_rows);
        for y in 0..n_rows {
            for x in 0..n_cols.saturating_sub(1) {
                edges.push([idx(x, y), idx(x + 1, y)]);
            }
        }
        for y in 0..n_rows.saturating_sub(1) {
            for x in 0..n_cols {
                edges.push([idx(x, y), idx(x, y + 1)]);
            }
        }
        let mut d = Self::build(coords, edges, bc)?;
        d.is_box = true;
        Ok(d)
    }

    /// Square box of side `n`.
    pub fn square(n: usize, bc: Bc) -> Result<Self> {
        Self::rect(n, n, bc)
    }

    /// Box of side `2m - 1` centred at the origin, i.e. the ball of radius `m - 1` in the sup norm.
    pub fn centered_box(m: usize, bc: Bc) -> Result<Self> {
        if m == 0 {
            return invalid("radius must be positive");
        }
        Self::rect(2 * m - 1, 2 * m - 1, bc)
    }

    /// Subgraph of Z^2 given by vertex coordinates and nearest-neighbour edges.
    pub fn from_edges(coords: Vec<(i32, i32)>, edges: Vec<[u32; 2]>, bc: Bc) -> Result<Self> {
        for (i, &[u, v]) in edges.iter().enumerate() {
            let (a, b) = match (coords.get(u as usize), coords.get(v as usize)) {
                (Some(a), Some(b)) => (*a, *b),
                _ => return invalid(format!("edge {i} has an endpoint out of range")),
            };
            if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 1 {
                return invalid(format!("edge {i} is not a nearest-neighbour edge"));
            }
        }
        Self::build(coords, edges, bc)
    }

    fn build(coords: Vec<(i32, i32)>, edges: Vec<[u32; 2]>, bc: Bc) -> Result<Self> {
        if coords.is_empty() {
            return invalid("domain has no vertices");
        }
        let x0 = coords.iter().map(|c| c.0).min().unwrap();
        let y0 = coords.iter().map(|c| c.1).min().unwrap();
        let width = (coords.iter().map(|c| c.0).max().unwrap() - x0 + 1) as usize;
        let height = (coords.iter().map(|c| c.1).max().unwrap() - y0 + 1) as usize;
        let mut site = vec![NONE; width * height];
        for (v, &(x, y)) in coords.iter().enumerate() {
            let s = &mut site[(y - y0) as usize * width + (x - x0) as usize];
            if *s != NONE {
                return invalid("duplicate vertex coordinates");
            }
            *s = v as u32;
        }
        let graph = Graph::new(coords.len(), edges)?;
        if !graph.is_connected() {
            return invalid("domain must be connected");
        }

        // horizontal / vertical edge lookup by lower-left endpoint
        let mut hedge = vec![NONE; width * height];
        let mut vedge = vec![NONE; width * height];
        for (e, &[u, v]) in graph.edges().iter().enumerate() {
            let (a, b) = (coords[u as usize], coords[v as usize]);
            let (lo, hi) = if (a.0, a.1) <= (b.0, b.1) { (a, b) } else { (b, a) };
            let k = (lo.1 - y0) as usize * width + (lo.0 - x0) as usize;
            let slot = if hi.0 != lo.0 { &mut hedge[k] } else { &mut vedge[k] };
            if *slot != NONE {
                return invalid("parallel edges are not allowed in a lattice domain");
            }
            *slot = e as u32;
        }

        // flood fill of unit cells; cell (i, j) has lower-left corner (x0 - 1 + i, y0 - 1 + j)
        let cw = width + 1;
        let ch = height + 1;
        let edge_at = |table: &Vec<u32>, x: i64, y: i64| -> u32 {
            if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
                NONE
            } else {
                table[y as usize * width + x as usize]
            }
        };
        let mut label = vec![NONE; cw * ch];
        let mut n_comp = 0u32;
        let mut stack = Vec::new();
        // outer component first so it gets a known temporary label
        let starts = std::iter::once(0usize).chain(0..cw * ch);
        for start in starts {
            if label[start] != NONE {
                continue;
            }
            label[start] = n_comp;
            stack.push(start);
            while let Some(c) = stack.pop() {
                let (i, j) = ((c % cw) as i64, (c / cw) as i64);
                // lattice coordinates relative to (x0, y0) of the lower-left corner
                let (x, y) = (i - 1, j - 1);
                // right neighbour across vertical segment (x+1, y)-(x+1, y+1)
                let moves = [
                    (1i64, 0i64, edge_at(&vedge, x + 1, y)),
                    (-1, 0, edge_at(&vedge, x, y)),
                    (0, 1, edge_at(&hedge, x, y + 1)),
                    (0, -1, edge_at(&hedge, x, y)),
                ];
                for (di, dj, blocking) in moves {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 || ni >= cw as i64 || nj >= ch as i64 {
                        continue;
                    }
                    if blocking != NONE {
                        continue;
                    }
                    let nc = nj as usize * cw + ni as usize;
                    if label[nc] == NONE {
                        label[nc] = n_comp;
                        stack.push(nc);
                    }
                }
            }
            n_comp += 1;
        }
        // bounded faces keep discovery order, the outer face (temp label 0) goes last
        let n_faces = n_comp as usize;
        let remap = |l: u32| if l == 0 { n_comp - 1 } else { l - 1 };
        let cell_face: Vec<u32> = label.iter().map(|&l| remap(l)).collect();

        let cell = |x: i32, y: i32| -> usize {
            ((y - y0 + 1) as usize) * cw + (x - x0 + 1) as usize
        };
        let mut edge_faces = Vec::with_capacity(graph.n_edges());
        for &[u, v] in graph.edges() {
            let (a, b) = (coords[u as usize], coords[v as usize]);
            let (lo, hi) = if (a.0, a.1) <= (b.0, b.1) { (a, b) } else { (b, a) };
            let pair = if hi.0 != lo.0 {
                // horizontal: cell below, cell above
                [cell_face[cell(lo.0, lo.1 - 1)], cell_face[cell(lo.0, lo.1)]]
            } else {
                // vertical: cell left, cell right
                [cell_face[cell(lo.0 - 1, lo.1)], cell_face[cell(lo.0, lo.1)]]
            };
            edge_faces.push(pair);
        }

        let outer = (n_faces - 1) as u32;
        let boundary: Vec<bool> = coords
            .iter()
            .map(|&(x, y)| {
                [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)]
                    .iter()
                    .any(|&(cx, cy)| cell_face[cell(cx, cy)] == outer)
            })
            .collect();

        let graph = match bc {
            Bc::Free => graph,
            Bc::Plus => {
                let wired = edge_faces.iter().map(|f| f[0] == outer || f[1] == outer).collect();
                graph.with_boundary(boundary.clone(), wired)?
            }
        };

        Ok(Domain {
            graph,
            bc,
            coords,
            boundary,
            x0,
            y0,
            width,
            height,
            site,
            cell_face,
            n_faces,
            edge_faces,
            is_box: false,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    /// Same domain with another boundary condition.
    pub fn with_bc(&self, bc: Bc) -> Domain {
        let mut d = self.clone();
        d.bc = bc;
        d.graph = match bc {
            Bc::Free => self.graph.freed(),
            Bc::Plus => {
                let outer = self.outer_face() as u32;
                let wired = self.edge_faces.iter().map(|f| f[0] == outer || f[1] == outer).collect();
                self.graph
                    .freed()
                    .with_boundary(self.boundary.clone(), wired)
                    .expect("outer-face edges join boundary vertices")
            }
        };
        d
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn is_box(&self) -> bool {
        self.is_box
    }

    /// Width and height of the bounding box in vertices.
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn origin(&self) -> (i32, i32) {
        (self.x0, self.y0)
    }

    pub fn coords(&self, v: usize) -> (i32, i32) {
        self.coords[v]
    }

    pub fn all_coords(&self) -> &[(i32, i32)] {
        &self.coords
    }

    pub fn vertex_at(&self, x: i32, y: i32) -> Option<usize> {
        let (i, j) = (x - self.x0, y - self.y0);
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            return None;
        }
        let s = self.site[j as usize * self.width + i as usize];
        (s != NONE).then_some(s as usize)
    }

    /// Vertices incident to the outer face.
    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Lattice point closest to the centre of the bounding box (rounding down).
    pub fn center(&self) -> (i32, i32) {
        (
            self.x0 + (self.width as i32 - 1) / 2,
            self.y0 + (self.height as i32 - 1) / 2,
        )
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn outer_face(&self) -> usize {
        self.n_faces - 1
    }

    /// The two faces on either side of edge `e` (equal for bridges).
    pub fn edge_faces(&self, e: usize) -> (usize, usize) {
        let [a, b] = self.edge_faces[e];
        (a as usize, b as usize)
    }

    pub fn touches_outer(&self, e: usize) -> bool {
        let o = self.outer_face() as u32;
        self.edge_faces[e].contains(&o)
    }

    /// Face containing the unit cell with lower-left corner (x, y).
    pub fn face_of_cell(&self, x: i32, y: i32) -> usize {
        let cw = self.width + 1;
        let (i, j) = (x - self.x0 + 1, y - self.y0 + 1);
        if i < 0 || j < 0 || i as usize >= cw || j as usize > self.height {
            return self.outer_face();
        }
        self.cell_face[j as usize * cw + i as usize] as usize
    }

    /// Bounding box of the cell grid: lower-left corners range over
    /// `[x0 - 1, x0 + width - 1] x [y0 - 1, y0 + height - 1]`.
    pub(crate) fn cell_range(&self) -> (i32, i32, i32, i32) {
        (
            self.x0 - 1,
            self.x0 + self.width as i32 - 1,
            self.y0 - 1,
            self.y0 + self.height as i32 - 1,
        )
    }

    /// Index of the edge between two adjacent lattice points, if present.
    pub fn edge_between(&self, a: (i32, i32), b: (i32, i32)) -> Option<usize> {
        let u = self.vertex_at(a.0, a.1)?;
        let v = self.vertex_at(b.0, b.1)?;
        if self.is_box {
            let (w, _) = self.dims();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (lx, ly) = ((lo.0 - self.x0) as usize, (lo.1 - self.y0) as usize);
            if hi.1 == lo.1 && hi.0 == lo.0 + 1 {
                return Some(ly * (w - 1) + lx);
            }
            if hi.0 == lo.0 && hi.1 == lo.1 + 1 {
                return Some(self.height * (w - 1) + ly * w + lx);
            }
            return None;
        }
        self.graph
            .edges()
            .iter()
            .position(|&[p, q]| (p as usize, q as usize) == (u, v) || (p as usize, q as usize) == (v, u))
    }

    /// Sup-norm distance of vertex `v` from the centre.
    pub fn sup_radius(&self, v: usize) -> i32 {
        let (cx, cy) = self.center();
        let (x, y) = self.coords[v];
        (x - cx).abs().max((y - cy).abs())
    }
}
