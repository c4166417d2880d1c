use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{BondConfig, Domain, DualStructure, GraphTag};

/// The annulus between the sup-norm balls `L_n` and `L_N` around `center`, where
/// `L_n = { |x - c|_inf <= n - 1 }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: (i32, i32),
    pub inner: i32,
    pub outer: i32,
}

impl Annulus {
    pub fn new(center: (i32, i32), inner: i32, outer: i32) -> Result<Self> {
        if inner <= 0 || inner > outer {
            return invalid(format!("malformed annulus ({inner}, {outer})"));
        }
        Ok(Annulus { center, inner, outer })
    }

    pub fn radius(&self, p: (i32, i32)) -> i32 {
        (p.0 - self.center.0).abs().max((p.1 - self.center.1).abs())
    }

    fn contains(&self, p: (i32, i32)) -> bool {
        let r = self.radius(p);
        r >= self.inner && r < self.outer
    }

    fn check_fits(&self, d: &Domain) -> Result<()> {
        let (x0, y0) = d.origin();
        let (w, h) = d.dims();
        let r = self.outer - 1;
        let (cx, cy) = self.center;
        if cx - r < x0 || cy - r < y0 || cx + r >= x0 + w as i32 || cy + r >= y0 + h as i32 {
            return invalid("annulus does not fit in the domain");
        }
        Ok(())
    }
}

fn corners(cx: i32, cy: i32) -> [(i32, i32); 4] {
    [(cx, cy), (cx + 1, cy), (cx, cy + 1), (cx + 1, cy + 1)]
}

/// Sup-norm radii range over the four corners of a unit cell.
fn cell_radii(a: &Annulus, cx: i32, cy: i32) -> (i32, i32) {
    let rs = corners(cx, cy).map(|p| a.radius(p));
    (*rs.iter().min().unwrap(), *rs.iter().max().unwrap())
}

struct CellGrid {
    cx0: i32,
    cy0: i32,
    w: usize,
    h: usize,
}

impl CellGrid {
    fn index(&self, cx: i32, cy: i32) -> Option<usize> {
        let (i, j) = (cx - self.cx0, cy - self.cy0);
        (i >= 0 && j >= 0 && (i as usize) < self.w && (j as usize) < self.h)
            .then(|| j as usize * self.w + i as usize)
    }
}

/// Breadth-first search over unit cells. Crossing a segment is forbidden when the
/// segment is an edge accepted by `blocks`.
fn cell_search(
    d: &Domain,
    grid: &CellGrid,
    starts: impl Iterator<Item = (i32, i32)>,
    mut blocks: impl FnMut(usize) -> bool,
    mut visit: impl FnMut(i32, i32) -> bool,
) {
    let mut seen = vec![false; grid.w * grid.h];
    let mut queue = VecDeque::new();
    for (cx, cy) in starts {
        if let Some(k) = grid.index(cx, cy) {
            if !seen[k] {
                seen[k] = true;
                queue.push_back((cx, cy));
            }
        }
    }
    while let Some((cx, cy)) = queue.pop_front() {
        if !visit(cx, cy) {
            return;
        }
        let moves = [
            (1, 0, (cx + 1, cy), (cx + 1, cy + 1)),
            (-1, 0, (cx, cy), (cx, cy + 1)),
            (0, 1, (cx, cy + 1), (cx + 1, cy + 1)),
            (0, -1, (cx, cy), (cx + 1, cy)),
        ];
        for (dx, dy, a, b) in moves {
            let (nx, ny) = (cx + dx, cy + dy);
            let k = match grid.index(nx, ny) {
                Some(k) => k,
                None => continue,
            };
            if seen[k] {
                continue;
            }
            if let Some(e) = d.edge_between(a, b) {
                if blocks(e) {
                    continue;
                }
            }
            seen[k] = true;
            queue.push_back((nx, ny));
        }
    }
}

/// Whether `c` has an open circuit of annulus edges surrounding the inner ball.
/// Edges count as annulus edges when both endpoints lie in `L_N \ L_n`.
pub fn circuit_exists(c: &BondConfig, d: &Domain, a: &Annulus) -> Result<bool> {
    if c.tag() != GraphTag::Primal || c.len() != d.n_edges() {
        return invalid("expected a primal configuration on the domain");
    }
    a.check_fits(d)?;
    let r = a.outer;
    let grid = CellGrid {
        cx0: a.center.0 - r,
        cy0: a.center.1 - r,
        w: 2 * r as usize,
        h: 2 * r as usize,
    };
    let g = d.graph();
    let starts = (grid.cy0..grid.cy0 + grid.h as i32)
        .flat_map(|cy| (grid.cx0..grid.cx0 + grid.w as i32).map(move |cx| (cx, cy)))
        .filter(|&(cx, cy)| cell_radii(a, cx, cy).0 < a.inner)
        .collect::<Vec<_>>();
    let mut crossed = false;
    cell_search(
        d,
        &grid,
        starts.into_iter(),
        |e| {
            let (u, v) = g.edge(e);
            c.get(e) && a.contains(d.coords(u)) && a.contains(d.coords(v))
        },
        |cx, cy| {
            if cell_radii(a, cx, cy).1 >= a.outer {
                crossed = true;
                return false;
            }
            true
        },
    );
    Ok(!crossed)
}

/// Smallest sup-norm radius reached from outside `L_N` by a path of unit cells that
/// never crosses an open edge of `c` with both endpoints in `L_N`. The annulus `A(n, N)` carries no open circuit exactly when the
/// returned radius is at most `n - 1`.
pub fn innermost_dual_reach(c: &BondConfig, d: &Domain, center: (i32, i32), outer: i32) -> Result<i32> {
    let a = Annulus::new(center, 1, outer)?;
    if c.tag() != GraphTag::Primal || c.len() != d.n_edges() {
        return invalid("expected a primal configuration on the domain");
    }
    a.check_fits(d)?;
    let grid = CellGrid {
        cx0: center.0 - outer,
        cy0: center.1 - outer,
        w: 2 * outer as usize,
        h: 2 * outer as usize,
    };
    let g = d.graph();
    let starts = (grid.cy0..grid.cy0 + grid.h as i32)
        .flat_map(|cy| (grid.cx0..grid.cx0 + grid.w as i32).map(move |cx| (cx, cy)))
        .filter(|&(cx, cy)| cell_radii(&a, cx, cy).1 >= outer)
        .collect::<Vec<_>>();
    let mut best = outer;
    cell_search(
        d,
        &grid,
        starts.into_iter(),
        |e| {
            let (u, v) = g.edge(e);
            c.get(e) && a.radius(d.coords(u)) < outer && a.radius(d.coords(v)) < outer
        },
        |cx, cy| {
            best = best.min(cell_radii(&a, cx, cy).0);
            best > 0
        },
    );
    Ok(best)
}

/// Whether the dual configuration `dual` (on the strong dual) connects a face touching
/// `L_n` to a face outside `L_N`. Dual edges whose primal edge is not an annulus edge
/// are always passable.
pub fn dual_crossing(dual: &BondConfig, d: &Domain, s: &DualStructure, a: &Annulus) -> Result<bool> {
    if dual.tag() != GraphTag::StrongDual || dual.len() != s.strong.n_edges() {
        return invalid("expected a strong-dual configuration");
    }
    a.check_fits(d)?;
    let nf = s.strong.n_vertices();
    let mut source = vec![false; nf];
    let mut target = vec![false; nf];
    target[s.outer_face] = true;
    let (cx0, cx1, cy0, cy1) = (
        d.origin().0 - 1,
        d.origin().0 + d.dims().0 as i32 - 1,
        d.origin().1 - 1,
        d.origin().1 + d.dims().1 as i32 - 1,
    );
    for cy in cy0..=cy1 {
        for cx in cx0..=cx1 {
            let f = d.face_of_cell(cx, cy);
            let (lo, hi) = cell_radii(a, cx, cy);
            if lo < a.inner {
                source[f] = true;
            }
            if hi >= a.outer {
                target[f] = true;
            }
        }
    }
    let g = d.graph();
    let adj = s.strong.adjacency();
    let mut primal_of = vec![0usize; s.edge_pairing.len()];
    for (e, &de) in s.edge_pairing.iter().enumerate() {
        primal_of[de as usize] = e;
    }
    let mut seen = source.clone();
    let mut stack: Vec<usize> = (0..nf).filter(|&f| source[f]).collect();
    while let Some(f) = stack.pop() {
        if target[f] {
            return Ok(true);
        }
        for &(h, de) in &adj[f] {
            if seen[h] {
                continue;
            }
            let (u, v) = g.edge(primal_of[de]);
            let annulus_edge = a.contains(d.coords(u)) && a.contains(d.coords(v));
            if dual.get(de) || !annulus_edge {
                seen[h] = true;
                stack.push(h);
            }
        }
    }
    Ok(false)
}
