use std::collections::VecDeque;

/// Dinic max-flow on real capacities.
pub(crate) struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, c: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    fn levels(&self, s: usize, eps: f64) -> Vec<i32> {
        let mut level = vec![-1; self.head.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &id in &self.head[u] {
                let v = self.to[id];
                if self.cap[id] > eps && level[v] < 0 {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level
    }

    fn push(&mut self, u: usize, t: usize, f: f64, level: &[i32], it: &mut [usize], eps: f64) -> f64 {
        if u == t {
            return f;
        }
        while it[u] < self.head[u].len() {
            let id = self.head[u][it[u]];
            let v = self.to[id];
            if self.cap[id] > eps && level[v] == level[u] + 1 {
                let d = self.push(v, t, f.min(self.cap[id]), level, it, eps);
                if d > eps {
                    self.cap[id] -= d;
                    self.cap[id ^ 1] += d;
                    return d;
                }
            }
            it[u] += 1;
        }
        0.0
    }

    pub fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        let mut total = 0.0;
        loop {
            let level = self.levels(s, eps);
            if level[t] < 0 {
                return total;
            }
            let mut it = vec![0; self.head.len()];
            loop {
                let f = self.push(s, t, f64::INFINITY, &level, &mut it, eps);
                if f <= eps {
                    break;
                }
                total += f;
            }
        }
    }
}

/// Largest mass of `upper` that can be coupled below-to-above with `lower`, i.e. one
/// when `upper` stochastically dominates `lower` on the subset lattice of edge masks.
pub(crate) fn domination_flow(upper: &[(u64, f64)], lower: &[(u64, f64)]) -> f64 {
    let n = upper.len() + lower.len() + 2;
    let (s, t) = (n - 2, n - 1);
    let mut net = FlowNetwork::new(n);
    for (i, &(_, p)) in upper.iter().enumerate() {
        net.add_edge(s, i, p);
    }
    for (j, &(_, p)) in lower.iter().enumerate() {
        net.add_edge(upper.len() + j, t, p);
    }
    for (i, &(x, _)) in upper.iter().enumerate() {
        for (j, &(y, _)) in lower.iter().enumerate() {
            if y & !x == 0 {
                net.add_edge(i, upper.len() + j, f64::INFINITY);
            }
        }
    }
    net.max_flow(s, t, 1e-15)
}
