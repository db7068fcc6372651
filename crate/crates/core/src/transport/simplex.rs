//! Transportation simplex: a spanning-tree basis of `n + m - 1` cells,
//! MODI potentials, block pricing, and pivoting around the unique cycle.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Cell {
    i: usize,
    j: usize,
    flow: f64,
}

struct Basis<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    cells: Vec<Cell>,
    /// Node -> basic cells touching it. Rows are nodes `0..n`, columns `n..n+m`.
    adj: Vec<Vec<usize>>,
}

impl<'a> Basis<'a> {
    /// North-west corner rule; always yields a spanning tree.
    fn north_west(a: &[f64], b: &[f64], cost: &'a [f64]) -> Self {
        let (n, m) = (a.len(), b.len());
        let mut ar = a.to_vec();
        let mut br = b.to_vec();
        let mut cells = Vec::with_capacity(n + m - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let f = ar[i].min(br[j]).max(0.0);
            cells.push(Cell { i, j, flow: f });
            ar[i] -= f;
            br[j] -= f;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if j == m - 1 || (i < n - 1 && ar[i] <= br[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        let mut adj = vec![Vec::new(); n + m];
        for (k, c) in cells.iter().enumerate() {
            adj[c.i].push(k);
            adj[n + c.j].push(k);
        }
        Self { n, m, cost, cells, adj }
    }

    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.m + j]
    }

    fn potentials(&self, u: &mut [f64], v: &mut [f64]) {
        let mut seen = vec![false; self.n + self.m];
        let mut stack = vec![0usize];
        seen[0] = true;
        u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &k in &self.adj[node] {
                let Cell { i, j, .. } = self.cells[k];
                let other = if node < self.n { self.n + j } else { i };
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                if other >= self.n {
                    v[j] = self.c(i, j) - u[i];
                } else {
                    u[i] = self.c(i, j) - v[j];
                }
                stack.push(other);
            }
        }
    }

    /// Basic cells on the tree path from column node `n + q` to row node `p`.
    fn path(&self, p: usize, q: usize) -> Vec<usize> {
        let total = self.n + self.m;
        let mut parent = vec![usize::MAX; total];
        let start = self.n + q;
        parent[start] = usize::MAX - 1;
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            if node == p {
                break;
            }
            for &k in &self.adj[node] {
                let Cell { i, j, .. } = self.cells[k];
                let other = if node < self.n { self.n + j } else { i };
                if parent[other] == usize::MAX {
                    parent[other] = k;
                    stack.push(other);
                }
            }
        }
        // Walk back from p to the start column.
        let mut out = Vec::new();
        let mut node = p;
        while node != start {
            let k = parent[node];
            out.push(k);
            let Cell { i, j, .. } = self.cells[k];
            node = if node < self.n { self.n + j } else { i };
        }
        out.reverse();
        out
    }

    fn replace(&mut self, leave: usize, i: usize, j: usize, flow: f64) {
        let old = self.cells[leave];
        for node in [old.i, self.n + old.j] {
            let pos = self.adj[node].iter().position(|&k| k == leave).unwrap();
            self.adj[node].swap_remove(pos);
        }
        self.cells[leave] = Cell { i, j, flow };
        self.adj[i].push(leave);
        self.adj[self.n + j].push(leave);
    }
}

/// Exact optimal coupling of the balanced transportation problem with
/// supplies `a`, demands `b` and row-major costs. Returns the dense plan.
pub(crate) fn solve(a: &[f64], b: &[f64], cost: &[f64]) -> Result<Vec<f64>> {
    let (n, m) = (a.len(), b.len());
    let mut plan = vec![0.0; n * m];
    if n == 0 || m == 0 {
        return Ok(plan);
    }
    let mut basis = Basis::north_west(a, b, cost);
    let scale = cost.iter().copied().fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let cells = n * m;
    let block = ((cells as f64).sqrt() as usize).max(64).min(cells);
    let mut offset = 0usize;
    let mut degenerate_run = 0usize;
    let mut bland = false;
    let max_iter = 50 * (n + m) * (n + m) + 10_000;

    for _ in 0..max_iter {
        basis.potentials(&mut u, &mut v);
        // Pricing.
        let mut enter: Option<(usize, f64)> = None;
        if bland {
            for k in 0..cells {
                let r = cost[k] - u[k / m] - v[k % m];
                if r < -eps {
                    enter = Some((k, r));
                    break;
                }
            }
        } else {
            let mut scanned = 0;
            while scanned < cells {
                let end = (scanned + block).min(cells);
                for s in scanned..end {
                    let k = (offset + s) % cells;
                    let r = cost[k] - u[k / m] - v[k % m];
                    if r < -eps && enter.is_none_or(|(_, best)| r < best) {
                        enter = Some((k, r));
                    }
                }
                scanned = end;
                if enter.is_some() {
                    break;
                }
            }
            offset = (offset + scanned) % cells;
        }
        let Some((k, _)) = enter else {
            for c in &basis.cells {
                plan[c.i * m + c.j] += c.flow;
            }
            return Ok(plan);
        };
        let (p, q) = (k / m, k % m);
        let path = basis.path(p, q);
        // Cells at even positions along the path lose flow.
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &c) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let cell = basis.cells[c];
                let better = cell.flow < theta
                    || (bland && cell.flow == theta && (cell.i, cell.j) < (basis.cells[leave].i, basis.cells[leave].j));
                if better {
                    theta = cell.flow;
                    leave = c;
                }
            }
        }
        for (pos, &c) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis.cells[c].flow -= theta;
            } else {
                basis.cells[c].flow += theta;
            }
        }
        basis.replace(leave, p, q, theta);
        if theta == 0.0 {
            degenerate_run += 1;
            if degenerate_run > 20 * (n + m) {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }
    Err(Error::Numerical("transportation simplex hit its iteration cap".into()))
}
