//! Bottleneck transport: binary search over candidate distances with a
//! max-flow feasibility test.

use std::collections::VecDeque;

/// Dinic's algorithm on `f64` capacities. With integer-valued capacities
/// below 2^53 every operation is exact.
struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i32>,
    iter: Vec<usize>,
    eps: f64,
}

impl Dinic {
    fn new(nodes: usize, eps: f64) -> Self {
        Self { head: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), level: vec![0; nodes], iter: vec![0; nodes], eps }
    }

    /// Adds `u -> v`; returns the forward edge id (its reverse is `id ^ 1`).
    fn add(&mut self, u: usize, v: usize, c: f64) -> usize {
        let id = self.to.len();
        self.head[u].push(id);
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(id + 1);
        self.to.push(u);
        self.cap.push(0.0);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > self.eps && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.head[u].len() {
            let e = self.head[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > self.eps && self.level[v] == self.level[u] + 1 {
                let got = self.dfs(v, t, pushed.min(self.cap[e]));
                if got > 0.0 {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

/// Continued-fraction approximation `p/q` of `x ∈ (0, 1]` with `q ≤ max_den`,
/// accepted only if within `tol`.
fn rational(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Integer capacities proportional to the weights, when all weights are
/// (to 1e-13) rationals with a common denominator small enough for exact
/// `f64` arithmetic. Returns `(row caps, col caps, denominator)`.
fn integer_capacities(a: &[f64], b: &[f64]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    const MAX_L: u64 = 1 << 50;
    let mut l = 1u64;
    for &w in a.iter().chain(b) {
        let (_, q) = rational(w, 1 << 24, 1e-13 * w.max(1e-300))?;
        l = (l / gcd(l, q)).checked_mul(q).filter(|&v| v <= MAX_L)?;
    }
    let lf = l as f64;
    let conv = |w: &[f64]| -> Option<Vec<f64>> {
        w.iter()
            .map(|&x| {
                let c = (x * lf).round();
                ((x * lf - c).abs() <= 1e-6 && c >= 1.0).then_some(c)
            })
            .collect()
    };
    let (ca, cb) = (conv(a)?, conv(b)?);
    let (sa, sb): (f64, f64) = (ca.iter().sum(), cb.iter().sum());
    (sa == sb && sa == lf).then_some((ca, cb, lf))
}

/// Smallest `t` among the distinct entries of `dist` such that a coupling of
/// `a` and `b` supported on `{dist ≤ t}` exists, and such a coupling.
pub(crate) fn solve(a: &[f64], b: &[f64], dist: &[f64]) -> (f64, Vec<f64>) {
    let (n, m) = (a.len(), b.len());
    let mut cand: Vec<f64> = dist.to_vec();
    cand.sort_by(f64::total_cmp);
    cand.dedup();

    let (ca, cb, scale, eps, need) = match integer_capacities(a, b) {
        Some((ca, cb, l)) => (ca, cb, l, 0.5, l),
        None => {
            let total: f64 = a.iter().sum::<f64>().min(b.iter().sum());
            (a.to_vec(), b.to_vec(), 1.0, 1e-15, total - 1e-12)
        }
    };
    let inf = ca.iter().sum::<f64>() + cb.iter().sum::<f64>() + 1.0;

    let run = |t: f64| -> (bool, Vec<f64>) {
        let (s, sink) = (n + m, n + m + 1);
        let mut g = Dinic::new(n + m + 2, eps);
        for (i, &c) in ca.iter().enumerate() {
            g.add(s, i, c);
        }
        for (j, &c) in cb.iter().enumerate() {
            g.add(n + j, sink, c);
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if dist[i * m + j] <= t {
                    edges.push((i, j, g.add(i, n + j, inf)));
                }
            }
        }
        let flow = g.max_flow(s, sink);
        let mut plan = vec![0.0; n * m];
        for (i, j, e) in edges {
            let f = g.cap[e ^ 1];
            if f > 0.0 {
                plan[i * m + j] = f / scale;
            }
        }
        (flow >= need, plan)
    };

    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    let mut best = run(cand[hi]).1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (ok, plan) = run(cand[mid]);
        if ok {
            hi = mid;
            best = plan;
        } else {
            lo = mid + 1;
        }
    }
    (cand[hi], best)
}
