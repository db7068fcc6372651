//! Single linkage via a dense minimum spanning tree, and the dendrogram
//! operations built on it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::DistanceMatrix;

/// One agglomeration step. Leaves are clusters `0..n`; merge `i` creates
/// cluster `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
    /// MST edges `(i, j, weight)` in merge order.
    pub mst: Vec<(usize, usize, f64)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage dendrogram of a (pseudo-)metric by Prim's algorithm.
pub fn single_linkage(metric: &DistanceMatrix) -> Result<Dendrogram> {
    let n = metric.len();
    if n == 0 {
        return Err(Error::invalid("cannot cluster an empty point set"));
    }
    if metric.data().iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("distance matrix contains NaN"));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    in_tree[0] = true;
    for (j, b) in best.iter_mut().enumerate().skip(1) {
        *b = metric.get(0, j);
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut w = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < w) {
                next = j;
                w = best[j];
            }
        }
        in_tree[next] = true;
        edges.push((from[next].min(next), from[next].max(next), w));
        let row = metric.row(next);
        for j in 0..n {
            if !in_tree[j] && row[j] < best[j] {
                best[j] = row[j];
                from[j] = next;
            }
        }
    }
    edges.sort_by(|x, y| x.2.total_cmp(&y.2));

    let mut uf = UnionFind::new(n);
    let mut cluster_id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(edges.len());
    for (step, &(i, j, h)) in edges.iter().enumerate() {
        let (ri, rj) = (uf.find(i), uf.find(j));
        let (ca, cb) = (cluster_id[ri], cluster_id[rj]);
        let s = size[ri] + size[rj];
        uf.parent[rj] = ri;
        size[ri] = s;
        cluster_id[ri] = n + step;
        merges.push(Merge { a: ca.min(cb), b: ca.max(cb), height: h, size: s });
    }
    Ok(Dendrogram { n_leaves: n, merges, mst: edges })
}

/// Members of every cluster id, leaves first.
fn members(d: &Dendrogram) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..d.n_leaves).map(|i| vec![i]).collect();
    for m in &d.merges {
        let mut v = out[m.a].clone();
        v.extend_from_slice(&out[m.b]);
        out.push(v);
    }
    out
}

/// The ultrametric `u(i, j)`: the height at which `i` and `j` first share a cluster.
pub fn cophenetic_matrix(d: &Dendrogram) -> DistanceMatrix {
    let n = d.n_leaves;
    let mut u = vec![0.0; n * n];
    let mem = members(d);
    for m in &d.merges {
        for &i in &mem[m.a] {
            for &j in &mem[m.b] {
                u[i * n + j] = m.height;
                u[j * n + i] = m.height;
            }
        }
    }
    DistanceMatrix::new(n, u).expect("cophenetic matrix is a valid metric")
}

fn pair_moments(d: &Dendrogram) -> Result<(f64, f64)> {
    let n = d.n_leaves;
    if n < 2 {
        return Err(Error::invalid("cophenetic statistics need at least two leaves"));
    }
    let mut size = vec![1usize; n];
    let (mut s1, mut s2) = (0.0, 0.0);
    for m in &d.merges {
        let pairs = (size[m.a] * size[m.b]) as f64;
        s1 += m.height * pairs;
        s2 += m.height * m.height * pairs;
        size.push(m.size);
    }
    let total = (n * (n - 1) / 2) as f64;
    Ok((s1 / total, s2 / total))
}

/// Average cophenetic distance over unordered pairs of leaves.
pub fn mean_cophenetic(d: &Dendrogram) -> Result<f64> {
    Ok(pair_moments(d)?.0)
}

/// Standard deviation of the cophenetic distance over unordered pairs.
pub fn cophenetic_std(d: &Dendrogram) -> Result<f64> {
    let (m1, m2) = pair_moments(d)?;
    Ok((m2 - m1 * m1).max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutMode {
    AtK(usize),
    AtHeight(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterAssignment {
    /// Labels `0..k`, numbered in order of each cluster's smallest member.
    pub labels: Vec<usize>,
    pub k: usize,
    pub cutoff_height: f64,
    /// The `k` asked for by an `AtK` cut, if any.
    pub requested_k: Option<usize>,
}

impl ClusterAssignment {
    /// Renumbers arbitrary labels by first appearance.
    pub fn from_raw_labels(raw: &[usize], cutoff_height: f64, requested_k: Option<usize>) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<usize> = raw
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self { k: map.len(), labels, cutoff_height, requested_k }
    }

    /// True when tied merge heights forced more clusters than requested.
    pub fn tie_inflated(&self) -> bool {
        self.requested_k.is_some_and(|k| self.k > k)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

/// Cuts the dendrogram. `AtHeight(h)` drops MST edges heavier than `h`;
/// `AtK(k)` drops the `k - 1` heaviest edges together with every edge tied
/// with the lightest of them, so ties can yield more than `k` clusters.
pub fn cut(d: &Dendrogram, mode: CutMode) -> Result<ClusterAssignment> {
    let n = d.n_leaves;
    let (keep, cutoff, requested) = match mode {
        CutMode::AtHeight(h) => {
            if h.is_nan() || h < 0.0 {
                return Err(Error::invalid("cut height must be non-negative"));
            }
            (d.mst.iter().take_while(|e| e.2 <= h).count(), h, None)
        }
        CutMode::AtK(k) => {
            if k == 0 || k > n {
                return Err(Error::invalid(format!("cannot cut {n} leaves into {k} clusters")));
            }
            let mut keep = n - k;
            if keep < d.mst.len() {
                let t = d.mst[keep].2;
                while keep > 0 && d.mst[keep - 1].2 >= t {
                    keep -= 1;
                }
            }
            let cutoff = if keep == 0 { 0.0 } else { d.mst[keep - 1].2 };
            (keep, cutoff, Some(k))
        }
    };
    let mut uf = UnionFind::new(n);
    for &(i, j, _) in &d.mst[..keep] {
        let (ri, rj) = (uf.find(i), uf.find(j));
        if ri != rj {
            uf.parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let raw: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    Ok(ClusterAssignment::from_raw_labels(&raw, cutoff, requested))
}
