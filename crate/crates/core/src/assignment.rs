//! Minimum-cost assignment (Hungarian algorithm with potentials).

/// Solves `min Σ cost[i][σ(i)]` over injective maps from rows to columns of a
/// row-major `rows × cols` matrix. If `rows > cols` the problem is
/// transposed, so every column is then matched instead.
///
/// Returns the total cost and, for each row, its column (or `None` when the
/// row is left unmatched because `rows > cols`).
pub fn hungarian(cost: &[f64], rows: usize, cols: usize) -> (f64, Vec<Option<usize>>) {
    assert_eq!(cost.len(), rows * cols, "cost matrix has the wrong size");
    if rows == 0 || cols == 0 {
        return (0.0, vec![None; rows]);
    }
    if rows > cols {
        let t: Vec<f64> = (0..cols * rows).map(|k| cost[(k % rows) * cols + k / rows]).collect();
        let (total, col_to_row) = hungarian(&t, cols, rows);
        let mut out = vec![None; rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        return (total, out);
    }
    // 1-based arrays in the classic O(n^2 m) formulation.
    let (n, m) = (rows, cols);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = Some(j - 1);
        }
    }
    let total = assign
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| cost[i * m + c]))
        .sum();
    (total, assign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=6 {
            for _ in 0..20 {
                let c: Vec<f64> = (0..n * n).map(|_| next()).collect();
                let best = permutations(n)
                    .iter()
                    .map(|p| (0..n).map(|i| c[i * n + p[i]]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                let (got, a) = hungarian(&c, n, n);
                assert!((got - best).abs() < 1e-12);
                assert!(a.iter().all(Option::is_some));
            }
        }
    }

    #[test]
    fn rectangular_both_ways() {
        let c = [1.0, 5.0, 0.0, 2.0, 9.0, 9.0];
        // 2 x 3: rows pick columns 2 and 0.
        let (t, a) = hungarian(&c, 2, 3);
        assert_eq!(t, 2.0);
        assert_eq!(a, vec![Some(2), Some(0)]);
        // 3 x 2: row 0 -> column 1, row 2 -> column 0, row 1 unmatched.
        let ct = [1.0, 2.0, 5.0, 9.0, 0.0, 9.0];
        let (t, a) = hungarian(&ct, 3, 2);
        assert_eq!(t, 2.0);
        assert_eq!(a, vec![Some(1), None, Some(0)]);
    }
}
