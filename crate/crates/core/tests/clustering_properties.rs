use ctfield::clustering::{
    cophenetic_matrix, cut, dendrogram_distortion_check, mean_cophenetic, score, single_linkage, tensorized_distances,
};
use ctfield::metric::euclid;
use ctfield::{Correspondence, CutMode, DistanceMatrix, RadialKernel, TensorizedMetricParams, WeightedMeasure};
use proptest::prelude::*;

fn points(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0).prop_map(|(x, y)| [x, y]), 1..=max)
}

fn metric(p: &[[f64; 2]]) -> DistanceMatrix {
    DistanceMatrix::from_fn(p.len(), |i, j| euclid(&p[i], &p[j])).unwrap()
}

/// Minimax path distances by Floyd-Warshall on the complete graph.
fn minimax(d: &DistanceMatrix) -> Vec<f64> {
    let n = d.len();
    let mut u = d.data().to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                u[i * n + j] = u[i * n + j].min(u[i * n + k].max(u[k * n + j]));
            }
        }
    }
    u
}

/// Best matching score by enumerating injections.
fn brute_score(pred: &[usize], truth: &[u32]) -> f64 {
    let mut pl: Vec<usize> = pred.to_vec();
    pl.sort_unstable();
    pl.dedup();
    let mut tl: Vec<u32> = truth.to_vec();
    tl.sort_unstable();
    tl.dedup();
    let conf = |a: usize, b: usize| pred.iter().zip(truth).filter(|(p, t)| **p == pl[a] && **t == tl[b]).count();
    fn best(a: usize, used: &mut Vec<bool>, np: usize, conf: &dyn Fn(usize, usize) -> usize) -> usize {
        if a == np {
            return 0;
        }
        // Leaving a cluster unmatched is always allowed.
        let mut top = best(a + 1, used, np, conf);
        for b in 0..used.len() {
            if !used[b] {
                used[b] = true;
                top = top.max(conf(a, b) + best(a + 1, used, np, conf));
                used[b] = false;
            }
        }
        top
    }
    let hits = best(0, &mut vec![false; tl.len()], pl.len(), &conf);
    1.0 - hits as f64 / pred.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cophenetic_is_an_ultrametric_below_the_metric(p in points(30)) {
        let d = metric(&p);
        let u = cophenetic_matrix(&single_linkage(&d).unwrap());
        let n = p.len();
        for i in 0..n {
            prop_assert_eq!(u.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(u.get(i, j), u.get(j, i));
                prop_assert!(u.get(i, j) <= d.get(i, j));
                for k in 0..n {
                    prop_assert!(u.get(i, j) <= u.get(i, k).max(u.get(k, j)));
                }
            }
        }
    }

    #[test]
    fn mst_cophenetic_equals_minimax(p in points(8)) {
        let d = metric(&p);
        let u = cophenetic_matrix(&single_linkage(&d).unwrap());
        let brute = minimax(&d);
        prop_assert_eq!(u.data(), brute.as_slice());
    }

    #[test]
    fn mean_cophenetic_equals_pair_average(p in points(8)) {
        prop_assume!(p.len() >= 2);
        let d = metric(&p);
        let den = single_linkage(&d).unwrap();
        let u = minimax(&d);
        let n = p.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += u[i * n + j];
            }
        }
        let want = s / (n * (n - 1) / 2) as f64;
        prop_assert!((mean_cophenetic(&den).unwrap() - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn permutation_equivariance(p in points(20), seed in any::<u64>()) {
        let n = p.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let q: Vec<[f64; 2]> = perm.iter().map(|&i| p[i]).collect();
        let (d, dq) = (metric(&p), metric(&q));
        let (u, uq) = (cophenetic_matrix(&single_linkage(&d).unwrap()), cophenetic_matrix(&single_linkage(&dq).unwrap()));
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(uq.get(a, b), u.get(perm[a], perm[b]));
            }
        }
        let k = (n / 3).max(1);
        let la = cut(&single_linkage(&d).unwrap(), CutMode::AtK(k)).unwrap();
        let lb = cut(&single_linkage(&dq).unwrap(), CutMode::AtK(k)).unwrap();
        prop_assert_eq!(la.k, lb.k);
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(lb.labels[a] == lb.labels[b], la.labels[perm[a]] == la.labels[perm[b]]);
            }
        }
    }

    #[test]
    fn distortion_never_grows(px in points(8), py in points(8), extra in prop::collection::vec((0usize..8, 0usize..8), 0..5)) {
        let (nx, ny) = (px.len(), py.len());
        let mut pairs: Vec<(usize, usize)> = (0..nx).map(|i| (i, i % ny)).collect();
        pairs.extend((0..ny).map(|j| (j % nx, j)));
        pairs.extend(extra.into_iter().map(|(i, j)| (i % nx, j % ny)));
        let r = Correspondence::new(nx, ny, pairs).unwrap();
        let c = dendrogram_distortion_check(&metric(&px), &metric(&py), &r).unwrap();
        prop_assert!(c.passed && c.dis_ultra <= c.dis_base + 1e-9);
    }

    #[test]
    fn scaling_example(p in points(10), c in 1.0f64..4.0) {
        let d = metric(&p);
        let dy = d.scaled(c);
        let ux = cophenetic_matrix(&single_linkage(&d).unwrap());
        let chk = dendrogram_distortion_check(&d, &dy, &Correspondence::identity(p.len())).unwrap();
        prop_assert!((chk.dis_ultra - (c - 1.0) * ux.max()).abs() <= 1e-12);
        prop_assert!((chk.dis_base - (c - 1.0) * d.max()).abs() <= 1e-12);
    }

    #[test]
    fn score_matches_brute_force(
        pred in prop::collection::vec(0usize..5, 1..=12),
        truth_raw in prop::collection::vec(0u32..5, 12),
    ) {
        let truth = &truth_raw[..pred.len()];
        let s = score(&pred, truth).unwrap();
        prop_assert!((s - brute_score(&pred, truth)).abs() <= 1e-12);
    }

    #[test]
    fn cut_at_height_matches_cophenetic(p in points(25), frac in 0.0f64..1.1) {
        let den = single_linkage(&metric(&p)).unwrap();
        let u = cophenetic_matrix(&den);
        let h = frac * u.max();
        let a = cut(&den, CutMode::AtHeight(h)).unwrap();
        let n = p.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(a.labels[i] == a.labels[j], u.get(i, j) <= h);
            }
        }
    }

    #[test]
    fn cut_at_k_is_a_height_cut_with_at_least_k_clusters(p in points(25), k in 1usize..25) {
        let n = p.len();
        prop_assume!(k <= n);
        let den = single_linkage(&metric(&p)).unwrap();
        let a = cut(&den, CutMode::AtK(k)).unwrap();
        prop_assert!(a.k >= k);
        prop_assert_eq!(a.tie_inflated(), a.k > k);
        prop_assert_eq!(a.sizes().iter().sum::<usize>(), n);
        if a.k < n {
            let b = cut(&den, CutMode::AtHeight(a.cutoff_height)).unwrap();
            prop_assert_eq!(&a.labels, &b.labels);
        }
    }
}

#[test]
fn tensorized_metric_separates_crossing_lines() {
    // Two perpendicular segments through the origin: the CTF tensors differ
    // along each branch, so γ = 0 already separates points away from the crossing.
    let mut coords = Vec::new();
    for i in 0..41 {
        let t = -1.0 + 0.05 * i as f64;
        coords.extend([t, 0.0]);
        coords.extend([0.0, t + 0.025]);
    }
    let m = WeightedMeasure::uniform(2, coords).unwrap();
    let params = TensorizedMetricParams::new(0.0, 0.21, RadialKernel::truncation()).unwrap();
    let d = tensorized_distances(&m, &params, None).unwrap();
    let (a, b) = (16, 17); // (−0.6, 0) and (0, −0.575)
    let (a2, b2) = (18, 19); // (−0.55, 0) and (0, −0.525)
    assert!(d.get(a, a2) < 1e-9 && d.get(b, b2) < 1e-9, "{} {}", d.get(a, a2), d.get(b, b2));
    assert!(d.get(a, b) > 0.01);
}
