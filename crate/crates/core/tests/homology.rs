use eegtda::homology::oracle::naive_persistence;
use eegtda::homology::{
    betti_curve, compute_persistence, h0_via_mst, persistent_entropy, rips_filtration, Pair, PersistenceDiagram,
    Threshold,
};
use eegtda::pointcloud::{euclidean_distances, DistanceMatrix};
use eegtda::seed;
use proptest::prelude::*;
use rand::Rng;

fn random_cloud(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = seed::rng(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

fn diagram(dm: &DistanceMatrix, max_dim: usize) -> PersistenceDiagram {
    let f = rips_filtration(dm, max_dim, Threshold::Auto).unwrap();
    let mut pd = compute_persistence(&f).unwrap();
    pd.sort_pairs();
    pd
}

fn oracle(dm: &DistanceMatrix, max_dim: usize) -> PersistenceDiagram {
    let mut pd = naive_persistence(dm, max_dim, dm.max_distance());
    pd.sort_pairs();
    pd
}

#[test]
fn matches_oracle_on_random_clouds() {
    for s in 0..100u64 {
        let n = 3 + (s % 6) as usize;
        let dm = euclidean_distances(&random_cloud(s, n, 3));
        let fast = diagram(&dm, 2);
        let slow = oracle(&dm, 2);
        assert_eq!(fast.pairs, slow.pairs, "seed {s}, n {n}");
    }
}

#[test]
fn matches_oracle_with_ties() {
    // Integer grid coordinates force many equal distances.
    for s in 0..40u64 {
        let mut rng = seed::rng(seed::derive(s, "grid"));
        let pts: Vec<Vec<f64>> = (0..7).map(|_| (0..2).map(|_| rng.random_range(0..3) as f64).collect()).collect();
        let dm = euclidean_distances(&pts);
        if dm.max_distance() == 0.0 {
            continue;
        }
        assert_eq!(diagram(&dm, 2).pairs, oracle(&dm, 2).pairs, "seed {s}");
    }
}

#[test]
fn h0_deaths_are_mst_weights() {
    for n in [8usize, 16, 32, 64] {
        for s in 0..20u64 {
            let dm = euclidean_distances(&random_cloud(seed::derive_index(n as u64, s), n, 3));
            let pd = diagram(&dm, 0);
            let finite: Vec<f64> = pd.pairs[0].iter().filter(|p| !p.is_infinite()).map(|p| p.death).collect();
            assert_eq!(finite, h0_via_mst(&dm), "n {n} seed {s}");
            assert_eq!(pd.pairs[0].len(), n);
            assert_eq!(pd.pairs[0].iter().filter(|p| p.is_infinite()).count(), 1);
        }
    }
}

#[test]
fn unit_square_loop() {
    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let pd = diagram(&euclidean_distances(&pts), 2);
    let h1: Vec<Pair> = pd.pairs[1].iter().filter(|p| !p.is_zero_lifetime()).copied().collect();
    assert_eq!(h1, vec![Pair { birth: 1.0, death: 2f64.sqrt() }]);
    assert_eq!(betti_curve(&pd, 1, &[0.5, 1.2, 1.5]), vec![0, 1, 0]);
    assert_eq!(betti_curve(&pd, 0, &[0.0, 2.0]), vec![4, 1]);
}

#[test]
fn octahedron_void() {
    // The six unit-axis points bound a 2-sphere at r = √2 that fills at r = 2.
    let mut pts = Vec::new();
    for k in 0..3 {
        for sign in [1.0, -1.0] {
            let mut p = vec![0.0; 3];
            p[k] = sign;
            pts.push(p);
        }
    }
    let pd = diagram(&euclidean_distances(&pts), 2);
    let h2: Vec<Pair> = pd.pairs[2].iter().filter(|p| !p.is_zero_lifetime()).copied().collect();
    assert_eq!(h2, vec![Pair { birth: 2f64.sqrt(), death: 2.0 }]);
}

#[test]
fn entropy_identities() {
    let mut pd = PersistenceDiagram::empty(10.0, 5, 2);
    pd.pairs[1] = (0..4).map(|i| Pair { birth: i as f64, death: i as f64 + 2.5 }).collect();
    assert!((persistent_entropy(&pd, 1).unwrap() - 4f64.ln()).abs() < 1e-12);

    pd.pairs[1] = vec![Pair { birth: 0.0, death: 1.0 }, Pair { birth: 2.0, death: 5.0 }];
    let direct = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    assert!((persistent_entropy(&pd, 1).unwrap() - direct).abs() < 1e-15);
    assert!((direct - 0.562_335_144_618_808_9).abs() < 1e-15);

    pd.pairs[1] = vec![Pair { birth: 0.3, death: 0.9 }];
    assert_eq!(persistent_entropy(&pd, 1).unwrap(), 0.0);
    assert!(persistent_entropy(&pd, 3).is_err());
}

#[test]
fn entropy_ignores_distance_scale() {
    for s in 0..20u64 {
        let dm = euclidean_distances(&random_cloud(s, 12, 3));
        let base = diagram(&dm, 2);
        for lambda in [0.1, 7.3] {
            let scaled = diagram(&dm.scaled(lambda), 2);
            for dim in 0..3 {
                let a = persistent_entropy(&base, dim).unwrap();
                let b = persistent_entropy(&scaled, dim).unwrap();
                assert!((a - b).abs() < 1e-12, "seed {s} λ {lambda} dim {dim}: {a} vs {b}");
            }
        }
    }
}

/// Largest L∞ gap allowed by some perfect matching, where each side may also
/// match to the diagonal at half the bar length. Exact: it tries every
/// candidate value and checks feasibility by augmenting paths.
fn bottleneck(a: &[Pair], b: &[Pair]) -> f64 {
    let fin = |v: &[Pair]| v.iter().filter(|p| !p.is_infinite() && !p.is_zero_lifetime()).copied().collect::<Vec<_>>();
    let (a, b) = (fin(a), fin(b));
    let (n, m) = (a.len(), b.len());
    let size = n + m;
    // Left: a then diagonal copies of b. Right: b then diagonal copies of a.
    let cost = |i: usize, j: usize| -> f64 {
        match (i < n, j < m) {
            (true, true) => (a[i].birth - b[j].birth).abs().max((a[i].death - b[j].death).abs()),
            (true, false) => {
                if j - m == i {
                    (a[i].death - a[i].birth) / 2.0
                } else {
                    f64::INFINITY
                }
            }
            (false, true) => {
                if i - n == j {
                    (b[j].death - b[j].birth) / 2.0
                } else {
                    f64::INFINITY
                }
            }
            (false, false) => 0.0,
        }
    };
    let mut candidates: Vec<f64> = (0..size)
        .flat_map(|i| (0..size).map(move |j| (i, j)))
        .map(|(i, j)| cost(i, j))
        .filter(|c| c.is_finite())
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, adj, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for eps in candidates {
        let adj: Vec<Vec<usize>> = (0..size).map(|i| (0..size).filter(|&j| cost(i, j) <= eps).collect()).collect();
        let mut owner = vec![None; size];
        if (0..size).all(|i| augment(i, &adj, &mut vec![false; size], &mut owner)) {
            return eps;
        }
    }
    0.0
}

#[test]
fn bottleneck_of_identical_and_shifted() {
    let a = [Pair { birth: 0.0, death: 1.0 }, Pair { birth: 0.5, death: 3.0 }];
    assert_eq!(bottleneck(&a, &a), 0.0);
    let b = [Pair { birth: 0.0, death: 1.25 }, Pair { birth: 0.5, death: 3.0 }];
    assert_eq!(bottleneck(&a, &b), 0.25);
    assert_eq!(bottleneck(&a, &[a[1]]), 0.5);
}

#[test]
fn perturbation_moves_diagram_at_most_twice_eta() {
    for s in 0..50u64 {
        let n = 4 + (s % 3) as usize;
        let pts = random_cloud(s, n, 3);
        let eta = 0.02 + 0.05 * (s % 4) as f64;
        let mut rng = seed::rng(seed::derive(s, "perturb"));
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                let dir: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                let r = eta * rng.random::<f64>();
                p.iter().zip(&dir).map(|(x, u)| x + r * u / norm).collect()
            })
            .collect();
        let a = diagram(&euclidean_distances(&pts), 2);
        let b = diagram(&euclidean_distances(&moved), 2);
        for dim in 0..3 {
            let d = bottleneck(&a.pairs[dim], &b.pairs[dim]);
            assert!(d <= 2.0 * eta + 1e-12, "seed {s} dim {dim}: {d} > 2·{eta}");
        }
    }
}

fn cloud_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..=8).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_oracle_equivalence(pts in cloud_strategy()) {
        let dm = euclidean_distances(&pts);
        prop_assume!(dm.max_distance() > 0.0);
        prop_assert_eq!(diagram(&dm, 2).pairs, oracle(&dm, 2).pairs);
    }

    #[test]
    fn prop_scale_equivariance(pts in cloud_strategy(), k in -6i32..6) {
        // Powers of two keep the scaling exact in floating point.
        let lambda = 2f64.powi(k);
        let dm = euclidean_distances(&pts);
        prop_assume!(dm.max_distance() > 0.0);
        let scaled = diagram(&dm.scaled(lambda), 2);
        prop_assert_eq!(scaled.pairs, diagram(&dm, 2).scaled(lambda).pairs);
    }

    #[test]
    fn prop_births_precede_deaths_and_faces_precede_cofaces(pts in cloud_strategy(), frac in 0.2f64..1.0) {
        let dm = euclidean_distances(&pts);
        prop_assume!(dm.max_distance() > 0.0);
        let f = rips_filtration(&dm, 2, Threshold::Value(frac * dm.max_distance())).unwrap();
        let value: std::collections::HashMap<Vec<u32>, f64> =
            f.simplices.iter().map(|s| (s.vertices.clone(), s.value)).collect();
        for s in f.simplices.iter().filter(|s| s.vertices.len() > 1) {
            for skip in 0..s.vertices.len() {
                let mut face = s.vertices.clone();
                face.remove(skip);
                prop_assert!(value[&face] <= s.value);
            }
        }
        let pd = compute_persistence(&f).unwrap();
        for p in pd.pairs.iter().flatten() {
            prop_assert!(p.birth <= p.death);
            prop_assert!(p.birth >= 0.0);
        }
        prop_assert_eq!(pd.pairs[0].len(), pts.len());
    }
}
