mod oracles;

use std::collections::BTreeMap;

use ctxscope_core::hdbscan::{core_distances, hdbscan, mst_prim, HdbscanParams, PointLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect()
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[test]
fn mst_weights_match_kruskal_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let n = rng.random_range(2..=12);
        let ms = rng.random_range(1..=n.min(4));
        let pts = random_points(&mut rng, n);
        let core = core_distances(&pts, ms);
        let mut prim: Vec<f64> = mst_prim(&pts, &core).iter().map(|e| e.weight).collect();
        prim.sort_by(f64::total_cmp);
        let kruskal = oracles::kruskal_weights(&oracles::mutual_reachability_matrix(&pts, ms));
        assert_eq!(prim, kruskal);
        assert_eq!(prim.iter().sum::<f64>(), kruskal.iter().sum::<f64>());
    }
}

#[test]
fn condensed_tree_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..50 {
        let n = rng.random_range(4..=12);
        let mcs = rng.random_range(2..=4);
        let ms = rng.random_range(2..=4);
        let pts = random_points(&mut rng, n);
        let params = HdbscanParams {
            min_cluster_size: mcs,
            min_samples: ms,
        };
        let result = hdbscan(&pts, params).unwrap();
        let Some(tree) = result.tree else {
            assert!(n < mcs);
            continue;
        };
        checked += 1;
        let oracle = oracles::condensed_tree_brute(&oracles::mutual_reachability_matrix(&pts, ms), mcs);

        let mut got: BTreeMap<Vec<usize>, (f64, Option<Vec<usize>>)> = BTreeMap::new();
        for c in &tree.clusters {
            let parent = c.parent.map(|p| tree.clusters[p].members.clone());
            got.insert(c.members.clone(), (c.birth_lambda, parent));
        }
        assert_eq!(got.len(), oracle.clusters.len(), "cluster count");
        for (members, (lambda, parent)) in &oracle.clusters {
            let (g_lambda, g_parent) = got.get(members).expect("cluster present");
            assert!(close(*g_lambda, *lambda), "{g_lambda} vs {lambda}");
            assert_eq!(g_parent, parent);
        }
        for (p, &(cluster, lambda)) in tree.fallout.iter().enumerate() {
            let (o_cluster, o_lambda) = &oracle.fallout[&p];
            assert_eq!(&tree.clusters[cluster].members, o_cluster, "point {p}");
            assert!(close(lambda, *o_lambda), "point {p}: {lambda} vs {o_lambda}");
        }
    }
    assert!(checked > 40);
}

#[test]
fn two_blobs_separate_cleanly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut pts = Vec::new();
    for centre in [[0.0, 0.0], [10.0, 0.0]] {
        for _ in 0..50 {
            pts.push([centre[0] + noise.sample(&mut rng), centre[1] + noise.sample(&mut rng)]);
        }
    }
    let r = hdbscan(&pts, HdbscanParams::default()).unwrap();
    assert_eq!(r.n_clusters, 2);
    let cluster_of = |range: std::ops::Range<usize>| -> Vec<PointLabel> { r.labels[range].to_vec() };
    let a = cluster_of(0..50);
    let b = cluster_of(50..100);
    for l in &a {
        assert!(!b.contains(l) || *l == PointLabel::Noise);
    }
    assert!(a.iter().filter(|l| **l != PointLabel::Noise).count() > 40);
    assert!(b.iter().filter(|l| **l != PointLabel::Noise).count() > 40);
}

#[test]
fn labels_invariant_under_permutation() {
    use rand::seq::SliceRandom;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let normal = Normal::new(0.0, 0.3).unwrap();
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for centre in [[0.0, 0.0], [4.0, 1.0], [1.0, 5.0]] {
        for _ in 0..20 {
            pts.push([centre[0] + normal.sample(&mut rng), centre[1] + normal.sample(&mut rng)]);
        }
    }
    let base = hdbscan(&pts, HdbscanParams::default()).unwrap();
    for _ in 0..10 {
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<[f64; 2]> = perm.iter().map(|&i| pts[i]).collect();
        let r = hdbscan(&shuffled, HdbscanParams::default()).unwrap();
        assert_eq!(r.n_clusters, base.n_clusters);
        // Same partition: two points share a label iff they did before.
        for a in 0..perm.len() {
            for b in 0..perm.len() {
                let same_now = r.labels[a] == r.labels[b] && r.labels[a] != PointLabel::Noise;
                let same_before = base.labels[perm[a]] == base.labels[perm[b]] && base.labels[perm[a]] != PointLabel::Noise;
                assert_eq!(same_now, same_before);
            }
        }
    }
}
