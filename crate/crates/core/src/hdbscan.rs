//! HDBSCAN on 2D points: core distances, mutual-reachability MST, single
//! linkage, condensed tree and excess-of-mass cluster extraction.
//!
//! Merges at exactly equal heights are condensed as one multi-way split, so the
//! condensed tree depends only on the single-linkage ultrametric and not on
//! how ties in the MST happened to be ordered.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Heights below this are treated as this value when converting to λ = 1/h.
const MIN_HEIGHT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams {
            min_cluster_size: 5,
            min_samples: 5,
        }
    }
}

impl HdbscanParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 || self.min_samples < 2 {
            return Err(CoreError::Config(format!(
                "min_cluster_size ({}) and min_samples ({}) must both be at least 2",
                self.min_cluster_size, self.min_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointLabel {
    Cluster(usize),
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Binary merge in scipy layout: node `n + i` is created by `merges[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensedCluster {
    pub parent: Option<usize>,
    pub birth_lambda: f64,
    /// Every point in the cluster at birth, ascending.
    pub members: Vec<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTree {
    pub clusters: Vec<CondensedCluster>,
    /// Per point: the cluster it drops out of and the λ at which it does.
    pub fallout: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct HdbscanResult {
    pub labels: Vec<PointLabel>,
    pub n_clusters: usize,
    pub core_distances: Vec<f64>,
    pub mst: Vec<Edge>,
    pub tree: Option<CondensedTree>,
    pub stabilities: Vec<f64>,
}

pub fn euclidean(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Distance to the `min_samples`-th nearest point, counting the point itself.
pub fn core_distances(points: &[[f64; 2]], min_samples: usize) -> Vec<f64> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let rank = min_samples.clamp(1, n) - 1;
    let mut buf = vec![0.0; n];
    points
        .iter()
        .map(|&p| {
            for (d, &q) in buf.iter_mut().zip(points) {
                *d = euclidean(p, q);
            }
            *buf.select_nth_unstable_by(rank, f64::total_cmp).1
        })
        .collect()
}

pub fn mutual_reachability(points: &[[f64; 2]], core: &[f64], a: usize, b: usize) -> f64 {
    euclidean(points[a], points[b]).max(core[a]).max(core[b])
}

/// Prim's algorithm on the dense mutual-reachability graph.
pub fn mst_prim(points: &[[f64; 2]], core: &[f64]) -> Vec<Edge> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = mutual_reachability(points, core, current, j);
            if w < best[j] {
                best[j] = w;
                from[j] = current;
            }
            if best[j] < next_w {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(Edge {
            a: from[next].min(next),
            b: from[next].max(next),
            weight: next_w,
        });
        current = next;
    }
    edges
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merges from MST edges, in ascending height order.
pub fn single_linkage(n: usize, mst: &[Edge]) -> Vec<Merge> {
    let mut edges = mst.to_vec();
    edges.sort_by(|x, y| x.weight.total_cmp(&y.weight).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    // union-find over points; `node` maps a root point to its dendrogram node id
    let mut uf = UnionFind::new(n);
    let mut node: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for e in edges {
        let (ra, rb) = (uf.find(e.a), uf.find(e.b));
        if ra == rb {
            continue;
        }
        let size = uf.size[ra] + uf.size[rb];
        merges.push(Merge {
            left: node[ra].min(node[rb]),
            right: node[ra].max(node[rb]),
            height: e.weight,
            size,
        });
        let (big, small) = if uf.size[ra] >= uf.size[rb] { (ra, rb) } else { (rb, ra) };
        uf.parent[small] = big;
        uf.size[big] = size;
        node[big] = n + merges.len() - 1;
    }
    merges
}

pub fn lambda_of(height: f64) -> f64 {
    1.0 / height.max(MIN_HEIGHT)
}

struct Dendrogram<'a> {
    n: usize,
    merges: &'a [Merge],
}

impl Dendrogram<'_> {
    fn size(&self, node: usize) -> usize {
        if node < self.n {
            1
        } else {
            self.merges[node - self.n].size
        }
    }

    fn height(&self, node: usize) -> Option<f64> {
        (node >= self.n).then(|| self.merges[node - self.n].height)
    }

    fn leaves(&self, node: usize, out: &mut Vec<usize>) {
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < self.n {
                out.push(x);
            } else {
                let m = &self.merges[x - self.n];
                stack.push(m.left);
                stack.push(m.right);
            }
        }
    }

    /// Maximal subtrees below `node` whose height is strictly lower than `node`'s.
    fn components(&self, node: usize) -> Vec<usize> {
        let h = self.height(node).expect("internal node");
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.height(x) {
                Some(hx) if hx == h => {
                    let m = &self.merges[x - self.n];
                    stack.push(m.left);
                    stack.push(m.right);
                }
                _ => out.push(x),
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn condense(n: usize, merges: &[Merge], min_cluster_size: usize) -> CondensedTree {
    let dendro = Dendrogram { n, merges };
    let root = if n == 1 { 0 } else { n + merges.len() - 1 };
    let mut all = Vec::new();
    dendro.leaves(root, &mut all);
    all.sort_unstable();
    let mut clusters = vec![CondensedCluster {
        parent: None,
        birth_lambda: 0.0,
        members: all,
        children: Vec::new(),
    }];
    let mut fallout = vec![(0usize, 0.0f64); n];

    let mut stack = vec![(root, 0usize)];
    while let Some((node, cluster)) = stack.pop() {
        let Some(h) = dendro.height(node) else {
            // a lone point carried as a cluster: only reachable when n == 1
            fallout[node] = (cluster, lambda_of(0.0));
            continue;
        };
        let lambda = lambda_of(h);
        let comps = dendro.components(node);
        let large: Vec<usize> = comps
            .iter()
            .copied()
            .filter(|&c| dendro.size(c) >= min_cluster_size)
            .collect();
        for &c in comps.iter().filter(|&&c| dendro.size(c) < min_cluster_size) {
            let mut pts = Vec::new();
            dendro.leaves(c, &mut pts);
            for p in pts {
                fallout[p] = (cluster, lambda);
            }
        }
        match large.len() {
            0 => {}
            1 => stack.push((large[0], cluster)),
            _ => {
                for c in large {
                    let mut members = Vec::new();
                    dendro.leaves(c, &mut members);
                    members.sort_unstable();
                    let id = clusters.len();
                    clusters.push(CondensedCluster {
                        parent: Some(cluster),
                        birth_lambda: lambda,
                        members,
                        children: Vec::new(),
                    });
                    clusters[cluster].children.push(id);
                    stack.push((c, id));
                }
            }
        }
    }
    CondensedTree { clusters, fallout }
}

pub fn stabilities(tree: &CondensedTree) -> Vec<f64> {
    let mut stab = vec![0.0; tree.clusters.len()];
    for &(c, lambda) in &tree.fallout {
        stab[c] += lambda - tree.clusters[c].birth_lambda;
    }
    for cl in &tree.clusters {
        if let Some(p) = cl.parent {
            stab[p] += cl.members.len() as f64 * (cl.birth_lambda - tree.clusters[p].birth_lambda);
        }
    }
    stab
}

/// Excess-of-mass selection. Ties go to the children. The root is eligible
/// only when it never splits into two large clusters.
pub fn select_clusters(tree: &CondensedTree, stab: &[f64]) -> Vec<bool> {
    let m = tree.clusters.len();
    let mut selected = vec![false; m];
    let mut subtree = vec![0.0; m];
    // children always carry larger ids than their parents
    for c in (0..m).rev() {
        let kids = &tree.clusters[c].children;
        if kids.is_empty() {
            selected[c] = true;
            subtree[c] = stab[c];
            continue;
        }
        let child_sum: f64 = kids.iter().map(|&k| subtree[k]).sum();
        if c == 0 || child_sum >= stab[c] {
            subtree[c] = child_sum;
        } else {
            subtree[c] = stab[c];
            selected[c] = true;
            let mut stack = kids.clone();
            while let Some(d) = stack.pop() {
                selected[d] = false;
                stack.extend(tree.clusters[d].children.iter().copied());
            }
        }
    }
    selected
}

pub fn hdbscan(points: &[[f64; 2]], params: HdbscanParams) -> Result<HdbscanResult> {
    params.validate()?;
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(CoreError::input("points must be finite"));
    }
    let n = points.len();
    if n < params.min_cluster_size {
        return Ok(HdbscanResult {
            labels: vec![PointLabel::Noise; n],
            n_clusters: 0,
            core_distances: core_distances(points, params.min_samples),
            mst: Vec::new(),
            tree: None,
            stabilities: Vec::new(),
        });
    }

    let core = core_distances(points, params.min_samples);
    let mst = mst_prim(points, &core);
    let merges = single_linkage(n, &mst);
    let tree = condense(n, &merges, params.min_cluster_size);
    let stab = stabilities(&tree);
    let selected = select_clusters(&tree, &stab);

    // label clusters by their smallest member so numbering is order-stable
    let mut chosen: Vec<usize> = (0..selected.len()).filter(|&c| selected[c]).collect();
    chosen.sort_by_key(|&c| tree.clusters[c].members[0]);
    let mut label_of = vec![None; selected.len()];
    for (label, &c) in chosen.iter().enumerate() {
        label_of[c] = Some(label);
    }

    let labels = tree
        .fallout
        .iter()
        .map(|&(c, _)| {
            let mut cur = Some(c);
            while let Some(x) = cur {
                if let Some(l) = label_of[x] {
                    return PointLabel::Cluster(l);
                }
                cur = tree.clusters[x].parent;
            }
            PointLabel::Noise
        })
        .collect();

    Ok(HdbscanResult {
        labels,
        n_clusters: chosen.len(),
        core_distances: core,
        mst,
        tree: Some(tree),
        stabilities: stab,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut pts = Vec::new();
        for center in [[0.0, 0.0], [10.0, 0.0]] {
            for _ in 0..50 {
                pts.push([center[0] + noise.sample(&mut rng), center[1] + noise.sample(&mut rng)]);
            }
        }
        pts
    }

    #[test]
    fn two_blobs_two_clusters() {
        let r = hdbscan(&blobs(1), HdbscanParams::default()).unwrap();
        assert_eq!(r.n_clusters, 2);
        let a = r.labels[0];
        let b = r.labels[50];
        assert_ne!(a, b);
        assert!(r.labels[..50].iter().all(|&l| l == a || l == PointLabel::Noise));
        assert!(r.labels[50..].iter().all(|&l| l == b || l == PointLabel::Noise));
    }

    #[test]
    fn identical_points_single_cluster() {
        let r = hdbscan(&vec![[0.5, 0.5]; 12], HdbscanParams::default()).unwrap();
        assert_eq!(r.n_clusters, 1);
        assert!(r.labels.iter().all(|&l| l == PointLabel::Cluster(0)));
    }

    #[test]
    fn too_few_points_all_noise() {
        let r = hdbscan(&[[0.0, 0.0], [1.0, 1.0]], HdbscanParams::default()).unwrap();
        assert!(r.labels.iter().all(|&l| l == PointLabel::Noise));
        assert!(hdbscan(&[], HdbscanParams::default()).unwrap().labels.is_empty());
    }

    #[test]
    fn params_validated() {
        let p = HdbscanParams {
            min_cluster_size: 1,
            min_samples: 5,
        };
        assert!(matches!(hdbscan(&[[0.0, 0.0]], p), Err(CoreError::Config(_))));
    }

    #[test]
    fn merge_heights_monotone_and_clusters_large_enough() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let pts: Vec<[f64; 2]> = (0..60).map(|_| [rng.random(), rng.random()]).collect();
            let params = HdbscanParams::default();
            let core = core_distances(&pts, params.min_samples);
            let merges = single_linkage(pts.len(), &mst_prim(&pts, &core));
            assert!(merges.windows(2).all(|w| w[0].height <= w[1].height));
            let r = hdbscan(&pts, params).unwrap();
            for c in 0..r.n_clusters {
                let size = r.labels.iter().filter(|&&l| l == PointLabel::Cluster(c)).count();
                assert!(size >= params.min_cluster_size);
            }
        }
    }

    #[test]
    fn core_distance_counts_self() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]];
        assert_eq!(core_distances(&pts, 2), vec![1.0, 1.0, 2.0]);
    }
}
