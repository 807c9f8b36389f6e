//! Independent reference computations used to check the library. Nothing here
//! calls into the code paths it is checking.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
/// Returns eigenpairs sorted by descending eigenvalue; vectors are columns.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let frob: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|j| (m[j][j], v.iter().map(|row| row[j]).collect())).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let p = b[0].len();
    (0..n)
        .map(|i| (0..p).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub struct KpcaOracle {
    pub kernel: Vec<Vec<f64>>,
    pub eigen: Vec<(f64, Vec<f64>)>,
    pub coords: Vec<[f64; 2]>,
}

/// Kernel PCA by the textbook route: `K' = H K H` with `H = I − 11ᵀ/n`,
/// full Jacobi eigendecomposition, scores `√λ·v`.
pub fn kpca_oracle(emb: &[Vec<f64>]) -> KpcaOracle {
    let n = emb.len();
    let k: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| cos(&emb[i], &emb[j])).collect()).collect();
    let h: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64).collect())
        .collect();
    let centered = matmul(&matmul(&h, &k), &h);
    let eigen = jacobi_eigen(&centered);
    let coords = (0..n)
        .map(|i| {
            let mut c = [0.0; 2];
            for (axis, slot) in c.iter_mut().enumerate() {
                let (lambda, v) = &eigen[axis];
                *slot = lambda.max(0.0).sqrt() * v[i];
            }
            c
        })
        .collect();
    KpcaOracle { kernel: k, eigen, coords }
}

/// Nyström coordinates by the matrix route `(kᵀ − 1ᵀK/n) H v / √λ`.
pub fn nystrom_oracle(o: &KpcaOracle, emb: &[Vec<f64>], query: &[f64]) -> [f64; 2] {
    let n = emb.len();
    let k: Vec<f64> = emb.iter().map(|e| cos(query, e)).collect();
    let col_means: Vec<f64> = (0..n).map(|j| (0..n).map(|i| o.kernel[i][j]).sum::<f64>() / n as f64).collect();
    let r: Vec<f64> = (0..n).map(|i| k[i] - col_means[i]).collect();
    let r_mean = r.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = r.iter().map(|x| x - r_mean).collect();
    let mut out = [0.0; 2];
    for (axis, slot) in out.iter_mut().enumerate() {
        let (lambda, v) = &o.eigen[axis];
        if *lambda > 1e-12 {
            *slot = centered.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / lambda.sqrt();
        }
    }
    out
}

pub fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn core_distances_brute(points: &[[f64; 2]], min_samples: usize) -> Vec<f64> {
    points
        .iter()
        .map(|&p| {
            let mut d: Vec<f64> = points.iter().map(|&q| euclid(p, q)).collect();
            d.sort_by(f64::total_cmp);
            d[min_samples.min(points.len()) - 1]
        })
        .collect()
}

pub fn mutual_reachability_matrix(points: &[[f64; 2]], min_samples: usize) -> Vec<Vec<f64>> {
    let core = core_distances_brute(points, min_samples);
    let n = points.len();
    (0..n)
        .map(|i| (0..n).map(|j| euclid(points[i], points[j]).max(core[i]).max(core[j])).collect())
        .collect()
}

/// Kruskal over all pairs; returns the sorted edge weights of the MST.
pub fn kruskal_weights(mr: &[Vec<f64>]) -> Vec<f64> {
    let n = mr.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((mr[i][j], i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut out = Vec::new();
    for (w, a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            out.push(w);
        }
    }
    out
}

fn lambda_of(h: f64) -> f64 {
    1.0 / h.max(1e-300)
}

/// Connected components of `set` using only edges with weight `< h`.
fn components_below(mr: &[Vec<f64>], set: &[usize], h: f64) -> Vec<Vec<usize>> {
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut comps = Vec::new();
    for &s in set {
        if seen.contains(&s) {
            continue;
        }
        let mut comp = vec![s];
        seen.insert(s);
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            for &y in set {
                if !seen.contains(&y) && mr[x][y] < h {
                    seen.insert(y);
                    comp.push(y);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Smallest threshold at which `set` is connected.
fn connect_height(mr: &[Vec<f64>], set: &[usize]) -> f64 {
    let mut candidates: Vec<f64> = set.iter().flat_map(|&i| set.iter().map(move |&j| (i, j))).filter(|(i, j)| i < j).map(|(i, j)| mr[i][j]).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for h in candidates {
        if components_below(mr, set, f64::from_bits(h.to_bits() + 1)).len() == 1 {
            return h;
        }
    }
    0.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleTree {
    /// cluster members -> (birth λ, parent members)
    pub clusters: BTreeMap<Vec<usize>, (f64, Option<Vec<usize>>)>,
    /// point -> (members of the cluster it leaves, λ)
    pub fallout: HashMap<usize, (Vec<usize>, f64)>,
}

/// Condensed tree by recursive splitting of single-linkage clusters computed
/// straight from the mutual-reachability matrix.
pub fn condensed_tree_brute(mr: &[Vec<f64>], min_cluster_size: usize) -> OracleTree {
    let n = mr.len();
    let all: Vec<usize> = (0..n).collect();
    let mut tree = OracleTree {
        clusters: BTreeMap::new(),
        fallout: HashMap::new(),
    };
    tree.clusters.insert(all.clone(), (0.0, None));
    let mut stack: Vec<(Vec<usize>, Vec<usize>)> = vec![(all.clone(), all)];
    while let Some((set, cluster)) = stack.pop() {
        let h = connect_height(mr, &set);
        let lambda = lambda_of(h);
        let comps = components_below(mr, &set, h);
        let (large, small): (Vec<_>, Vec<_>) = comps.into_iter().partition(|c| c.len() >= min_cluster_size);
        for c in small {
            for p in c {
                tree.fallout.insert(p, (cluster.clone(), lambda));
            }
        }
        match large.len() {
            0 => {}
            1 => stack.push((large[0].clone(), cluster)),
            _ => {
                for c in large {
                    tree.clusters.insert(c.clone(), (lambda, Some(cluster.clone())));
                    stack.push((c.clone(), c));
                }
            }
        }
    }
    tree
}

/// Reference squarified treemap: recursive, with the closed-form worst ratio
/// `max(w²·r⁺/s², s²/(w²·r⁻))`.
pub fn squarify_reference(values: &[f64], x: f64, y: f64, w: f64, h: f64) -> Vec<[f64; 4]> {
    let total: f64 = values.iter().sum();
    let areas: Vec<f64> = values.iter().map(|v| v * w * h / total).collect();
    let mut out = Vec::new();
    recurse(&areas, x, y, w, h, &mut out);
    out
}

fn worst(row: &[f64], side: f64) -> f64 {
    let s: f64 = row.iter().sum();
    let rmax = row.iter().copied().fold(f64::MIN, f64::max);
    let rmin = row.iter().copied().fold(f64::MAX, f64::min);
    (side * side * rmax / (s * s)).max(s * s / (side * side * rmin))
}

fn recurse(areas: &[f64], x: f64, y: f64, w: f64, h: f64, out: &mut Vec<[f64; 4]>) {
    if areas.is_empty() {
        return;
    }
    if areas.len() == 1 {
        out.push([x, y, w, h]);
        return;
    }
    let side = w.min(h);
    let mut i = 1;
    while i < areas.len() && worst(&areas[..i], side) >= worst(&areas[..=i], side) {
        i += 1;
    }
    let s: f64 = areas[..i].iter().sum();
    if w >= h {
        let cw = s / h;
        let mut cy = y;
        for &a in &areas[..i] {
            out.push([x, cy, cw, a / cw]);
            cy += a / cw;
        }
        recurse(&areas[i..], x + cw, y, w - cw, h, out);
    } else {
        let rh = s / w;
        let mut cx = x;
        for &a in &areas[..i] {
            out.push([cx, y, a / rh, rh]);
            cx += a / rh;
        }
        recurse(&areas[i..], x, y + rh, w, h - rh, out);
    }
}

/// Scores every document from scratch: raw token counts, textbook BM25 with a
/// non-negative idf, explicit cosine, per-query min-max. Returns `(doc, score)`
/// best first, ties by document id.
pub fn brute_force_rank(
    docs: &[Vec<String>],
    doc_ids: &[String],
    doc_vecs: &[Vec<f64>],
    query_tokens: &[String],
    query_vec: &[f64],
    alpha: f64,
    k1: f64,
    b: f64,
) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut terms: Vec<&String> = query_tokens.iter().collect();
    terms.sort();
    terms.dedup();
    let bm25: Vec<f64> = docs
        .iter()
        .map(|d| {
            let mut s = 0.0;
            for t in &terms {
                let tf = d.iter().filter(|x| x == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = docs.iter().filter(|o| o.contains(t)).count() as f64;
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0);
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * d.len() as f64 / avg));
            }
            s
        })
        .collect();
    let cosine: Vec<f64> = doc_vecs.iter().map(|v| cos(v, query_vec)).collect();
    let norm = |v: &[f64]| -> Vec<f64> {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.iter().map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }).collect()
    };
    let (c, m) = (norm(&cosine), norm(&bm25));
    let mut out: Vec<(String, f64)> = doc_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), alpha * c[i] + (1.0 - alpha) * m[i]))
        .collect();
    out.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    out
}

/// Rankings agree when ids match position by position, allowing swaps only
/// between entries whose oracle scores differ by less than `tol`. `oracle`
/// is the full ranking; `got` is compared against its prefix.
pub fn same_ranking(got: &[String], oracle: &[(String, f64)], tol: f64) -> Result<(), String> {
    let score: HashMap<&str, f64> = oracle.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    for (i, id) in got.iter().enumerate() {
        if *id == oracle[i].0 {
            continue;
        }
        let s = score[id.as_str()];
        if (s - oracle[i].1).abs() >= tol {
            return Err(format!("rank {i}: got {id} ({s}), oracle {} ({})", oracle[i].0, oracle[i].1));
        }
    }
    Ok(())
}
