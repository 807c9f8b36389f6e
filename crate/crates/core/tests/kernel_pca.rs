mod oracles;

use ctxscope_core::corpus::ItemId;
use ctxscope_core::embedding::EmbeddingVector;
use ctxscope_core::projection::{fit_kernel_pca, project};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn random_set(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| (0..dim).map(|_| normal.sample(rng)).collect()).collect()
}

fn to_embeddings(raw: &[Vec<f64>]) -> Vec<EmbeddingVector> {
    raw.iter().map(|v| EmbeddingVector(v.clone()).normalized().unwrap()).collect()
}

fn ids(n: usize) -> Vec<ItemId> {
    (0..n).map(|i| ItemId(format!("I{i:06}"))).collect()
}

/// Flips each oracle axis to agree in sign with the fitted one.
fn align(fit: &[[f64; 2]], oracle: &[[f64; 2]]) -> [f64; 2] {
    let mut signs = [1.0; 2];
    for (axis, s) in signs.iter_mut().enumerate() {
        let dot: f64 = fit.iter().zip(oracle).map(|(a, b)| a[axis] * b[axis]).sum();
        if dot < 0.0 {
            *s = -1.0;
        }
    }
    signs
}

#[test]
fn fitted_coordinates_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..20 {
        let raw = random_set(&mut rng, 10, 16);
        let emb = to_embeddings(&raw);
        let model = fit_kernel_pca(0, &ids(10), &emb).unwrap();
        let oracle = oracles::kpca_oracle(&raw);
        let signs = align(&model.coords, &oracle.coords);
        for (i, (got, want)) in model.coords.iter().zip(&oracle.coords).enumerate() {
            for axis in 0..2 {
                let diff = (got[axis] - signs[axis] * want[axis]).abs();
                assert!(diff < 1e-6, "case {case} point {i} axis {axis}: {} vs {}", got[axis], want[axis]);
            }
        }
    }
}

#[test]
fn nystrom_reproduces_training_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let emb = to_embeddings(&random_set(&mut rng, 10, 16));
        let model = fit_kernel_pca(3, &ids(10), &emb).unwrap();
        for (i, e) in emb.iter().enumerate() {
            let p = project(&model, &emb, e).unwrap();
            assert!((p[0] - model.coords[i][0]).abs() < 1e-6);
            assert!((p[1] - model.coords[i][1]).abs() < 1e-6);
        }
    }
}

#[test]
fn held_out_projection_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let raw = random_set(&mut rng, 13, 16);
        let (train_raw, held_raw) = raw.split_at(10);
        let train = to_embeddings(train_raw);
        let model = fit_kernel_pca(1, &ids(10), &train).unwrap();
        let oracle = oracles::kpca_oracle(train_raw);
        let signs = align(&model.coords, &oracle.coords);
        for q in held_raw {
            let got = project(&model, &train, &EmbeddingVector(q.clone()).normalized().unwrap()).unwrap();
            let want = oracles::nystrom_oracle(&oracle, train_raw, q);
            for axis in 0..2 {
                assert!((got[axis] - signs[axis] * want[axis]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn oracle_eigenpairs_are_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m: Vec<Vec<f64>> = {
        let r = random_set(&mut rng, 6, 6);
        (0..6).map(|i| (0..6).map(|j| r[i][j] + r[j][i]).collect()).collect()
    };
    for (lambda, v) in oracles::jacobi_eigen(&m) {
        for i in 0..6 {
            let mv: f64 = (0..6).map(|j| m[i][j] * v[j]).sum();
            assert!((mv - lambda * v[i]).abs() < 1e-10);
        }
    }
}
