//! Per-topic 2D coordinates from kernel PCA with a cosine kernel, plus the
//! Nyström extension for projecting unseen items onto a fitted model.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::corpus::ItemId;
use crate::embedding::{cosine, EmbeddingVector};
use crate::error::{CoreError, Result};

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITERS: usize = 10_000;
const RESIDUAL_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionModel {
    pub topic_id: usize,
    pub training_ids: Vec<ItemId>,
    pub kernel_row_means: Vec<f64>,
    pub kernel_grand_mean: f64,
    /// Top two eigenvalues of the centered kernel, `λ1 ≥ λ2 ≥ 0`.
    pub eigenvalues: [f64; 2],
    pub eigenvectors: [Vec<f64>; 2],
    /// Fitted coordinates aligned with `training_ids`.
    pub coords: Vec<[f64; 2]>,
}

impl ProjectionModel {
    pub fn coord_of(&self, id: &ItemId) -> Option<[f64; 2]> {
        self.training_ids.iter().position(|t| t == id).map(|i| self.coords[i])
    }
}

pub fn cosine_kernel(embeddings: &[EmbeddingVector]) -> Result<DMatrix<f64>> {
    let n = embeddings.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s = cosine(&embeddings[i], &embeddings[j])?;
            k[(i, j)] = s;
            k[(j, i)] = s;
        }
    }
    Ok(k)
}

/// `K − rowmean − colmean + grandmean`, together with the row means and the
/// grand mean needed to center out-of-sample kernel rows.
pub fn double_center(k: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, f64) {
    let n = k.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let centered = DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - row_means[j] + grand);
    (centered, row_means, grand)
}

/// Flips `v` so that its largest-magnitude entry is positive; near-ties go to
/// the lowest index.
pub fn orient(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let lead = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)).expect("max exists");
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn fit_kernel_pca(topic_id: usize, ids: &[ItemId], embeddings: &[EmbeddingVector]) -> Result<ProjectionModel> {
    let n = embeddings.len();
    if n != ids.len() {
        return Err(CoreError::input("ids and embeddings differ in length"));
    }
    if n == 0 {
        return Err(CoreError::input("cannot fit a projection on an empty topic"));
    }
    if n == 1 {
        return Ok(ProjectionModel {
            topic_id,
            training_ids: ids.to_vec(),
            kernel_row_means: vec![1.0],
            kernel_grand_mean: 1.0,
            eigenvalues: [0.0, 0.0],
            eigenvectors: [vec![1.0], vec![0.0]],
            coords: vec![[0.0, 0.0]],
        });
    }

    let kernel = cosine_kernel(embeddings)?;
    let (centered, row_means, grand) = double_center(&kernel);
    let frob = centered.norm();

    let eig = SymmetricEigen::try_new(centered.clone(), EIGEN_EPS, EIGEN_MAX_ITERS)
        .ok_or(CoreError::Numerical { residual: f64::NAN })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let zero_tol = 1e-12 * frob.max(f64::MIN_POSITIVE);
    let mut eigenvalues = [0.0; 2];
    let mut eigenvectors: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for axis in 0..2 {
        let col = order[axis];
        let lambda = eig.eigenvalues[col];
        let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();

        let residual = (&centered * nalgebra::DVector::from_column_slice(&v)
            - nalgebra::DVector::from_column_slice(&v) * lambda)
            .norm();
        if residual > RESIDUAL_BOUND * frob.max(1.0) {
            return Err(CoreError::Numerical { residual });
        }
        orient(&mut v);
        eigenvalues[axis] = if lambda > zero_tol { lambda } else { 0.0 };
        eigenvectors[axis] = v;
    }

    let coords = (0..n)
        .map(|i| {
            [
                eigenvalues[0].sqrt() * eigenvectors[0][i],
                eigenvalues[1].sqrt() * eigenvectors[1][i],
            ]
        })
        .collect();

    Ok(ProjectionModel {
        topic_id,
        training_ids: ids.to_vec(),
        kernel_row_means: row_means,
        kernel_grand_mean: grand,
        eigenvalues,
        eigenvectors,
        coords,
    })
}

/// Nyström projection of `query` given the model's training embeddings.
pub fn project(model: &ProjectionModel, training: &[EmbeddingVector], query: &EmbeddingVector) -> Result<[f64; 2]> {
    let n = model.training_ids.len();
    if training.len() != n {
        return Err(CoreError::input(format!(
            "model has {n} training items but {} embeddings were supplied",
            training.len()
        )));
    }
    if let Some(first) = training.first() {
        if first.dim() != query.dim() {
            return Err(CoreError::input(format!(
                "dimension mismatch: model {} vs query {}",
                first.dim(),
                query.dim()
            )));
        }
    }
    let row: Vec<f64> = training.iter().map(|t| cosine(query, t)).collect::<Result<_>>()?;
    let row_mean = row.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = row
        .iter()
        .zip(&model.kernel_row_means)
        .map(|(k, m)| k - row_mean - m + model.kernel_grand_mean)
        .collect();

    let mut out = [0.0; 2];
    for axis in 0..2 {
        let lambda = model.eigenvalues[axis];
        if lambda > 0.0 {
            let dot: f64 = centered.iter().zip(&model.eigenvectors[axis]).map(|(k, v)| k * v).sum();
            out[axis] = dot / lambda.sqrt();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(n: usize) -> Vec<ItemId> {
        (0..n).map(|i| ItemId(format!("I{i}"))).collect()
    }

    fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
        EmbeddingVector((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
            .normalized()
            .unwrap()
    }

    #[test]
    fn identical_embeddings_project_to_origin() {
        let e = vec![EmbeddingVector(vec![0.6, 0.8]); 5];
        let m = fit_kernel_pca(0, &ids(5), &e).unwrap();
        assert!(m.coords.iter().all(|c| c[0].abs() < 1e-12 && c[1].abs() < 1e-12));
        assert_eq!(m.eigenvalues, [0.0, 0.0]);
    }

    #[test]
    fn two_items_symmetric_on_first_axis() {
        let e = vec![
            EmbeddingVector(vec![1.0, 0.0, 0.0]),
            EmbeddingVector(vec![0.6, 0.8, 0.0]),
        ];
        let m = fit_kernel_pca(0, &ids(2), &e).unwrap();
        assert!((m.coords[0][0] + m.coords[1][0]).abs() < 1e-9);
        assert!(m.coords[0][0] > 0.0);
        assert_eq!(m.eigenvalues[1], 0.0);
        assert!(m.coords.iter().all(|c| c[1] == 0.0));
    }

    #[test]
    fn single_item_at_origin() {
        let m = fit_kernel_pca(3, &ids(1), &[EmbeddingVector(vec![1.0, 0.0])]).unwrap();
        assert_eq!(m.coords, vec![[0.0, 0.0]]);
    }

    #[test]
    fn centering_and_eigen_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e: Vec<_> = (0..30).map(|_| random_unit(&mut rng, 12)).collect();
        let k = cosine_kernel(&e).unwrap();
        let (c, _, _) = double_center(&k);
        for j in 0..30 {
            assert!(c.column(j).sum().abs() <= 1e-8 * 30.0);
        }
        let m = fit_kernel_pca(0, &ids(30), &e).unwrap();
        assert!(m.eigenvalues[0] >= m.eigenvalues[1] && m.eigenvalues[1] >= 0.0);
        let [v1, v2] = &m.eigenvectors;
        let dot: f64 = v1.iter().zip(v2).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-9);
        for v in [v1, v2] {
            assert!((v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
            let dv = nalgebra::DVector::from_column_slice(v);
            let lambda = if v == v1 { m.eigenvalues[0] } else { m.eigenvalues[1] };
            assert!((&c * &dv - &dv * lambda).norm() <= 1e-8 * c.norm());
        }
    }

    #[test]
    fn projection_reproduces_training_coords() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let e: Vec<_> = (0..15).map(|_| random_unit(&mut rng, 10)).collect();
        let m = fit_kernel_pca(0, &ids(15), &e).unwrap();
        for (i, emb) in e.iter().enumerate() {
            let p = project(&m, &e, emb).unwrap();
            assert!((p[0] - m.coords[i][0]).abs() < 1e-6);
            assert!((p[1] - m.coords[i][1]).abs() < 1e-6);
        }
    }

    #[test]
    fn null_axis_projects_to_zero() {
        let e = vec![
            EmbeddingVector(vec![1.0, 0.0]),
            EmbeddingVector(vec![0.0, 1.0]),
        ];
        let m = fit_kernel_pca(0, &ids(2), &e).unwrap();
        assert_eq!(m.eigenvalues[1], 0.0);
        let p = project(&m, &e, &EmbeddingVector(vec![0.3, 0.9])).unwrap();
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let e = vec![EmbeddingVector(vec![1.0, 0.0]), EmbeddingVector(vec![0.0, 1.0])];
        let m = fit_kernel_pca(0, &ids(2), &e).unwrap();
        assert!(matches!(
            project(&m, &e, &EmbeddingVector(vec![1.0, 0.0, 0.0])),
            Err(CoreError::Input(_))
        ));
    }

    #[test]
    fn orientation_makes_largest_entry_positive() {
        let mut v = vec![0.1, -0.9, 0.3];
        orient(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }
}
