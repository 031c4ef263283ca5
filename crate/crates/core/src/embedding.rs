//! Classical (Torgerson) multidimensional scaling into the plane.
//!
//! Given dissimilarities `D`, form `B = -1/2 · J D⁽²⁾ J` with the centering
//! matrix `J = I - 11ᵀ/n`, take its two leading eigenpairs and scale the
//! eigenvectors by `√λ`. For a Euclidean `D` of planar points this recovers
//! the configuration up to rotation and reflection.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::context::DistanceMatrix;
use crate::error::{Error, Result};

/// Maximum accepted `‖Bv − λv‖ / ‖B‖` for the two leading eigenpairs.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub labels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    /// Full spectrum of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Leading eigenvalues that were negative and treated as zero.
    pub clamped_negatives: usize,
}

impl Embedding2D {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.coords.len().max(1) as f64;
        let (sx, sy) = self
            .coords
            .iter()
            .fold((0.0, 0.0), |(sx, sy), c| (sx + c[0], sy + c[1]));
        [sx / n, sy / n]
    }

    /// Euclidean distance between points `i` and `j` of the configuration.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords[i], self.coords[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("term\tx\ty\n");
        for (label, c) in self.labels.iter().zip(&self.coords) {
            let _ = writeln!(out, "{label}\t{}\t{}", c[0], c[1]);
        }
        out
    }
}

fn check_input(d: &DistanceMatrix) -> Result<()> {
    let n = d.order();
    if n < 3 {
        return Err(Error::Contract(format!(
            "classical scaling needs at least 3 points, got {n}"
        )));
    }
    for i in 0..n {
        if d.get(i, i) != 0.0 {
            return Err(Error::Contract(format!("nonzero diagonal at {i}")));
        }
        for j in (i + 1)..n {
            let v = d.get(i, j);
            if !v.is_finite() {
                return Err(Error::Contract(format!("non-finite entry at ({i}, {j})")));
            }
            if v != d.get(j, i) {
                return Err(Error::Contract(format!("asymmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Double-centered matrix `-1/2 · J D⁽²⁾ J`.
pub fn double_center(d: &DistanceMatrix) -> DMatrix<f64> {
    let n = d.order();
    let sq = DMatrix::from_fn(n, n, |i, j| {
        let v = d.get(i, j);
        v * v
    });
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    // Restore exact symmetry lost to rounding order.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (b[(i, j)] + b[(j, i)]);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    b
}

pub fn classical_mds(d: &DistanceMatrix) -> Result<Embedding2D> {
    check_input(d)?;
    let n = d.order();
    let b = double_center(d);
    let norm = b.norm();

    let eig = SymmetricEigen::try_new(b.clone(), f64::EPSILON, 0).ok_or_else(|| {
        Error::Numerical(format!("symmetric eigensolver did not converge (n = {n})"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }

    let mut coords = vec![[0.0f64; 2]; n];
    let mut clamped_negatives = 0;
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(2);
    for (axis, &col) in order.iter().take(2).enumerate() {
        let mut lambda = eig.eigenvalues[col];
        let mut v: DVector<f64> = eig.eigenvectors.column(col).into_owned();
        if norm > 0.0 {
            let mut residual = relative_residual(&b, &v, lambda, norm);
            if residual > RESIDUAL_TOLERANCE {
                (lambda, v) = refine(&b, lambda, v, &accepted, norm);
                residual = relative_residual(&b, &v, lambda, norm);
            }
            if residual > RESIDUAL_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "eigenpair {axis} residual {residual:e} exceeds {RESIDUAL_TOLERANCE:e} (n = {n}, λ = {lambda})"
                )));
            }
        }
        if lambda < 0.0 {
            clamped_negatives += 1;
        }
        let scale = lambda.max(0.0).sqrt();
        let sign = canonical_sign(v.as_slice());
        for (i, c) in coords.iter_mut().enumerate() {
            c[axis] = sign * scale * v[i];
        }
        eigenvalues[axis] = lambda;
        accepted.push(v);
    }

    Ok(Embedding2D {
        labels: d.labels().to_vec(),
        coords,
        eigenvalues,
        clamped_negatives,
    })
}

fn relative_residual(b: &DMatrix<f64>, v: &DVector<f64>, lambda: f64, norm: f64) -> f64 {
    (b * v - v * lambda).norm() / norm
}

/// Polishes an eigenpair by shifted inverse iteration, keeping the vector
/// orthogonal to the pairs already accepted. The QR eigensolver can return
/// accurate eigenvalues with loose eigenvectors on clustered spectra.
fn refine(
    b: &DMatrix<f64>,
    mut lambda: f64,
    mut v: DVector<f64>,
    accepted: &[DVector<f64>],
    norm: f64,
) -> (f64, DVector<f64>) {
    let n = b.nrows();
    for _ in 0..6 {
        let mut shift = lambda;
        let mut solved = None;
        for _ in 0..4 {
            let shifted = b - DMatrix::identity(n, n) * shift;
            solved = shifted.lu().solve(&v);
            if solved
                .as_ref()
                .is_some_and(|x| x.iter().all(|e| e.is_finite()))
            {
                break;
            }
            shift += norm * 1e-13 * (1.0 + shift.abs());
            solved = None;
        }
        let Some(mut x) = solved else { break };
        for u in accepted {
            let p = u.dot(&x);
            x.axpy(-p, u, 1.0);
        }
        let len = x.norm();
        if !len.is_finite() || len <= 0.0 {
            break;
        }
        x /= len;
        lambda = x.dot(&(b * &x));
        v = x;
        if relative_residual(b, &v, lambda, norm) <= RESIDUAL_TOLERANCE * 1e-2 {
            break;
        }
    }
    (lambda, v)
}

/// Sign that makes the entry of largest magnitude positive; the first such
/// entry wins ties.
fn canonical_sign(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    fn from_points(points: &[[f64; 2]]) -> DistanceMatrix {
        let n = points.len();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (points[i], points[j]);
                e[i * n + j] = (a[0] - b[0]).hypot(a[1] - b[1]);
            }
        }
        DistanceMatrix::from_entries(labels(n), e).unwrap()
    }

    #[test]
    fn zero_matrix_collapses_to_origin() {
        let d = DistanceMatrix::from_entries(labels(3), vec![0.0; 9]).unwrap();
        let e = classical_mds(&d).unwrap();
        assert!(e.coords.iter().all(|c| c[0] == 0.0 && c[1] == 0.0));
    }

    #[test]
    fn equilateral_triangle() {
        let mut e = vec![1.0; 9];
        for i in 0..3 {
            e[i * 3 + i] = 0.0;
        }
        let d = DistanceMatrix::from_entries(labels(3), e).unwrap();
        let emb = classical_mds(&d).unwrap();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!((emb.distance(i, j) - 1.0).abs() < 1e-6);
            }
        }
        let c = emb.centroid();
        assert!(c[0].abs() < 1e-9 && c[1].abs() < 1e-9);
    }

    #[test]
    fn contract_violations() {
        let d = DistanceMatrix::from_entries(
            labels(3),
            vec![0.0, 1.0, 1.0, 0.9, 0.0, 1.0, 1.0, 1.0, 0.0],
        )
        .unwrap();
        assert!(matches!(classical_mds(&d), Err(Error::Contract(_))));
        let d = DistanceMatrix::from_entries(
            labels(3),
            vec![0.1, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0],
        )
        .unwrap();
        assert!(matches!(classical_mds(&d), Err(Error::Contract(_))));
        let d = DistanceMatrix::from_entries(labels(2), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(classical_mds(&d), Err(Error::Contract(_))));
    }

    #[test]
    fn non_euclidean_input_is_clamped_not_rejected() {
        // Four points with one huge "shortcut" violate the triangle inequality.
        let e = vec![
            0.0, 1.0, 1.0, 5.0, //
            1.0, 0.0, 1.0, 1.0, //
            1.0, 1.0, 0.0, 1.0, //
            5.0, 1.0, 1.0, 0.0,
        ];
        let d = DistanceMatrix::from_entries(labels(4), e).unwrap();
        let emb = classical_mds(&d).unwrap();
        assert!(emb.eigenvalues.last().unwrap() < &0.0);
        assert!(emb.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn planar_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let d = from_points(&pts);
        let emb = classical_mds(&d).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                assert!((emb.distance(i, j) - d.get(i, j)).abs() < 1e-6);
            }
        }
        let l1 = emb.eigenvalues[0];
        assert!(emb.eigenvalues[2..].iter().all(|l| l.abs() <= 1e-8 * l1));
        assert_eq!(emb.clamped_negatives, 0);
    }

    #[test]
    fn axes_are_canonically_oriented() {
        let pts = [[3.0, 0.0], [-1.0, 0.5], [-1.0, -0.5], [-1.0, 0.0]];
        let emb = classical_mds(&from_points(&pts)).unwrap();
        for axis in 0..2 {
            let best = emb.coords.iter().map(|c| c[axis]).fold(0.0f64, |m, v| {
                if v.abs() > m.abs() {
                    v
                } else {
                    m
                }
            });
            assert!(best > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn permutation_equivariance(seed in 0u64..1000, n in 3usize..15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.reverse();
            perm.rotate_left(seed as usize % n);
            let permuted: Vec<[f64; 2]> = perm.iter().map(|&i| pts[i]).collect();
            let a = classical_mds(&from_points(&pts)).unwrap();
            let b = classical_mds(&from_points(&permuted)).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((a.distance(perm[i], perm[j]) - b.distance(i, j)).abs() < 1e-6);
                }
            }
            let c = b.centroid();
            prop_assert!(c[0].abs() < 1e-9 && c[1].abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_recovers_perturbed_eigenvectors() {
        // Diagonal matrix with a tight cluster; the exact eigenvectors are
        // the unit vectors.
        let diag = [3.0, 1.0, 0.999, 0.5, -0.2];
        let b = DMatrix::from_fn(5, 5, |i, j| if i == j { diag[i] } else { 0.0 });
        let norm = b.norm();
        let mut v = DVector::from_vec(vec![1e-4, 1.0, 3e-3, -2e-4, 1e-4]);
        v /= v.norm();
        assert!(relative_residual(&b, &v, 1.0, norm) > RESIDUAL_TOLERANCE);
        let e0 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let (lambda, w) = refine(&b, 1.0, v, &[e0], norm);
        assert!(relative_residual(&b, &w, lambda, norm) <= RESIDUAL_TOLERANCE);
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!(w[0].abs() < 1e-12);
    }
}
