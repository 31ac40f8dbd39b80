//! Small dense linear algebra: cyclic Jacobi eigen-decomposition of symmetric
//! matrices and the symmetric bilinear form evaluator used by every metric.

use nalgebra::DMatrix;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl SymmetricEigen {
    pub fn min(&self) -> Option<(f64, Vec<f64>)> {
        self.values
            .first()
            .map(|&v| (v, self.vectors.column(0).iter().copied().collect()))
    }

    pub fn max(&self) -> Option<(f64, Vec<f64>)> {
        let n = self.values.len();
        (n > 0).then(|| {
            (
                self.values[n - 1],
                self.vectors.column(n - 1).iter().copied().collect(),
            )
        })
    }
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Cyclic Jacobi rotations. The input is symmetrized first; sweeps stop once
/// the off-diagonal Frobenius norm falls below `1e-15` times the matrix norm.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m = symmetrize(a);
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |row, col| v[(row, order[col])]);
    SymmetricEigen { values, vectors }
}

/// Evaluates `Σ G_ij v_i w_j` as a form that is exactly symmetric in `(v, w)`
/// regardless of rounding: off-diagonal terms use the commutative pair sum
/// `v_i w_j + v_j w_i` against `(G_ij + G_ji) / 2`.
pub fn symmetric_form(g: &DMatrix<f64>, v: &[f64], w: &[f64]) -> f64 {
    let n = g.nrows();
    debug_assert_eq!(v.len(), n);
    debug_assert_eq!(w.len(), n);
    let mut acc = 0.0;
    for i in 0..n {
        acc += g[(i, i)] * (v[i] * w[i]);
        for j in (i + 1)..n {
            let gij = 0.5 * (g[(i, j)] + g[(j, i)]);
            acc += gij * (v[i] * w[j] + v[j] * w[i]);
        }
    }
    acc
}

/// `Jᵀ G J`, the Gram matrix of a tensor pulled back through a linear map.
pub fn congruence(g: &DMatrix<f64>, j: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&(j.transpose() * g * j))
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_matrix_eigenvalues_sorted() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let e = jacobi_eigen(&a);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = jacobi_eigen(&a);
        assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], 3.0, epsilon = 1e-14);
        let (_, v) = e.min().unwrap();
        assert_relative_eq!(v[0].abs(), 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(v[1].abs(), 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn empty_matrix_has_no_eigenvalues() {
        let e = jacobi_eigen(&DMatrix::<f64>::zeros(0, 0));
        assert!(e.values.is_empty());
        assert!(e.min().is_none());
    }

    #[test]
    fn symmetric_form_is_exactly_symmetric() {
        let g = DMatrix::from_row_slice(2, 2, &[1.3, 0.7000000001, 0.7, 2.1]);
        let v = [0.1, 1e8];
        let w = [3.3, -1e-7];
        assert_eq!(symmetric_form(&g, &v, &w), symmetric_form(&g, &w, &v));
    }

    proptest! {
        #[test]
        fn reconstruction_matches_input(entries in prop::collection::vec(-5.0f64..5.0, 16)) {
            let raw = DMatrix::from_row_slice(4, 4, &entries);
            let a = symmetrize(&raw);
            let e = jacobi_eigen(&a);
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
            let rebuilt = &e.vectors * d * e.vectors.transpose();
            prop_assert!((rebuilt - &a).norm() <= 1e-10 * (1.0 + a.norm()));
            let orth = e.vectors.transpose() * &e.vectors - DMatrix::<f64>::identity(4, 4);
            prop_assert!(orth.norm() <= 1e-12);
            for k in 1..4 {
                prop_assert!(e.values[k - 1] <= e.values[k]);
            }
        }
    }
}
