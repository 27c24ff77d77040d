//! Thin helpers over `nalgebra` for the Hermitian and SVD computations used by
//! the positivity tests and the realization solver.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// Largest `|M_ij − conj(M_ji)|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M*)/2`.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Extreme eigenvalues of a Hermitian matrix.
pub fn eigen_range(m: &CMat) -> (f64, f64) {
    let (values, _) = hermitian_eigen(m);
    match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Closest matrix with orthonormal columns (unitary polar factor `U V*`).
pub fn polar_isometry(m: &CMat) -> CMat {
    if m.is_empty() {
        return m.clone();
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V*");
    u * v_t
}

/// Condition number of a Hermitian positive definite matrix.
pub fn hermitian_condition(m: &CMat) -> f64 {
    let (lo, hi) = eigen_range(m);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigen_of_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        assert_eq!(hermitian_defect(&m), 0.0);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let recon = &vecs
            * CMat::from_diagonal(&nalgebra::DVector::from_iterator(2, vals.iter().map(|&v| c(v, 0.0))))
            * vecs.adjoint();
        assert!((recon - m).norm() < 1e-13);
    }

    #[test]
    fn polar_factor_is_isometric() {
        let m = CMat::from_row_slice(
            3,
            2,
            &[
                c(1.0, 0.5),
                c(0.2, 0.0),
                c(0.0, -1.0),
                c(3.0, 0.1),
                c(0.4, 0.4),
                c(-1.0, 0.0),
            ],
        );
        let q = polar_isometry(&m);
        let g = q.adjoint() * &q;
        assert!((g - CMat::identity(2, 2)).norm() < 1e-14);
        assert!((operator_norm(&q) - 1.0).abs() < 1e-14);
    }
}
