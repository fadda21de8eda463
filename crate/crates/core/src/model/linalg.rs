//! Symmetric-matrix kernels: spectral square root and extreme eigenvalues.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub type Mat = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
}

/// Frobenius norm ‖A‖ = sqrt(trace AAᵀ).
pub fn frobenius(a: &Mat) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Default PSD tolerance 1e-9·(1+‖A‖).
pub fn psd_tolerance(a: &Mat) -> f64 {
    1e-9 * (1.0 + frobenius(a))
}

pub fn symmetry_defect(a: &Mat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn is_diagonal(a: &Mat) -> bool {
    let n = a.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == 0.0))
}

fn check_symmetric(a: &Mat, tol: f64) -> Result<(), LinalgError> {
    let defect = symmetry_defect(a);
    if defect > tol {
        Err(LinalgError::NotSymmetric { defect })
    } else {
        Ok(())
    }
}

/// Eigenvalues of the symmetrised matrix in ascending order.
pub fn eigenvalues(a: &Mat, tol: f64) -> Result<Vec<f64>, LinalgError> {
    check_symmetric(a, tol)?;
    let mut vals: Vec<f64> = if is_diagonal(a) {
        a.diagonal().iter().copied().collect()
    } else {
        let s = (a + a.transpose()) * 0.5;
        SymmetricEigen::new(s).eigenvalues.iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn lambda_max(a: &Mat) -> Result<f64, LinalgError> {
    let vals = eigenvalues(a, psd_tolerance(a))?;
    Ok(*vals.last().expect("non-empty matrix"))
}

pub fn lambda_min(a: &Mat) -> Result<f64, LinalgError> {
    let vals = eigenvalues(a, psd_tolerance(a))?;
    Ok(vals[0])
}

/// Symmetric PSD square root via spectral decomposition; eigenvalues in
/// `[-tol, 0)` are clamped to zero.
pub fn sqrt_psd(a: &Mat, tol: f64) -> Result<Mat, LinalgError> {
    check_symmetric(a, tol)?;
    let n = a.nrows();
    if is_diagonal(a) {
        let mut r = Mat::zeros(n, n);
        for i in 0..n {
            let v = a[(i, i)];
            if v < -tol {
                return Err(LinalgError::NotPsd { min_eigenvalue: v });
            }
            r[(i, i)] = v.max(0.0).sqrt();
        }
        return Ok(r);
    }
    let s = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(LinalgError::NotPsd { min_eigenvalue: min });
    }
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    let r = scaled * q.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Mat {
        let n = rows.len();
        Mat::from_fn(n, n, |i, j| rows[i][j])
    }

    #[test]
    fn sqrt_examples() {
        let id = Mat::identity(3, 3);
        assert_eq!(sqrt_psd(&id, 1e-9).unwrap(), id);
        let r = sqrt_psd(&m(&[&[4.0, 0.0], &[0.0, 9.0]]), 1e-9).unwrap();
        assert_eq!(r, m(&[&[2.0, 0.0], &[0.0, 3.0]]));
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = sqrt_psd(&a, 1e-9).unwrap();
        assert!(frobenius(&(&r * &r - &a)) < 1e-12);
        let ev = eigenvalues(&r, 1e-12).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        let a = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            sqrt_psd(&a, 1e-9),
            Err(LinalgError::NotPsd { min_eigenvalue }) if (min_eigenvalue + 1.0).abs() < 1e-12
        ));
        let a = m(&[&[1.0, 0.5], &[0.0, 1.0]]);
        assert!(matches!(lambda_max(&a), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn singular_psd_is_supported() {
        let a = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let r = sqrt_psd(&a, 1e-9).unwrap();
        assert!(frobenius(&(&r * &r - &a)) < 1e-12);
        assert_eq!(sqrt_psd(&Mat::zeros(2, 2), 1e-9).unwrap(), Mat::zeros(2, 2));
    }

    #[test]
    fn lambda_max_examples() {
        assert_eq!(lambda_max(&Mat::identity(3, 3)).unwrap(), 1.0);
        let d = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 5.0, 2.0]));
        assert_eq!(lambda_max(&d).unwrap(), 5.0);
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((lambda_max(&a).unwrap() - 3.0).abs() < 1e-12);
        assert!((lambda_min(&a).unwrap() - 1.0).abs() < 1e-12);
    }
}
