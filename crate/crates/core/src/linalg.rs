//! Thin wrappers over nalgebra for the dense complex linear algebra used by
//! the Gram and determinant computations.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn hermitian_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let v = hermitian_eigenvalues(m);
    (v[0], v[v.len() - 1])
}

/// Determinant of a square complex matrix via partial-pivot LU.
pub fn complex_det(m: &DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Smallest singular value of a complex matrix.
pub fn min_singular_value(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(2.0, 0.0),
            ],
        );
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
        assert!(hermitian_defect(&m) < 1e-15);
        assert!((min_singular_value(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_two_by_two() {
        let one = Complex64::new(1.0, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[one, one, one, Complex64::new(-1.0, 0.0)]);
        assert!((complex_det(&m) - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
    }
}
