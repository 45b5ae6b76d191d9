//! Thin wrappers around nalgebra's Hermitian eigensolvers that return
//! eigenpairs sorted by ascending eigenvalue.

use nalgebra::{ComplexField, DMatrix, RealField};
use num_complex::Complex64;

/// Ascending eigen-decomposition of a real symmetric matrix. Column `j` of the
/// returned matrix is the unit eigenvector of eigenvalue `j`.
pub fn eigh_real(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    sorted(matrix.symmetric_eigen())
}

/// Ascending eigen-decomposition of a complex Hermitian matrix.
pub fn eigh_complex(matrix: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    sorted(matrix.symmetric_eigen())
}

/// Eigenvalues only, ascending.
pub fn eigvalsh_real(matrix: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn eigvalsh_complex(matrix: DMatrix<Complex64>) -> Vec<f64> {
    let mut values: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn sorted<T>(eig: nalgebra::SymmetricEigen<T, nalgebra::Dyn>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
    f64: RealField,
{
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    (values, vectors)
}
