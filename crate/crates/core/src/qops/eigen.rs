use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

use super::operator::Operator;
use super::state::StateVector;

/// Eigen-decomposition of a Hermitian operator.
///
/// Eigenvalues come back ascending; `vectors[k]` is the unit eigenvector
/// for `values[k]`. Input Hermiticity is checked against the default
/// `eigen_input` tolerance and the matrix is symmetrised before solving.
pub fn hermitian_eigensystem(op: &Operator) -> Result<(Vec<f64>, Vec<StateVector>)> {
    hermitian_eigensystem_tol(op, Tolerances::default().eigen_input)
}

pub fn hermitian_eigensystem_tol(
    op: &Operator,
    tol: f64,
) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let dev = op.hermiticity_error();
    if dev > tol {
        return Err(Error::NonHermitian { deviation: dev });
    }
    let n = op.dim();
    let m = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
        let z = 0.5 * (op.get(i, j) + op.get(j, i).conj());
        Complex::new(z.re, z.im)
    });
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("eigen solver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let col = eig.eigenvectors.column(k);
            StateVector::from_raw_unchecked(
                col.iter().map(|z| Complex64::new(z.re, z.im)).collect(),
            )
        })
        .collect();
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(op: &Operator) -> Result<Vec<f64>> {
    Ok(hermitian_eigensystem(op)?.0)
}
