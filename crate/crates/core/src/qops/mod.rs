//! Dense complex operator and state algebra.

mod eigen;
mod operator;
pub mod sparse;
mod state;

pub use eigen::{hermitian_eigensystem, hermitian_eigensystem_tol, hermitian_eigenvalues};
pub use operator::{kron, outer_product, sum, Operator};
pub use state::{expect, expect_pure, DensityMatrix, StateVector};
pub(crate) use state::expect_op;

/// Pauli X.
pub fn sigma_x() -> Operator {
    Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0])
        .unwrap()
        .with_label("X")
}

/// Standard Pauli Y, `[[0, -i], [i, 0]]`.
pub fn sigma_y() -> Operator {
    use num_complex::Complex64 as C;
    Operator::from_vec(
        2,
        vec![C::new(0.0, 0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(0.0, 0.0)],
    )
    .unwrap()
    .with_label("Y")
}

/// Pauli Z, `diag(1, -1)`.
pub fn sigma_z() -> Operator {
    Operator::from_real(2, &[1.0, 0.0, 0.0, -1.0])
        .unwrap()
        .with_label("Z")
}
