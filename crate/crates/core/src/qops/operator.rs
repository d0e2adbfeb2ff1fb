use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::state::StateVector;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix, row-major, zero-based.
///
/// Every Hamiltonian, jump operator, observable and density matrix in the
/// crate is one of these. Values are immutable once built; all algebra
/// returns new operators.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
    label: Option<String>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator(dim={}", self.dim)?;
        if let Some(label) = &self.label {
            write!(f, ", label={label:?}")?;
        }
        if self.dim <= 4 {
            write!(f, ", rows=[")?;
            for i in 0..self.dim {
                write!(f, "{:?}", &self.data[i * self.dim..(i + 1) * self.dim])?;
            }
            write!(f, "]")?;
        }
        write!(f, ")")
    }
}

impl Operator {
    /// Builds an operator from row-major entries.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim".into(),
                reason: "operator dimension must be at least 1".into(),
            });
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "operator entries",
            });
        }
        Ok(Self {
            dim,
            data,
            label: None,
        })
    }

    /// Builds from real row-major entries; convenient for Pauli-style literals.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::from_vec(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
            label: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = ONE;
        }
        op
    }

    pub fn diagonal(values: &[Complex64]) -> Result<Self> {
        let dim = values.len();
        Self::from_fn(dim, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn real_diagonal(values: &[f64]) -> Result<Self> {
        let values: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&values)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn from_raw_unchecked(dim: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self {
            dim,
            data,
            label: None,
        }
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Operator {
            dim: n,
            data,
            label: self.label.as_ref().map(|l| format!("{l}^H")),
        }
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        matmul_into(n, &self.data, &other.data, &mut out);
        Ok(Operator::from_raw_unchecked(n, out))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Operator::from_raw_unchecked(self.dim, data))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Operator::from_raw_unchecked(self.dim, data))
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator::from_raw_unchecked(self.dim, self.data.iter().map(|z| z * factor).collect())
    }

    pub fn scale_real(&self, factor: f64) -> Operator {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `[A, B] = AB - BA`
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `{A, B} = AB + BA`
    pub fn anticommutator(&self, other: &Operator) -> Result<Operator> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entrywise |A - A^H|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `A |psi>`
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let n = self.dim;
        if state.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: state.dim(),
            });
        }
        let psi = state.amplitudes();
        let out = (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(psi)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(StateVector::from_raw_unchecked(out))
    }

    /// `<phi| A |psi>`
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<Complex64> {
        let a_psi = self.apply(ket)?;
        bra.inner(&a_psi)
    }

    /// Compresses the operator onto the span of `basis` (assumed orthonormal):
    /// returns the `k x k` matrix `<b_i| A |b_j>`.
    pub fn project_onto(&self, basis: &[StateVector]) -> Result<Operator> {
        let images = basis
            .iter()
            .map(|b| self.apply(b))
            .collect::<Result<Vec<_>>>()?;
        let k = basis.len();
        let mut data = Vec::with_capacity(k * k);
        for bra in basis {
            for img in &images {
                data.push(bra.inner(img)?);
            }
        }
        Operator::from_vec(k, data)
    }
}

/// Row-major dense product `out = a * b` for `n x n` matrices.
pub(crate) fn matmul_into(n: usize, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    out.iter_mut().for_each(|z| *z = ZERO);
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == ZERO {
                continue;
            }
            let b_row = &b[k * n..(k + 1) * n];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

/// Tensor product with `a` as the slow (outer) index: entry
/// `(ia*db + ib, ja*db + jb) = a[ia, ja] * b[ib, jb]`.
///
/// The project-wide convention puts the Kerr-cat factor first and the
/// transmon second.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut data = vec![ZERO; n * n];
    for ia in 0..da {
        for ja in 0..da {
            let x = a.data[ia * da + ja];
            if x == ZERO {
                continue;
            }
            for ib in 0..db {
                let row = (ia * db + ib) * n + ja * db;
                for jb in 0..db {
                    data[row + jb] = x * b.data[ib * db + jb];
                }
            }
        }
    }
    let label = match (&a.label, &b.label) {
        (Some(x), Some(y)) => Some(format!("{x}⊗{y}")),
        _ => None,
    };
    Operator { dim: n, data, label }
}

/// `|a><b|`
pub fn outer_product(a: &StateVector, b: &StateVector) -> Result<Operator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let n = a.dim();
    let (x, y) = (a.amplitudes(), b.amplitudes());
    let mut data = Vec::with_capacity(n * n);
    for xi in x {
        for yj in y {
            data.push(xi * yj.conj());
        }
    }
    Ok(Operator::from_raw_unchecked(n, data))
}

/// Sum of operators of one dimension.
pub fn sum<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Result<Operator> {
    let mut iter = ops.into_iter();
    let first = iter.next().ok_or_else(|| Error::InvalidParameter {
        name: "ops".into(),
        reason: "empty operator sum".into(),
    })?;
    iter.try_fold(first.clone(), |acc, op| acc.add(op))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_kron_identity() {
        let i2 = Operator::identity(2);
        assert_eq!(kron(&i2, &i2), Operator::identity(4));
    }

    #[test]
    fn pauli_kron_by_hand() {
        let z = Operator::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
        let x = Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let expected = Operator::from_real(
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, -1.0, //
                0.0, 0.0, -1.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(kron(&z, &x), expected);
    }

    #[test]
    fn kron_dims_multiply() {
        let a = Operator::identity(30);
        let b = Operator::identity(2);
        assert_eq!(kron(&a, &b).dim(), 60);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(
            Operator::from_vec(2, vec![c(1.0); 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Operator::from_vec(0, vec![]).is_err());
        assert!(matches!(
            Operator::from_vec(1, vec![Complex64::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite { .. })
        ));
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert!(a.matmul(&b).is_err());
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn adjoint_is_involution() {
        let a = Operator::from_fn(3, |i, j| Complex64::new(i as f64 - j as f64, (i * j) as f64))
            .unwrap();
        assert_eq!(a.adjoint().adjoint().as_slice(), a.as_slice());
    }

    #[test]
    fn outer_product_of_basis_state_is_rank_one_projector() {
        let e0 = StateVector::basis(3, 0).unwrap();
        let p = outer_product(&e0, &e0).unwrap();
        assert!((p.trace() - c(1.0)).norm() < 1e-15);
        assert_eq!(p.matmul(&p).unwrap(), p);
    }

    #[test]
    fn matmul_matches_naive_triple_loop() {
        let a = Operator::from_fn(4, |i, j| Complex64::new((i + 2 * j) as f64, 1.0 - j as f64))
            .unwrap();
        let b = Operator::from_fn(4, |i, j| Complex64::new(0.5 * i as f64, (i * j) as f64 - 1.0))
            .unwrap();
        let ab = a.matmul(&b).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let naive: Complex64 = (0..4).map(|k| a.get(i, k) * b.get(k, j)).sum();
                assert!((ab.get(i, j) - naive).norm() < 1e-12);
            }
        }
    }
}
