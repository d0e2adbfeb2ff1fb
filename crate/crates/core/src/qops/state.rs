use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

use super::eigen::hermitian_eigensystem;
use super::operator::{outer_product, Operator};

/// Ket in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes as given, without normalising.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter {
                name: "amplitudes".into(),
                reason: "state dimension must be at least 1".into(),
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "state amplitudes",
            });
        }
        Ok(Self { amplitudes })
    }

    /// Wraps and normalises; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_amplitudes(amplitudes)?;
        let n = s.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("cannot normalise the zero vector".into()));
        }
        Ok(s.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter {
                name: "index".into(),
                reason: format!("basis index {index} out of range for dimension {dim}"),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(amps)
    }

    pub(crate) fn from_raw_unchecked(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        StateVector::from_raw_unchecked(self.amplitudes.iter().map(|z| z * factor).collect())
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(StateVector::from_raw_unchecked(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                out.push(a * b);
            }
        }
        StateVector::from_raw_unchecked(out)
    }

    /// `|psi><psi|` as a density matrix.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(outer_product(self, self)?)
    }
}

/// Operator tagged as a physical state.
///
/// `new` validates Hermiticity, trace and positivity against the default
/// tolerances; the integrator uses the unchecked path for intermediate
/// states and validates explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerances(op, &Tolerances::default())
    }

    pub fn with_tolerances(op: Operator, tol: &Tolerances) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |rho - rho^H| = {herm:.3e})"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (vals, _) = hermitian_eigensystem(&op)?;
        if vals[0] < -tol.positivity {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {:.3e} is negative",
                vals[0]
            )));
        }
        Ok(Self(op))
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(Operator::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// Skips validation. Callers must check with `validate_state` when it matters.
    pub fn new_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.0.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `sum_k w_k rho_k` for weights summing to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix> {
        let mut iter = parts.iter();
        let (w0, r0) = iter.next().ok_or_else(|| Error::InvalidParameter {
            name: "parts".into(),
            reason: "empty mixture".into(),
        })?;
        let mut acc = r0.0.scale_real(*w0);
        for (w, r) in iter {
            acc = acc.add(&r.0.scale_real(*w))?;
        }
        Ok(DensityMatrix(acc))
    }
}

/// `Tr(O rho)` without forming the product.
pub fn expect(op: &Operator, rho: &DensityMatrix) -> Result<Complex64> {
    expect_op(op, rho.as_operator())
}

pub(crate) fn expect_op(op: &Operator, rho: &Operator) -> Result<Complex64> {
    let n = op.dim();
    if rho.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.dim(),
        });
    }
    let (a, r) = (op.as_slice(), rho.as_slice());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[i * n + k] * r[k * n + i];
        }
    }
    Ok(acc)
}

/// `<psi| O |psi>`
pub fn expect_pure(op: &Operator, psi: &StateVector) -> Result<Complex64> {
    op.matrix_element(psi, psi)
}
