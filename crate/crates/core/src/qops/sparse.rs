//! Compiled matrix kernels used on the integrator hot path.
//!
//! Operators are stored and exchanged densely; this module only picks a
//! faster way to multiply a fixed operator into a dense matrix. A kernel
//! reproduces the dense product exactly up to floating-point reassociation
//! (CSR keeps every nonzero; the low-rank form keeps every eigenvalue above
//! 1e-14 of the operator norm).

use num_complex::Complex64;

use super::eigen::hermitian_eigensystem_tol;
use super::operator::Operator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    pub fn from_dense(op: &Operator) -> Self {
        let n = op.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let z = op.get(i, j);
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out += c * A * x` for row-major `x`.
    fn mul_acc(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = c * self.vals[p];
                let x_row = &x[self.cols[p] * n..(self.cols[p] + 1) * n];
                for (o, &xv) in out_row.iter_mut().zip(x_row) {
                    *o += a * xv;
                }
            }
        }
    }

    /// `out += c * x * A^H`.
    fn mul_adj_right_acc(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        // (x A^H)[i, j] = sum_k x[i, k] conj(A[j, k])
        let n = self.dim;
        for j in 0..n {
            for p in self.row_ptr[j]..self.row_ptr[j + 1] {
                let a = c * self.vals[p].conj();
                let k = self.cols[p];
                for i in 0..n {
                    out[i * n + j] += x[i * n + k] * a;
                }
            }
        }
    }
}

/// Hermitian operator stored as `sum_r w_r u_r u_r^H`.
#[derive(Debug, Clone)]
pub struct LowRank {
    dim: usize,
    weights: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
}

impl LowRank {
    fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `out += c * A * x`.
    fn mul_acc(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        let mut row = vec![ZERO; n];
        for (w, u) in self.weights.iter().zip(&self.vectors) {
            // row = u^H x
            row.iter_mut().for_each(|z| *z = ZERO);
            for (k, uk) in u.iter().enumerate() {
                let ukc = uk.conj();
                if ukc == ZERO {
                    continue;
                }
                for (r, &xv) in row.iter_mut().zip(&x[k * n..(k + 1) * n]) {
                    *r += ukc * xv;
                }
            }
            let cw = c * *w;
            for (i, ui) in u.iter().enumerate() {
                let s = cw * ui;
                if s == ZERO {
                    continue;
                }
                for (o, &r) in out[i * n..(i + 1) * n].iter_mut().zip(&row) {
                    *o += s * r;
                }
            }
        }
    }

    /// `out += c * A x A` (A Hermitian, so `A^H = A`).
    fn sandwich_acc(&self, c: f64, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        let r = self.rank();
        // cols[s] = x u_s
        let cols: Vec<Vec<Complex64>> = self
            .vectors
            .iter()
            .map(|u| {
                (0..n)
                    .map(|i| {
                        x[i * n..(i + 1) * n]
                            .iter()
                            .zip(u)
                            .map(|(a, b)| a * b)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        // m[r][s] = w_r w_s u_r^H x u_s
        let mut m = vec![ZERO; r * r];
        for a in 0..r {
            for b in 0..r {
                let dot: Complex64 = self.vectors[a]
                    .iter()
                    .zip(&cols[b])
                    .map(|(p, q)| p.conj() * q)
                    .sum();
                m[a * r + b] = dot * (c * self.weights[a] * self.weights[b]);
            }
        }
        // out += sum_{a,b} m[a,b] u_a u_b^H
        let mut v = vec![ZERO; n];
        for a in 0..r {
            v.iter_mut().for_each(|z| *z = ZERO);
            for b in 0..r {
                let mab = m[a * r + b];
                for (vj, ub) in v.iter_mut().zip(&self.vectors[b]) {
                    *vj += mab * ub.conj();
                }
            }
            for (i, ui) in self.vectors[a].iter().enumerate() {
                if *ui == ZERO {
                    continue;
                }
                for (o, vj) in out[i * n..(i + 1) * n].iter_mut().zip(&v) {
                    *o += ui * vj;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum CompiledOperator {
    Csr(Csr),
    LowRank(LowRank),
}

impl CompiledOperator {
    /// Chooses CSR or, for Hermitian operators of small rank, the
    /// eigen-factored form, whichever needs fewer multiply-adds.
    pub fn compile(op: &Operator) -> Self {
        let csr = Csr::from_dense(op);
        let n = op.dim();
        if op.hermiticity_error() > 0.0 || csr.nnz() < 4 * n {
            return CompiledOperator::Csr(csr);
        }
        let Ok((vals, vecs)) = hermitian_eigensystem_tol(op, 0.0) else {
            return CompiledOperator::Csr(csr);
        };
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep: Vec<usize> = (0..n).filter(|&k| vals[k].abs() > 1e-14 * scale).collect();
        if 2 * keep.len() * n >= csr.nnz() {
            return CompiledOperator::Csr(csr);
        }
        CompiledOperator::LowRank(LowRank {
            dim: n,
            weights: keep.iter().map(|&k| vals[k]).collect(),
            vectors: keep
                .iter()
                .map(|&k| vecs[k].amplitudes().to_vec())
                .collect(),
        })
    }

    /// Always CSR; used where an exact sparsity-preserving product matters.
    pub fn compile_csr(op: &Operator) -> Self {
        CompiledOperator::Csr(Csr::from_dense(op))
    }

    pub fn dim(&self) -> usize {
        match self {
            CompiledOperator::Csr(c) => c.dim,
            CompiledOperator::LowRank(l) => l.dim,
        }
    }

    pub fn is_low_rank(&self) -> bool {
        matches!(self, CompiledOperator::LowRank(_))
    }

    /// `out += c * A * x`, all row-major `dim x dim`.
    pub fn mul_acc(&self, c: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        match self {
            CompiledOperator::Csr(a) => a.mul_acc(c, x, out),
            CompiledOperator::LowRank(a) => a.mul_acc(c, x, out),
        }
    }

    /// `out += c * A x A^H`. `scratch` must hold `dim * dim` entries.
    pub fn sandwich_acc(
        &self,
        c: f64,
        x: &[Complex64],
        out: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        match self {
            CompiledOperator::Csr(a) => {
                scratch.iter_mut().for_each(|z| *z = ZERO);
                a.mul_acc(Complex64::new(1.0, 0.0), x, scratch);
                a.mul_adj_right_acc(Complex64::new(c, 0.0), scratch, out);
            }
            CompiledOperator::LowRank(a) => a.sandwich_acc(c, x, out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::operator::matmul_into;

    fn sample(n: usize, seed: u64) -> Operator {
        Operator::from_fn(n, |i, j| {
            let s = (i * 31 + j * 17 + seed as usize) as f64;
            Complex64::new((s * 0.37).sin(), (s * 0.91).cos())
        })
        .unwrap()
    }

    fn rank_two_hermitian(n: usize) -> Operator {
        let u: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, -(i as f64))).collect();
        Operator::from_fn(n, |i, j| 2.0 * u[i] * u[j].conj() - 0.5 * v[i] * v[j].conj()).unwrap()
    }

    fn dense_reference(a: &Operator, x: &Operator, sandwich: bool) -> Vec<Complex64> {
        let n = a.dim();
        let mut ax = vec![ZERO; n * n];
        matmul_into(n, a.as_slice(), x.as_slice(), &mut ax);
        if !sandwich {
            return ax;
        }
        let mut out = vec![ZERO; n * n];
        matmul_into(n, &ax, a.adjoint().as_slice(), &mut out);
        out
    }

    fn check(a: &Operator, expect_low_rank: bool) {
        let n = a.dim();
        let x = sample(n, 5);
        let k = CompiledOperator::compile(a);
        assert_eq!(k.is_low_rank(), expect_low_rank);
        let scale = a.norm() * x.norm();

        let mut out = vec![ZERO; n * n];
        k.mul_acc(Complex64::new(1.0, 0.0), x.as_slice(), &mut out);
        let r = dense_reference(a, &x, false);
        let err = out.iter().zip(&r).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12 * scale, "mul err {err}");

        let mut out = vec![ZERO; n * n];
        let mut scratch = vec![ZERO; n * n];
        k.sandwich_acc(1.0, x.as_slice(), &mut out, &mut scratch);
        let r = dense_reference(a, &x, true);
        let err = out.iter().zip(&r).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12 * scale * a.norm(), "sandwich err {err}");
    }

    #[test]
    fn csr_matches_dense_for_general_matrix() {
        check(&sample(7, 1), false);
    }

    #[test]
    fn csr_matches_dense_for_sparse_matrix() {
        let a = Operator::from_fn(9, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        })
        .unwrap();
        check(&a, false);
    }

    #[test]
    fn low_rank_matches_dense() {
        check(&rank_two_hermitian(12), true);
    }
}
