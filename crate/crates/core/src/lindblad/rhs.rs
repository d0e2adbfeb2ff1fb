use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Dissipator, MasterEquation};
use crate::qops::sparse::CompiledOperator;
use crate::qops::{DensityMatrix, Operator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `-i[H, rho] + sum_k rate_k (L rho L† - {L†L, rho}/2)`, evaluated densely.
///
/// This is the reference form; the integrator uses [`Generator`], which
/// computes the same quantity through compiled kernels.
pub fn lindblad_rhs(
    h: &Operator,
    dissipators: &[Dissipator],
    rho: &DensityMatrix,
) -> Result<Operator> {
    let r = rho.as_operator();
    let n = h.dim();
    if r.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.dim(),
        });
    }
    let mut out = h.commutator(r)?.scale(-I);
    for d in dissipators {
        if d.op.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.op.dim(),
            });
        }
        let l = &d.op;
        let ld = l.adjoint();
        let ldl = ld.matmul(l)?;
        let term = l
            .matmul(r)?
            .matmul(&ld)?
            .sub(&ldl.anticommutator(r)?.scale_real(0.5))?;
        out = out.add(&term.scale_real(d.rate))?;
    }
    Ok(out)
}

struct CompiledDrive {
    op: CompiledOperator,
    op_adj: CompiledOperator,
    phase: f64,
    detuning: f64,
}

/// Compiled right-hand side of one master equation.
///
/// Uses the identity, valid for Hermitian `rho`,
/// `L(rho) = -i (M - M†) + sum_k rate_k L_k rho L_k†` with
/// `M = H_eff rho` and `H_eff = H - (i/2) sum_k rate_k L_k† L_k`.
///
/// A real diagonal `d` can be split off the static Hamiltonian;
/// `apply_split` then evaluates the generator without the `-i[diag(d), rho]`
/// part, which the interaction-picture integrator handles exactly.
///
/// With a split limit `L`, `d_i = h_ii - clamp(h_ii, -L, L)`: only levels
/// whose energy exceeds `L` in magnitude are moved to the exact propagator.
/// Low levels stay in the lab frame, where near-eigenstates of the static
/// Hamiltonian barely move and explicit steps are most accurate.
pub struct Generator {
    n: usize,
    split_diag: Vec<f64>,
    static_terms: Vec<(Complex64, CompiledOperator)>,
    drives: Vec<CompiledDrive>,
    jumps: Vec<(f64, CompiledOperator)>,
    schedule: crate::model::PulseSchedule,
    m: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Generator {
    /// `split_limit = Some(L)` removes the part of the static diagonal beyond
    /// `±L`; `Some(0.0)` removes the whole real diagonal, `None` nothing.
    pub fn new(me: &MasterEquation, split_limit: Option<f64>) -> Result<Self> {
        let n = me.dim();
        let split_diag: Vec<f64> = match split_limit {
            Some(lim) => {
                if !(lim >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "split_limit".into(),
                        reason: format!("must be non-negative, got {lim}"),
                    });
                }
                (0..n)
                    .map(|i| {
                        let h = me.static_h.get(i, i).re;
                        h - h.clamp(-lim, lim)
                    })
                    .collect()
            }
            None => vec![0.0; n],
        };

        // Everything that compiles to CSR is merged into one operator;
        // low-rank pieces stay separate.
        let mut sparse_sum = me
            .static_h
            .sub(&Operator::real_diagonal(&split_diag)?)?;
        let mut static_terms = Vec::new();
        let mut jumps = Vec::new();
        for d in &me.dissipators {
            let ldl = d.op.adjoint().matmul(&d.op)?;
            let coeff = Complex64::new(0.0, -0.5 * d.rate);
            match CompiledOperator::compile(&ldl) {
                CompiledOperator::Csr(_) => sparse_sum = sparse_sum.add(&ldl.scale(coeff))?,
                low_rank => static_terms.push((coeff, low_rank)),
            }
            jumps.push((d.rate, CompiledOperator::compile(&d.op)));
        }
        static_terms.insert(
            0,
            (
                Complex64::new(1.0, 0.0),
                CompiledOperator::compile_csr(&sparse_sum),
            ),
        );
        let drives = me
            .drives
            .iter()
            .map(|d| CompiledDrive {
                op: CompiledOperator::compile_csr(&d.op),
                op_adj: CompiledOperator::compile_csr(&d.op.adjoint()),
                phase: d.phase,
                detuning: d.detuning,
            })
            .collect();
        Ok(Self {
            n,
            split_diag,
            static_terms,
            drives,
            jumps,
            schedule: me.schedule,
            m: vec![ZERO; n * n],
            scratch: vec![ZERO; n * n],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal removed from the static Hamiltonian (zeros when not split).
    pub fn split_diagonal(&self) -> &[f64] {
        &self.split_diag
    }

    /// `out = L_split(t)[rho]`, overwriting `out`.
    pub fn apply_split(&mut self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        self.m.iter_mut().for_each(|z| *z = ZERO);
        for (c, op) in &self.static_terms {
            op.mul_acc(*c, rho, &mut self.m);
        }
        let f = self.schedule.envelope_unchecked(t.clamp(0.0, self.schedule.t_int));
        if f != 0.0 {
            for d in &self.drives {
                let c = Complex64::from_polar(
                    f,
                    d.phase + std::f64::consts::TAU * d.detuning * t,
                );
                d.op.mul_acc(c, rho, &mut self.m);
                d.op_adj.mul_acc(c.conj(), rho, &mut self.m);
            }
        }
        // out = -i (M - M†)
        for i in 0..n {
            for j in 0..n {
                let a = self.m[i * n + j];
                let b = self.m[j * n + i].conj();
                out[i * n + j] = -I * (a - b);
            }
        }
        for (rate, l) in &self.jumps {
            l.sandwich_acc(*rate, rho, out, &mut self.scratch);
        }
    }

    /// Full generator including any split diagonal.
    pub fn apply(&mut self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        self.apply_split(t, rho, out);
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let w = self.split_diag[i] - self.split_diag[j];
                if w != 0.0 {
                    out[i * n + j] += -I * w * rho[i * n + j];
                }
            }
        }
    }
}
