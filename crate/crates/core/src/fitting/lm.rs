//! Levenberg-Marquardt least squares with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A residual vector `r(p)` to be minimised in the 2-norm.
pub trait LeastSquares {
    fn n_residuals(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);

    /// Residual norm treated as exact agreement (rounding level of the
    /// data). The gradient test measures against at least this norm.
    fn residual_floor(&self) -> f64 {
        0.0
    }

    /// Jacobian `d r_i / d p_j`; central differences unless overridden.
    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) {
        let m = self.n_residuals();
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = 1e-6 * p[j].abs().max(1e-6);
            q[j] = p[j] + h;
            self.residuals(&q, &mut plus);
            q[j] = p[j] - h;
            self.residuals(&q, &mut minus);
            q[j] = p[j];
            for i in 0..m {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Largest allowed cosine between the residual and any Jacobian column.
    pub gtol: f64,
    /// Relative step size below which iteration stops.
    pub xtol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gtol: 1e-6,
            xtol: 1e-15,
            lambda0: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LmOutcome {
    pub fn rms(&self) -> f64 {
        rms(&self.residuals)
    }

    /// 1σ uncertainties from `s^2 (J^T J)^-1`; infinite where undetermined.
    pub fn uncertainties(&self) -> Vec<f64> {
        covariance_sigmas(&self.jacobian, &self.residuals)
    }
}

pub fn rms(r: &[f64]) -> f64 {
    (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
}

pub(crate) fn covariance_sigmas(jac: &DMatrix<f64>, r: &[f64]) -> Vec<f64> {
    let (m, n) = jac.shape();
    if m <= n {
        return vec![f64::INFINITY; n];
    }
    let s2 = r.iter().map(|x| x * x).sum::<f64>() / (m - n) as f64;
    let jtj = jac.transpose() * jac;
    match jtj.clone().try_inverse() {
        Some(inv) => (0..n)
            .map(|j| {
                let v = s2 * inv[(j, j)];
                if v >= 0.0 && v.is_finite() {
                    v.sqrt()
                } else {
                    f64::INFINITY
                }
            })
            .collect(),
        None => vec![f64::INFINITY; n],
    }
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Largest cosine between `r` and a column of `jac` (0 when either
/// vanishes), with the residual norm floored at `floor`.
fn gradient_cosine(jac: &DMatrix<f64>, r: &[f64], floor: f64) -> f64 {
    // Residuals at the rounding floor mean an exact fit; the direction of
    // the leftover noise says nothing about stationarity.
    let rn = cost(r).sqrt();
    if rn <= floor {
        return 0.0;
    }
    let rv = DVector::from_column_slice(r);
    (0..jac.ncols())
        .map(|j| {
            let col = jac.column(j);
            let cn = col.norm();
            if cn == 0.0 {
                0.0
            } else {
                col.dot(&rv).abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

pub fn levenberg_marquardt(
    problem: &dyn LeastSquares,
    p0: &[f64],
    opts: &LmOptions,
) -> Result<LmOutcome> {
    let m = problem.n_residuals();
    let n = p0.len();
    if m < n {
        return Err(Error::Unidentifiable(format!(
            "{m} residuals for {n} parameters"
        )));
    }
    let mut p = p0.to_vec();
    let mut r = vec![0.0; m];
    problem.residuals(&p, &mut r);
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            context: "initial residuals",
        });
    }
    let mut jac = DMatrix::zeros(m, n);
    problem.jacobian(&p, &mut jac);
    let floor = problem.residual_floor();
    let mut c = cost(&r);
    let mut lambda = opts.lambda0;
    let mut trial = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = gradient_cosine(&jac, &r, floor) <= opts.gtol;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let diag: Vec<f64> = (0..n).map(|j| jtj[(j, j)].max(1e-300)).collect();
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * diag[j];
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 4.0;
                continue;
            };
            let q: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            problem.residuals(&q, &mut trial);
            let ct = cost(&trial);
            let pn = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            small_step = step.norm() <= opts.xtol * (pn + opts.xtol);
            if ct.is_finite() && ct < c {
                p = q;
                std::mem::swap(&mut r, &mut trial);
                c = ct;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            if small_step {
                break;
            }
            lambda *= 4.0;
        }
        if accepted {
            problem.jacobian(&p, &mut jac);
        }
        converged = gradient_cosine(&jac, &r, floor) <= opts.gtol;
        if !accepted || small_step {
            break;
        }
    }
    Ok(LmOutcome {
        params: p,
        residuals: r,
        jacobian: jac,
        iterations,
        converged,
    })
}
