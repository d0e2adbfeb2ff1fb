//! Truncated Fock space, coherent and cat states, and the cat-qubit frame.
//!
//! The cat amplitude `alpha` is real and non-negative throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qops::{outer_product, Operator, StateVector};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Even (`+`) or odd (`-`) photon-number parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Largest `alpha^2` accepted for a Fock truncation `n_fock`.
pub fn truncation_limit(n_fock: usize) -> f64 {
    n_fock as f64 / 4.0
}

/// Fails unless `alpha^2 <= N/4`.
pub fn check_truncation(alpha: f64, n_fock: usize) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite { context: "alpha" });
    }
    let limit = truncation_limit(n_fock);
    if alpha * alpha > limit {
        return Err(Error::Truncation {
            alpha_sq: alpha * alpha,
            limit,
            n_fock,
        });
    }
    Ok(())
}

fn check_fock(n_fock: usize) -> Result<()> {
    if n_fock < 2 {
        return Err(Error::InvalidParameter {
            name: "n_fock".into(),
            reason: format!("Fock truncation must be at least 2, got {n_fock}"),
        });
    }
    Ok(())
}

/// Truncated annihilation operator: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(n_fock: usize) -> Result<Operator> {
    check_fock(n_fock)?;
    Ok(Operator::from_fn(n_fock, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?
    .with_label("a"))
}

pub fn creation(n_fock: usize) -> Result<Operator> {
    Ok(annihilation(n_fock)?.adjoint().with_label("a†"))
}

/// Photon number `a†a`, built directly as a diagonal.
pub fn number(n_fock: usize) -> Result<Operator> {
    check_fock(n_fock)?;
    let diag: Vec<f64> = (0..n_fock).map(|n| n as f64).collect();
    Ok(Operator::real_diagonal(&diag)?.with_label("n"))
}

/// Untruncated coherent-state amplitudes `e^{-a^2/2} a^n / sqrt(n!)` for
/// `n < n_fock`, with no renormalisation.
pub fn coherent_amplitudes_raw(alpha: f64, n_fock: usize) -> Vec<f64> {
    let mut amps = Vec::with_capacity(n_fock);
    let mut c = (-alpha * alpha / 2.0).exp();
    for n in 0..n_fock {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        amps.push(c);
    }
    amps
}

/// Coherent state `|alpha>` on `n_fock` levels, renormalised after truncation.
pub fn coherent_state(alpha: f64, n_fock: usize) -> Result<StateVector> {
    check_fock(n_fock)?;
    check_truncation(alpha, n_fock)?;
    let amps = coherent_amplitudes_raw(alpha, n_fock)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    StateVector::normalized(amps)
}

/// Normalisation `1/sqrt(2(1 ± e^{-2 alpha^2}))` of an untruncated cat.
pub fn cat_normalization(alpha: f64, parity: Parity) -> f64 {
    let overlap = (-2.0 * alpha * alpha).exp();
    let s = match parity {
        Parity::Even => 1.0 + overlap,
        Parity::Odd => 1.0 - overlap,
    };
    1.0 / (2.0 * s).sqrt()
}

/// Cat state `N(|alpha> ± |-alpha>)`.
///
/// Built from the parity-selected Fock amplitudes `alpha^n / sqrt(n!)`, so
/// the wrong-parity entries are exact zeros and `alpha = 0` gives `|0>` or
/// `|1>` instead of a zero vector.
pub fn cat_state(alpha: f64, parity: Parity, n_fock: usize) -> Result<StateVector> {
    check_fock(n_fock)?;
    check_truncation(alpha, n_fock)?;
    let p = parity.offset();
    // Relative amplitudes alpha^(n-p) sqrt(p!/n!), keeping the leading term at 1.
    let mut amps = vec![Complex64::new(0.0, 0.0); n_fock];
    let mut c = 1.0;
    amps[p] = Complex64::new(1.0, 0.0);
    let mut n = p;
    while n + 2 < n_fock {
        c *= alpha * alpha / (((n + 1) * (n + 2)) as f64).sqrt();
        n += 2;
        amps[n] = Complex64::new(c, 0.0);
    }
    StateVector::normalized(amps)
}

/// Cat-qubit frame for one `(alpha, N)`.
///
/// Axis layout: the cats `|C±>` sit on the x axis, `sigma_z` swaps them,
/// and `sigma_y = -i sigma_z sigma_x`. All three Paulis act as zero outside
/// the two-dimensional cat subspace.
#[derive(Debug, Clone)]
pub struct CatFrame {
    alpha: f64,
    n_fock: usize,
    cat_plus: StateVector,
    cat_minus: StateVector,
    sigma_x: Operator,
    sigma_y: Operator,
    sigma_z: Operator,
    projector: Operator,
}

impl CatFrame {
    pub fn new(alpha: f64, n_fock: usize) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha".into(),
                reason: "cat amplitude must be non-negative".into(),
            });
        }
        let cat_plus = cat_state(alpha, Parity::Even, n_fock)?;
        let cat_minus = cat_state(alpha, Parity::Odd, n_fock)?;
        let pp = outer_product(&cat_plus, &cat_plus)?;
        let mm = outer_product(&cat_minus, &cat_minus)?;
        let pm = outer_product(&cat_plus, &cat_minus)?;
        let mp = outer_product(&cat_minus, &cat_plus)?;

        let sigma_x = pp.sub(&mm)?.with_label("X_kc");
        let sigma_z = pm.add(&mp)?.with_label("Z_kc");
        let sigma_y = sigma_z.matmul(&sigma_x)?.scale(-I).with_label("Y_kc");
        let projector = pp.add(&mm)?.with_label("P_C");
        Ok(Self {
            alpha,
            n_fock,
            cat_plus,
            cat_minus,
            sigma_x,
            sigma_y,
            sigma_z,
            projector,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn cat_plus(&self) -> &StateVector {
        &self.cat_plus
    }

    pub fn cat_minus(&self) -> &StateVector {
        &self.cat_minus
    }

    pub fn sigma_x(&self) -> &Operator {
        &self.sigma_x
    }

    pub fn sigma_y(&self) -> &Operator {
        &self.sigma_y
    }

    pub fn sigma_z(&self) -> &Operator {
        &self.sigma_z
    }

    pub fn projector(&self) -> &Operator {
        &self.projector
    }

    /// `(|C+> + |C->)/sqrt2, (|C+> - |C->)/sqrt2`: the +1 and -1 eigenvectors
    /// of `sigma_z`. For large alpha these tend to `|alpha>` and `|-alpha>`.
    pub fn z_eigenstates(&self) -> Result<(StateVector, StateVector)> {
        self.combine(Complex64::new(1.0, 0.0))
    }

    /// `(|C+> - i|C->)/sqrt2, (|C+> + i|C->)/sqrt2`: the +1 and -1
    /// eigenvectors of `sigma_y`.
    pub fn y_eigenstates(&self) -> Result<(StateVector, StateVector)> {
        self.combine(-I)
    }

    fn combine(&self, phase: Complex64) -> Result<(StateVector, StateVector)> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus = self
            .cat_plus
            .add(&self.cat_minus.scale(phase))?
            .scale(h);
        let minus = self
            .cat_plus
            .add(&self.cat_minus.scale(-phase))?
            .scale(h);
        Ok((plus, minus))
    }

    /// Checks that the frame was built for these parameters.
    pub fn check_matches(&self, alpha: f64, n_fock: usize) -> Result<()> {
        if (self.alpha - alpha).abs() > 1e-12 || self.n_fock != n_fock {
            return Err(Error::FrameMismatch {
                frame_alpha: self.alpha,
                frame_n: self.n_fock,
                alpha,
                n_fock,
            });
        }
        Ok(())
    }
}
