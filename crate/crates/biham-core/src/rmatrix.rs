//! The constant r-matrix r = (X_> - X_<)/2, its shifts r+- and the dynamical
//! r-matrix R(Q) acting entrywise on the off-diagonal subspace. R(Q) is stored
//! through its multiplier table, never as an n^2 x n^2 operator; the diagonal
//! kernel is exact by construction.

use crate::error::{Error, Result};
use crate::linalg::{split, C64, ComplexMatrix, DEFAULT_TOL_REG};

/// r(X) = (X_> - X_<)/2; vanishes on diagonal matrices.
pub fn r_const(x: &ComplexMatrix) -> ComplexMatrix {
    let s = split(x);
    (&s.strict_upper - &s.strict_lower).scale(C64::new(0.5, 0.0))
}

/// r_+ = r + id/2. Acts as identity on strictly upper parts, halves the diagonal.
pub fn r_plus(x: &ComplexMatrix) -> ComplexMatrix {
    &r_const(x) + &x.scale(C64::new(0.5, 0.0))
}

/// r_- = r - id/2. Minus identity on strictly lower parts, minus half diagonal.
pub fn r_minus(x: &ComplexMatrix) -> ComplexMatrix {
    &r_const(x) - &x.scale(C64::new(0.5, 0.0))
}

/// The dynamical r-matrix at a regular diagonal Q, acting entrywise with the
/// multipliers m_kl = (Q_k/Q_l + 1) / (2 (Q_k/Q_l - 1)) off the diagonal.
#[derive(Clone, Debug)]
pub struct DynamicalR {
    q: Vec<C64>,
    multipliers: Vec<C64>, // n x n, zero diagonal, m_kl = -m_lk
}

impl DynamicalR {
    pub fn new(q_diag: &[C64]) -> Result<Self> {
        Self::with_tolerance(q_diag, DEFAULT_TOL_REG)
    }

    pub fn with_tolerance(q_diag: &[C64], tol_reg: f64) -> Result<Self> {
        let n = q_diag.len();
        let mut multipliers = vec![C64::default(); n * n];
        for k in 0..n {
            for l in 0..n {
                if k == l {
                    continue;
                }
                let diff = q_diag[k] - q_diag[l];
                if diff.norm() < tol_reg {
                    return Err(Error::NotRegular { gap: diff.norm(), tol: tol_reg });
                }
                multipliers[k * n + l] = (q_diag[k] + q_diag[l]) / (diff * 2.0);
            }
        }
        Ok(DynamicalR { q: q_diag.to_vec(), multipliers })
    }

    pub fn from_matrix(q: &ComplexMatrix, tol_reg: f64) -> Result<Self> {
        if !q.is_diagonal(0.0) {
            return Err(Error::invalid("Q must be exactly diagonal"));
        }
        Self::with_tolerance(&q.diag_entries(), tol_reg)
    }

    pub fn size(&self) -> usize {
        self.q.len()
    }

    pub fn q_entries(&self) -> &[C64] {
        &self.q
    }

    pub fn multiplier(&self, k: usize, l: usize) -> C64 {
        self.multipliers[k * self.q.len() + l]
    }

    /// Apply R(Q): zero on the diagonal, m_kl * X_kl off it.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.q.len();
        assert_eq!(n, x.size());
        ComplexMatrix::from_fn(n, |k, l| {
            if k == l { C64::default() } else { self.multipliers[k * n + l] * x[(k, l)] }
        })
    }

    /// (R(Q) + id/2) applied to X.
    pub fn apply_plus_half(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.apply(x) + &x.scale(C64::new(0.5, 0.0))
    }

    /// [X, Y]_{R(Q)} = [R(Q)X, Y] + [X, R(Q)Y].
    pub fn deformed_bracket(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let a = crate::linalg::commutator(&self.apply(x), y)?;
        let b = crate::linalg::commutator(x, &self.apply(y))?;
        Ok(&a + &b)
    }
}

/// Convenience wrappers matching the operator-style call sites.
pub fn dyn_r(q: &ComplexMatrix, x: &ComplexMatrix, tol_reg: f64) -> Result<ComplexMatrix> {
    Ok(DynamicalR::from_matrix(q, tol_reg)?.apply(x))
}

pub fn r_bracket(
    q: &ComplexMatrix,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    tol_reg: f64,
) -> Result<ComplexMatrix> {
    DynamicalR::from_matrix(q, tol_reg)?.deformed_bracket(x, y)
}
