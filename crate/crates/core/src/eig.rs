//! Hermitian-specialized eigenvalue computations.

use crate::error::{Error, Result};
use crate::tolerance::eps_tol;
use crate::CMatrix;

/// Maximum entrywise deviation of `m` from its adjoint.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending. Rejects non-Hermitian input.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    let deviation = hermiticity_deviation(m);
    if deviation > eps_tol() {
        return Err(Error::NotHermitian { deviation });
    }
    // Symmetrize first so the solver sees an exactly Hermitian matrix.
    let h = (m + m.adjoint()).scale(0.5);
    let mut vals: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}
