//! Density operators, partial traces and trace distance.

use num_complex::Complex64;

use crate::eig::{hermitian_eigenvalues, hermiticity_deviation};
use crate::error::{Error, Result};
use crate::factor::{SubIndexIter, TensorFactorization};
use crate::state::StateVector;
use crate::tolerance::eps_tol;
use crate::CMatrix;

/// A Hermitian, positive semidefinite, unit-trace operator: the state of a
/// system or region.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity and unit trace within the global
    /// tolerances. Eigenvalues in [-eps_tol, 0) are tolerated (they are
    /// clamped when reported); anything below -eps_tol is an error.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > eps_tol() {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > eps_tol() || tr.im.abs() > eps_tol() {
            return Err(Error::BadTrace { trace: tr.re });
        }
        let vals = hermitian_eigenvalues(&matrix)?;
        if let Some(&lowest) = vals.first() {
            if lowest < -eps_tol() {
                return Err(Error::NotPositive { eigenvalue: lowest });
            }
        }
        Ok(Self { matrix })
    }

    /// For outputs that are positive and unit-trace by construction
    /// (projections of valid states, partial traces, |psi><psi|).
    pub(crate) fn from_valid_parts(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues ascending, with values in [-eps_tol, 0) clamped to 0;
    /// values below -eps_tol are an error rather than silently clamped.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let vals = hermitian_eigenvalues(&self.matrix)?;
        let mut out = Vec::with_capacity(vals.len());
        for v in vals {
            if v < -eps_tol() {
                return Err(Error::NotPositive { eigenvalue: v });
            }
            out.push(v.max(0.0));
        }
        Ok(out)
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = CMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Self { matrix: m }
    }
}

/// |psi><psi|. Insensitive to the global phase of `psi`.
pub fn density_of(psi: &StateVector) -> DensityOperator {
    let v = psi.amplitudes();
    DensityOperator::from_valid_parts(v * v.adjoint())
}

/// Kronecker product of two density operators.
pub fn tensor_density(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator::from_valid_parts(a.matrix().kronecker(b.matrix()))
}

/// Reduced operator on the kept factors (strictly increasing indices) of a
/// factored state; the complementary factors are summed out. Trace preserved.
pub fn partial_trace(
    rho: &DensityOperator,
    f: &TensorFactorization,
    keep: &[usize],
) -> Result<DensityOperator> {
    if rho.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: rho.dim() });
    }
    let traced = f.complement(keep)?;
    let kept_offsets: Vec<usize> = SubIndexIter::new(f, keep).collect();
    let k = kept_offsets.len();
    let mut out = CMatrix::zeros(k, k);
    let m = rho.matrix();
    for base in SubIndexIter::new(f, &traced) {
        for (r, &ro) in kept_offsets.iter().enumerate() {
            for (c, &co) in kept_offsets.iter().enumerate() {
                out[(r, c)] += m[(base + ro, base + co)];
            }
        }
    }
    Ok(DensityOperator::from_valid_parts(out))
}

/// Partial trace of a pure state, computed without materializing the full
/// density operator.
pub fn reduced_from_pure(
    psi: &StateVector,
    f: &TensorFactorization,
    keep: &[usize],
) -> Result<DensityOperator> {
    if psi.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: psi.dim() });
    }
    let traced = f.complement(keep)?;
    let kept_offsets: Vec<usize> = SubIndexIter::new(f, keep).collect();
    let k = kept_offsets.len();
    let mut out = CMatrix::zeros(k, k);
    let mut slice = vec![Complex64::default(); k];
    for base in SubIndexIter::new(f, &traced) {
        for (i, &off) in kept_offsets.iter().enumerate() {
            slice[i] = psi.amplitude(base + off);
        }
        for r in 0..k {
            if slice[r] == Complex64::default() {
                continue;
            }
            for c in 0..k {
                out[(r, c)] += slice[r] * slice[c].conj();
            }
        }
    }
    Ok(DensityOperator::from_valid_parts(out))
}

/// Like [`reduced_from_pure`], but restricted to the kept-space basis indices
/// that actually occur in `psi` (amplitude above `support_tol` somewhere in
/// the traced directions). Returns the sorted support indices together with
/// the reduced operator expressed on that span. Intended for large spaces
/// whose reduced state is supported on a handful of configurations.
pub fn reduced_on_support(
    psi: &StateVector,
    f: &TensorFactorization,
    keep: &[usize],
    support_tol: f64,
) -> Result<(Vec<usize>, DensityOperator)> {
    if psi.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: psi.dim() });
    }
    let traced = f.complement(keep)?;
    let kept_offsets: Vec<usize> = SubIndexIter::new(f, keep).collect();
    let traced_offsets: Vec<usize> = SubIndexIter::new(f, &traced).collect();

    let mut support: Vec<usize> = Vec::new();
    for (i, &off) in kept_offsets.iter().enumerate() {
        let occupied = traced_offsets.iter().any(|&b| psi.amplitude(b + off).norm() > support_tol);
        if occupied {
            support.push(i);
        }
    }
    let k = support.len();
    let mut out = CMatrix::zeros(k, k);
    let mut slice = vec![Complex64::default(); k];
    for &base in &traced_offsets {
        for (i, &s) in support.iter().enumerate() {
            slice[i] = psi.amplitude(base + kept_offsets[s]);
        }
        for r in 0..k {
            for c in 0..k {
                out[(r, c)] += slice[r] * slice[c].conj();
            }
        }
    }
    Ok((support, DensityOperator::from_valid_parts(out)))
}

/// Trace distance between two pure states, sqrt(1 - |<a|b>|^2). Computed as
/// the norm of the component of `a` orthogonal to `b`, which stays accurate
/// for nearly identical states, and never materializes a matrix, so it
/// scales to large chains.
pub fn pure_state_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = b.inner(a)?;
    let residual = a.amplitudes() - b.amplitudes() * overlap;
    Ok(residual.norm())
}

/// Trace distance (1/2)·||rho - sigma||_1 via the eigenvalues of the
/// difference. Symmetric; 0 iff the operators agree within tolerance; 1 for
/// orthogonal pure states.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let diff = rho.matrix() - sigma.matrix();
    let vals = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Reorders tensor factors of a density operator: new slot `i` holds what was
/// in slot `perm[i]`.
pub fn permute_factors_density(
    rho: &DensityOperator,
    f: &TensorFactorization,
    perm: &[usize],
) -> Result<(DensityOperator, TensorFactorization)> {
    if rho.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: rho.dim() });
    }
    if perm.len() != f.n_factors() {
        return Err(Error::BadFactorSelection);
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::BadFactorSelection);
        }
        seen[p] = true;
    }
    let new_f = f.select(perm)?;
    let dim = f.dim();
    // old index for each new index
    let mut old_of_new = vec![0usize; dim];
    let mut old_digits = vec![0usize; perm.len()];
    for new_idx in 0..dim {
        let new_digits = new_f.digits(new_idx);
        for (i, &p) in perm.iter().enumerate() {
            old_digits[p] = new_digits[i];
        }
        old_of_new[new_idx] = f.compose(&old_digits);
    }
    let m = rho.matrix();
    let out = CMatrix::from_fn(dim, dim, |r, c| m[(old_of_new[r], old_of_new[c])]);
    Ok((DensityOperator::from_valid_parts(out), new_f))
}
