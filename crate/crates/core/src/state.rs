//! Normalized state vectors and local operator application.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factor::{SubIndexIter, TensorFactorization};
use crate::operator::LinearOperator;
use crate::tolerance::eps_norm;
use crate::CVector;

/// A unit vector in a finite-dimensional complex space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within `eps_norm`).
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > eps_norm() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes and wraps; rejects (near-)zero vectors.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < eps_norm() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes: amplitudes / Complex64::from(norm) })
    }

    pub(crate) fn from_normalized_unchecked(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    /// The computational basis vector |index> of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Kronecker product of two states; dimensions multiply.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { amplitudes: self.amplitudes.kronecker(&other.amplitudes) }
    }

    /// Expectation value <psi|M|psi> of a square matrix.
    pub fn expectation(&self, m: &crate::CMatrix) -> Result<Complex64> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: m.nrows() });
        }
        Ok(self.amplitudes.dotc(&(m * &self.amplitudes)))
    }
}

/// Applies `u` on the given factors of `state` (identity elsewhere).
///
/// `targets` are distinct factor indices of `f`, in the order matching the
/// tensor slots of `u`; `u.dim()` must equal the product of the target
/// dimensions and `u` must carry the unitary flag. Norm is preserved.
pub fn apply_local(
    u: &LinearOperator,
    state: &StateVector,
    f: &TensorFactorization,
    targets: &[usize],
) -> Result<StateVector> {
    if !u.is_unitary() {
        return Err(Error::NotUnitary { deviation: f64::NAN });
    }
    let out = apply_matrix_local(u.matrix(), state.amplitudes(), f, targets)?;
    Ok(StateVector::from_normalized_unchecked(out))
}

/// Applies an arbitrary square matrix on the given factors; the result is in
/// general not normalized (used for projections and other non-unitary maps).
pub fn apply_matrix_local(
    m: &crate::CMatrix,
    amplitudes: &CVector,
    f: &TensorFactorization,
    targets: &[usize],
) -> Result<CVector> {
    if amplitudes.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: amplitudes.len() });
    }
    validate_targets(f, targets)?;
    let sub_dim: usize = targets.iter().map(|&t| f.factor_dim(t)).product();
    if m.nrows() != sub_dim || m.ncols() != sub_dim {
        return Err(Error::DimensionMismatch { expected: sub_dim, got: m.nrows() });
    }

    let rest: Vec<usize> = (0..f.n_factors()).filter(|i| !targets.contains(i)).collect();
    let target_offsets: Vec<usize> = SubIndexIter::new(f, targets).collect();

    let mut out = CVector::zeros(amplitudes.len());
    let mut gathered = vec![Complex64::default(); sub_dim];
    for base in SubIndexIter::new(f, &rest) {
        for (k, &off) in target_offsets.iter().enumerate() {
            gathered[k] = amplitudes[base + off];
        }
        for (row, &off) in target_offsets.iter().enumerate() {
            let mut acc = Complex64::default();
            for col in 0..sub_dim {
                acc += m[(row, col)] * gathered[col];
            }
            out[base + off] = acc;
        }
    }
    Ok(out)
}

fn validate_targets(f: &TensorFactorization, targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::BadFactorSelection);
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= f.n_factors() {
            return Err(Error::InvalidFactorIndex { index: t, count: f.n_factors() });
        }
        if targets[..i].contains(&t) {
            return Err(Error::BadFactorSelection);
        }
    }
    Ok(())
}

/// Reorders tensor factors: new slot `i` holds what was in slot `perm[i]`.
pub fn permute_factors(
    state: &StateVector,
    f: &TensorFactorization,
    perm: &[usize],
) -> Result<(StateVector, TensorFactorization)> {
    if state.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: state.dim() });
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
    let mut out = CVector::zeros(state.dim());
    let mut old_digits = vec![0usize; perm.len()];
    for new_idx in 0..new_f.dim() {
        let new_digits = new_f.digits(new_idx);
        for (i, &p) in perm.iter().enumerate() {
            old_digits[p] = new_digits[i];
        }
        out[new_idx] = state.amplitude(f.compose(&old_digits));
    }
    Ok((StateVector::from_normalized_unchecked(out), new_f))
}
