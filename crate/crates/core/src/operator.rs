//! Linear operators on tensor-factored spaces.

use crate::error::{Error, Result};
use crate::tolerance::eps_tol;
use crate::CMatrix;

/// A square operator, tagged with whether it is known to be unitary.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    matrix: CMatrix,
    unitary: bool,
}

impl LinearOperator {
    /// Wraps a matrix asserted unitary; verifies U†U = I within `eps_tol`.
    pub fn unitary(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > eps_tol() {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix, unitary: true })
    }

    /// Wraps an arbitrary (possibly non-unitary) square matrix.
    pub fn general(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        Ok(Self { matrix, unitary: false })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim), unitary: true }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), unitary: self.unitary }
    }

    /// Kronecker product; dimensions multiply, the unitary flag survives only
    /// if both sides carry it.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            unitary: self.unitary && other.unitary,
        }
    }

    /// Commutator AB - BA.
    pub fn commutator(&self, other: &Self) -> Result<CMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }
}

pub fn unitarity_deviation(matrix: &CMatrix) -> f64 {
    let n = matrix.nrows();
    let gram = matrix.adjoint() * matrix;
    let id = CMatrix::identity(n, n);
    (gram - id).iter().map(|v| v.norm()).fold(0.0, f64::max)
}
