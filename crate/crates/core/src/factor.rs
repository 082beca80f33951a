//! Tensor factorizations and mixed-radix index arithmetic.
//!
//! Factor index 0 is the leftmost tensor slot; a basis index is big-endian in
//! factor order, i.e. index = d(0)·D(1)·D(2)··· + d(1)·D(2)··· + ... for
//! digits d(i) in factors of dimension D(i).

use crate::error::{Error, Result};

/// The tensor-product structure of a state or operator space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorFactorization {
    dims: Vec<usize>,
}

impl TensorFactorization {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyFactorization);
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("factor dimensions must be >= 1".into()));
        }
        Ok(Self { dims })
    }

    /// `n` factors of equal local dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyFactorization);
        }
        Self::new(vec![d; n])
    }

    /// `n` two-level factors.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::uniform(n, 2)
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn factor_dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    /// Total dimension (product of factor dimensions).
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Factorization of a tensor product: the factor lists concatenate.
    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims }
    }

    /// Big-endian strides: stride(i) = product of dims after i.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Digits of a basis index, one per factor.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.dims.len()];
        for i in (0..self.dims.len()).rev() {
            out[i] = index % self.dims[i];
            index /= self.dims[i];
        }
        out
    }

    /// Basis index from digits.
    pub fn compose(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        let mut index = 0usize;
        for (i, &d) in digits.iter().enumerate() {
            debug_assert!(d < self.dims[i]);
            index = index * self.dims[i] + d;
        }
        index
    }

    /// Validates a strictly increasing, in-range, nonempty factor selection
    /// and returns the complementary selection.
    pub fn complement(&self, keep: &[usize]) -> Result<Vec<usize>> {
        if keep.is_empty() {
            return Err(Error::BadFactorSelection);
        }
        for w in keep.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::BadFactorSelection);
            }
        }
        if *keep.last().unwrap() >= self.dims.len() {
            return Err(Error::InvalidFactorIndex {
                index: *keep.last().unwrap(),
                count: self.dims.len(),
            });
        }
        Ok((0..self.dims.len()).filter(|i| !keep.contains(i)).collect())
    }

    /// Factorization restricted to the selected factors (in their order).
    pub fn select(&self, which: &[usize]) -> Result<Self> {
        for &i in which {
            if i >= self.dims.len() {
                return Err(Error::InvalidFactorIndex { index: i, count: self.dims.len() });
            }
        }
        TensorFactorization::new(which.iter().map(|&i| self.dims[i]).collect())
    }
}

/// Iterates the mixed-radix indices of a subset of factors, yielding the
/// contribution of those digits to the global basis index.
pub(crate) struct SubIndexIter {
    radices: Vec<usize>,
    strides: Vec<usize>,
    digits: Vec<usize>,
    offset: usize,
    done: bool,
}

impl SubIndexIter {
    /// `subset` are factor indices into `f`; stride weights come from `f`.
    pub fn new(f: &TensorFactorization, subset: &[usize]) -> Self {
        let all_strides = f.strides();
        let radices: Vec<usize> = subset.iter().map(|&i| f.factor_dim(i)).collect();
        let strides: Vec<usize> = subset.iter().map(|&i| all_strides[i]).collect();
        let done = radices.iter().any(|&r| r == 0);
        Self { digits: vec![0; radices.len()], radices, strides, offset: 0, done }
    }
}

impl Iterator for SubIndexIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let current = self.offset;
        // advance
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            self.offset += self.strides[i];
            if self.digits[i] < self.radices[i] {
                break;
            }
            self.offset -= self.digits[i] * self.strides[i];
            self.digits[i] = 0;
        }
        Some(current)
    }
}
