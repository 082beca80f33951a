//! Truncated bosonic Fock spaces over a partitioned single-particle space.
//!
//! A [`RegionPartition`] splits the available modes into labelled regions.
//! [`TruncatedFockSpace`] carries every occupation vector with total particle
//! number at most the cutoff `M`, enumerated in graded lexicographic order
//! (by total occupation, then lexicographically) so that basis indices are
//! reproducible. [`region_factorization_iso`] realizes the basis bijection
//! between the joint space over all modes and the tensor product of
//! per-region spaces, restricted to the total-occupation-<= M sector.
//!
//! Only the symmetric (bosonic) statistics are implemented; the truncation is
//! by total particle number, which makes the factorization statement exact on
//! the truncated sector.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::factor::TensorFactorization;
use crate::operator::LinearOperator;
use crate::state::StateVector;
use crate::tolerance::eps_norm;
use crate::{CMatrix, CVector};

/// Ordered region labels with the number of modes each region contributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionPartition {
    labels: Vec<String>,
    modes_per_region: Vec<usize>,
}

impl RegionPartition {
    pub fn new(labels: Vec<String>, modes_per_region: Vec<usize>) -> Result<Self> {
        if labels.is_empty() || labels.len() != modes_per_region.len() {
            return Err(Error::InvalidArgument(
                "partition needs at least one region and one label per region".into(),
            ));
        }
        if modes_per_region.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("each region needs at least one mode".into()));
        }
        Ok(Self { labels, modes_per_region })
    }

    /// Regions labelled "r0", "r1", ... with the given mode counts.
    pub fn numbered(modes_per_region: &[usize]) -> Result<Self> {
        let labels = (0..modes_per_region.len()).map(|i| format!("r{i}")).collect();
        Self::new(labels, modes_per_region.to_vec())
    }

    pub fn n_regions(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn modes_per_region(&self) -> &[usize] {
        &self.modes_per_region
    }

    pub fn total_modes(&self) -> usize {
        self.modes_per_region.iter().sum()
    }

    /// Global mode indices belonging to region `r`.
    pub fn region_modes(&self, r: usize) -> std::ops::Range<usize> {
        let start: usize = self.modes_per_region[..r].iter().sum();
        start..start + self.modes_per_region[r]
    }

    pub fn region_of_mode(&self, mode: usize) -> Option<usize> {
        (0..self.n_regions()).find(|&r| self.region_modes(r).contains(&mode))
    }
}

/// Per-mode particle counts; the basis labels of a Fock space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupationVector {
    counts: Vec<usize>,
}

impl OccupationVector {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// The counts restricted to a contiguous mode range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> OccupationVector {
        OccupationVector::new(self.counts[range].to_vec())
    }
}

impl std::fmt::Display for OccupationVector {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|n| n.to_string()).collect();
        write!(out, "|{}>", parts.join(","))
    }
}

/// All occupation vectors over the partition's modes with total <= cutoff.
#[derive(Debug, Clone)]
pub struct TruncatedFockSpace {
    partition: RegionPartition,
    cutoff: usize,
    basis: Vec<OccupationVector>,
    index: HashMap<Vec<usize>, usize>,
}

impl TruncatedFockSpace {
    pub fn new(partition: RegionPartition, cutoff: usize) -> Self {
        let basis = enumerate_occupations(partition.total_modes(), cutoff);
        let index =
            basis.iter().enumerate().map(|(i, occ)| (occ.counts().to_vec(), i)).collect();
        Self { partition, cutoff, basis, index }
    }

    pub fn partition(&self) -> &RegionPartition {
        &self.partition
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[OccupationVector] {
        &self.basis
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Option<usize> {
        self.index.get(occ.counts()).copied()
    }

    pub fn vacuum(&self) -> StateVector {
        StateVector::basis(self.dimension(), 0)
    }
}

/// Occupation vectors over `n_modes` modes with total <= cutoff, in graded
/// lexicographic order.
fn enumerate_occupations(n_modes: usize, cutoff: usize) -> Vec<OccupationVector> {
    let mut out = Vec::new();
    for total in 0..=cutoff {
        let mut current = vec![0usize; n_modes];
        fill_with_total(&mut current, 0, total, &mut out);
    }
    out
}

fn fill_with_total(
    current: &mut Vec<usize>,
    mode: usize,
    remaining: usize,
    out: &mut Vec<OccupationVector>,
) {
    if mode + 1 == current.len() {
        current[mode] = remaining;
        out.push(OccupationVector::new(current.clone()));
        current[mode] = 0;
        return;
    }
    for n in 0..=remaining {
        current[mode] = n;
        fill_with_total(current, mode + 1, remaining - n, out);
    }
    current[mode] = 0;
}

/// Number of occupation vectors with total <= cutoff.
pub fn fock_dimension(space: &TruncatedFockSpace) -> usize {
    space.dimension()
}

/// The basis bijection between the joint space over all modes and the tensor
/// product of per-region spaces (each truncated at the same cutoff).
#[derive(Debug, Clone)]
pub struct FactorizationIso {
    /// One truncated space per region.
    factors: Vec<TruncatedFockSpace>,
    /// Tensor structure of the product space.
    product_factorization: TensorFactorization,
    /// product-dim x joint-dim isometry with a single 1 per column.
    matrix: CMatrix,
}

impl FactorizationIso {
    pub fn factors(&self) -> &[TruncatedFockSpace] {
        &self.factors
    }

    pub fn product_factorization(&self) -> &TensorFactorization {
        &self.product_factorization
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn joint_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn product_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Product-space basis index of a joint occupation vector.
    pub fn map_basis(&self, space: &TruncatedFockSpace, occ: &OccupationVector) -> Option<usize> {
        let _ = space.index_of(occ)?;
        let mut digits = Vec::with_capacity(self.factors.len());
        for (r, factor) in self.factors.iter().enumerate() {
            let local = occ.slice(space.partition().region_modes(r));
            digits.push(factor.index_of(&local)?);
        }
        Some(self.product_factorization.compose(&digits))
    }

    /// Push a joint-space state through the bijection.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.joint_dim() {
            return Err(Error::DimensionMismatch { expected: self.joint_dim(), got: psi.dim() });
        }
        Ok(StateVector::from_normalized_unchecked(&self.matrix * psi.amplitudes()))
    }
}

/// Builds the bijection |n1,...,nk>  ->  |n^(1)> (x) ... (x) |n^(k)> for a
/// joint truncated space. Injective; the image is the total-occupation-<=M
/// sector of the tensor product, so the induced linear map is an isometry
/// onto its image.
pub fn region_factorization_iso(space: &TruncatedFockSpace) -> FactorizationIso {
    let partition = space.partition();
    let factors: Vec<TruncatedFockSpace> = (0..partition.n_regions())
        .map(|r| {
            TruncatedFockSpace::new(
                RegionPartition::new(
                    vec![partition.labels()[r].clone()],
                    vec![partition.modes_per_region()[r]],
                )
                .expect("single-region partition"),
                space.cutoff(),
            )
        })
        .collect();
    let product_factorization =
        TensorFactorization::new(factors.iter().map(|f| f.dimension()).collect())
            .expect("nonempty partition");

    let mut matrix = CMatrix::zeros(product_factorization.dim(), space.dimension());
    for (col, occ) in space.basis().iter().enumerate() {
        let mut digits = Vec::with_capacity(factors.len());
        for (r, factor) in factors.iter().enumerate() {
            let local = occ.slice(partition.region_modes(r));
            digits.push(factor.index_of(&local).expect("local total <= joint total <= cutoff"));
        }
        matrix[(product_factorization.compose(&digits), col)] = Complex64::new(1.0, 0.0);
    }
    FactorizationIso { factors, product_factorization, matrix }
}

/// Embeds a normalized single-particle wave over all modes as the one-particle
/// state sum_m psi_m |single excitation of mode m> in the product-of-regions
/// space, vacuum elsewhere. Returns the state and its tensor structure.
pub fn embed_first_quantized(
    psi: &[Complex64],
    partition: &RegionPartition,
    cutoff: usize,
) -> Result<(StateVector, TensorFactorization)> {
    if psi.len() != partition.total_modes() {
        return Err(Error::DimensionMismatch { expected: partition.total_modes(), got: psi.len() });
    }
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be >= 1 to hold one particle".into()));
    }
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > eps_norm() {
        return Err(Error::NotNormalized { norm });
    }

    let space = TruncatedFockSpace::new(partition.clone(), cutoff);
    let iso = region_factorization_iso(&space);
    let f = iso.product_factorization().clone();
    let mut amps = CVector::zeros(f.dim());
    for (m, &amp) in psi.iter().enumerate() {
        let mut counts = vec![0usize; partition.total_modes()];
        counts[m] = 1;
        let occ = OccupationVector::new(counts);
        let idx = iso.map_basis(&space, &occ).expect("single excitation within cutoff");
        amps[idx] = amp;
    }
    Ok((StateVector::from_normalized_unchecked(amps), f))
}

/// Creation operator for one mode on the joint space: raises the occupation
/// by one with the usual sqrt(n+1) weight and annihilates states already at
/// the truncation boundary. Non-unitary.
pub fn creation_operator(space: &TruncatedFockSpace, mode: usize) -> Result<LinearOperator> {
    if mode >= space.partition().total_modes() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for {} modes",
            space.partition().total_modes()
        )));
    }
    let dim = space.dimension();
    let mut m = CMatrix::zeros(dim, dim);
    for (col, occ) in space.basis().iter().enumerate() {
        if occ.total() >= space.cutoff() {
            continue; // truncation: annihilated
        }
        let mut counts = occ.counts().to_vec();
        counts[mode] += 1;
        let weight = (counts[mode] as f64).sqrt();
        let row = space
            .index_of(&OccupationVector::new(counts))
            .expect("raised occupation still within cutoff");
        m[(row, col)] = Complex64::new(weight, 0.0);
    }
    LinearOperator::general(m)
}

/// Diagonal operator counting particles in one region of the joint space.
pub fn number_operator(space: &TruncatedFockSpace, region: usize) -> Result<LinearOperator> {
    if region >= space.partition().n_regions() {
        return Err(Error::InvalidArgument(format!(
            "region {region} out of range for {} regions",
            space.partition().n_regions()
        )));
    }
    let modes = space.partition().region_modes(region);
    let dim = space.dimension();
    let mut m = CMatrix::zeros(dim, dim);
    for (i, occ) in space.basis().iter().enumerate() {
        let count: usize = occ.counts()[modes.clone()].iter().sum();
        m[(i, i)] = Complex64::new(count as f64, 0.0);
    }
    LinearOperator::general(m)
}

/// Diagonal operator counting all particles on the joint space.
pub fn total_number_operator(space: &TruncatedFockSpace) -> LinearOperator {
    let dim = space.dimension();
    let mut m = CMatrix::zeros(dim, dim);
    for (i, occ) in space.basis().iter().enumerate() {
        m[(i, i)] = Complex64::new(occ.total() as f64, 0.0);
    }
    LinearOperator::general(m).expect("square by construction")
}

/// Number operator of one region expressed on the product-of-regions space
/// (identity on the other factors).
pub fn product_space_number_operator(iso: &FactorizationIso, region: usize) -> Result<CMatrix> {
    if region >= iso.factors().len() {
        return Err(Error::InvalidArgument(format!(
            "region {region} out of range for {} regions",
            iso.factors().len()
        )));
    }
    let mut m = CMatrix::identity(1, 1);
    for (r, factor) in iso.factors().iter().enumerate() {
        let block = if r == region {
            total_number_operator(factor).matrix().clone()
        } else {
            CMatrix::identity(factor.dimension(), factor.dimension())
        };
        m = m.kronecker(&block);
    }
    Ok(m)
}
