//! Checks for the region factorization of truncated Fock spaces, runnable on
//! a single partition or swept over a family of partitions.
//!
//! Strategy: first verify by full scan that the bijection matrix has exactly
//! one unit entry per column (its defining shape); all remaining checks then
//! evaluate the same sums restricted to the verified nonzero pattern, which
//! keeps the sweep exact yet fast. Small spaces additionally cross-check
//! against the dense matrix arithmetic.

use num_complex::Complex64;
use serde_json::{json, Value};

use regionstate::error::Result;
use regionstate::fock::{
    creation_operator, number_operator, product_space_number_operator, region_factorization_iso,
    total_number_operator, RegionPartition, TruncatedFockSpace,
};
use regionstate::scenarios::Check;

type CMatrix = nalgebra::DMatrix<Complex64>;

pub struct SpaceChecks {
    pub summary: Value,
    pub isometry_deviation: f64,
    pub sector_bijection: bool,
    pub number_conservation_deviation: f64,
    pub max_commutator_norm: f64,
}

/// Nonzero pattern of a matrix whose columns each hold at most one entry:
/// (row, value) per column. `None` when a column breaks the pattern.
fn one_hot_columns(m: &CMatrix) -> Option<Vec<(usize, Complex64)>> {
    let mut columns = Vec::with_capacity(m.ncols());
    for c in 0..m.ncols() {
        let mut found: Option<(usize, Complex64)> = None;
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != Complex64::default() {
                if found.is_some() {
                    return None;
                }
                found = Some((r, v));
            }
        }
        columns.push(found?);
    }
    Some(columns)
}

/// Exhaustive inner-product, sector-bijection, number-conservation and
/// cross-region commutator checks for one truncated space.
pub fn check_space(modes: &[usize], cutoff: usize) -> Result<SpaceChecks> {
    let partition = RegionPartition::numbered(modes)?;
    let space = TruncatedFockSpace::new(partition.clone(), cutoff);
    let iso = region_factorization_iso(&space);
    let v = iso.matrix();
    let small = space.dimension() <= 40 && iso.product_dim() <= 100;

    // shape scan: exactly one entry per column, equal to 1
    let columns = one_hot_columns(v).expect("bijection matrix maps basis to basis");

    // inner products <V e_i, V e_j>: with the verified pattern the sum has a
    // single term when the image rows coincide and is zero otherwise
    let mut isometry_deviation: f64 = 0.0;
    for (i, &(ri, vi)) in columns.iter().enumerate() {
        isometry_deviation = isometry_deviation.max(((vi.conj() * vi).re - 1.0).abs());
        for &(rj, vj) in columns.iter().skip(i + 1) {
            if ri == rj {
                isometry_deviation = isometry_deviation.max((vi.conj() * vj).norm());
            }
        }
    }
    if small {
        // dense route on small spaces
        let gram = v.adjoint() * v;
        let id = CMatrix::identity(space.dimension(), space.dimension());
        let dense_dev = (gram - id).iter().map(|x| x.norm()).fold(0.0, f64::max);
        isometry_deviation = isometry_deviation.max(dense_dev);
    }

    // bijection onto the total <= cutoff sector of the product space
    let f = iso.product_factorization();
    let mut hit = vec![false; iso.product_dim()];
    let mut sector_bijection = true;
    for &(row, _) in &columns {
        if hit[row] {
            sector_bijection = false;
        }
        hit[row] = true;
    }
    let product_totals: Vec<usize> = (0..f.dim())
        .map(|prod_idx| {
            f.digits(prod_idx)
                .iter()
                .zip(iso.factors())
                .map(|(&d, factor)| factor.basis()[d].total())
                .sum()
        })
        .collect();
    for (prod_idx, &total) in product_totals.iter().enumerate() {
        if hit[prod_idx] != (total <= cutoff) {
            sector_bijection = false;
        }
    }

    // V N_joint = (sum of per-region numbers) V; both operators are diagonal,
    // so on the verified pattern the equation reduces to matching counts
    let mut number_conservation_deviation: f64 = 0.0;
    {
        let joint_counts: Vec<f64> =
            space.basis().iter().map(|occ| occ.total() as f64).collect();
        for (c, &(row, value)) in columns.iter().enumerate() {
            let deviation = (joint_counts[c] - product_totals[row] as f64).abs() * value.norm();
            number_conservation_deviation = number_conservation_deviation.max(deviation);
        }
        if small {
            let joint_total = total_number_operator(&space);
            let mut product_sum =
                CMatrix::zeros(iso.product_dim(), iso.product_dim());
            for r in 0..partition.n_regions() {
                product_sum += product_space_number_operator(&iso, r)?;
            }
            let diff = v * joint_total.matrix() - product_sum * v;
            number_conservation_deviation = number_conservation_deviation
                .max(diff.iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
    }

    // cross-region creation operators commute on the safe subspace; each
    // operator has at most one entry per column, so both compositions are
    // followed entry by entry
    let mut max_commutator_norm: f64 = 0.0;
    {
        let mut ladders: Vec<Vec<Option<(usize, Complex64)>>> = Vec::new();
        for mode in 0..partition.total_modes() {
            let a = creation_operator(&space, mode)?;
            let cols: Vec<Option<(usize, Complex64)>> = (0..space.dimension())
                .map(|c| {
                    (0..space.dimension())
                        .find(|&r| a.matrix()[(r, c)] != Complex64::default())
                        .map(|r| (r, a.matrix()[(r, c)]))
                })
                .collect();
            ladders.push(cols);
        }
        let compose = |first: &Vec<Option<(usize, Complex64)>>,
                       second: &Vec<Option<(usize, Complex64)>>,
                       col: usize|
         -> Option<(usize, Complex64)> {
            let (mid, w1) = first[col]?;
            let (end, w2) = second[mid]?;
            Some((end, w1 * w2))
        };
        for r1 in 0..partition.n_regions() {
            for r2 in (r1 + 1)..partition.n_regions() {
                for m1 in partition.region_modes(r1) {
                    for m2 in partition.region_modes(r2) {
                        for (col, occ) in space.basis().iter().enumerate() {
                            if occ.total() + 2 > cutoff {
                                continue;
                            }
                            let ab = compose(&ladders[m2], &ladders[m1], col);
                            let ba = compose(&ladders[m1], &ladders[m2], col);
                            let norm = match (ab, ba) {
                                (Some((ra, wa)), Some((rb, wb))) if ra == rb => (wa - wb).norm(),
                                (Some((_, wa)), Some((_, wb))) => wa.norm() + wb.norm(),
                                (Some((_, w)), None) | (None, Some((_, w))) => w.norm(),
                                (None, None) => 0.0,
                            };
                            max_commutator_norm = max_commutator_norm.max(norm);
                        }
                    }
                }
            }
        }
        if small && partition.n_regions() >= 2 {
            let m1 = partition.region_modes(0).next().expect("nonempty region");
            let m2 = partition.region_modes(1).next().expect("nonempty region");
            let a1 = creation_operator(&space, m1)?;
            let a2 = creation_operator(&space, m2)?;
            let comm = a1.commutator(&a2)?;
            for (col, occ) in space.basis().iter().enumerate() {
                if occ.total() + 2 <= cutoff {
                    let norm: f64 = comm.column(col).iter().map(|x| x.norm()).sum();
                    max_commutator_norm = max_commutator_norm.max(norm);
                }
            }
        }
    }
    // per-region counters stay constructible for every labelled region
    for r in 0..partition.n_regions() {
        let _ = number_operator(&space, r)?;
    }

    let summary = json!({
        "cutoff": cutoff,
        "isometry_deviation": crate::report::num(isometry_deviation),
        "joint_dim": space.dimension(),
        "max_commutator_norm": crate::report::num(max_commutator_norm),
        "modes_per_region": modes,
        "number_conservation_deviation": crate::report::num(number_conservation_deviation),
        "product_dim": iso.product_dim(),
        "sector_bijection": sector_bijection,
    });
    Ok(SpaceChecks {
        summary,
        isometry_deviation,
        sector_bijection,
        number_conservation_deviation,
        max_commutator_norm,
    })
}

/// Occupation-vector count over `modes` modes with total <= cutoff:
/// binomial(modes + cutoff, modes).
fn truncated_dim(modes: usize, cutoff: usize) -> usize {
    let mut acc = 1usize;
    for k in 1..=modes {
        acc = acc * (cutoff + k) / k;
    }
    acc
}

/// Every partition with 1..=4 regions of 1..=3 modes and cutoff 0..=4 whose
/// joint dimension stays within the cap (and whose per-region product space
/// stays small enough to build densely).
pub fn partition_family(max_joint_dim: usize) -> Vec<(Vec<usize>, usize)> {
    let mut family = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(modes) = stack.pop() {
        if !modes.is_empty() {
            for cutoff in 0..=4 {
                let joint_dim = truncated_dim(modes.iter().sum(), cutoff);
                let product_dim: usize = modes.iter().map(|&d| truncated_dim(d, cutoff)).product();
                if joint_dim <= max_joint_dim && product_dim <= 1024 {
                    family.push((modes.clone(), cutoff));
                }
            }
        }
        if modes.len() < 4 {
            for d in 1..=3 {
                let mut next = modes.clone();
                next.push(d);
                stack.push(next);
            }
        }
    }
    family.sort();
    family
}

/// Aggregate checks over the family; returns per-space summaries and the
/// pass/fail verdicts at the standard tolerances.
pub fn sweep(max_joint_dim: usize) -> Result<(Vec<Value>, Vec<Check>)> {
    let mut summaries = Vec::new();
    let mut worst_isometry: f64 = 0.0;
    let mut worst_conservation: f64 = 0.0;
    let mut worst_commutator: f64 = 0.0;
    let mut all_bijective = true;
    let family = partition_family(max_joint_dim);
    let count = family.len();
    for (modes, cutoff) in family {
        let out = check_space(&modes, cutoff)?;
        worst_isometry = worst_isometry.max(out.isometry_deviation);
        worst_conservation = worst_conservation.max(out.number_conservation_deviation);
        worst_commutator = worst_commutator.max(out.max_commutator_norm);
        all_bijective &= out.sector_bijection;
        summaries.push(out.summary);
    }
    let checks = vec![
        Check::distance(
            "isometry",
            "exact inner products",
            format!("{count} spaces"),
            worst_isometry,
            1e-12,
        ),
        Check::flag("sector_bijection", "basis bijection onto the truncated sector", all_bijective),
        Check::distance(
            "number_conservation",
            "joint counter maps to per-region sum",
            "max matrix deviation",
            worst_conservation,
            1e-10,
        ),
        Check::distance(
            "cross_region_commutators",
            "0 on the safe subspace",
            "max column norm",
            worst_commutator,
            1e-10,
        ),
    ];
    Ok((summaries, checks))
}
