//! States of (region, hypersurface) pairs and the diagnostics built on them:
//! separability and supervenience, no-signalling, light-cone determinism,
//! cross-foliation consistency, the locality hierarchy classifier, and
//! pointer-basis decompositions.

use crate::density::{
    partial_trace, permute_factors_density, reduced_from_pure, tensor_density, trace_distance,
    DensityOperator,
};
use crate::dynamics::{evolve_to, EventSchedule, GateSpec, Payload};
use crate::error::{Error, Result};
use crate::factor::TensorFactorization;
use crate::lattice::{event_affects, event_in_past, past_cone_slice, Event, Foliation, Hypersurface, Region};
use crate::tolerance::eps_tol;
use crate::CMatrix;

/// The density operator a schedule assigns to a region on a hypersurface.
#[derive(Debug, Clone)]
pub struct RegionStateReport {
    pub region: Region,
    pub surface: Hypersurface,
    pub state: DensityOperator,
    pub branch_weight: f64,
}

/// Evolves to the surface and partial-traces onto the region's sites.
///
/// In collapse mode every measurement outcome must be fixed, otherwise
/// region states would not be comparable across surfaces.
pub fn region_state(
    schedule: &EventSchedule,
    region: &Region,
    sigma: &Hypersurface,
) -> Result<RegionStateReport> {
    region.check_on(&schedule.lattice)?;
    if !schedule.all_outcomes_fixed() {
        return Err(Error::PreconditionViolated(
            "region states require fixed measurement outcomes".into(),
        ));
    }
    let evolved = evolve_to(schedule, sigma)?;
    let f = schedule.lattice.factorization();
    let state = reduced_from_pure(&evolved.state, &f, region.sites())?;
    Ok(RegionStateReport {
        region: region.clone(),
        surface: sigma.clone(),
        state,
        branch_weight: evolved.weight,
    })
}

/// Joint state of two disjoint regions next to the product of their
/// marginals; `product_distance` is the trace distance between the two.
#[derive(Debug, Clone)]
pub struct JointVsMarginals {
    pub rho_a: DensityOperator,
    pub rho_b: DensityOperator,
    pub rho_joint: DensityOperator,
    pub product_distance: f64,
}

pub fn joint_vs_marginals(
    schedule: &EventSchedule,
    a: &Region,
    b: &Region,
    sigma: &Hypersurface,
) -> Result<JointVsMarginals> {
    a.is_disjoint(b)?;
    let union = a.union(b);
    let joint_report = region_state(schedule, &union, sigma)?;
    let union_f = TensorFactorization::uniform(union.len(), schedule.lattice.local_dim)?;
    // positions of a's and b's sites within the sorted union
    let pos_in_union = |r: &Region| -> Vec<usize> {
        r.sites().iter().map(|s| union.sites().iter().position(|u| u == s).unwrap()).collect()
    };
    let rho_a = partial_trace(&joint_report.state, &union_f, &pos_in_union(a))?;
    let rho_b = partial_trace(&joint_report.state, &union_f, &pos_in_union(b))?;
    // product in a-then-b slot order, permuted into sorted union order
    let product = tensor_density(&rho_a, &rho_b);
    let concat: Vec<usize> = a.sites().iter().chain(b.sites()).copied().collect();
    let concat_f = TensorFactorization::uniform(concat.len(), schedule.lattice.local_dim)?;
    let perm: Vec<usize> = union
        .sites()
        .iter()
        .map(|s| concat.iter().position(|c| c == s).unwrap())
        .collect();
    let (product_sorted, _) = permute_factors_density(&product, &concat_f, &perm)?;
    let product_distance = trace_distance(&joint_report.state, &product_sorted)?;
    Ok(JointVsMarginals { rho_a, rho_b, rho_joint: joint_report.state, product_distance })
}

/// For a bipartite joint state, returns a second joint state with identical
/// marginals (the product of the marginals) whenever it differs from the
/// input: direct evidence that the part-states underdetermine the whole.
/// Returns `None` for product inputs.
pub fn supervenience_witness(
    joint: &DensityOperator,
    f: &TensorFactorization,
) -> Result<Option<DensityOperator>> {
    if f.n_factors() != 2 {
        return Err(Error::PreconditionViolated("witness construction needs a bipartite factorization".into()));
    }
    if joint.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: joint.dim() });
    }
    let rho_a = partial_trace(joint, f, &[0])?;
    let rho_b = partial_trace(joint, f, &[1])?;
    let witness = tensor_density(&rho_a, &rho_b);
    if trace_distance(joint, &witness)? >= eps_tol() {
        Ok(Some(witness))
    } else {
        Ok(None)
    }
}

/// Result of inserting an extra unitary event and watching a spacelike probe.
#[derive(Debug, Clone)]
pub struct NoSignallingOutcome {
    /// False when the inserted event can causally reach the probe cells, in
    /// which case the contract makes no claim about the distance.
    pub applicable: bool,
    pub distance: f64,
}

/// Compares the probe region's state with and without an extra unitary event.
/// Applicable (and contracted to be below tolerance) only when the event lies
/// outside the causal past of the probe's cells on the surface.
pub fn no_signalling_check(
    schedule: &EventSchedule,
    op_event: &Event,
    gate: &GateSpec,
    probe: &Region,
    sigma: &Hypersurface,
) -> Result<NoSignallingOutcome> {
    let applicable = !event_affects(&schedule.lattice, op_event, probe, sigma);
    let baseline = region_state(schedule, probe, sigma)?;
    let modified = schedule.with_extra_event(op_event.clone(), Payload::Gate(gate.clone()))?;
    let probed = region_state(&modified, probe, sigma)?;
    let distance = trace_distance(&baseline.state, &probed.state)?;
    Ok(NoSignallingOutcome { applicable, distance })
}

/// Result of comparing two schedules' region states when they agree on the
/// past light cone.
#[derive(Debug, Clone)]
pub struct DeterminismOutcome {
    /// Sites of the base cut that can influence the region on the target cut.
    pub cone: Region,
    /// Distance of the two cone-slice states on the base cut.
    pub cone_state_distance: f64,
    /// Whether the two schedules share all not-yet-applied events that can
    /// influence the region on the target cut.
    pub events_match: bool,
    pub preconditions_met: bool,
    /// Distance of the two region states on the target cut.
    pub distance: f64,
}

/// Checks that a region's state on `sigma` is fixed by the state of a
/// spacelike slice of its past light cone (on `sigma0`) plus the dynamics in
/// between. Positive cases contract to distance below tolerance; when the
/// preconditions fail, the distance simply reports what changed.
pub fn lightcone_determinism_check(
    s1: &EventSchedule,
    s2: &EventSchedule,
    region: &Region,
    sigma: &Hypersurface,
    sigma0: &Hypersurface,
) -> Result<DeterminismOutcome> {
    if s1.lattice != s2.lattice {
        return Err(Error::PreconditionViolated("schedules live on different lattices".into()));
    }
    let cone = past_cone_slice(&s1.lattice, region, sigma, sigma0)?;
    let cone1 = region_state(s1, &cone, sigma0)?;
    let cone2 = region_state(s2, &cone, sigma0)?;
    let cone_state_distance = trace_distance(&cone1.state, &cone2.state)?;

    let window_events = |s: &EventSchedule| -> Vec<Event> {
        s.events()
            .iter()
            .filter(|e| !event_in_past(e, sigma0) && event_affects(&s.lattice, e, region, sigma))
            .cloned()
            .collect()
    };
    let w1 = window_events(s1);
    let w2 = window_events(s2);
    let events_match = w1.len() == w2.len()
        && w1.iter().zip(&w2).all(|(a, b)| {
            a.sites == b.sites && a.layer == b.layer && payloads_agree(s1.payload_of(a), s2.payload_of(b))
        });

    let r1 = region_state(s1, region, sigma)?;
    let r2 = region_state(s2, region, sigma)?;
    let distance = trace_distance(&r1.state, &r2.state)?;
    Ok(DeterminismOutcome {
        cone,
        cone_state_distance,
        events_match,
        preconditions_met: cone_state_distance < eps_tol() && events_match,
        distance,
    })
}

fn payloads_agree(a: &Payload, b: &Payload) -> bool {
    match (a, b) {
        (Payload::Gate(g1), Payload::Gate(g2)) => {
            g1.op.dim() == g2.op.dim()
                && (g1.op.matrix() - g2.op.matrix()).iter().all(|v| v.norm() <= eps_tol())
        }
        (Payload::Measure(m1), Payload::Measure(m2)) => {
            m1.policy == m2.policy
                && m1.n_outcomes() == m2.n_outcomes()
                && m1
                    .projectors()
                    .iter()
                    .zip(m2.projectors())
                    .all(|(p, q)| (p - q).iter().all(|v| v.norm() <= eps_tol()))
        }
        _ => false,
    }
}

/// A region's states across several surfaces, grouped into equality classes.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub region: Region,
    pub surfaces: Vec<Hypersurface>,
    pub states: Vec<DensityOperator>,
    /// Indices into `surfaces`/`states`, one vector per equality class.
    pub classes: Vec<Vec<usize>>,
    pub consistent: bool,
}

impl ConsistencyReport {
    /// Representative state of each class.
    pub fn class_states(&self) -> Vec<&DensityOperator> {
        self.classes.iter().map(|members| &self.states[members[0]]).collect()
    }
}

/// Clusters the region's states across the given surfaces by pairwise trace
/// distance (single linkage at the global tolerance). Consistent iff one
/// class. All surfaces must pass through the region at the same layer
/// assignment.
pub fn foliation_consistency(
    schedule: &EventSchedule,
    region: &Region,
    surfaces: &[Hypersurface],
) -> Result<ConsistencyReport> {
    if surfaces.is_empty() {
        return Err(Error::PreconditionViolated("no surfaces to compare".into()));
    }
    let assignment = surfaces[0].restrict(region);
    for sigma in surfaces.iter().skip(1) {
        if sigma.restrict(region) != assignment {
            return Err(Error::PreconditionViolated(
                "surfaces assign different layers to the region".into(),
            ));
        }
    }
    let mut states = Vec::with_capacity(surfaces.len());
    for sigma in surfaces {
        states.push(region_state(schedule, region, sigma)?.state);
    }
    // single-linkage connected components under distance < eps_tol
    let n = states.len();
    let mut class_of: Vec<usize> = (0..n).collect();
    fn find(class_of: &mut Vec<usize>, i: usize) -> usize {
        if class_of[i] != i {
            let root = find(class_of, class_of[i]);
            class_of[i] = root;
        }
        class_of[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if trace_distance(&states[i], &states[j])? < eps_tol() {
                let (ri, rj) = (find(&mut class_of, i), find(&mut class_of, j));
                if ri != rj {
                    class_of[rj] = ri;
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_to_class: std::collections::BTreeMap<usize, usize> = Default::default();
    for i in 0..n {
        let root = find(&mut class_of, i);
        let idx = *root_to_class.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[idx].push(i);
    }
    let consistent = classes.len() == 1;
    Ok(ConsistencyReport {
        region: region.clone(),
        surfaces: surfaces.to_vec(),
        states,
        classes,
        consistent,
    })
}

/// The locality hierarchy, from the classical situation down to regions that
/// lack any surface-independent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyLevel {
    /// Every tested region union is the product of its parts and every
    /// region's state is surface-independent.
    FullLocality,
    /// All regions have surface-independent states but some union state is
    /// not fixed by the part states.
    NonSeparability,
    /// Some region's state depends on which surface it is regarded as part
    /// of.
    Contextuality,
    /// Contextuality so widespread that more than the configured fraction of
    /// tested region placements have no consistent state.
    Nihilism,
}

impl HierarchyLevel {
    pub fn name(&self) -> &'static str {
        match self {
            HierarchyLevel::FullLocality => "FullLocality",
            HierarchyLevel::NonSeparability => "NonSeparability",
            HierarchyLevel::Contextuality => "Contextuality",
            HierarchyLevel::Nihilism => "Nihilism",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeparabilityWitness {
    pub label_a: String,
    pub label_b: String,
    pub surface: Hypersurface,
    pub product_distance: f64,
}

#[derive(Debug, Clone)]
pub struct ContextualityWitness {
    pub label: String,
    pub region: Region,
    /// The common layer assignment of the compared surfaces on the region.
    pub assignment: Vec<usize>,
    pub report: ConsistencyReport,
}

#[derive(Debug, Clone)]
pub struct NihilismCensus {
    /// (region, layer assignment) placements compared across >= 2 surfaces.
    pub tested_placements: usize,
    pub inconsistent_placements: usize,
    pub fraction: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct HierarchyReport {
    pub level: HierarchyLevel,
    pub separability: Vec<SeparabilityWitness>,
    pub contextuality: Vec<ContextualityWitness>,
    pub census: NihilismCensus,
}

/// Classifies a schedule against the hierarchy by sweeping the given labelled
/// regions across every surface of the given foliations.
///
/// A placement is a (region, layer assignment) pair; placements seen on at
/// least two surfaces are tested for consistency. Disjoint region pairs are
/// tested for supervenience on every surface. The nihilism census promotes
/// contextuality when the inconsistent fraction of tested placements exceeds
/// `theta_nihil`.
pub fn classify_hierarchy(
    schedule: &EventSchedule,
    regions: &[(String, Region)],
    foliations: &[Foliation],
    theta_nihil: f64,
) -> Result<HierarchyReport> {
    if regions.is_empty() || foliations.is_empty() {
        return Err(Error::PreconditionViolated("need at least one region and one foliation".into()));
    }
    // all distinct surfaces
    let mut surfaces: Vec<Hypersurface> = Vec::new();
    for f in foliations {
        for sigma in f.surfaces() {
            if !surfaces.contains(sigma) {
                surfaces.push(sigma.clone());
            }
        }
    }

    let mut contextuality = Vec::new();
    let mut tested_placements = 0usize;
    let mut inconsistent_placements = 0usize;
    for (label, region) in regions {
        // group surfaces by the layer assignment they give the region
        let mut groups: std::collections::BTreeMap<Vec<usize>, Vec<Hypersurface>> = Default::default();
        for sigma in &surfaces {
            groups.entry(sigma.restrict(region)).or_default().push(sigma.clone());
        }
        for (assignment, group) in groups {
            if group.len() < 2 {
                continue;
            }
            tested_placements += 1;
            let report = foliation_consistency(schedule, region, &group)?;
            if !report.consistent {
                inconsistent_placements += 1;
                contextuality.push(ContextualityWitness {
                    label: label.clone(),
                    region: region.clone(),
                    assignment,
                    report,
                });
            }
        }
    }

    let mut separability = Vec::new();
    for i in 0..regions.len() {
        for j in (i + 1)..regions.len() {
            let (la, a) = &regions[i];
            let (lb, b) = &regions[j];
            if a.is_disjoint(b).is_err() {
                continue;
            }
            for sigma in &surfaces {
                let cmp = joint_vs_marginals(schedule, a, b, sigma)?;
                if cmp.product_distance >= eps_tol() {
                    separability.push(SeparabilityWitness {
                        label_a: la.clone(),
                        label_b: lb.clone(),
                        surface: sigma.clone(),
                        product_distance: cmp.product_distance,
                    });
                }
            }
        }
    }

    let fraction = if tested_placements == 0 {
        0.0
    } else {
        inconsistent_placements as f64 / tested_placements as f64
    };
    let census = NihilismCensus {
        tested_placements,
        inconsistent_placements,
        fraction,
        threshold: theta_nihil,
    };
    let level = if !contextuality.is_empty() {
        if fraction > theta_nihil {
            HierarchyLevel::Nihilism
        } else {
            HierarchyLevel::Contextuality
        }
    } else if !separability.is_empty() {
        HierarchyLevel::NonSeparability
    } else {
        HierarchyLevel::FullLocality
    };
    Ok(HierarchyReport { level, separability, contextuality, census })
}

/// A state decomposed over a family of pointer subspaces.
#[derive(Debug, Clone)]
pub struct QuasiClassicalDecomposition {
    /// tr(P_i rho) for every projector, in order.
    pub weights: Vec<f64>,
    /// Normalized component within each subspace; `None` for weights below
    /// tolerance (those are omitted rather than divided by ~0).
    pub components: Vec<Option<DensityOperator>>,
    /// Indices of omitted (near-zero weight) components.
    pub omitted: Vec<usize>,
    /// Frobenius norm of the off-block part of the input: how far the state
    /// is from being exactly decohered over the family.
    pub off_block_residual: f64,
}

/// Splits a state over an orthogonal projector family summing to the
/// identity: weights tr(P_i rho), components P_i rho P_i / weight.
pub fn quasi_classical_decompose(
    rho: &DensityOperator,
    projectors: &[CMatrix],
) -> Result<QuasiClassicalDecomposition> {
    if projectors.is_empty() {
        return Err(Error::BadProjectorFamily("no projectors".into()));
    }
    let dim = rho.dim();
    let mut sum = CMatrix::zeros(dim, dim);
    for (k, p) in projectors.iter().enumerate() {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::BadProjectorFamily(format!("projector {k} has wrong shape")));
        }
        let idem = (p * p - p).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if idem > eps_tol() {
            return Err(Error::BadProjectorFamily(format!("projector {k} is not idempotent")));
        }
        for (j, q) in projectors.iter().enumerate().skip(k + 1) {
            let orth = (p * q).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if orth > eps_tol() {
                return Err(Error::BadProjectorFamily(format!(
                    "projectors {k} and {j} are not orthogonal"
                )));
            }
        }
        sum += p;
    }
    let dev = (sum - CMatrix::identity(dim, dim)).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if dev > eps_tol() {
        return Err(Error::BadProjectorFamily(format!(
            "projectors do not sum to the identity (deviation {dev:e})"
        )));
    }

    let mut weights = Vec::with_capacity(projectors.len());
    let mut components = Vec::with_capacity(projectors.len());
    let mut omitted = Vec::new();
    let mut block = CMatrix::zeros(dim, dim);
    for (k, p) in projectors.iter().enumerate() {
        let projected = p * rho.matrix() * p;
        let weight = projected.trace().re;
        block += &projected;
        weights.push(weight);
        if weight < eps_tol() {
            omitted.push(k);
            components.push(None);
        } else {
            components.push(Some(DensityOperator::from_valid_parts(
                projected.scale(1.0 / weight),
            )));
        }
    }
    let off_block_residual = (rho.matrix() - block).norm();
    Ok(QuasiClassicalDecomposition { weights, components, omitted, off_block_residual })
}

/// Marginal of a labelled region taken from a larger region's state (both on
/// the same surface); used by nesting-consistency tests and reports.
pub fn restrict_region_state(
    outer_state: &DensityOperator,
    outer: &Region,
    inner: &Region,
    local_dim: usize,
) -> Result<DensityOperator> {
    if !inner.is_subset_of(outer) {
        return Err(Error::PreconditionViolated("inner region must be a subset".into()));
    }
    let f = TensorFactorization::uniform(outer.len(), local_dim)?;
    let keep: Vec<usize> = inner
        .sites()
        .iter()
        .map(|s| outer.sites().iter().position(|o| o == s).unwrap())
        .collect();
    partial_trace(outer_state, &f, &keep)
}
