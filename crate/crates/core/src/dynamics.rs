//! Evolution of a global state along foliations of an event schedule.
//!
//! Two modes: purely unitary, and foliation-relative collapse (FRC), where a
//! measurement event projects the global state onto one outcome at the first
//! surface whose past contains the event, multiplying the branch weight by
//! the outcome's Born probability. Measurement outcomes are postselected
//! (fixed) by default so that different foliations of the same schedule tell
//! comparable stories about a single realized branch; a seeded sampling
//! policy exists for frequency tests on a single foliation.
//!
//! Events in the past of a cut are applied in (layer, lowest site) order.
//! Same-layer events never share a site, so any order consistent with the
//! per-site layer order yields the same state.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;

use crate::density::{density_of, trace_distance};
use crate::error::{Error, Result};
use crate::lattice::{event_in_past, Event, Foliation, Hypersurface, Lattice, Region};
use crate::operator::LinearOperator;
use crate::state::{apply_matrix_local, permute_factors, StateVector};
use crate::tolerance::eps_tol;
use crate::CMatrix;

/// A named unitary gate of arity 1 or 2.
#[derive(Debug, Clone)]
pub struct GateSpec {
    pub name: String,
    pub op: LinearOperator,
}

impl GateSpec {
    pub fn new(name: impl Into<String>, op: LinearOperator) -> Result<Self> {
        if !op.is_unitary() {
            return Err(Error::NotUnitary { deviation: f64::NAN });
        }
        Ok(Self { name: name.into(), op })
    }
}

/// How a measurement event selects its outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomePolicy {
    /// Postselect the given projector index; required for cross-foliation
    /// comparisons.
    Fixed(usize),
    /// Draw from the Born distribution with a generator derived from this
    /// seed and the event id. Deterministic per (seed, event, foliation).
    Sampled { seed: u64 },
}

/// A complete orthogonal projector family with an outcome policy.
#[derive(Debug, Clone)]
pub struct MeasurementSpec {
    pub name: String,
    projectors: Vec<CMatrix>,
    pub policy: OutcomePolicy,
}

impl MeasurementSpec {
    pub fn new(
        name: impl Into<String>,
        projectors: Vec<CMatrix>,
        policy: OutcomePolicy,
    ) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::BadProjectorFamily("no projectors".into()));
        }
        let dim = projectors[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (k, p) in projectors.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::BadProjectorFamily(format!("projector {k} has wrong shape")));
            }
            sum += p;
            for (j, q) in projectors.iter().enumerate() {
                let prod = p * q;
                let expect = if j == k { p.clone() } else { CMatrix::zeros(dim, dim) };
                let dev = (prod - expect).iter().map(|v| v.norm()).fold(0.0, f64::max);
                if dev > eps_tol() {
                    return Err(Error::BadProjectorFamily(format!(
                        "projectors {k} and {j} are not orthogonal idempotents (deviation {dev:e})"
                    )));
                }
            }
        }
        let dev = (sum - CMatrix::identity(dim, dim)).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if dev > eps_tol() {
            return Err(Error::BadProjectorFamily(format!(
                "projectors do not sum to the identity (deviation {dev:e})"
            )));
        }
        Ok(Self { name: name.into(), projectors, policy })
    }

    /// Computational-basis measurement of a single factor.
    pub fn z_basis(name: impl Into<String>, local_dim: usize, policy: OutcomePolicy) -> Self {
        let projectors = (0..local_dim)
            .map(|k| {
                let mut p = CMatrix::zeros(local_dim, local_dim);
                p[(k, k)] = Complex64::new(1.0, 0.0);
                p
            })
            .collect();
        Self { name: name.into(), projectors, policy }
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn n_outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }
}

/// What an event does when it fires.
#[derive(Debug, Clone)]
pub enum Payload {
    Gate(GateSpec),
    Measure(MeasurementSpec),
}

impl Payload {
    pub fn dim(&self) -> usize {
        match self {
            Payload::Gate(g) => g.op.dim(),
            Payload::Measure(m) => m.dim(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsMode {
    Unitary,
    Frc,
}

/// An initial global state plus located events: a complete dynamical
/// scenario.
#[derive(Debug, Clone)]
pub struct EventSchedule {
    pub lattice: Lattice,
    pub initial: StateVector,
    events: Vec<Event>,
    payloads: BTreeMap<String, Payload>,
    pub mode: DynamicsMode,
}

impl EventSchedule {
    pub fn new(
        lattice: Lattice,
        initial: StateVector,
        events: Vec<Event>,
        payloads: BTreeMap<String, Payload>,
        mode: DynamicsMode,
    ) -> Result<Self> {
        if initial.dim() != lattice.dim() {
            return Err(Error::DimensionMismatch { expected: lattice.dim(), got: initial.dim() });
        }
        let mut events = events;
        events.sort_by(|a, b| (a.layer, a.min_site()).cmp(&(b.layer, b.min_site())));
        // no two events at the same layer may share a site
        for (i, a) in events.iter().enumerate() {
            a.validate_on(&lattice)?;
            for b in events.iter().skip(i + 1).take_while(|b| b.layer == a.layer) {
                if a.sites.iter().any(|s| b.sites.contains(s)) {
                    return Err(Error::BadEvent {
                        id: b.id.clone(),
                        reason: format!("shares a site with `{}` at layer {}", a.id, a.layer),
                    });
                }
            }
            let payload = payloads
                .get(&a.payload)
                .ok_or_else(|| Error::UnknownPayload { name: a.payload.clone(), event: a.id.clone() })?;
            let expected = lattice.local_dim.pow(a.sites.len() as u32);
            if payload.dim() != expected {
                return Err(Error::BadEvent {
                    id: a.id.clone(),
                    reason: format!(
                        "payload `{}` has dimension {} but the event spans dimension {expected}",
                        a.payload,
                        payload.dim()
                    ),
                });
            }
            if mode == DynamicsMode::Unitary {
                if let Payload::Measure(_) = payload {
                    return Err(Error::MeasurementInUnitaryMode { event: a.id.clone() });
                }
            }
        }
        Ok(Self { lattice, initial, events, payloads, mode })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn payloads(&self) -> &BTreeMap<String, Payload> {
        &self.payloads
    }

    pub fn payload_of(&self, event: &Event) -> &Payload {
        &self.payloads[&event.payload]
    }

    /// True when every measurement outcome is postselected, which is what
    /// cross-foliation comparisons require.
    pub fn all_outcomes_fixed(&self) -> bool {
        self.payloads.values().all(|p| match p {
            Payload::Gate(_) => true,
            Payload::Measure(m) => matches!(m.policy, OutcomePolicy::Fixed(_)),
        })
    }

    /// A copy with one more event (used by signalling and determinism
    /// checks); revalidates everything.
    pub fn with_extra_event(&self, event: Event, payload: Payload) -> Result<EventSchedule> {
        let mut events = self.events.clone();
        let mut payloads = self.payloads.clone();
        if payloads.contains_key(&event.payload) {
            return Err(Error::BadEvent {
                id: event.id.clone(),
                reason: format!("payload name `{}` already in use", event.payload),
            });
        }
        payloads.insert(event.payload.clone(), payload);
        events.push(event);
        EventSchedule::new(self.lattice.clone(), self.initial.clone(), events, payloads, self.mode)
    }
}

/// The state reached at a hypersurface, with the accumulated branch weight
/// and the realized outcome of each measurement already applied.
#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub state: StateVector,
    pub weight: f64,
    pub outcomes: BTreeMap<String, usize>,
}

/// Applies all events in the past of `sigma`, in (layer, lowest site) order.
pub fn evolve_to(schedule: &EventSchedule, sigma: &Hypersurface) -> Result<EvolveResult> {
    if sigma.cut().len() != schedule.lattice.n_sites {
        return Err(Error::DimensionMismatch {
            expected: schedule.lattice.n_sites,
            got: sigma.cut().len(),
        });
    }
    let mut amps = schedule.initial.amplitudes().clone();
    let mut weight = 1.0;
    let mut outcomes = BTreeMap::new();
    let f = schedule.lattice.factorization();
    for event in schedule.events() {
        if !event_in_past(event, sigma) {
            continue;
        }
        apply_event(schedule, event, &f, &mut amps, &mut weight, &mut outcomes)?;
    }
    Ok(EvolveResult { state: StateVector::from_normalized_unchecked(amps), weight, outcomes })
}

fn apply_event(
    schedule: &EventSchedule,
    event: &Event,
    f: &crate::factor::TensorFactorization,
    amps: &mut crate::CVector,
    weight: &mut f64,
    outcomes: &mut BTreeMap<String, usize>,
) -> Result<()> {
    match schedule.payload_of(event) {
        Payload::Gate(gate) => {
            *amps = apply_matrix_local(gate.op.matrix(), amps, f, &event.sites)?;
        }
        Payload::Measure(m) => {
            let outcome = match m.policy {
                OutcomePolicy::Fixed(k) => {
                    if k >= m.n_outcomes() {
                        return Err(Error::BadEvent {
                            id: event.id.clone(),
                            reason: format!("fixed outcome {k} out of range"),
                        });
                    }
                    k
                }
                OutcomePolicy::Sampled { seed } => {
                    sample_outcome(m, seed, &event.id, amps, f, &event.sites)?
                }
            };
            let projected = apply_matrix_local(&m.projectors()[outcome], amps, f, &event.sites)?;
            let p = projected.norm_squared();
            if p <= eps_tol() {
                return Err(Error::BranchAnnihilated {
                    event: event.id.clone(),
                    outcome,
                    probability: p,
                });
            }
            *weight *= p;
            *amps = projected / Complex64::from(p.sqrt());
            outcomes.insert(event.id.clone(), outcome);
        }
    }
    Ok(())
}

fn sample_outcome(
    m: &MeasurementSpec,
    seed: u64,
    event_id: &str,
    amps: &crate::CVector,
    f: &crate::factor::TensorFactorization,
    sites: &[usize],
) -> Result<usize> {
    let mut probs = Vec::with_capacity(m.n_outcomes());
    for p in m.projectors() {
        let projected = apply_matrix_local(p, amps, f, sites)?;
        probs.push(projected.norm_squared());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ fnv1a(event_id));
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(probs.len() - 1)
}

fn fnv1a(s: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// One state per surface of a foliation, with the branch weight accumulated
/// by the end of the sweep.
#[derive(Debug, Clone)]
pub struct StateHistory {
    pub foliation: Foliation,
    pub states: Vec<StateVector>,
    pub branch_weight: f64,
    pub outcomes: BTreeMap<String, usize>,
}

/// Evolves the schedule through every surface of the foliation. Each event
/// acts exactly once, at the first surface whose past contains it; later
/// surfaces reuse the collapsed branch.
pub fn history_along(schedule: &EventSchedule, foliation: &Foliation) -> Result<StateHistory> {
    crate::lattice::validate_foliation(&schedule.lattice, foliation, schedule.events())?;
    let f = schedule.lattice.factorization();
    let mut amps = schedule.initial.amplitudes().clone();
    let mut weight = 1.0;
    let mut outcomes = BTreeMap::new();
    let mut applied = vec![false; schedule.events().len()];
    let mut states = Vec::with_capacity(foliation.len());
    for sigma in foliation.surfaces() {
        for (i, event) in schedule.events().iter().enumerate() {
            if applied[i] || !event_in_past(event, sigma) {
                continue;
            }
            apply_event(schedule, event, &f, &mut amps, &mut weight, &mut outcomes)?;
            applied[i] = true;
        }
        states.push(StateVector::from_normalized_unchecked(amps.clone()));
    }
    Ok(StateHistory {
        foliation: foliation.clone(),
        states,
        branch_weight: weight,
        outcomes,
    })
}

/// Per-surface trace distances between two histories' densities, and whether
/// they agree everywhere within tolerance. Global phase is never compared.
#[derive(Debug, Clone)]
pub struct HistoryComparison {
    pub equal: bool,
    pub distances: Vec<f64>,
}

pub fn histories_equal(h1: &StateHistory, h2: &StateHistory) -> Result<HistoryComparison> {
    if h1.states.len() != h2.states.len() {
        return Err(Error::HistoryLengthMismatch { left: h1.states.len(), right: h2.states.len() });
    }
    let mut distances = Vec::with_capacity(h1.states.len());
    for (a, b) in h1.states.iter().zip(&h2.states) {
        distances.push(trace_distance(&density_of(a), &density_of(b))?);
    }
    let equal = distances.iter().all(|&d| d < eps_tol());
    Ok(HistoryComparison { equal, distances })
}

/// Shifts every event site and the initial state's factors by `k` sites
/// around a periodic lattice.
pub fn translate_schedule(schedule: &EventSchedule, k: i64) -> Result<EventSchedule> {
    let lattice = &schedule.lattice;
    if !lattice.periodic {
        return Err(Error::NotPeriodic);
    }
    let n = lattice.n_sites;
    let shift = |s: usize| -> usize { ((s as i64 + k).rem_euclid(n as i64)) as usize };
    let events: Vec<Event> = schedule
        .events()
        .iter()
        .map(|e| {
            Event::new(
                e.id.clone(),
                e.sites.iter().map(|&s| shift(s)).collect(),
                e.layer,
                e.payload.clone(),
            )
        })
        .collect();
    // new slot i holds the factor previously at site i - k
    let back = |s: usize| -> usize { ((s as i64 - k).rem_euclid(n as i64)) as usize };
    let perm: Vec<usize> = (0..n).map(back).collect();
    let (initial, _) = permute_factors(&schedule.initial, &lattice.factorization(), &perm)?;
    EventSchedule::new(lattice.clone(), initial, events, schedule.payloads().clone(), schedule.mode)
}

/// The cut as seen after translating the lattice contents by `k` sites.
pub fn translate_surface(lattice: &Lattice, sigma: &Hypersurface, k: i64) -> Result<Hypersurface> {
    if !lattice.periodic {
        return Err(Error::NotPeriodic);
    }
    let n = lattice.n_sites as i64;
    let cut: Vec<usize> = (0..lattice.n_sites)
        .map(|i| sigma.value(((i as i64 - k).rem_euclid(n)) as usize))
        .collect();
    Hypersurface::new(lattice, cut)
}

/// The region as seen after translating the lattice contents by `k` sites.
pub fn translate_region(lattice: &Lattice, region: &Region, k: i64) -> Result<Region> {
    if !lattice.periodic {
        return Err(Error::NotPeriodic);
    }
    let n = lattice.n_sites as i64;
    Region::new(region.sites().iter().map(|&s| ((s as i64 + k).rem_euclid(n)) as usize).collect())
}
