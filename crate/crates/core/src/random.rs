//! Seeded generators for states, unitaries, cuts and whole schedules.
//!
//! Everything here takes an explicit generator; sweeps stay reproducible and
//! independent runs can be parallelized by seeding distinct generators.

use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::density::DensityOperator;
use crate::dynamics::{DynamicsMode, EventSchedule, GateSpec, Payload};
use crate::error::Result;
use crate::lattice::{event_straddles, Event, Foliation, Hypersurface, Lattice};
use crate::operator::LinearOperator;
use crate::state::StateVector;
use crate::{CMatrix, CVector};

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Haar-ish random unitary via QR of a complex Gaussian matrix with the
/// customary phase fix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> LinearOperator {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    LinearOperator::unitary(q).expect("QR produces a unitary factor")
}

/// Uniformly random pure state.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> StateVector {
    let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
    StateVector::normalized(v).expect("Gaussian vector is nonzero almost surely")
}

/// Full-rank random density operator GG'/tr(GG').
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let p = &g * g.adjoint();
    let tr = p.trace().re;
    DensityOperator::from_valid_parts(p.scale(1.0 / tr))
}

/// A random valid cut: a bounded random walk across the sites.
pub fn random_hypersurface(lattice: &Lattice, rng: &mut impl Rng) -> Hypersurface {
    loop {
        let mut cut = Vec::with_capacity(lattice.n_sites);
        let mut v = rng.gen_range(0..=lattice.n_layers);
        cut.push(v);
        for _ in 1..lattice.n_sites {
            let lo = v.saturating_sub(1);
            let hi = (v + 1).min(lattice.n_layers);
            v = rng.gen_range(lo..=hi);
            cut.push(v);
        }
        if let Ok(sigma) = Hypersurface::new(lattice, cut) {
            return sigma;
        }
        // periodic wrap can reject; retry
    }
}

/// Shape of a random circuit schedule.
#[derive(Debug, Clone)]
pub struct RandomScheduleParams {
    pub n_sites: usize,
    pub n_layers: usize,
    pub local_dim: usize,
    pub periodic: bool,
    /// Chance that a site starts a gate at a given layer.
    pub gate_density: f64,
    /// Chance that a started gate grabs its right neighbour too.
    pub two_site_prob: f64,
}

impl Default for RandomScheduleParams {
    fn default() -> Self {
        Self {
            n_sites: 4,
            n_layers: 3,
            local_dim: 2,
            periodic: false,
            gate_density: 0.6,
            two_site_prob: 0.4,
        }
    }
}

/// A random unitary circuit: random initial state, random 1- and 2-site
/// gates scattered over the layers with no same-layer site sharing.
pub fn random_schedule(params: &RandomScheduleParams, rng: &mut impl Rng) -> Result<EventSchedule> {
    let lattice = if params.periodic {
        Lattice::periodic(params.n_sites, params.n_layers, params.local_dim)?
    } else {
        Lattice::new(params.n_sites, params.n_layers, params.local_dim)?
    };
    let initial = random_state(lattice.dim(), rng);
    let mut events = Vec::new();
    let mut payloads = BTreeMap::new();
    let mut counter = 0usize;
    for layer in 0..params.n_layers {
        let mut used = vec![false; params.n_sites];
        for site in 0..params.n_sites {
            if used[site] || rng.gen::<f64>() >= params.gate_density {
                continue;
            }
            let right = (site + 1) % params.n_sites;
            let pair_ok = site + 1 < params.n_sites && !used[site + 1]
                || params.periodic && params.n_sites > 2 && right != site && !used[right];
            let sites = if pair_ok && rng.gen::<f64>() < params.two_site_prob {
                let partner = if site + 1 < params.n_sites { site + 1 } else { right };
                used[partner] = true;
                vec![site, partner]
            } else {
                vec![site]
            };
            used[site] = true;
            let dim = params.local_dim.pow(sites.len() as u32);
            let name = format!("u{counter}");
            counter += 1;
            payloads.insert(
                name.clone(),
                Payload::Gate(GateSpec::new(name.clone(), random_unitary(dim, rng))?),
            );
            events.push(Event::new(format!("e{counter}"), sites, layer, name));
        }
    }
    EventSchedule::new(lattice, initial, events, payloads, DynamicsMode::Unitary)
}

/// A random valid foliation of the schedule: a monotone sweep from the
/// all-zeros cut to the top cut that never straddles an event. Single sites
/// advance alone; the two sites of a paired event advance together.
pub fn random_foliation(
    lattice: &Lattice,
    events: &[Event],
    rng: &mut impl Rng,
) -> Result<Foliation> {
    let mut cut = vec![0usize; lattice.n_sites];
    let mut surfaces = vec![Hypersurface::new(lattice, cut.clone())?];
    while cut.iter().any(|&v| v < lattice.n_layers) {
        let bumps = rng.gen_range(1..=lattice.n_sites);
        let mut advanced = false;
        for _ in 0..bumps {
            if let Some(next) = random_bump(lattice, events, &cut, rng) {
                cut = next;
                advanced = true;
            }
        }
        if !advanced {
            // deterministic fallback: advance a minimal site (or its event pair)
            let next = min_site_bump(lattice, events, &cut)
                .expect("a minimal site can always advance");
            cut = next;
        }
        surfaces.push(Hypersurface::new(lattice, cut.clone())?);
    }
    Foliation::new(lattice, surfaces)
}

fn try_bump(
    lattice: &Lattice,
    events: &[Event],
    cut: &[usize],
    sites: &[usize],
) -> Option<Vec<usize>> {
    let mut next = cut.to_vec();
    for &s in sites {
        if next[s] >= lattice.n_layers {
            return None;
        }
        next[s] += 1;
    }
    let sigma = Hypersurface::new(lattice, next.clone()).ok()?;
    if events.iter().any(|e| event_straddles(e, &sigma)) {
        return None;
    }
    Some(next)
}

fn random_bump(
    lattice: &Lattice,
    events: &[Event],
    cut: &[usize],
    rng: &mut impl Rng,
) -> Option<Vec<usize>> {
    for _ in 0..8 {
        let site = rng.gen_range(0..lattice.n_sites);
        if let Some(next) = try_bump(lattice, events, cut, &[site]) {
            return Some(next);
        }
        // the site may be locked to an event partner; advance them together
        if let Some(e) = events
            .iter()
            .find(|e| e.sites.len() == 2 && e.sites.contains(&site) && e.layer == cut[site])
        {
            if let Some(next) = try_bump(lattice, events, cut, &e.sites) {
                return Some(next);
            }
        }
    }
    None
}

fn min_site_bump(lattice: &Lattice, events: &[Event], cut: &[usize]) -> Option<Vec<usize>> {
    let m = *cut.iter().min().unwrap();
    for site in 0..lattice.n_sites {
        if cut[site] != m {
            continue;
        }
        if let Some(next) = try_bump(lattice, events, cut, &[site]) {
            return Some(next);
        }
        if let Some(e) = events
            .iter()
            .find(|e| e.sites.len() == 2 && e.sites.contains(&site) && e.layer == cut[site])
        {
            if let Some(next) = try_bump(lattice, events, cut, &e.sites) {
                return Some(next);
            }
        }
    }
    None
}
