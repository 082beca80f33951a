//! Discrete (1+1)-dimensional spacetime: sites, layers, events, light cones,
//! hypersurfaces and foliations.
//!
//! Light speed is one site per layer. A gate event at layer `t` acts during
//! the step from `t` to `t+1`, so an event lies in the past of a cut exactly
//! when every one of its sites has cut value strictly above the event layer.
//! Hypersurfaces obey the causal slope bound |cut(i) - cut(i+1)| <= 1 and may
//! never split the two sites of a paired event.

use crate::error::{Error, Result};

/// The spacetime arena: `n_sites` sites evolved through `n_layers` steps,
/// each site carrying a `local_dim`-dimensional factor. Periodic lattices
/// wrap site distance and adjacency around the edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub n_sites: usize,
    pub n_layers: usize,
    pub local_dim: usize,
    pub periodic: bool,
}

impl Lattice {
    pub fn new(n_sites: usize, n_layers: usize, local_dim: usize) -> Result<Self> {
        if n_sites == 0 || n_layers == 0 || local_dim == 0 {
            return Err(Error::InvalidArgument(
                "lattice needs at least one site, one layer and local dimension >= 1".into(),
            ));
        }
        Ok(Self { n_sites, n_layers, local_dim, periodic: false })
    }

    pub fn periodic(n_sites: usize, n_layers: usize, local_dim: usize) -> Result<Self> {
        let mut l = Self::new(n_sites, n_layers, local_dim)?;
        l.periodic = true;
        Ok(l)
    }

    /// Dimension of the global state space.
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.n_sites as u32)
    }

    pub fn factorization(&self) -> crate::factor::TensorFactorization {
        crate::factor::TensorFactorization::uniform(self.n_sites, self.local_dim)
            .expect("n_sites >= 1")
    }

    /// Site distance; wraps around on periodic lattices.
    pub fn site_distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        if self.periodic {
            d.min(self.n_sites - d)
        } else {
            d
        }
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.site_distance(i, j) == 1
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites {
            return Err(Error::SiteOutOfRange { site, n_sites: self.n_sites });
        }
        Ok(())
    }
}

/// A nonempty set of site indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    sites: Vec<usize>,
}

impl Region {
    pub fn new(mut sites: Vec<usize>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("region must contain at least one site".into()));
        }
        sites.sort_unstable();
        sites.dedup();
        Ok(Self { sites })
    }

    pub fn site(site: usize) -> Self {
        Self { sites: vec![site] }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_disjoint(&self, other: &Region) -> Result<()> {
        for &s in &self.sites {
            if other.contains(s) {
                return Err(Error::OverlappingRegions { site: s });
            }
        }
        Ok(())
    }

    /// Sorted union of two regions.
    pub fn union(&self, other: &Region) -> Region {
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&other.sites);
        Region::new(sites).expect("nonempty")
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.sites.iter().all(|&s| other.contains(s))
    }

    pub fn check_on(&self, lattice: &Lattice) -> Result<()> {
        for &s in &self.sites {
            lattice.check_site(s)?;
        }
        Ok(())
    }
}

/// A located dynamical event: one or two adjacent sites, a layer, and the
/// name of the gate or measurement payload it triggers.
///
/// The site list is kept in payload slot order (the first site receives the
/// payload's first tensor slot), which survives translations around a
/// periodic lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    pub sites: Vec<usize>,
    pub layer: usize,
    pub payload: String,
}

impl Event {
    pub fn new(
        id: impl Into<String>,
        sites: Vec<usize>,
        layer: usize,
        payload: impl Into<String>,
    ) -> Self {
        Self { id: id.into(), sites, layer, payload: payload.into() }
    }

    pub fn validate_on(&self, lattice: &Lattice) -> Result<()> {
        if self.sites.is_empty() || self.sites.len() > 2 {
            return Err(Error::BadEvent {
                id: self.id.clone(),
                reason: "events act on exactly 1 or 2 sites".into(),
            });
        }
        for &s in &self.sites {
            lattice.check_site(s)?;
        }
        if self.sites.len() == 2 {
            if self.sites[0] == self.sites[1] {
                return Err(Error::BadEvent {
                    id: self.id.clone(),
                    reason: "duplicate site".into(),
                });
            }
            if !lattice.adjacent(self.sites[0], self.sites[1]) {
                return Err(Error::BadEvent {
                    id: self.id.clone(),
                    reason: "two-site events must act on adjacent sites".into(),
                });
            }
        }
        if self.layer >= lattice.n_layers {
            return Err(Error::BadEvent {
                id: self.id.clone(),
                reason: format!("layer {} outside [0, {})", self.layer, lattice.n_layers),
            });
        }
        Ok(())
    }

    pub fn min_site(&self) -> usize {
        *self.sites.iter().min().expect("events have at least one site")
    }
}

/// A causal cut: one time value per site, slope-bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypersurface {
    cut: Vec<usize>,
}

impl Hypersurface {
    pub fn new(lattice: &Lattice, cut: Vec<usize>) -> Result<Self> {
        if cut.len() != lattice.n_sites {
            return Err(Error::DimensionMismatch { expected: lattice.n_sites, got: cut.len() });
        }
        for (site, &v) in cut.iter().enumerate() {
            if v > lattice.n_layers {
                return Err(Error::CutOutOfRange { value: v, site, max: lattice.n_layers });
            }
        }
        for i in 0..cut.len().saturating_sub(1) {
            if cut[i].abs_diff(cut[i + 1]) > 1 {
                return Err(Error::SlopeViolation {
                    site: i,
                    next: i + 1,
                    a: cut[i],
                    b: cut[i + 1],
                });
            }
        }
        if lattice.periodic && lattice.n_sites > 1 {
            let last = cut.len() - 1;
            if cut[last].abs_diff(cut[0]) > 1 {
                return Err(Error::SlopeViolation { site: last, next: 0, a: cut[last], b: cut[0] });
            }
        }
        Ok(Self { cut })
    }

    /// The constant cut at `layer`.
    pub fn flat(lattice: &Lattice, layer: usize) -> Result<Self> {
        Self::new(lattice, vec![layer; lattice.n_sites])
    }

    pub fn cut(&self) -> &[usize] {
        &self.cut
    }

    pub fn value(&self, site: usize) -> usize {
        self.cut[site]
    }

    pub fn pointwise_leq(&self, other: &Hypersurface) -> bool {
        self.cut.iter().zip(&other.cut).all(|(a, b)| a <= b)
    }

    /// The cut restricted to a region's sites (its "layer assignment").
    pub fn restrict(&self, region: &Region) -> Vec<usize> {
        region.sites().iter().map(|&s| self.cut[s]).collect()
    }
}

/// True iff every site of the event lies strictly below the cut, i.e. the
/// event has fully acted by this surface.
pub fn event_in_past(event: &Event, sigma: &Hypersurface) -> bool {
    event.sites.iter().all(|&s| event.layer < sigma.value(s))
}

/// True iff a surface separates the two sites of an event (one before, one
/// after). Forbidden for surfaces used in foliations.
pub fn event_straddles(event: &Event, sigma: &Hypersurface) -> bool {
    let past: Vec<bool> = event.sites.iter().map(|&s| event.layer < sigma.value(s)).collect();
    past.iter().any(|&p| p) && !past.iter().all(|&p| p)
}

/// True iff the two events are spacelike separated: the minimum site distance
/// between them strictly exceeds their layer separation.
pub fn is_spacelike(lattice: &Lattice, a: &Event, b: &Event) -> bool {
    let mut min_dist = usize::MAX;
    for &i in &a.sites {
        for &j in &b.sites {
            min_dist = min_dist.min(lattice.site_distance(i, j));
        }
    }
    min_dist > a.layer.abs_diff(b.layer)
}

/// Sites whose cells on the base cut can causally influence the region's
/// cells on the target cut under slope-1 propagation.
pub fn past_cone_slice(
    lattice: &Lattice,
    region: &Region,
    sigma: &Hypersurface,
    sigma0: &Hypersurface,
) -> Result<Region> {
    region.check_on(lattice)?;
    for (site, (&lo, &hi)) in sigma0.cut().iter().zip(sigma.cut()).enumerate() {
        if lo > hi {
            return Err(Error::BaseCutAboveTarget { site });
        }
    }
    let mut sites = Vec::new();
    for j in 0..lattice.n_sites {
        let reachable = region.sites().iter().any(|&i| {
            sigma0.value(j) <= sigma.value(i)
                && lattice.site_distance(i, j) <= sigma.value(i) - sigma0.value(j)
        });
        if reachable {
            sites.push(j);
        }
    }
    Region::new(sites)
}

/// True iff the event, acting during its layer step, can causally influence
/// some cell of the region on the given cut.
pub fn event_affects(
    lattice: &Lattice,
    event: &Event,
    region: &Region,
    sigma: &Hypersurface,
) -> bool {
    region.sites().iter().any(|&i| {
        event.sites.iter().any(|&j| {
            sigma.value(i) > event.layer
                && sigma.value(i) - event.layer - 1 >= lattice.site_distance(i, j)
        })
    })
}

/// A monotone sweep of hypersurfaces from the all-zeros cut to the top cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Foliation {
    surfaces: Vec<Hypersurface>,
}

impl Foliation {
    /// Builds without cross-event validation; use [`validate_foliation`] to
    /// check against a schedule's events.
    pub fn new(lattice: &Lattice, surfaces: Vec<Hypersurface>) -> Result<Self> {
        if surfaces.len() < 2 {
            return Err(Error::InvalidArgument("foliation needs at least two surfaces".into()));
        }
        let first = &surfaces[0];
        let last = &surfaces[surfaces.len() - 1];
        if first.cut().iter().any(|&v| v != 0) || last.cut().iter().any(|&v| v != lattice.n_layers)
        {
            return Err(Error::BadFoliationEndpoints { top: lattice.n_layers });
        }
        for (step, pair) in surfaces.windows(2).enumerate() {
            for site in 0..lattice.n_sites {
                if pair[0].value(site) > pair[1].value(site) {
                    return Err(Error::NonMonotoneFoliation { step, site });
                }
            }
        }
        Ok(Self { surfaces })
    }

    /// All flat cuts from layer 0 through the top.
    pub fn flat(lattice: &Lattice) -> Self {
        let surfaces =
            (0..=lattice.n_layers).map(|k| Hypersurface::flat(lattice, k).unwrap()).collect();
        Self { surfaces }
    }

    pub fn surfaces(&self) -> &[Hypersurface] {
        &self.surfaces
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }
}

/// Checks all foliation invariants against a set of events: monotonicity and
/// endpoints (from construction), per-surface slope bounds (from surface
/// construction), and that no surface straddles a two-site event.
pub fn validate_foliation(lattice: &Lattice, f: &Foliation, events: &[Event]) -> Result<()> {
    let _ = Foliation::new(lattice, f.surfaces().to_vec())?;
    for event in events {
        event.validate_on(lattice)?;
        for (k, sigma) in f.surfaces().iter().enumerate() {
            if event_straddles(event, sigma) {
                return Err(Error::StraddledEvent { surface: k, event: event.id.clone() });
            }
        }
    }
    Ok(())
}

/// All valid cuts that are constant on the region at some layer value within
/// the given range, in deterministic order (by layer value, then
/// lexicographically by cut).
pub fn enumerate_hypersurfaces_through(
    lattice: &Lattice,
    region: &Region,
    layers: std::ops::RangeInclusive<usize>,
) -> Result<Vec<Hypersurface>> {
    region.check_on(lattice)?;
    if layers.is_empty() {
        return Err(Error::EmptyRange);
    }
    if *layers.end() > lattice.n_layers {
        return Err(Error::CutOutOfRange {
            value: *layers.end(),
            site: 0,
            max: lattice.n_layers,
        });
    }
    let mut out = Vec::new();
    for level in layers {
        let mut cut = vec![0usize; lattice.n_sites];
        extend_cut(lattice, region, level, 0, &mut cut, &mut out);
    }
    Ok(out)
}

fn extend_cut(
    lattice: &Lattice,
    region: &Region,
    level: usize,
    site: usize,
    cut: &mut Vec<usize>,
    out: &mut Vec<Hypersurface>,
) {
    if site == lattice.n_sites {
        if let Ok(sigma) = Hypersurface::new(lattice, cut.clone()) {
            out.push(sigma);
        }
        return;
    }
    if region.contains(site) {
        if site > 0 && cut[site - 1].abs_diff(level) > 1 {
            return;
        }
        cut[site] = level;
        extend_cut(lattice, region, level, site + 1, cut, out);
        return;
    }
    let lo = if site > 0 { cut[site - 1].saturating_sub(1) } else { 0 };
    let hi = if site > 0 { (cut[site - 1] + 1).min(lattice.n_layers) } else { lattice.n_layers };
    for v in lo..=hi {
        cut[site] = v;
        extend_cut(lattice, region, level, site + 1, cut, out);
    }
}
