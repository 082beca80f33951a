//! Density operators for regions of a discrete spacetime.
//!
//! The library assigns a quantum state (a density operator) to every pair of
//! a spatial region and a causal hypersurface of a (1+1)-dimensional lattice,
//! and provides the machinery needed to probe how those assignments behave:
//!
//! * [`state`], [`density`], [`operator`], [`factor`] — dense complex linear
//!   algebra on tensor-factored spaces: state vectors, density operators,
//!   Kronecker products, partial traces, trace distance.
//! * [`fock`] — truncated bosonic Fock spaces over a partitioned mode set and
//!   the basis bijection between the joint space and the per-region factors.
//! * [`lattice`] — sites, layers, events, light cones, hypersurfaces and
//!   foliations with a strict causal slope bound.
//! * [`dynamics`] — evolution of a global state along any foliation of an
//!   event schedule, either purely unitarily or with collapse events that
//!   take effect on a hypersurface.
//! * [`regions`] — the region-state assignment itself, plus separability,
//!   no-signalling, light-cone determinism and consistency diagnostics, the
//!   locality hierarchy classifier, and pointer-basis decompositions.
//! * [`scenarios`] — canned two-particle and measurement-chain constructions
//!   with their closed-form expectations attached as machine-checked reports.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything here is safe to share across threads.

pub mod density;
pub mod dynamics;
pub mod eig;
pub mod error;
pub mod factor;
pub mod fock;
pub mod lattice;
pub mod operator;
pub mod random;
pub mod regions;
pub mod scenarios;
pub mod state;
pub mod tolerance;

pub use density::{
    density_of, partial_trace, pure_state_distance, reduced_from_pure, reduced_on_support,
    tensor_density, trace_distance, DensityOperator,
};
pub use error::{Error, Result};
pub use factor::TensorFactorization;
pub use operator::LinearOperator;
pub use state::{apply_local, StateVector};
pub use tolerance::{eps_norm, eps_tol, set_eps_norm, set_eps_tol};

pub(crate) type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
pub(crate) type CVector = nalgebra::DVector<num_complex::Complex64>;
