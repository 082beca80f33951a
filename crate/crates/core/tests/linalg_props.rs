//! Property tests for the dense linear-algebra layer.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use regionstate::density::{
    density_of, partial_trace, pure_state_distance, reduced_from_pure, tensor_density,
    trace_distance, DensityOperator,
};
use regionstate::factor::TensorFactorization;
use regionstate::random::{random_density, random_state, random_unitary};
use regionstate::state::{apply_local, StateVector};

fn amps(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

fn to_state(raw: &[(f64, f64)]) -> Option<StateVector> {
    let v: Vec<Complex64> = raw.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    StateVector::normalized(nalgebra::DVector::from_vec(v)).ok()
}

fn to_density(raw: &[(f64, f64)], dim: usize) -> Option<DensityOperator> {
    let g = nalgebra::DMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = raw[i * dim + j];
        Complex64::new(re + if i == j { 1.5 } else { 0.0 }, im)
    });
    let p = &g * g.adjoint();
    let tr = p.trace().re;
    if tr < 1e-6 {
        return None;
    }
    DensityOperator::new(p.map(|v| v / tr)).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Tracing out C then B equals tracing out B and C at once.
    #[test]
    fn partial_trace_composes(raw in amps(64)) {
        prop_assume!(to_density(&raw, 8).is_some());
        let rho = to_density(&raw, 8).unwrap();
        let f = TensorFactorization::qubits(3).unwrap();
        let two_step_f = TensorFactorization::qubits(2).unwrap();
        let ab = partial_trace(&rho, &f, &[0, 1]).unwrap();
        let a_via_two = partial_trace(&ab, &two_step_f, &[0]).unwrap();
        let a_direct = partial_trace(&rho, &f, &[0]).unwrap();
        prop_assert!(trace_distance(&a_via_two, &a_direct).unwrap() < 1e-10);
    }

    /// The two marginals of a pure bipartite state share their spectrum.
    #[test]
    fn schmidt_spectra_agree(raw in amps(12)) {
        prop_assume!(to_state(&raw).is_some());
        let psi = to_state(&raw).unwrap();
        let f = TensorFactorization::new(vec![3, 4]).unwrap();
        let a = reduced_from_pure(&psi, &f, &[0]).unwrap();
        let b = reduced_from_pure(&psi, &f, &[1]).unwrap();
        let mut ea = a.eigenvalues().unwrap();
        let mut eb = b.eigenvalues().unwrap();
        // compare the 3 mutual eigenvalues; the larger factor pads with zeros
        ea.reverse();
        eb.reverse();
        for k in 0..3 {
            prop_assert!((ea[k] - eb[k]).abs() < 1e-10);
        }
        prop_assert!(eb[3] < 1e-10);
    }

    /// Trace distance obeys the triangle inequality.
    #[test]
    fn triangle_inequality(seed in 0u64..1000) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a = random_density(4, &mut rng);
        let b = random_density(4, &mut rng);
        let c = random_density(4, &mut rng);
        let ab = trace_distance(&a, &b).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-10);
        // and symmetry
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
    }
}

/// Unitary application preserves the norm across a thousand random cases.
#[test]
fn apply_local_preserves_norm() {
    let mut rng = ChaCha20Rng::seed_from_u64(20240601);
    let f = TensorFactorization::qubits(4).unwrap();
    for case in 0..1000 {
        let psi = random_state(16, &mut rng);
        let (u, targets): (_, Vec<usize>) = if case % 2 == 0 {
            (random_unitary(2, &mut rng), vec![case % 4])
        } else {
            let a = case % 4;
            let b = (case / 3 + 1 + a) % 4;
            if a == b {
                continue;
            }
            (random_unitary(4, &mut rng), vec![a, b])
        };
        let out = apply_local(&u, &psi, &f, &targets).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12, "case {case}: norm {}", out.norm());
    }
}

/// The overlap-based pure-state distance matches the eigenvalue route.
#[test]
fn pure_distance_matches_density_distance() {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    for _ in 0..50 {
        let a = random_state(6, &mut rng);
        let b = random_state(6, &mut rng);
        let fast = pure_state_distance(&a, &b).unwrap();
        let slow = trace_distance(&density_of(&a), &density_of(&b)).unwrap();
        assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
    }
    let same = random_state(6, &mut rng);
    assert!(pure_state_distance(&same, &same).unwrap() < 1e-12);
}

/// Tensoring then tracing returns the factors exactly.
#[test]
fn tensor_then_trace_roundtrip() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    for _ in 0..20 {
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let joint = tensor_density(&a, &b);
        let f = TensorFactorization::new(vec![2, 3]).unwrap();
        let got_a = partial_trace(&joint, &f, &[0]).unwrap();
        let got_b = partial_trace(&joint, &f, &[1]).unwrap();
        assert!(trace_distance(&got_a, &a).unwrap() < 1e-12);
        assert!(trace_distance(&got_b, &b).unwrap() < 1e-12);
    }
}
