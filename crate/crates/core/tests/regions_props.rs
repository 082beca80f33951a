//! Property tests for region-state assignments and their diagnostics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use regionstate::density::{partial_trace, trace_distance, DensityOperator};
use regionstate::dynamics::DynamicsMode;
use regionstate::factor::TensorFactorization;
use regionstate::lattice::{enumerate_hypersurfaces_through, Region};
use regionstate::random::{
    random_hypersurface, random_schedule, random_state, RandomScheduleParams,
};
use regionstate::regions::{
    classify_hierarchy, foliation_consistency, quasi_classical_decompose, region_state,
    supervenience_witness,
};
use regionstate::random::random_foliation;

/// Nested regions on the same surface: the big region's marginal onto the
/// small one equals the small region's own state.
#[test]
fn marginal_consistency_of_nested_regions() {
    let mut rng = ChaCha20Rng::seed_from_u64(101);
    for trial in 0..100 {
        let params = RandomScheduleParams {
            n_sites: 3 + (trial % 4),
            n_layers: 1 + (trial % 3),
            ..Default::default()
        };
        let schedule = random_schedule(&params, &mut rng).unwrap();
        let lattice = &schedule.lattice;
        let sigma = random_hypersurface(lattice, &mut rng);
        // random nested pair
        let mut sites: Vec<usize> = (0..lattice.n_sites).collect();
        for i in (1..sites.len()).rev() {
            let j = rng.gen_range(0..=i);
            sites.swap(i, j);
        }
        let outer_len = rng.gen_range(2..=lattice.n_sites);
        let outer = Region::new(sites[..outer_len].to_vec()).unwrap();
        let inner_len = rng.gen_range(1..outer_len);
        let inner = Region::new(sites[..inner_len].to_vec()).unwrap();

        let outer_state = region_state(&schedule, &outer, &sigma).unwrap().state;
        let inner_state = region_state(&schedule, &inner, &sigma).unwrap().state;
        let f = TensorFactorization::uniform(outer.len(), lattice.local_dim).unwrap();
        let keep: Vec<usize> = inner
            .sites()
            .iter()
            .map(|s| outer.sites().iter().position(|o| o == s).unwrap())
            .collect();
        let via_outer = partial_trace(&outer_state, &f, &keep).unwrap();
        let d = trace_distance(&via_outer, &inner_state).unwrap();
        assert!(d < 1e-10, "trial {trial}: {d:e}");
    }
}

/// In unitary mode every region state is independent of which containing
/// surface it is read from: all consistency reports come back single-class.
#[test]
fn unitary_region_states_are_surface_independent() {
    for seed in 0..50 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = RandomScheduleParams {
            n_sites: 2 + (seed as usize % 5),
            n_layers: 1 + (seed as usize % 4),
            ..Default::default()
        };
        let schedule = random_schedule(&params, &mut rng).unwrap();
        let lattice = &schedule.lattice;
        let site = rng.gen_range(0..lattice.n_sites);
        let region = Region::site(site);
        let layer = rng.gen_range(0..=lattice.n_layers);
        let surfaces =
            enumerate_hypersurfaces_through(lattice, &region, layer..=layer).unwrap();
        // keep only surfaces that do not split any two-site event
        let usable: Vec<_> = surfaces
            .into_iter()
            .filter(|sigma| {
                schedule.events().iter().all(|e| !regionstate::lattice::event_straddles(e, sigma))
            })
            .collect();
        if usable.len() < 2 {
            continue;
        }
        let report = foliation_consistency(&schedule, &region, &usable).unwrap();
        assert!(report.consistent, "seed {seed}: {} classes", report.classes.len());
    }
}

/// Switching a measurement-free schedule from unitary to collapse mode
/// changes nothing: the classifier returns the same level.
#[test]
fn classifier_is_mode_monotone_without_measurements() {
    let mut rng = ChaCha20Rng::seed_from_u64(131);
    for _ in 0..10 {
        let schedule = random_schedule(&RandomScheduleParams::default(), &mut rng).unwrap();
        let frc = regionstate::dynamics::EventSchedule::new(
            schedule.lattice.clone(),
            schedule.initial.clone(),
            schedule.events().to_vec(),
            schedule.payloads().clone(),
            DynamicsMode::Frc,
        )
        .unwrap();
        let lattice = &schedule.lattice;
        let regions = vec![
            ("left".to_string(), Region::site(0)),
            ("right".to_string(), Region::site(lattice.n_sites - 1)),
        ];
        let foliations = vec![
            regionstate::lattice::Foliation::flat(lattice),
            random_foliation(lattice, schedule.events(), &mut rng).unwrap(),
        ];
        let a = classify_hierarchy(&schedule, &regions, &foliations, 0.5).unwrap();
        let b = classify_hierarchy(&frc, &regions, &foliations, 0.5).unwrap();
        assert_eq!(a.level, b.level);
    }
}

/// The product-of-marginals witness always reproduces the marginals and, for
/// entangled pure states, differs visibly from the joint.
#[test]
fn witness_matches_marginals_and_separates_from_joint() {
    let mut rng = ChaCha20Rng::seed_from_u64(151);
    let f = TensorFactorization::qubits(2).unwrap();
    let mut produced = 0;
    for _ in 0..200 {
        let psi = random_state(4, &mut rng);
        let joint = regionstate::density::density_of(&psi);
        match supervenience_witness(&joint, &f).unwrap() {
            Some(witness) => {
                produced += 1;
                for keep in [[0], [1]] {
                    let wm = partial_trace(&witness, &f, &keep).unwrap();
                    let jm = partial_trace(&joint, &f, &keep).unwrap();
                    assert!(trace_distance(&wm, &jm).unwrap() < 1e-10);
                }
                assert!(trace_distance(&witness, &joint).unwrap() >= 1e-10);
            }
            None => {
                // a Haar-random state is essentially never a product state
                panic!("random pure state reported as product");
            }
        }
    }
    assert_eq!(produced, 200);
}

/// Decomposition weights are a probability vector and the components rebuild
/// the block-diagonal part exactly.
#[test]
fn decomposition_reconstructs_block_diagonal() {
    let mut rng = ChaCha20Rng::seed_from_u64(171);
    let dim = 6;
    // fixed orthogonal family: spans {0,1}, {2,3,4}, {5}
    let blocks: [&[usize]; 3] = [&[0, 1], &[2, 3, 4], &[5]];
    let projectors: Vec<nalgebra::DMatrix<Complex64>> = blocks
        .iter()
        .map(|idx| {
            let mut p = nalgebra::DMatrix::zeros(dim, dim);
            for &i in *idx {
                p[(i, i)] = Complex64::new(1.0, 0.0);
            }
            p
        })
        .collect();
    for _ in 0..30 {
        let rho = regionstate::random::random_density(dim, &mut rng);
        let d = quasi_classical_decompose(&rho, &projectors).unwrap();
        let total: f64 = d.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(d.weights.iter().all(|&w| w >= -1e-12));
        // rebuild the block part
        let mut rebuilt = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for (k, comp) in d.components.iter().enumerate() {
            if let Some(c) = comp {
                rebuilt += c.matrix().scale(d.weights[k]);
            }
        }
        let mut block = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for p in &projectors {
            block += p * rho.matrix() * p;
        }
        let err = (&rebuilt - &block).norm();
        assert!(err < 1e-10);
        // full-rank random states are not block diagonal
        assert!(d.off_block_residual > 1e-6);
    }
}

/// A fresh density operator built from weights and orthogonal components
/// decomposes back to exactly those weights.
#[test]
fn decomposition_recovers_planted_weights() {
    let mut rng = ChaCha20Rng::seed_from_u64(191);
    let p0 = {
        let mut p = nalgebra::DMatrix::<Complex64>::zeros(4, 4);
        p[(0, 0)] = Complex64::new(1.0, 0.0);
        p[(1, 1)] = Complex64::new(1.0, 0.0);
        p
    };
    let p1 = {
        let mut p = nalgebra::DMatrix::<Complex64>::zeros(4, 4);
        p[(2, 2)] = Complex64::new(1.0, 0.0);
        p[(3, 3)] = Complex64::new(1.0, 0.0);
        p
    };
    for _ in 0..20 {
        let w: f64 = rng.gen_range(0.05..0.95);
        let a = regionstate::random::random_density(2, &mut rng);
        let b = regionstate::random::random_density(2, &mut rng);
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&a.matrix().scale(w));
        m.view_mut((2, 2), (2, 2)).copy_from(&b.matrix().scale(1.0 - w));
        let rho = DensityOperator::new(m).unwrap();
        let d = quasi_classical_decompose(&rho, &[p0.clone(), p1.clone()]).unwrap();
        assert!((d.weights[0] - w).abs() < 1e-12);
        assert!((d.weights[1] - (1.0 - w)).abs() < 1e-12);
        assert!(d.off_block_residual < 1e-12);
        // the first component, restricted to its subspace, is the planted state
        let comp = d.components[0].as_ref().unwrap();
        let block = DensityOperator::new(comp.matrix().view((0, 0), (2, 2)).into_owned()).unwrap();
        assert!(trace_distance(&block, &a).unwrap() < 1e-12);
    }
}
