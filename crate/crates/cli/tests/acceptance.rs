//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (visible with `--nocapture`) and enforcing its tolerance
//! and runtime budget.
//!
//! Tolerances are pinned here as constants; expected values are either
//! closed forms computed in this file or brute-force oracles rebuilt here,
//! independent of the library internals they gate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use regionstate::density::{
    density_of, partial_trace, pure_state_distance, reduced_from_pure, trace_distance,
    DensityOperator,
};
use regionstate::dynamics::{evolve_to, DynamicsMode, EventSchedule, GateSpec, Payload};
use regionstate::factor::TensorFactorization;
use regionstate::lattice::{
    event_affects, event_in_past, Event, Hypersurface, Lattice, Region,
};
use regionstate::random::{
    random_hypersurface, random_schedule, random_state, random_unitary, RandomScheduleParams,
};
use regionstate::regions::{
    lightcone_determinism_check, no_signalling_check, quasi_classical_decompose, region_state,
    supervenience_witness,
};
use regionstate::scenarios::{
    coleman_hepp, epr_scenario, narratability_demo, ColemanHeppParams, EprArena, EprParams,
};
use regionstate::state::StateVector;

const TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pass_line(criterion: usize, slug: &str, elapsed: Duration, budget: Duration) {
    println!(
        "acceptance {criterion} ({slug}): PASS in {:.3}s (budget {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

fn diag2(p0: f64, p1: f64) -> DensityOperator {
    DensityOperator::new(nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[c(p0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(p1, 0.0)],
    ))
    .unwrap()
}

fn two_qubit(amps: [Complex64; 4]) -> StateVector {
    StateVector::normalized(nalgebra::DVector::from_vec(amps.to_vec())).unwrap()
}

fn random_amp_pair(rng: &mut impl Rng) -> (Complex64, Complex64) {
    loop {
        let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm > 0.1 {
            return (a / norm, b / norm);
        }
    }
}

/// Criterion 1: the unitary pair table. For twenty random amplitude pairs
/// plus the equal-weight pair, all six region states and all four evolved
/// joint densities match their closed forms below 1e-10, in under a second.
#[test]
fn acceptance_1_unitary_pair_table() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC1);
    let mut pairs = vec![(c(1.0 / 2.0_f64.sqrt(), 0.0), c(1.0 / 2.0_f64.sqrt(), 0.0))];
    for _ in 0..20 {
        pairs.push(random_amp_pair(&mut rng));
    }
    for (alpha, beta) in pairs {
        let report = epr_scenario(&EprParams::unitary(alpha, beta)).unwrap();
        assert!(report.checks.iter().all(|ch| ch.pass));

        let (pa, pb) = (alpha.norm_sqr(), beta.norm_sqr());
        // closed-form region states, recomputed here
        let expected_regions = [
            ("p1_early", diag2(pa, pb)),
            ("p1_mid", diag2(pa, pb)),
            ("p1_late", diag2(pb, pa)),
            ("p2_early", diag2(pb, pa)),
            ("p2_mid", diag2(pb, pa)),
            ("p2_late", diag2(pa, pb)),
        ];
        for (label, expected) in &expected_regions {
            let entry = report.region_states.iter().find(|e| &e.label == label).unwrap();
            let d = trace_distance(&entry.state, expected).unwrap();
            assert!(d < TOL, "{label}: {d:e}");
        }
        // closed-form joint states on the four post-initial cuts
        let zero = Complex64::default();
        let expected_globals = [
            ("pre", two_qubit([zero, alpha, beta, zero])),
            ("after_1", two_qubit([-beta, zero, zero, alpha])),
            ("after_2", two_qubit([-alpha, zero, zero, beta])),
            ("final", two_qubit([zero, -beta, -alpha, zero])),
        ];
        for (label, expected) in &expected_globals {
            let state = &report.global_states.iter().find(|(l, _)| l == label).unwrap().1;
            let d = trace_distance(state, &density_of(expected)).unwrap();
            assert!(d < TOL, "{label}: {d:e}");
        }
    }
    pass_line(1, "unitary pair table", start.elapsed(), Duration::from_secs(1));
}

/// Criterion 2: collapse contextuality. With the outcome of particle 1 fixed
/// to 0, the joint state is |0>|1> from the first measurement onward, the
/// branch weight is |alpha|^2, and particle 2's mid placement splits into
/// exactly the premeasurement mixture and the outcome projector.
#[test]
fn acceptance_2_collapse_contextuality() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC2);
    let s = 1.0 / 2.0_f64.sqrt();
    let mut pairs = vec![(c(s, 0.0), c(s, 0.0))];
    for _ in 0..5 {
        // keep the postselected branch comfortably probable
        loop {
            let (a, b) = random_amp_pair(&mut rng);
            if a.norm() > 0.2 {
                pairs.push((a, b));
                break;
            }
        }
    }
    for (alpha, beta) in pairs {
        let report = epr_scenario(&EprParams::collapse(alpha, beta, 0)).unwrap();
        assert!(report.checks.iter().all(|ch| ch.pass));
        let (pa, pb) = (alpha.norm_sqr(), beta.norm_sqr());
        // phi_2 = phi_3 = phi_4 = |0>|1>
        let post = density_of(&StateVector::basis(4, 1));
        for label in ["after_1", "after_2", "final"] {
            let state = &report.global_states.iter().find(|(l, _)| l == label).unwrap().1;
            let d = trace_distance(state, &post).unwrap();
            assert!(d < TOL, "{label}: {d:e}");
        }
        assert!((report.branch_weight - pa).abs() < TOL);
        // exactly two classes with the displayed states
        let consistency =
            &report.consistency.iter().find(|(l, _)| l == "p2_mid").unwrap().1;
        assert_eq!(consistency.classes.len(), 2);
        let class_states = consistency.class_states();
        let mixture = diag2(pb, pa);
        let outcome = diag2(0.0, 1.0);
        let d00 = trace_distance(class_states[0], &mixture).unwrap();
        let d11 = trace_distance(class_states[1], &outcome).unwrap();
        let d01 = trace_distance(class_states[0], &outcome).unwrap();
        let d10 = trace_distance(class_states[1], &mixture).unwrap();
        let matched = (d00 < TOL && d11 < TOL) || (d01 < TOL && d10 < TOL);
        assert!(matched, "clusters do not match the displayed pair: {d00:e} {d11:e}");
    }
    pass_line(2, "collapse contextuality", start.elapsed(), Duration::from_secs(1));
}

/// Criterion 3: narratability. The idle and flipped singlet histories are
/// identical on every flat foliation; on the staircase the intermediate
/// surface sits at trace distance exactly 1 while both final states agree.
#[test]
fn acceptance_3_narratability() {
    let start = Instant::now();
    for separation in [2usize, 3] {
        let demo = narratability_demo(separation).unwrap();
        assert!(demo.checks.iter().all(|ch| ch.pass));
        for (layer, cmp) in &demo.flat_comparisons {
            let max = cmp.distances.iter().copied().fold(0.0, f64::max);
            assert!(max < TOL, "flat foliation with events at layer {layer}: {max:e}");
            assert!(cmp.equal);
        }
        let profile = &demo.staircase_comparison.distances;
        assert!((profile[demo.divergent_surface_index] - 1.0).abs() < TOL);
        assert!(*profile.last().unwrap() < TOL);
        assert!(profile[0] < TOL && profile[1] < TOL);
    }
    pass_line(3, "narratability", start.elapsed(), Duration::from_secs(1));
}

/// Brute-force oracle for the chain: builds the expected final state
/// directly from the amplitudes, reduces it with the dense full-space
/// partial trace, and decomposes over full-space pointer projectors.
fn chain_oracle_weights(n: usize, a: Complex64, b: Complex64) -> (f64, f64, f64) {
    const UP: usize = 0;
    const DOWN: usize = 1;
    const HERE_UP: usize = 2;
    const HERE_DOWN: usize = 3;
    let f = TensorFactorization::uniform(n, 4).unwrap();
    let mut amps = nalgebra::DVector::zeros(f.dim());
    let mut digits = vec![UP; n];
    digits[n - 1] = HERE_UP;
    amps[f.compose(&digits)] = a;
    let mut digits = vec![DOWN; n];
    digits[n - 1] = HERE_DOWN;
    amps[f.compose(&digits)] = b;
    let final_state = StateVector::new(amps).unwrap();

    let keep: Vec<usize> = (0..n - 1).collect();
    let rho_a = partial_trace(&density_of(&final_state), &f, &keep).unwrap();
    let kept_f = TensorFactorization::uniform(n - 1, 4).unwrap();
    let kept_dim = kept_f.dim();
    let rank_one = |config: usize| {
        let mut p = nalgebra::DMatrix::<Complex64>::zeros(kept_dim, kept_dim);
        p[(config, config)] = c(1.0, 0.0);
        p
    };
    let p_up = rank_one(kept_f.compose(&vec![UP; n - 1]));
    let p_down = rank_one(kept_f.compose(&vec![DOWN; n - 1]));
    let rest = nalgebra::DMatrix::<Complex64>::identity(kept_dim, kept_dim) - &p_up - &p_down;
    let d = quasi_classical_decompose(&rho_a, &[p_up, p_down, rest]).unwrap();
    assert!(d.weights[2].abs() < TOL, "weight escaped the pointer sectors");
    (d.weights[0], d.weights[1], d.off_block_residual)
}

/// Criterion 4: the measurement chain. For n in {3, 5, 8} the displayed
/// start/one-step/final states are reproduced and the passed chain
/// decomposes into the two pointer sectors with weights (1/2, 1/2); for
/// general amplitudes the weights match the brute-force rerun oracle.
#[test]
fn acceptance_4_measurement_chain() {
    let start = Instant::now();
    for n in [3usize, 5, 8] {
        let report = coleman_hepp(&ColemanHeppParams::equal_weights(n)).unwrap();
        for check in &report.checks {
            assert!(check.pass, "n={n} {}: {:e}", check.name, check.distance);
        }
        assert!((report.decomposition.weights[0] - 0.5).abs() < TOL);
        assert!((report.decomposition.weights[1] - 0.5).abs() < TOL);
        assert!(report.decomposition.off_block_residual < TOL);
    }
    // general amplitudes against the dense oracle (kept at oracle-friendly n)
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC4);
    for n in [3usize, 4, 5] {
        for _ in 0..5 {
            let (a, b) = random_amp_pair(&mut rng);
            let report = coleman_hepp(&ColemanHeppParams { n, a, b }).unwrap();
            let (wa, wb, residual) = chain_oracle_weights(n, a, b);
            assert!((report.decomposition.weights[0] - wa).abs() < TOL);
            assert!((report.decomposition.weights[1] - wb).abs() < TOL);
            assert!((report.decomposition.weights[0] - a.norm_sqr()).abs() < TOL);
            assert!((report.decomposition.weights[1] - b.norm_sqr()).abs() < TOL);
            assert!(residual < TOL && report.decomposition.off_block_residual < TOL);
        }
    }
    // at the largest size the closed form stands in for the dense oracle
    let (a, b) = random_amp_pair(&mut rng);
    let report = coleman_hepp(&ColemanHeppParams { n: 8, a, b }).unwrap();
    assert!((report.decomposition.weights[0] - a.norm_sqr()).abs() < TOL);
    assert!((report.decomposition.weights[1] - b.norm_sqr()).abs() < TOL);
    // the overlap-based display distance agrees with the density route
    let small = coleman_hepp(&ColemanHeppParams::equal_weights(3)).unwrap();
    let f = TensorFactorization::uniform(3, 4).unwrap();
    let keep: Vec<usize> = (0..3).collect();
    let _ = (f, keep); // dimensions documented; cross-check below
    let via_density = trace_distance(
        &density_of(&small.times[0]),
        &density_of(&small.times[2]),
    )
    .unwrap();
    let via_overlap = pure_state_distance(&small.times[0], &small.times[2]).unwrap();
    assert!((via_density - via_overlap).abs() < 1e-9);
    pass_line(4, "measurement chain", start.elapsed(), Duration::from_secs(5));
}

/// Criterion 5: the Fock factorization suite over every partition in the
/// family with joint dimension at most 200, via the CLI sweep.
#[test]
fn acceptance_5_fock_factorization() {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_regionstate"))
        .args(["fock-check", "--sweep", "--max-dim", "200", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["overall_pass"], true);
    let checks = v["checks"].as_array().unwrap();
    let by_name = |name: &str| -> &serde_json::Value {
        checks.iter().find(|ch| ch["name"] == name).unwrap()
    };
    assert!(by_name("isometry")["distance"].as_f64().unwrap() < 1e-12);
    assert_eq!(by_name("sector_bijection")["pass"], true);
    assert!(by_name("number_conservation")["distance"].as_f64().unwrap() < TOL);
    assert!(by_name("cross_region_commutators")["distance"].as_f64().unwrap() < TOL);
    // the family genuinely reaches the dimension cap
    let spaces = v["results"]["spaces"].as_array().unwrap();
    assert!(spaces.len() > 100);
    let max_joint =
        spaces.iter().map(|s| s["joint_dim"].as_u64().unwrap()).max().unwrap();
    assert!(max_joint > 100 && max_joint <= 200);
    pass_line(5, "fock factorization", start.elapsed(), Duration::from_secs(10));
}

/// Criterion 6: causality sweeps. 200 random spacelike insertions never move
/// a probe's state; 100 cone-sharing schedule pairs agree on the region
/// state; an in-cone difference moves it by more than 0.1.
#[test]
fn acceptance_6_causality_sweeps() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC6);

    // --- no-signalling sweep ---
    let mut accepted = 0;
    let mut max_distance: f64 = 0.0;
    let mut attempts = 0;
    while accepted < 200 {
        attempts += 1;
        assert!(attempts < 20_000, "configuration generator starved");
        let params = RandomScheduleParams {
            n_sites: rng.gen_range(2..=6),
            n_layers: rng.gen_range(1..=4),
            gate_density: 0.5,
            ..Default::default()
        };
        let schedule = random_schedule(&params, &mut rng).unwrap();
        let lattice = schedule.lattice.clone();
        let sigma = random_hypersurface(&lattice, &mut rng);
        let probe = Region::site(rng.gen_range(0..lattice.n_sites));
        // a random located unitary to insert
        let op_site = rng.gen_range(0..lattice.n_sites);
        let op_layer = rng.gen_range(0..lattice.n_layers);
        let op_event = Event::new("inserted", vec![op_site], op_layer, "inserted-gate");
        if event_affects(&lattice, &op_event, &probe, &sigma) {
            continue; // not spacelike: not part of this sweep
        }
        let gate = GateSpec::new("inserted", random_unitary(2, &mut rng)).unwrap();
        let Ok(outcome) = no_signalling_check(&schedule, &op_event, &gate, &probe, &sigma) else {
            continue; // insertion collided with an existing event
        };
        assert!(outcome.applicable);
        max_distance = max_distance.max(outcome.distance);
        accepted += 1;
    }
    assert!(max_distance < TOL, "signalling detected: {max_distance:e}");

    // --- light-cone determinism sweep ---
    let mut positives = 0;
    attempts = 0;
    while positives < 100 {
        attempts += 1;
        assert!(attempts < 20_000, "determinism generator starved");
        let params = RandomScheduleParams {
            n_sites: rng.gen_range(2..=5),
            n_layers: rng.gen_range(1..=3),
            gate_density: 0.5,
            ..Default::default()
        };
        let s1 = random_schedule(&params, &mut rng).unwrap();
        let lattice = s1.lattice.clone();
        let sigma = random_hypersurface(&lattice, &mut rng);
        let lower = random_hypersurface(&lattice, &mut rng);
        let base: Vec<usize> =
            (0..lattice.n_sites).map(|i| sigma.value(i).min(lower.value(i))).collect();
        let sigma0 = Hypersurface::new(&lattice, base).unwrap();
        let region = Region::site(rng.gen_range(0..lattice.n_sites));
        // an extra unitary above the base cut that cannot reach the region
        let op_site = rng.gen_range(0..lattice.n_sites);
        let op_layer = rng.gen_range(0..lattice.n_layers);
        let extra = Event::new("extra", vec![op_site], op_layer, "extra-gate");
        if event_affects(&lattice, &extra, &region, &sigma) || event_in_past(&extra, &sigma0) {
            continue;
        }
        let Ok(s2) = s1.with_extra_event(
            extra,
            Payload::Gate(GateSpec::new("extra", random_unitary(2, &mut rng)).unwrap()),
        ) else {
            continue;
        };
        let out = lightcone_determinism_check(&s1, &s2, &region, &sigma, &sigma0).unwrap();
        assert!(out.preconditions_met, "cone preconditions unexpectedly failed");
        assert!(out.distance < TOL, "cone determinism violated: {:e}", out.distance);
        positives += 1;
    }

    // --- negative control: a difference inside the cone is visible ---
    let lattice = Lattice::new(3, 2, 2).unwrap();
    let mut amps = vec![c(0.0, 0.0); 8];
    amps[0b001] = c(0.6, 0.0);
    amps[0b100] = c(0.8, 0.0);
    let mut payloads = BTreeMap::new();
    payloads.insert(
        "flip".to_string(),
        Payload::Gate(GateSpec::new("flip", {
            let m = nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            );
            regionstate::operator::LinearOperator::unitary(m).unwrap()
        })
        .unwrap()),
    );
    let s1 = EventSchedule::new(
        lattice.clone(),
        StateVector::from_slice(&amps).unwrap(),
        vec![Event::new("x2", vec![2], 1, "flip")],
        payloads.clone(),
        DynamicsMode::Unitary,
    )
    .unwrap();
    let s2 = s1
        .with_extra_event(
            Event::new("inside", vec![2], 0, "flip2"),
            Payload::Gate(GateSpec::new("flip2", {
                let m = nalgebra::DMatrix::from_row_slice(
                    2,
                    2,
                    &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
                );
                regionstate::operator::LinearOperator::unitary(m).unwrap()
            })
            .unwrap()),
        )
        .unwrap();
    let sigma = Hypersurface::new(&lattice, vec![1, 1, 2]).unwrap();
    let sigma0 = Hypersurface::flat(&lattice, 0).unwrap();
    let out =
        lightcone_determinism_check(&s1, &s2, &Region::site(2), &sigma, &sigma0).unwrap();
    assert!(!out.preconditions_met);
    assert!(out.distance > 0.1, "negative control too small: {:e}", out.distance);

    pass_line(6, "causality sweeps", start.elapsed(), Duration::from_secs(30));
}

/// Criterion 7: the hierarchy classifier presets, as golden-file CLI tests
/// with serialized witnesses.
#[test]
fn acceptance_7_hierarchy_presets() {
    let start = Instant::now();
    let golden_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (preset, file, level) in [
        ("epr-unitary", "classify_epr_unitary.json", "NonSeparability"),
        ("epr-collapse", "classify_epr_collapse.json", "Contextuality"),
        ("product-control", "classify_product_control.json", "FullLocality"),
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_regionstate"))
            .args(["classify", "--preset", preset, "--format", "json"])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{preset}");
        let stdout = String::from_utf8(out.stdout).unwrap();
        let golden = std::fs::read_to_string(golden_dir.join(file)).unwrap();
        assert_eq!(stdout, golden, "golden drift for {preset}");
        let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(v["results"]["level"], level);
        // each report carries a serialized witness for its level
        match level {
            "NonSeparability" => {
                assert!(!v["results"]["separability_witnesses"].as_array().unwrap().is_empty());
            }
            "Contextuality" => {
                let witnesses = v["results"]["contextuality_witnesses"].as_array().unwrap();
                assert!(witnesses.iter().any(|w| w["region"] == "particle-2"));
            }
            _ => {
                assert!(v["results"]["separability_witnesses"].as_array().unwrap().is_empty());
                assert!(v["results"]["contextuality_witnesses"].as_array().unwrap().is_empty());
            }
        }
    }
    pass_line(7, "hierarchy presets", start.elapsed(), Duration::from_secs(2));
}

/// Criterion 8: the supervenience witness. For 100 random entangled
/// bipartite pure states the product witness reproduces both marginals
/// below 1e-10 yet sits at least 1e-3 from the joint.
#[test]
fn acceptance_8_supervenience_witness() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xACC8);
    let shapes = [(2usize, 2usize), (2, 3), (3, 3)];
    let mut produced = 0;
    let mut attempts = 0;
    while produced < 100 {
        attempts += 1;
        assert!(attempts < 2000, "entangled-state generator starved");
        let (da, db) = shapes[attempts % shapes.len()];
        let f = TensorFactorization::new(vec![da, db]).unwrap();
        let psi = random_state(da * db, &mut rng);
        let joint = density_of(&psi);
        let witness = match supervenience_witness(&joint, &f).unwrap() {
            Some(w) => w,
            None => continue,
        };
        if trace_distance(&witness, &joint).unwrap() < 1e-3 {
            continue; // too close to a product state for this sweep
        }
        for keep in [[0], [1]] {
            let wm = partial_trace(&witness, &f, &keep).unwrap();
            let jm = partial_trace(&joint, &f, &keep).unwrap();
            assert!(trace_distance(&wm, &jm).unwrap() < TOL);
        }
        produced += 1;
    }
    pass_line(8, "supervenience witness", start.elapsed(), Duration::from_secs(5));
}

/// The scenario reports double as documentation; make sure the reduced
/// region states they expose match an independent reduction of the evolved
/// global state.
#[test]
fn report_states_match_direct_reduction() {
    let params = EprParams::unitary(c(0.6, 0.0), c(0.0, 0.8));
    let scenario = epr_scenario(&params).unwrap();
    let arena = EprArena::new(params.separation).unwrap();
    for entry in &scenario.region_states {
        let sigma = arena.surface(&entry.surface_label);
        let direct = region_state(&scenario.schedule, &entry.region, sigma).unwrap();
        assert!(trace_distance(&direct.state, &entry.state).unwrap() < 1e-12);
        // and against a by-hand reduction
        let evolved = evolve_to(&scenario.schedule, sigma).unwrap();
        let f = scenario.schedule.lattice.factorization();
        let by_hand = reduced_from_pure(&evolved.state, &f, entry.region.sites()).unwrap();
        assert!(trace_distance(&by_hand, &entry.state).unwrap() < 1e-12);
    }
}
