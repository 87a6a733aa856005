//! Acceptance gate: one test per acceptance criterion, each printing a
//! single pass/fail line. The expensive construction grid is shared between
//! criteria through a lazily-initialized static.

use dkshift::budget::FactorBudget;
use dkshift::lemma::{
    construct, verify_construction, CheckStatus, ConstructConfig, ConstructionCertificate,
};
use dkshift::pipeline::{
    build_pipeline, check_sieve_admissibility, emit_solution, scan_divisor_match,
    sieve_forms_from_pipeline, EmitOutcome, PipelineState, ScanOutcome, SieveForms,
};
use dkshift::scan::{count_coincidences, sieve_dk_window, verify_certificate_against_oracle};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use std::sync::OnceLock;
use std::time::Instant;

const GRID_K: [u64; 6] = [1, 2, 3, 5, 6, 15];
const GRID_B: [u64; 3] = [1, 2, 6];
const GRID_N: [usize; 2] = [2, 4];

fn grid_points() -> Vec<(u64, u64, usize)> {
    let mut points = Vec::new();
    for k in GRID_K {
        for b in GRID_B {
            for n in GRID_N {
                points.push((k, b, n));
            }
        }
    }
    points
}

fn construct_point(k: u64, b: u64, n: usize) -> ConstructionCertificate {
    construct(
        &BigUint::from(k),
        &BigUint::from(b),
        n,
        &ConstructConfig::default(),
    )
    .unwrap_or_else(|e| panic!("construct failed for k={k}, B={b}, N={n}: {e}"))
}

fn grid_certificates() -> &'static Vec<ConstructionCertificate> {
    static GRID: OnceLock<Vec<ConstructionCertificate>> = OnceLock::new();
    GRID.get_or_init(|| {
        grid_points()
            .into_iter()
            .map(|(k, b, n)| construct_point(k, b, n))
            .collect()
    })
}

fn grid_pipelines() -> &'static Vec<PipelineState> {
    static PIPES: OnceLock<Vec<PipelineState>> = OnceLock::new();
    PIPES.get_or_init(|| {
        grid_certificates()
            .iter()
            .map(|cert| {
                build_pipeline(cert, &FactorBudget::default()).unwrap_or_else(|e| {
                    panic!(
                        "pipeline failed for k={}, B={}: {e}",
                        cert.params.k, cert.params.b
                    )
                })
            })
            .collect()
    })
}

/// Deterministic xorshift stream for the random-x checks.
fn xorshift(state: &mut u64) -> u64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    *state
}

#[test]
fn criterion_1_construction_grid() {
    let start = Instant::now();
    for cert in grid_certificates() {
        let report = verify_construction(cert, &FactorBudget::default());
        for c in &report.conditions {
            assert_eq!(
                c.status,
                CheckStatus::Pass,
                "k={}, B={}: condition {} did not pass exactly: {}",
                cert.params.k,
                cert.params.b,
                c.name,
                c.witness
            );
        }
        assert!(report.passed);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "grid verification took {elapsed:?}");
    println!("criterion 1 (construction grid, {elapsed:?}): PASS");
}

#[test]
fn criterion_2_worked_instance() {
    let cert = construct_point(2, 1, 2);
    assert_eq!(cert.a, vec![BigUint::from(28623u32), BigUint::from(28630u32)]);
    assert_eq!(cert.x, BigUint::from(28623u32));
    let factored: Vec<Vec<(u64, u32)>> = cert
        .a_factors
        .iter()
        .map(|w| {
            w.factors
                .iter()
                .map(|(p, e)| (u64::try_from(p).unwrap(), *e))
                .collect()
        })
        .collect();
    assert_eq!(
        factored,
        vec![
            vec![(3, 1), (7, 1), (29, 1), (47, 1)],
            vec![(2, 1), (5, 1), (7, 1), (409, 1)],
        ]
    );
    // Difference 7 divides gcd(a_0, a_1) = 7.
    assert_eq!(cert.a[1].gcd(&cert.a[0]), BigUint::from(7u32));
    let identity = cert
        .checks
        .conditions
        .iter()
        .find(|c| c.name == "divisor_count_identity")
        .expect("identity condition present");
    assert_eq!(identity.status, CheckStatus::Pass);
    assert!(
        identity.witness.contains("64"),
        "witness should exhibit 16*4 = 8*8 = 64, got: {}",
        identity.witness
    );
    println!("criterion 2 (worked instance): PASS");
}

fn check_pipeline_invariants(state: &PipelineState) {
    let (m, n) = state.default_pair();
    assert!(
        dkshift::pipeline::verify_b_identity_symbolic(state, m, n),
        "symbolic identity failed for k={}, B={}",
        state.cert.params.k,
        state.cert.params.b
    );
    assert!(dkshift::pipeline::verify_b_identity(
        state,
        m,
        n,
        &BigUint::zero()
    ));
    let mut rng = 0x9e3779b97f4a7c15u64;
    for _ in 0..100 {
        let x = BigUint::from(xorshift(&mut rng) >> 16);
        for i in [m, n] {
            let v = state.f_eval(i, &x);
            assert!(
                state.coprime_to_ar(&v),
                "form {i} not coprime to A*R at x={x}"
            );
        }
    }
}

#[test]
fn criterion_3_pipeline_invariants() {
    let start = Instant::now();
    for state in grid_pipelines() {
        check_pipeline_invariants(state);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "pipeline grid took {elapsed:?}");
    println!("criterion 3 (pipeline invariants, {elapsed:?}): PASS");
}

#[test]
fn criterion_4_end_to_end_generation() {
    let cert = construct_point(2, 1, 2);
    let state = build_pipeline(&cert, &FactorBudget::default()).unwrap();
    let (m, n) = state.default_pair();

    // Honest path first: a crippled budget must yield only "unknown"
    // outcomes, never a false classification.
    let crippled = FactorBudget {
        trial_bound: 2,
        rho_iterations: 1,
        rho_polys: 1,
        seed: 1,
    };
    let blind = scan_divisor_match(&state, m, n, 0..4, &crippled);
    assert_eq!(blind.scanned, 4);
    assert_eq!(blind.unknown, 4);
    assert!(blind.matched.is_empty());
    assert_eq!(blind.unmatched, 0);

    // The CLI exposes the same honesty as a documented exit status.
    let exe = env!("CARGO_BIN_EXE_dkshift");
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("c.json");
    std::fs::write(&cert_path, serde_json::to_string_pretty(&cert).unwrap()).unwrap();
    let out = std::process::Command::new(exe)
        .args([
            "generate",
            "--k", "2", "--B", "1", "--N", "2",
            "--cert", cert_path.to_str().unwrap(),
            "--x-start", "0", "--x-end", "4",
            "--trial-bound", "2", "--rho-iterations", "1", "--rho-polys", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(4),
        "documented no-result exit status; stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("no result within budget"));

    // Full-budget path: scan a small range and certify any match found.
    let summary = scan_divisor_match(&state, m, n, 0..4, &FactorBudget::screening());
    let mut certified = 0;
    for record in &summary.matched {
        match emit_solution(&state, m, n, record.x, &FactorBudget::certificate()).unwrap() {
            EmitOutcome::Certified(solution) => {
                assert!(
                    verify_certificate_against_oracle(&solution, &FactorBudget::certificate())
                        .unwrap(),
                    "oracle rejected emitted certificate at x={}",
                    record.x
                );
                assert_eq!(solution.b, BigUint::one());
                assert_eq!(solution.k, BigUint::from(2u32));
                certified += 1;
            }
            EmitOutcome::Unverifiable { .. } => {}
        }
    }
    if certified == 0 {
        // Budget-bounded honesty: a no-result outcome must be fully
        // accounted for, never silently dropped.
        assert_eq!(
            summary.scanned,
            summary.matched.len() as u64 + summary.unmatched + summary.unknown
        );
        println!("criterion 4 (end-to-end): PASS (no result within budget, honestly reported)");
    } else {
        println!("criterion 4 (end-to-end): PASS ({certified} certified solutions)");
    }
}

/// Count divisors of n coprime to k by direct enumeration, O(sqrt n).
fn dk_naive(n: u64, k: u64) -> u64 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            if d.gcd(&k) == 1 {
                count += 1;
            }
            let q = n / d;
            if q != d && q.gcd(&k) == 1 {
                count += 1;
            }
        }
        d += 1;
    }
    count
}

#[test]
fn criterion_5_oracle_agreement() {
    let start = Instant::now();
    let budget = FactorBudget::default();
    let mut rng = 0x123456789abcdefu64;
    for k in [1u64, 2, 3, 6, 30] {
        for _ in 0..10_000 {
            let n = xorshift(&mut rng) % 10_000_000 + 1;
            let sieved = sieve_dk_window(k, n, n + 1).unwrap()[0];
            let f = dkshift::arith::factor(&BigUint::from(n), &budget);
            let direct =
                dkshift::arith::divisor_count_coprime(&f, &BigUint::from(k)).unwrap();
            assert_eq!(
                BigUint::from(sieved),
                direct,
                "sieve/factorization disagreement at n={n}, k={k}"
            );
        }
    }
    // Naive double-loop recomputation of the coincidence count.
    let report = count_coincidences(1, 1, 10_000).unwrap();
    let naive = (1u64..=10_000)
        .filter(|&n| dk_naive(n, 1) == dk_naive(n + 1, 1))
        .count() as u64;
    assert_eq!(report.count, naive);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "oracle agreement took {elapsed:?}");
    println!("criterion 5 (oracle agreement, {elapsed:?}): PASS");
}

#[test]
fn criterion_6_admissibility() {
    // {n, n+1}: always even, rejected with witness prime 2.
    let consecutive = SieveForms::new([
        (1.into(), 0.into()),
        (1.into(), 1.into()),
    ]);
    let report = check_sieve_admissibility(&consecutive);
    assert!(!report.admissible);
    assert_eq!(report.fixed_prime, Some(2));

    // Duplicate forms: rejected by the discriminant test.
    let duplicate = SieveForms::new([
        (1.into(), 0.into()),
        (1.into(), 0.into()),
    ]);
    let report = check_sieve_admissibility(&duplicate);
    assert!(!report.discriminant_nonzero);
    assert!(!report.admissible);

    // Forms assembled from a real pipeline pass the fixed-prime test:
    // every small prime divides A*R, and both forms are coprime to A*R.
    let cert = construct_point(2, 1, 2);
    let state = build_pipeline(&cert, &FactorBudget::default()).unwrap();
    let (m, n) = state.default_pair();
    let forms = sieve_forms_from_pipeline(&state, m, n);
    let report = check_sieve_admissibility(&forms);
    assert!(report.discriminant_nonzero);
    assert_eq!(report.fixed_prime, None);
    assert!(report.admissible);
    println!("criterion 6 (admissibility): PASS");
}

#[test]
fn criterion_7_determinism() {
    let start = Instant::now();
    // Repeat criteria 1-2: reconstruct the grid and compare certificates
    // byte for byte.
    for (cert, (k, b, n)) in grid_certificates().iter().zip(grid_points()) {
        let again = construct_point(k, b, n);
        assert_eq!(
            serde_json::to_vec(cert).unwrap(),
            serde_json::to_vec(&again).unwrap(),
            "construction certificate for k={k}, B={b}, N={n} not byte-identical"
        );
    }
    // Repeat criterion 3: rebuild every pipeline and compare serialized
    // states byte for byte.
    for (state, cert) in grid_pipelines().iter().zip(grid_certificates()) {
        let again = build_pipeline(cert, &FactorBudget::default()).unwrap();
        assert_eq!(
            serde_json::to_vec(state).unwrap(),
            serde_json::to_vec(&again).unwrap(),
            "pipeline state for k={}, B={} not byte-identical",
            cert.params.k,
            cert.params.b
        );
    }
    // And the end-to-end artifact: the same scan outcome twice.
    let cert = construct_point(2, 1, 2);
    let state = build_pipeline(&cert, &FactorBudget::default()).unwrap();
    let (m, n) = state.default_pair();
    let s1 = scan_divisor_match(&state, m, n, 0..2, &FactorBudget::screening());
    let s2 = scan_divisor_match(&state, m, n, 0..2, &FactorBudget::screening());
    assert_eq!(serde_json::to_vec(&s1).unwrap(), serde_json::to_vec(&s2).unwrap());
    for record in &s1.matched {
        assert!(matches!(record.outcome, ScanOutcome::Match { .. }));
    }
    let elapsed = start.elapsed();
    println!("criterion 7 (determinism, {elapsed:?}): PASS");
}
