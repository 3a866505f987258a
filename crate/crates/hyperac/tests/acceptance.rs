//! Acceptance gate: one test per headline claim, each printing a single
//! pass/fail line. The seven criteria are
//!
//! 1. the layer constant c₀ for the quartic well,
//! 2. the energy identity under mesh refinement (third preset, T = 10),
//! 3. the transition counts of the four reference experiments,
//! 4. layer-certificate margins for single-layer states across ε,
//! 5. persistence of the layered state over horizons m·ε⁻¹,
//! 6. exact conservation and bit-level agreement with a brute-force
//!    stepper when the reaction is switched off,
//! 7. the initial-data round trip (reconstructed u_t → u₁ as dx → 0).
//!
//! Each test asserts its stated tolerance and runtime budget; the printed
//! detail line (visible with `--nocapture` or on failure) records the
//! measured numbers.

use std::sync::Arc;
use std::time::Instant;

use hyperac::diagnostics::{layer_certificate, DissipationTracker, ExitOutcome, StepProfile};
use hyperac::experiments::{
    preset, run_example, sweep_metastability, ExperimentConfig, Overrides, ProfileKind, RunReport,
    VelocityKind,
};
use hyperac::kinetics::{
    build_initial_state, derive_params, reconstruct, run, step, Grid1D, KineticState,
};
use hyperac::potential::{compute_c0_default, DampingSpec, PotentialSpec};

fn report(criterion: u32, detail: &str, elapsed: f64) {
    println!("criterion {criterion} PASS: {detail} [{elapsed:.2} s]");
}

/// c₀ = 2√2/3 for the quartic well, to 1e−8. Budget: 1 s.
#[test]
fn criterion_1_layer_constant() {
    let start = Instant::now();
    let c0 = compute_c0_default(&PotentialSpec::quartic()).unwrap();
    let err = (c0 - 0.9428090416).abs();
    assert!(err <= 1e-8, "c0 = {c0}, error {err} exceeds 1e-8");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed} s, budget 1 s");
    report(1, &format!("c0 = {c0}, |error| = {err:.3e} <= 1e-8"), elapsed);
}

/// On the third preset run to T = 10, the defect of the energy identity
/// E(0) − E(T) = ε⁻¹∫∫g·u_t² drops by ≥ 1.5× when dx is halved, and the
/// sampled energies are nonincreasing within 10× that defect. The study
/// runs at 1600/3200 cells: the signed defect crosses zero near the
/// preset's native 200-cell resolution, so first-order decay is only
/// visible once the mesh is safely inside the asymptotic regime. Budget:
/// 30 s.
#[test]
fn criterion_2_energy_identity_refinement() {
    let start = Instant::now();
    let pot = PotentialSpec::quartic();
    let identity_at = |cells: usize| -> (f64, f64) {
        let config = preset(3).unwrap();
        let grid = Grid1D::new(-4.0, 4.0, cells).unwrap();
        let params = derive_params(config.epsilon, config.tau, &grid).unwrap();
        let damping = DampingSpec::relaxation(&pot, config.tau).unwrap();
        let state = build_initial_state(&config.initial_data(), &grid, &params, &pot);
        let mut tracker = DissipationTracker::new(&params, &pot, &damping);
        run(state, &params, &pot, 10.0, &mut [&mut tracker]).unwrap();
        (tracker.residual(), tracker.max_increase())
    };
    let (r_coarse, inc_coarse) = identity_at(1600);
    let (r_fine, inc_fine) = identity_at(3200);
    let ratio = r_coarse / r_fine;
    assert!(
        ratio >= 1.5,
        "residual {r_coarse} -> {r_fine} under refinement, ratio {ratio} < 1.5"
    );
    assert!(
        inc_coarse <= 10.0 * r_coarse,
        "max energy increase {inc_coarse} exceeds 10x residual {r_coarse}"
    );
    assert!(
        inc_fine <= 10.0 * r_fine,
        "max energy increase {inc_fine} exceeds 10x residual {r_fine}"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "took {elapsed} s, budget 30 s");
    report(
        2,
        &format!(
            "residual {r_coarse:.4} -> {r_fine:.4} (ratio {ratio:.2} >= 1.5), \
             max increases {inc_coarse:.2e}, {inc_fine:.2e}"
        ),
        elapsed,
    );
}

fn transitions_at(report: &RunReport, t: f64) -> usize {
    report
        .snapshots
        .iter()
        .find(|s| s.requested_t == t)
        .unwrap_or_else(|| panic!("no snapshot at t = {t}"))
        .transitions
}

/// The four reference experiments reproduce their transition counts:
/// 1 → four layers formed by t = 20 and unchanged at t = 10³, 2 → four
/// layers out of u₀ ≡ 0, 3 → one layer becomes three, 4 → two layers
/// become one. Budget: 10 min combined.
#[test]
fn criterion_3_reference_experiments() {
    let start = Instant::now();
    let reports: Vec<RunReport> = (1..=4)
        .map(|n| run_example(n, &Overrides::default()).unwrap())
        .collect();

    // Experiment 1: the count is already 4 at t = 20 and stays 4 at every
    // later sample out to the horizon.
    for t in [20.0, 100.0, 1000.0] {
        let n = transitions_at(&reports[0], t);
        assert_eq!(n, 4, "experiment 1 has {n} transitions at t = {t}, want 4");
    }
    // Experiment 2: no transitions in the datum, four at the horizon.
    assert_eq!(transitions_at(&reports[1], 0.0), 0);
    assert_eq!(reports[1].final_transitions, 4, "experiment 2 final count");
    // Experiment 3: one transition in the datum, three at the horizon.
    assert_eq!(transitions_at(&reports[2], 0.0), 1);
    assert_eq!(reports[2].final_transitions, 3, "experiment 3 final count");
    // Experiment 4: two transitions in the datum, one at the horizon.
    assert_eq!(transitions_at(&reports[3], 0.0), 2);
    assert_eq!(reports[3].final_transitions, 1, "experiment 4 final count");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "took {elapsed} s, budget 10 min");
    let finals: Vec<usize> = reports.iter().map(|r| r.final_transitions).collect();
    report(3, &format!("final transition counts {finals:?} = [4, 4, 3, 1]"), elapsed);
}

/// Layer certificates on single-layer tanh states report an aggregate
/// margin ≥ −5ε (the discrete form of the N·c₀ − c₁ε lower bound) for
/// ε ∈ {0.1, 0.05, 0.02}. Budget: 1 s per ε.
#[test]
fn criterion_4_layer_certificate_margins() {
    let pot = PotentialSpec::quartic();
    let profile = StepProfile::new(vec![0.0], -1.0, (-4.0, 4.0)).unwrap();
    let mut details = Vec::new();
    let start = Instant::now();
    for eps in [0.1f64, 0.05, 0.02] {
        let per_eps = Instant::now();
        let cells = (8.0 * 5.0 / eps).ceil() as usize;
        let grid = Grid1D::new(-4.0, 4.0, cells).unwrap();
        let w = std::f64::consts::SQRT_2 * eps;
        let u: Vec<f64> = grid.nodes().map(|x| (x / w).tanh()).collect();
        let cert = layer_certificate(&u, &grid, &pot, &profile, eps, 1, 0.5).unwrap();
        assert!(
            cert.margin >= -5.0 * eps,
            "margin {} below floor {} at eps = {eps}",
            cert.margin,
            -5.0 * eps
        );
        let t = per_eps.elapsed().as_secs_f64();
        assert!(t < 1.0, "eps = {eps} took {t} s, budget 1 s");
        details.push(format!("eps {eps}: margin {:.4} >= {}", cert.margin, -5.0 * eps));
    }
    report(4, &details.join("; "), start.elapsed().as_secs_f64());
}

/// Sweeping the single-layer state with zero velocity over horizons ε⁻¹
/// (k = 1, m = 1): the sup-L¹ distance to the step profile decreases
/// strictly in ε and no ε lets the interface drift further than
/// δ₁ = 0.2 — every exit time is the horizon sentinel. Budget: 5 min.
#[test]
fn criterion_5_metastable_persistence() {
    let start = Instant::now();
    let base = ExperimentConfig {
        epsilon: 0.2,
        tau: 0.8,
        domain: (-4.0, 4.0),
        cells: None,
        profile: ProfileKind::TanhLayer,
        layer_center: 0.0,
        velocity: VelocityKind::Zero,
        horizon: 1.0, // replaced per row by m·ε⁻ᵏ
        snapshot_times: None,
        band: (-0.7, 0.7),
        delta1: 0.2,
        hysteresis: 0.5,
        k_exponent: 1.0,
        m: 1.0,
        seedless: true,
    };
    let table = sweep_metastability(&base, &[0.2, 0.1, 0.05], 1.0, 1.0).unwrap();
    assert_eq!(table.rows.len(), 3);
    for pair in table.rows.windows(2) {
        assert!(
            pair[0].sup_l1 > pair[1].sup_l1,
            "sup-L1 not strictly decreasing in eps: {} (eps {}) vs {} (eps {})",
            pair[0].sup_l1,
            pair[0].epsilon,
            pair[1].sup_l1,
            pair[1].epsilon
        );
    }
    for row in &table.rows {
        assert!(
            matches!(row.exit, ExitOutcome::WithinHorizon { .. }),
            "interface escaped within the horizon at eps = {}: {:?}",
            row.epsilon,
            row.exit
        );
        assert!(!row.capped, "step cap hit at eps = {}", row.epsilon);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "took {elapsed} s, budget 5 min");
    let sups: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{:.4}", r.sup_l1))
        .collect();
    report(
        5,
        &format!("sup-L1 strictly decreasing [{}], all exits = horizon sentinel", sups.join(" > ")),
        elapsed,
    );
}

/// A deterministic xorshift64 stream in [0, 1); seeds the random states
/// below so the criterion is reproducible.
fn xorshift(seed: &mut u64) -> f64 {
    *seed ^= *seed << 13;
    *seed ^= *seed >> 7;
    *seed ^= *seed << 17;
    (*seed >> 11) as f64 / (1u64 << 53) as f64
}

/// Hand-rolled per-cell update mirroring the stepper's exact arithmetic:
/// the shared source is precomputed per cell, interior cells advect
/// upwind with reversal, and the wall cells reflect.
fn brute_force_step(
    a: &[f64],
    b: &[f64],
    p: f64,
    q: f64,
    half_dt: f64,
    reaction: impl Fn(f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let m = a.len();
    let src: Vec<f64> = (0..m).map(|j| half_dt * reaction(a[j] + b[j])).collect();
    let mut na = Vec::with_capacity(m);
    let mut nb = Vec::with_capacity(m);
    for j in 0..m {
        na.push(if j == 0 {
            p * b[0] + q * a[0] + src[0]
        } else {
            p * a[j - 1] + q * b[j - 1] + src[j - 1]
        });
        nb.push(if j == m - 1 {
            p * a[m - 1] + q * b[m - 1] + src[m - 1]
        } else {
            p * b[j + 1] + q * a[j + 1] + src[j + 1]
        });
    }
    (na, nb)
}

/// With the reaction switched off the stepper conserves Σ(α+β) to 1e−12
/// over 10⁴ steps, and it agrees bit for bit with the brute-force
/// per-cell update on random 16-cell states for 100 steps.
#[test]
fn criterion_6_scheme_oracle_equivalence() {
    let start = Instant::now();
    let inert = PotentialSpec::raw_unchecked(
        "inert",
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
        Arc::new(|_| 0.0),
    );
    let grid = Grid1D::new(0.0, 16.0, 16).unwrap();
    let params = derive_params(1.0, 1.0, &grid).unwrap();

    let mut seed = 0x2545f4914f6cdd1du64;
    let alpha: Vec<f64> = (0..16).map(|_| xorshift(&mut seed)).collect();
    let beta: Vec<f64> = (0..16).map(|_| xorshift(&mut seed)).collect();

    // Conservation over 10⁴ steps.
    let mut state = KineticState::new(grid, alpha.clone(), beta.clone(), 0.0).unwrap();
    let mass0 = state.mass();
    for _ in 0..10_000 {
        state = step(&state, &params, &inert).unwrap();
    }
    let drift = (state.mass() - mass0).abs();
    assert!(drift <= 1e-12, "mass drifted by {drift} over 10^4 steps");

    // Bit-exact agreement with the brute-force oracle for 100 steps.
    let mut state = KineticState::new(grid, alpha.clone(), beta.clone(), 0.0).unwrap();
    let (mut oa, mut ob) = (alpha, beta);
    let half_dt = 0.5 * params.dt();
    for n in 0..100 {
        state = step(&state, &params, &inert).unwrap();
        (oa, ob) = brute_force_step(&oa, &ob, params.p(), params.q(), half_dt, |_| 0.0);
        for j in 0..16 {
            assert_eq!(
                state.alpha()[j].to_bits(),
                oa[j].to_bits(),
                "alpha[{j}] diverged from the oracle at step {}",
                n + 1
            );
            assert_eq!(
                state.beta()[j].to_bits(),
                ob[j].to_bits(),
                "beta[{j}] diverged from the oracle at step {}",
                n + 1
            );
        }
    }
    report(
        6,
        &format!("mass drift {drift:.2e} <= 1e-12; 100 steps bit-identical to the oracle"),
        start.elapsed().as_secs_f64(),
    );
}

/// Building the kinetic state from (u₀, u₁) and reconstructing returns
/// u_t within max-norm O(dx) of u₁: the two-resolution log₂ slope is
/// ≥ 0.8 for the second and third presets' data.
#[test]
fn criterion_7_initial_data_round_trip() {
    let start = Instant::now();
    let pot = PotentialSpec::quartic();
    let max_err = |n: u8, cells: usize| -> f64 {
        let config = preset(n).unwrap();
        let grid = Grid1D::new(-4.0, 4.0, cells).unwrap();
        let params = derive_params(config.epsilon, config.tau, &grid).unwrap();
        let data = config.initial_data();
        let state = build_initial_state(&data, &grid, &params, &pot);
        let fields = reconstruct(&state, &params, &pot);
        grid.nodes()
            .enumerate()
            .map(|(j, x)| (fields.u_t[j] - data.u1(x)).abs())
            .fold(0.0, f64::max)
    };
    let mut details = Vec::new();
    for n in [2u8, 3] {
        let e_coarse = max_err(n, 400);
        let e_fine = max_err(n, 800);
        let slope = (e_coarse / e_fine).log2();
        assert!(
            slope >= 0.8,
            "preset {n}: max errors {e_coarse} -> {e_fine}, order {slope} < 0.8"
        );
        details.push(format!("preset {n}: order {slope:.2}"));
    }
    report(7, &format!("{} (both >= 0.8)", details.join(", ")), start.elapsed().as_secs_f64());
}
