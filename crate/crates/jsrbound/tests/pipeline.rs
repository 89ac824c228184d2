//! End-to-end runs across the public API: files in, certificates out.

use jsrbound::io::{load_system, load_traces, save_system, save_traces};
use jsrbound::lmi::SolverOptions;
use jsrbound::mat::Mat;
use jsrbound::scenario::{analyze, gamma_star, BoundsConfig};
use jsrbound::symmat::cholesky;
use jsrbound::sysmodel::{
    generate_sample, random_system, rng_from_seed, sample_unit_sphere, simulate_trace,
    SampleSet, SwitchedSystem,
};
use jsrbound::whitebox::reference_bracket;

/// A stripped sample written to disk and read back feeds the analysis the
/// exact same bits, so the whole report matches bit for bit.
#[test]
fn file_round_trip_reproduces_the_analysis() {
    let mut rng = rng_from_seed(31);
    let sys = random_system::<f64, _>(2, 2, &mut rng).unwrap();
    let sample = generate_sample(&sys, 80, 2, &mut rng).unwrap().strip_hidden();

    let dir = tempfile::tempdir().unwrap();
    let sys_path = dir.path().join("system.json");
    let trace_path = dir.path().join("traces.jsonl");
    save_system(&sys, &sys_path).unwrap();
    save_traces(&sample, &trace_path).unwrap();

    let sys_back: SwitchedSystem<f64> = load_system(&sys_path).unwrap();
    assert_eq!(sys.probs(), sys_back.probs());
    let sample_back: SampleSet<f64> = load_traces(&trace_path).unwrap();

    let cfg = BoundsConfig::new(0.9f64, 2, 2);
    let direct = analyze(&sample, &cfg).unwrap();
    let loaded = analyze(&sample_back, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&direct).unwrap(),
        serde_json::to_string(&loaded).unwrap(),
        "analysis drifted across a file round trip"
    );
    assert!(["stable", "unstable", "inconclusive"].contains(&direct.verdict()));
}

/// The fitted quadratic factors as P = LᵀL, and in the L coordinates every
/// trace obeys the plain norm contraction at the certified level.
#[test]
fn certificate_replays_as_a_change_of_coordinates() {
    let a = Mat::from_rows(vec![vec![0.9f64, 0.3], vec![0.0, 0.5]]).unwrap();
    let sys = SwitchedSystem::new(vec![a], vec![1.0]).unwrap();
    let mut rng = rng_from_seed(5);
    let traces = (0..12)
        .map(|_| {
            let x0 = sample_unit_sphere(&mut rng, 2);
            simulate_trace(&sys, &x0, 2, &mut rng).unwrap().without_modes()
        })
        .collect();
    let sample = SampleSet::new(traces, None, None).unwrap();

    let cfg = BoundsConfig::new(0.95f64, 2, 1);
    let gs = gamma_star(&sample, &cfg).unwrap();
    let l_factor = cholesky(&gs.witness).unwrap();

    let p_back = l_factor.transpose().matmul(&l_factor);
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (p_back.get(i, j) - gs.witness.get(i, j)).abs() <= 1e-10,
                "factorization residual at ({i},{j})"
            );
        }
    }

    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let level = gs.value.powi(2);
    for t in sample.traces() {
        let start = norm(&l_factor.matvec(t.x0()));
        let end = norm(&l_factor.matvec(t.final_state()));
        assert!(end <= level * start * (1.0 + 1e-6), "trace escapes the certificate");
    }
}

/// The sampled bounds respect the matrix-level bracket: the trace lower
/// bound never overtakes the white-box upper bound, and the sandwich around
/// the fitted level holds.
#[test]
fn sampled_bounds_respect_the_whitebox_bracket() {
    let mut rng = rng_from_seed(12);
    let sys = random_system::<f64, _>(2, 2, &mut rng).unwrap();
    let bracket =
        reference_bracket(sys.modes(), 6, 2, 1e-3, &SolverOptions::default()).unwrap();

    let sample = generate_sample(&sys, 120, 1, &mut rng).unwrap().strip_hidden();
    let cfg = BoundsConfig::new(0.95f64, 1, 2);
    let report = analyze(&sample, &cfg).unwrap();

    assert!(
        report.lower <= bracket.upper + 2.0 * cfg.alpha,
        "lower bound {} overtakes the certified upper {}",
        report.lower,
        bracket.upper
    );
    assert!(report.lower <= report.gamma_star * (1.0 + cfg.eta) + 1e-12);
    if let Some(u) = report.upper_best.finite() {
        assert!(report.gamma_star * (1.0 + cfg.eta) <= u * (1.0 + 1e-12));
    }
}
