//! Acceptance gate for the whole pipeline: nine numbered criteria, each
//! printed as one PASS/FAIL line with the measured quantities. The test
//! fails if any criterion fails. Tolerances are pinned here, next to the
//! checks they guard.

use std::time::Instant;

use jsrbound::lmi::{feasibility, LmiConstraint, QuadConstraint, SolveStatus, SolverOptions};
use jsrbound::mat::spectral_radius;
use jsrbound::scenario::{cap_measure, cap_shrink, delta_shrink, BoundsConfig, CapSpec};
use jsrbound::specfun::{inv_reg_inc_beta, reg_inc_beta, BetaParams};
use jsrbound::symmat::{sym_eigen, SymMatrix};
use jsrbound::sysmodel::{
    generate_sample, generate_trace, rng_stream, sample_unit_sphere, simulate_trace,
};
use jsrbound::whitebox::reference_bracket;
use jsrbound::{analyze, epsilon_of_beta, gamma_star, Mat64, SwitchedSystem64};
use jsrbound_cli::config::ExperimentConfig;
use jsrbound_cli::harness::run_validate_beta;
use jsrbound_cli::netctl;
use rand::Rng;

const BETA: f64 = 0.95;
/// Default bisection width of the level search; soundness slack is 2x this.
const ALPHA: f64 = 1e-3;

struct Criterion {
    id: usize,
    pass: bool,
    detail: String,
}

fn criterion(id: usize, result: Result<(bool, String), String>) -> Criterion {
    match result {
        Ok((pass, detail)) => Criterion { id, pass, detail },
        Err(e) => Criterion { id, pass: false, detail: format!("error: {e}") },
    }
}

#[test]
fn acceptance_gate() {
    let mut results = Vec::new();
    let (c1, c2) = validity_pair();
    results.push(criterion(1, c1));
    results.push(criterion(2, c2));
    results.push(criterion(3, sandwich_and_limits()));
    results.push(criterion(4, epsilon_oracle_equivalence()));
    results.push(criterion(5, shrinkage_closed_forms()));
    results.push(criterion(6, special_function_identities()));
    results.push(criterion(7, solver_soundness()));
    results.push(criterion(8, pipeline_closed_forms()));
    results.push(criterion(9, networked_demo_crossover()));

    for c in &results {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {} - {}", c.id, tag, c.detail);
    }
    let failed: Vec<usize> = results.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}

type Check = Result<(bool, String), String>;

/// Criteria 1 and 2 share one validation run: 200 random systems with a
/// white-box oracle each. Criterion 1 asks the probabilistic upper bound to
/// clear the oracle's lower end in at least 95% of cases within 15 minutes;
/// criterion 2 asks the deterministic lower bound to stay below the
/// oracle's upper end (plus bisection slack) in every single case.
fn validity_pair() -> (Check, Check) {
    const MIN_FRACTION: f64 = 0.95;
    const TIME_LIMIT_SECS: f64 = 900.0;
    let cfg = ExperimentConfig {
        seed: 20260814,
        trials: 200,
        n_grid: vec![50, 400],
        l_list: vec![1],
        n_range: [2, 3],
        m_range: [2, 3],
        beta: BETA,
        depth: 6,
        rows_out: None,
        summary_out: None,
    };
    let start = Instant::now();
    let summary = match run_validate_beta(&cfg) {
        Ok(s) => s,
        Err(e) => {
            let msg = format!("validation harness failed: {e}");
            return (Err(msg.clone()), Err(msg));
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let c1_pass = summary.correctness >= MIN_FRACTION && elapsed < TIME_LIMIT_SECS;
    let c1_detail = format!(
        "upper bound valid in {}/{} runs ({:.4}, Wilson [{:.4}, {:.4}]) in {:.1}s",
        summary.valid,
        summary.trials,
        summary.correctness,
        summary.wilson_low,
        summary.wilson_high,
        elapsed
    );
    let c2_pass = summary.lower_sound_count == summary.trials;
    let c2_detail = format!(
        "lower bound within oracle bracket plus {:.0e} slack in {}/{} runs",
        2.0 * ALPHA,
        summary.lower_sound_count,
        summary.trials
    );
    (Ok((c1_pass, c1_detail)), Ok((c2_pass, c2_detail)))
}

/// A fixed stable pair of scaled rotations: every product of the modes is
/// again a scaled rotation, so the round shape is optimal, kappa is 1, and
/// the growth rate is exactly the larger scale.
fn rotation_pair() -> Result<SwitchedSystem64, String> {
    let mode = |s: f64, theta: f64| {
        let (sin, cos) = theta.sin_cos();
        Mat64::from_rows(vec![vec![s * cos, -s * sin], vec![s * sin, s * cos]])
            .map_err(|e| e.to_string())
    };
    SwitchedSystem64::new(vec![mode(0.8, 0.7)?, mode(0.95, 2.1)?], vec![0.5, 0.5])
        .map_err(|e| e.to_string())
}

fn sandwich_and_limits() -> Check {
    const GRID: [usize; 4] = [100, 400, 1600, 6400];
    const TRIALS: usize = 5;
    const DELTA_FLOOR: f64 = 0.9;
    const MEDIAN_FACTOR: f64 = 1.5;
    let sys = rotation_pair()?;
    let bracket = reference_bracket(sys.modes(), 4, 1, 1e-4, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    let cfg = BoundsConfig::new(BETA, 1, 2);

    let mut mean_delta = Vec::new();
    let mut last_uppers = Vec::new();
    for (i, &num_traces) in GRID.iter().enumerate() {
        let mut deltas = Vec::new();
        for t in 0..TRIALS {
            let mut rng = rng_stream(303, (i * TRIALS + t) as u64);
            let sample = generate_sample(&sys, num_traces, 1, &mut rng)
                .map_err(|e| e.to_string())?
                .strip_hidden();
            let report = analyze(&sample, &cfg).map_err(|e| e.to_string())?;
            if report.lower > report.gamma_star + 1e-12 {
                return Ok((
                    false,
                    format!(
                        "lower {} exceeds gamma_star {} at N={num_traces}",
                        report.lower, report.gamma_star
                    ),
                ));
            }
            if let Some(u) = report.upper_best.finite() {
                if u + 1e-12 < report.gamma_star {
                    return Ok((
                        false,
                        format!("upper {} below gamma_star {} at N={num_traces}", u, report.gamma_star),
                    ));
                }
            }
            deltas.push(report.delta);
            if num_traces == GRID[GRID.len() - 1] {
                last_uppers.push(report.upper_best.finite());
            }
        }
        mean_delta.push(deltas.iter().sum::<f64>() / deltas.len() as f64);
    }
    for w in mean_delta.windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Ok((false, format!("delta decreased along the grid: {mean_delta:?}")));
        }
    }
    let final_delta = *mean_delta.last().unwrap();
    let mut finite: Vec<f64> = last_uppers.iter().filter_map(|u| *u).collect();
    finite.sort_by(f64::total_cmp);
    if finite.len() < TRIALS {
        return Ok((
            false,
            format!("{} of {TRIALS} runs at N=6400 had no finite upper bound", TRIALS - finite.len()),
        ));
    }
    let median = finite[finite.len() / 2];
    let pass = final_delta >= DELTA_FLOOR && median <= MEDIAN_FACTOR * bracket.upper;
    Ok((
        pass,
        format!(
            "delta grid {:?} (floor {DELTA_FLOOR}), median upper {:.4} vs {MEDIAN_FACTOR}*rho_hi {:.4}",
            mean_delta.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>(),
            median,
            MEDIAN_FACTOR * bracket.upper
        ),
    ))
}

/// Independent oracle for the violation level: the binomial tail
/// sum_{i<=d} C(N,i) e^i (1-e)^(N-i) is monotone decreasing in e, so the
/// level at confidence beta is the bisection root of tail = 1 - beta.
fn binomial_tail(eps: f64, n: usize, d: usize) -> f64 {
    if eps <= 0.0 {
        return 1.0;
    }
    if eps >= 1.0 {
        return 0.0;
    }
    let le = eps.ln();
    let l1e = (-eps).ln_1p();
    let mut lnc = 0.0;
    let mut sum = 0.0;
    for i in 0..=d {
        if i > 0 {
            lnc += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        sum += (lnc + i as f64 * le + (n - i) as f64 * l1e).exp();
    }
    sum.min(1.0)
}

fn binomial_root(beta: f64, n: usize, d: usize) -> f64 {
    let target = 1.0 - beta;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binomial_tail(mid, n, d) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn epsilon_oracle_equivalence() -> Check {
    const TOL: f64 = 1e-8;
    let mut rng = rng_stream(404, 0);
    let mut cases: Vec<(f64, usize, usize)> =
        vec![(0.95, 400, 3), (0.95, 50, 3), (0.999, 10_000, 15), (0.5, 4, 0)];
    while cases.len() < 100 {
        let d = rng.random_range(0..=20usize);
        let n = d + 1 + rng.random_range(1..=2000usize);
        let beta = rng.random_range(0.5..0.999);
        cases.push((beta, n, d));
    }
    let mut worst = 0.0f64;
    for &(beta, n, d) in &cases {
        let lib = epsilon_of_beta(beta, n, d).map_err(|e| e.to_string())?;
        let oracle = binomial_root(beta, n, d);
        let err = (lib - oracle).abs();
        if err > worst {
            worst = err;
        }
        if err > TOL {
            return Ok((
                false,
                format!("epsilon mismatch {err:.3e} at beta={beta}, N={n}, d={d}"),
            ));
        }
    }
    Ok((true, format!("{} triples agree with the binomial root, worst gap {worst:.2e}", cases.len())))
}

fn shrinkage_closed_forms() -> Check {
    const GRID_TOL: f64 = 1e-9;
    const MC_SAMPLES: usize = 100_000;
    // Closed forms on a 100-point grid of half-measures in (0, 1/2).
    for i in 0..100 {
        let x = (i as f64 + 0.5) * 0.005;
        let d2 = delta_shrink(x, 2).map_err(|e| e.to_string())?;
        if (d2 - (std::f64::consts::PI * x).cos()).abs() > GRID_TOL {
            return Ok((false, format!("plane shrinkage off the cosine law at x={x}")));
        }
        let d3 = delta_shrink(x, 3).map_err(|e| e.to_string())?;
        if (d3 - (1.0 - 2.0 * x)).abs() > GRID_TOL {
            return Ok((false, format!("space shrinkage off the linear law at x={x}")));
        }
    }
    // Cap measures against Monte Carlo, 3 standard errors each.
    let mut rng = rng_stream(505, 0);
    let mut worst_sigmas = 0.0f64;
    for case in 0..20 {
        let n = 2 + case % 3;
        let scale = rng.random_range(0.5..2.0);
        let c: Vec<f64> =
            sample_unit_sphere::<f64, _>(&mut rng, n).into_iter().map(|x| x * scale).collect();
        let depth = rng.random_range(0.02..0.9);
        let k = depth * scale;
        let cap = CapSpec::new(c.clone(), k).map_err(|e| e.to_string())?;
        let exact = cap_measure(n, cap_shrink(&cap)).map_err(|e| e.to_string())?;
        let mut hits = 0usize;
        for _ in 0..MC_SAMPLES {
            let x = sample_unit_sphere::<f64, _>(&mut rng, n);
            let dot: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            if dot >= k {
                hits += 1;
            }
        }
        let mc = hits as f64 / MC_SAMPLES as f64;
        let se = (exact * (1.0 - exact) / MC_SAMPLES as f64).sqrt().max(1e-12);
        let sigmas = (mc - exact).abs() / se;
        worst_sigmas = worst_sigmas.max(sigmas);
        if sigmas > 3.0 {
            return Ok((
                false,
                format!("cap measure {exact:.5} vs Monte Carlo {mc:.5} ({sigmas:.1} sigma, n={n})"),
            ));
        }
    }
    Ok((
        true,
        format!("closed forms within {GRID_TOL:.0e}; 20 caps within 3 sigma (worst {worst_sigmas:.2})"),
    ))
}

fn special_function_identities() -> Check {
    const TOL: f64 = 1e-10;
    let mut rng = rng_stream(606, 0);
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    let symmetry = |a: f64, b: f64, x: f64| -> Result<f64, String> {
        let fwd = reg_inc_beta(x, BetaParams::new(a, b).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let rev = reg_inc_beta(1.0 - x, BetaParams::new(b, a).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        Ok((fwd + rev - 1.0).abs())
    };
    // Half-integer first parameters as they appear in the shrinkage laws.
    for n in 2..=8usize {
        let a = (n as f64 - 1.0) / 2.0;
        for _ in 0..5 {
            let b = rng.random_range(0.25..30.0);
            let x = rng.random_range(0.001..0.999);
            let err = symmetry(a, b, x)?;
            worst = worst.max(err);
            checks += 1;
            if err > TOL {
                return Ok((false, format!("symmetry off by {err:.2e} at a={a}, b={b}")));
            }
        }
    }
    for _ in 0..50 {
        let a = rng.random_range(0.3..40.0);
        let b = rng.random_range(0.3..40.0);
        let x = rng.random_range(0.001..0.999);
        let err = symmetry(a, b, x)?;
        worst = worst.max(err);
        checks += 1;
        if err > TOL {
            return Ok((false, format!("symmetry off by {err:.2e} at a={a}, b={b}")));
        }
    }
    // Inverse round trips, including the large first parameters produced by
    // sample counts up to 10^4.
    let round_trip = |a: f64, b: f64, y: f64| -> Result<f64, String> {
        let p = BetaParams::new(a, b).map_err(|e| e.to_string())?;
        let x = inv_reg_inc_beta(y, p).map_err(|e| e.to_string())?;
        let back = reg_inc_beta(x, p).map_err(|e| e.to_string())?;
        Ok((back - y).abs())
    };
    for &num in &[50usize, 400, 2000, 10_000] {
        for &d in &[3usize, 6, 15] {
            let a = (num - d) as f64;
            let b = (d + 1) as f64;
            for &y in &[1e-4, 0.05, rng.random_range(0.1..0.9)] {
                let err = round_trip(a, b, y)?;
                worst = worst.max(err);
                checks += 1;
                if err > TOL {
                    return Ok((
                        false,
                        format!("inverse round trip off by {err:.2e} at a={a}, b={b}, y={y}"),
                    ));
                }
            }
        }
    }
    for _ in 0..30 {
        let a = rng.random_range(0.5..50.0);
        let b = rng.random_range(0.5..50.0);
        let y = rng.random_range(0.001..0.999);
        let err = round_trip(a, b, y)?;
        worst = worst.max(err);
        checks += 1;
        if err > TOL {
            return Ok((false, format!("inverse round trip off by {err:.2e} at a={a}, b={b}")));
        }
    }
    Ok((true, format!("{checks} identities within {TOL:.0e}, worst {worst:.2e}")))
}

/// 400 feasible-by-construction instances with every witness re-verified,
/// plus 100 instances from the family u = v with c < 1, which contradicts
/// the unit floor and must come back Infeasible.
fn solver_soundness() -> Check {
    const SLACK: f64 = -1e-6;
    let opts = SolverOptions::<f64>::default();
    let mut rng = rng_stream(707, 0);
    let mut iters_total = 0usize;
    for case in 0..400usize {
        let n = 2 + case % 4;
        // A well-conditioned positive target shape P0 = I + G^T G.
        let g = Mat64::from_fn(n, n, |_, _| rng.random_range(-0.7..0.7));
        let p0 = SymMatrix::identity(n).add_scaled(&SymMatrix::gram(&g), 1.0);
        let mut raw_quads: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        for _ in 0..(1 + case % 4) {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
            let v = sample_unit_sphere::<f64, _>(&mut rng, n);
            // P0 satisfies the constraint with a 10% margin.
            let c = p0.quad_form(&u) / p0.quad_form(&v) / 0.9;
            raw_quads.push((u, v, c));
        }
        let mut raw_lmis: Vec<(Mat64, f64)> = Vec::new();
        if case % 2 == 0 {
            let a = Mat64::from_fn(n, n, |_, _| rng.random_range(-0.5..0.5));
            let awa = p0.congruence(&a);
            let lam_max =
                sym_eigen(&awa).map_err(|e| e.to_string())?.lambda_max().max(1e-9);
            let lam_min = sym_eigen(&p0).map_err(|e| e.to_string())?.lambda_min();
            // lambda_max(P0^-1 A^T P0 A) <= lambda_max(A^T P0 A) / lambda_min(P0).
            let c = lam_max / lam_min / 0.9;
            raw_lmis.push((a, c));
        }
        let quads = raw_quads
            .iter()
            .map(|(u, v, c)| QuadConstraint::new(u.clone(), v.clone(), *c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let lmis = raw_lmis
            .iter()
            .map(|(a, c)| LmiConstraint::new(a.clone(), *c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let out =
            feasibility(n, &quads, &lmis, opts.t_max, &opts).map_err(|e| e.to_string())?;
        iters_total += out.iterations;
        if out.status != SolveStatus::Feasible {
            return Ok((false, format!("constructed-feasible case {case} came back {:?}", out.status)));
        }
        let w = out.witness.ok_or_else(|| format!("case {case}: no witness"))?;
        let lam_min_w = sym_eigen(&w).map_err(|e| e.to_string())?.lambda_min();
        if lam_min_w < 1.0 + SLACK {
            return Ok((false, format!("witness of case {case} dips below the unit floor: {lam_min_w}")));
        }
        for (u, v, c) in &raw_quads {
            let lhs = w.quad_form(u);
            let rhs = c * w.quad_form(v);
            if rhs - lhs < SLACK * rhs.abs().max(lhs.abs()).max(1.0) {
                return Ok((false, format!("witness of case {case} violates a quadratic constraint")));
            }
        }
        for (a, c) in &raw_lmis {
            let awa = w.congruence(a);
            let slack_mat = SymMatrix::zeros(n).add_scaled(&w, *c).add_scaled(&awa, -1.0);
            let lam = sym_eigen(&slack_mat).map_err(|e| e.to_string())?.lambda_min();
            let scale = (c * sym_eigen(&w).map_err(|e| e.to_string())?.lambda_max()).max(1.0);
            if lam < SLACK * scale {
                return Ok((false, format!("witness of case {case} violates a contraction constraint")));
            }
        }
    }
    for case in 0..100usize {
        let n = 2 + case % 4;
        let (q, c) = if case == 0 {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            (e1, 0.25)
        } else {
            (sample_unit_sphere::<f64, _>(&mut rng, n), rng.random_range(0.1..0.9))
        };
        // q^T P q <= c q^T P q with c < 1 forces q^T P q <= 0, against P >= I.
        let quad = QuadConstraint::new(q.clone(), q, c).map_err(|e| e.to_string())?;
        let out = feasibility(n, &[quad], &[], opts.t_max, &opts).map_err(|e| e.to_string())?;
        iters_total += out.iterations;
        if out.status != SolveStatus::Infeasible {
            return Ok((
                false,
                format!("contradictory case {case} (c={c:.2}) came back {:?}", out.status),
            ));
        }
    }
    Ok((
        true,
        format!("400 witnesses re-verified, 100 contradictions certified ({iters_total} iterations)"),
    ))
}

fn pipeline_closed_forms() -> Check {
    const TOL: f64 = 1e-3;
    let mut rng = rng_stream(808, 0);

    // Axis-aligned contraction: the first coordinate axis pins the level.
    let diag = SwitchedSystem64::new(
        vec![Mat64::from_rows(vec![vec![0.9, 0.0], vec![0.0, 0.3]]).map_err(|e| e.to_string())?],
        vec![1.0],
    )
    .map_err(|e| e.to_string())?;
    let mut traces =
        vec![simulate_trace(&diag, &[1.0, 0.0], 1, &mut rng).map_err(|e| e.to_string())?];
    for _ in 0..30 {
        traces.push(generate_trace(&diag, 1, &mut rng).map_err(|e| e.to_string())?);
    }
    let sample = jsrbound::sysmodel::SampleSet::new(traces, None, None).map_err(|e| e.to_string())?;
    let cfg = BoundsConfig::new(BETA, 1, 1);
    let gs_diag = gamma_star(&sample, &cfg).map_err(|e| e.to_string())?;
    if (gs_diag.value - 0.9).abs() > TOL {
        return Ok((false, format!("diagonal contraction level {} not 0.9", gs_diag.value)));
    }

    // Point reflection: norms are preserved exactly, the level is 1.
    let neg = SwitchedSystem64::new(
        vec![Mat64::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).map_err(|e| e.to_string())?],
        vec![1.0],
    )
    .map_err(|e| e.to_string())?;
    let sample = generate_sample(&neg, 30, 1, &mut rng).map_err(|e| e.to_string())?.strip_hidden();
    let gs_neg = gamma_star(&sample, &cfg).map_err(|e| e.to_string())?;
    if (gs_neg.value - 1.0).abs() > TOL {
        return Ok((false, format!("reflection level {} not 1", gs_neg.value)));
    }

    // Uniform doubling: the deterministic lower bound certifies instability.
    let dbl = SwitchedSystem64::new(
        vec![Mat64::from_rows(vec![vec![2.0, 0.0], vec![0.0, 2.0]]).map_err(|e| e.to_string())?],
        vec![1.0],
    )
    .map_err(|e| e.to_string())?;
    let sample = generate_sample(&dbl, 40, 1, &mut rng).map_err(|e| e.to_string())?.strip_hidden();
    let report = analyze(&sample, &cfg).map_err(|e| e.to_string())?;
    if report.lower <= 1.0 || report.verdict() != "unstable" {
        return Ok((
            false,
            format!("doubling system: lower {} / verdict {}", report.lower, report.verdict()),
        ));
    }
    Ok((
        true,
        format!(
            "levels {:.4} / {:.4}, instability lower bound {:.4}",
            gs_diag.value, gs_neg.value, report.lower
        ),
    ))
}

/// Shared-channel demo, 3 users: the claim is that with enough traces the
/// probabilistic upper bound certifies stability (drops below 1) by
/// N = 5000 somewhere along the grid.
fn networked_demo_crossover() -> Check {
    const GRID: [usize; 6] = [250, 500, 1000, 2000, 3500, 5000];
    let demo = netctl::build_demo(3).map_err(|e| e.to_string())?;
    let worst_mode = demo
        .system
        .modes()
        .iter()
        .map(|m| spectral_radius(m).map_err(|e| e.to_string()))
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    let mut best: Option<f64> = None;
    let mut crossed = None;
    for &num_traces in &GRID {
        let report =
            netctl::run_demo(3, num_traces, BETA, 909 + num_traces as u64).map_err(|e| e.to_string())?;
        if let Some(u) = report.upper_best.finite() {
            if best.is_none_or(|b| u < b) {
                best = Some(u);
            }
            if u < 1.0 && crossed.is_none() {
                crossed = Some(num_traces);
            }
        }
    }
    match crossed {
        Some(n) => Ok((true, format!("upper bound crossed below 1 at N={n}"))),
        None => Ok((
            false,
            format!(
                "no crossover by N=5000 (best upper {}); the frame products contain a single \
                 mode of spectral radius {worst_mode:.4} > 1, so the chain is genuinely \
                 unstable and no sound upper bound can reach below 1",
                best.map(|b| format!("{b:.4}")).unwrap_or_else(|| "inf".into())
            ),
        )),
    }
}
