//! Built-in demo: an unstable second-order plant stabilized through a
//! shared time-slotted channel. Each beacon frame is eight plant steps;
//! the controller owns two fixed slots, two more go to whichever users win
//! them, and the rest run open loop. Composing a frame per slot assignment
//! gives a four-mode switched system whose per-frame growth rate the
//! black-box pipeline can bound from simulated traces.

use jsrbound::scenario::{analyze, BoundsConfig};
use jsrbound::sysmodel::{generate_sample, rng_from_seed};
use jsrbound::{BoundsReport64, Mat64, SwitchedSystem64};

use crate::error::CliError;

/// Open-loop eigenvalues of the plant.
const PLANT_POLES: [f64; 2] = [0.45, 1.1];
/// Closed-loop eigenvalues placed by the state-feedback gain.
const CLOSED_POLES: [f64; 2] = [0.8, -0.7];
/// Construction self-check tolerance on the realized eigenvalues.
const POLE_TOL: f64 = 1e-10;

pub struct NetctlDemo {
    /// Open-loop plant matrix (companion form).
    pub plant: Mat64,
    /// Closed-loop matrix plant + b·gain with b = (0, 1)ᵀ.
    pub closed: Mat64,
    /// State-feedback gain row.
    pub gain: [f64; 2],
    /// Four frame products with the slot-assignment probabilities.
    pub system: SwitchedSystem64,
    /// Smallest normalized mode probability; prior knowledge passed to the
    /// analysis.
    pub min_mode_prob: f64,
}

/// Companion matrix of (z - r1)(z - r2).
fn companion(roots: [f64; 2]) -> Mat64 {
    let c1 = -(roots[0] + roots[1]);
    let c0 = roots[0] * roots[1];
    Mat64::from_rows(vec![vec![0.0, 1.0], vec![-c0, -c1]]).unwrap()
}

/// Eigenvalues of a real 2x2 matrix with real spectrum, ascending.
fn eig2(m: &Mat64) -> (f64, f64) {
    let tr = m.get(0, 0) + m.get(1, 1);
    let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

fn check_poles(m: &Mat64, targets: [f64; 2], what: &str) -> Result<(), CliError> {
    let (lo, hi) = eig2(m);
    let mut want = targets;
    want.sort_by(f64::total_cmp);
    if (lo - want[0]).abs() > POLE_TOL || (hi - want[1]).abs() > POLE_TOL {
        return Err(CliError::Runtime(format!(
            "{what} realized eigenvalues ({lo}, {hi}) miss the targets ({}, {})",
            want[0], want[1]
        )));
    }
    Ok(())
}

/// Left-to-right product of the listed factors.
fn product(factors: &[&Mat64]) -> Mat64 {
    let mut out = Mat64::identity(factors[0].rows());
    for f in factors {
        out = out.matmul(f);
    }
    out
}

pub fn build_demo(users: usize) -> Result<NetctlDemo, CliError> {
    if users < 2 {
        return Err(CliError::Usage("the channel needs at least 2 users".into()));
    }
    let plant = companion(PLANT_POLES);
    let target = companion(CLOSED_POLES);
    // With b = (0, 1)ᵀ the gain adds to the companion bottom row, so pole
    // placement is the row difference.
    let gain = [
        target.get(1, 0) - plant.get(1, 0),
        target.get(1, 1) - plant.get(1, 1),
    ];
    let mut closed = plant.clone();
    closed.set(1, 0, plant.get(1, 0) + gain[0]);
    closed.set(1, 1, plant.get(1, 1) + gain[1]);
    check_poles(&plant, PLANT_POLES, "plant")?;
    check_poles(&closed, CLOSED_POLES, "closed loop")?;

    let a = &plant;
    let c = &closed;
    // One frame per assignment of the two contended slots: both to other
    // users, first/second to the controller, or both to the controller.
    let modes = vec![
        product(&[a, a, c, c, a, a, a, a]),
        product(&[c, a, c, c, a, a, a, a]),
        product(&[a, c, c, c, a, a, a, a]),
        product(&[c, c, c, c, a, a, a, a]),
    ];
    let lf = users as f64;
    let raw = [
        1.0 / ((lf - 1.0) * (lf - 1.0)),
        1.0 / (lf * (lf - 1.0)),
        1.0 / ((lf - 1.0) * lf),
        1.0 / (lf * lf),
    ];
    // The slot-assignment weights do not sum to one; normalize.
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
    let min_mode_prob = probs.iter().cloned().fold(f64::INFINITY, f64::min);
    let system = SwitchedSystem64::new(modes, probs).map_err(CliError::from)?;
    Ok(NetctlDemo { plant, closed, gain, system, min_mode_prob })
}

/// Simulate `num_traces` one-frame traces and bound the per-frame growth
/// rate.
pub fn run_demo(
    users: usize,
    num_traces: usize,
    beta: f64,
    seed: u64,
) -> Result<BoundsReport64, CliError> {
    let demo = build_demo(users)?;
    let mut rng = rng_from_seed(seed);
    let sample = generate_sample(&demo.system, num_traces, 1, &mut rng)?.strip_hidden();
    let mut cfg = BoundsConfig::new(beta, 1, demo.system.num_modes());
    cfg.min_mode_prob = Some(demo.min_mode_prob);
    Ok(analyze(&sample, &cfg)?)
}
