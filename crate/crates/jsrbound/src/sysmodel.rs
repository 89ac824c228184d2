//! Switched linear systems, observed trajectories, and trajectory sampling.
//!
//! A system is a finite set of mode matrices with switching probabilities;
//! a step applies one mode, drawn independently at each time, to the current
//! state. Observations are traces: a starting point on the unit sphere and
//! the states after each of `l` steps. The switching sequence that produced
//! a trace is carried separately as hidden bookkeeping so that validation
//! code can use it while the estimation path never sees it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::mat::{spectral_norm_est, vec_norm, Mat};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}

/// Probabilities must sum to one within this slack.
const PROB_SUM_TOL: f64 = 1e-12;
/// Starting points must be unit vectors within this slack.
const UNIT_TOL: f64 = 1e-9;

/// A discrete-time switched linear system `x_{k+1} = A_{σ(k)} x_k` with
/// i.i.d. mode draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedSystem<T> {
    modes: Vec<Mat<T>>,
    probs: Vec<T>,
}

impl<T: Scalar> SwitchedSystem<T> {
    pub fn new(modes: Vec<Mat<T>>, probs: Vec<T>) -> Result<Self, ModelError> {
        if modes.is_empty() {
            return Err(ModelError::InvalidSystem("at least one mode is required".into()));
        }
        let n = modes[0].rows();
        if n == 0 {
            return Err(ModelError::InvalidSystem("modes must be nonempty matrices".into()));
        }
        for (k, a) in modes.iter().enumerate() {
            if !a.is_square() || a.rows() != n {
                return Err(ModelError::InvalidSystem(format!(
                    "mode {k} is {}x{}, expected {n}x{n}",
                    a.rows(),
                    a.cols()
                )));
            }
            if !a.is_finite() {
                return Err(ModelError::InvalidSystem(format!("mode {k} has non-finite entries")));
            }
        }
        if probs.len() != modes.len() {
            return Err(ModelError::InvalidSystem(format!(
                "{} probabilities for {} modes",
                probs.len(),
                modes.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p <= T::zero()) {
            return Err(ModelError::InvalidSystem(
                "every switching probability must be positive".into(),
            ));
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::from(PROB_SUM_TOL).unwrap() {
            return Err(ModelError::InvalidSystem(format!(
                "switching probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self { modes, probs })
    }

    /// Uniform switching over the given modes.
    pub fn uniform(modes: Vec<Mat<T>>) -> Result<Self, ModelError> {
        let m = modes.len();
        if m == 0 {
            return Err(ModelError::InvalidSystem("at least one mode is required".into()));
        }
        let p = T::one() / T::from(m).unwrap();
        Self::new(modes, vec![p; m])
    }

    pub fn dim(&self) -> usize {
        self.modes[0].rows()
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mat<T>] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> &Mat<T> {
        &self.modes[k]
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn min_prob(&self) -> T {
        self.probs.iter().copied().fold(T::infinity(), T::min)
    }

    /// Same modes with every entry multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            modes: self.modes.iter().map(|a| a.scaled(s)).collect(),
            probs: self.probs.clone(),
        }
    }
}

/// One observed trajectory: a unit starting point and the states after each
/// of the `len()` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    x0: Vec<T>,
    states: Vec<Vec<T>>,
    hidden_modes: Option<Vec<usize>>,
}

impl<T: Scalar> Trace<T> {
    pub fn new(
        x0: Vec<T>,
        states: Vec<Vec<T>>,
        hidden_modes: Option<Vec<usize>>,
    ) -> Result<Self, ModelError> {
        let n = x0.len();
        if n == 0 {
            return Err(ModelError::InvalidTrace("empty starting point".into()));
        }
        if x0.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::InvalidTrace("non-finite starting point".into()));
        }
        let norm = vec_norm(&x0);
        if (norm - T::one()).abs() > T::from(UNIT_TOL).unwrap() {
            return Err(ModelError::InvalidTrace(format!(
                "starting point has norm {norm}, expected a unit vector"
            )));
        }
        if states.is_empty() {
            return Err(ModelError::InvalidTrace("a trace needs at least one step".into()));
        }
        for (k, s) in states.iter().enumerate() {
            if s.len() != n {
                return Err(ModelError::InvalidTrace(format!(
                    "state {} has dimension {}, expected {n}",
                    k + 1,
                    s.len()
                )));
            }
            if s.iter().any(|x| !x.is_finite()) {
                return Err(ModelError::InvalidTrace(format!("state {} is non-finite", k + 1)));
            }
        }
        if let Some(modes) = &hidden_modes {
            if modes.len() != states.len() {
                return Err(ModelError::InvalidTrace(format!(
                    "{} switching labels for {} steps",
                    modes.len(),
                    states.len()
                )));
            }
        }
        Ok(Self { x0, states, hidden_modes })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x0(&self) -> &[T] {
        &self.x0
    }

    pub fn states(&self) -> &[Vec<T>] {
        &self.states
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().unwrap()
    }

    /// Switching labels, when the generator recorded them.
    pub fn hidden_modes(&self) -> Option<&[usize]> {
        self.hidden_modes.as_deref()
    }

    /// Drops the switching labels.
    pub fn without_modes(mut self) -> Self {
        self.hidden_modes = None;
        self
    }
}

/// A batch of traces of common dimension and length, optionally carrying
/// whatever the data provider claims about the generating system.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    traces: Vec<Trace<T>>,
    /// Claimed number of modes of the generator.
    pub claimed_m: Option<usize>,
    /// Claimed lower bound on the switching probabilities.
    pub claimed_min_prob: Option<T>,
}

impl<T: Scalar> SampleSet<T> {
    pub fn new(
        traces: Vec<Trace<T>>,
        claimed_m: Option<usize>,
        claimed_min_prob: Option<T>,
    ) -> Result<Self, ModelError> {
        if traces.is_empty() {
            return Err(ModelError::InvalidSample("at least one trace is required".into()));
        }
        let n = traces[0].dim();
        let l = traces[0].len();
        for (k, t) in traces.iter().enumerate() {
            if t.dim() != n {
                return Err(ModelError::InvalidSample(format!(
                    "trace {k} has dimension {}, expected {n}",
                    t.dim()
                )));
            }
            if t.len() != l {
                return Err(ModelError::InvalidSample(format!(
                    "trace {k} has {} steps, expected {l}",
                    t.len()
                )));
            }
        }
        if let Some(m) = claimed_m {
            if m == 0 {
                return Err(ModelError::InvalidSample("claimed mode count must be positive".into()));
            }
        }
        if let Some(p) = claimed_min_prob {
            if !p.is_finite() || p <= T::zero() || p > T::one() {
                return Err(ModelError::InvalidSample(
                    "claimed probability bound must lie in (0, 1]".into(),
                ));
            }
        }
        Ok(Self { traces, claimed_m, claimed_min_prob })
    }

    /// Number of traces.
    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// State dimension.
    pub fn dim(&self) -> usize {
        self.traces[0].dim()
    }

    /// Common number of steps per trace.
    pub fn trace_len(&self) -> usize {
        self.traces[0].len()
    }

    pub fn traces(&self) -> &[Trace<T>] {
        &self.traces
    }

    /// Drops all switching labels; estimation must work without them.
    pub fn strip_hidden(self) -> Self {
        Self {
            traces: self.traces.into_iter().map(Trace::without_modes).collect(),
            claimed_m: self.claimed_m,
            claimed_min_prob: self.claimed_min_prob,
        }
    }
}

/// Deterministic generator for a top-level seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for a derived stream under one seed; streams do not
/// overlap, so parallel work can draw without coordination.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from the unit sphere: normalized standard Gaussians.
pub fn sample_unit_sphere<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> Vec<T> {
    assert!(n > 0, "dimension must be positive");
    loop {
        let v: Vec<T> = (0..n)
            .map(|_| T::from(rng.sample::<f64, _>(StandardNormal)).unwrap())
            .collect();
        let norm = vec_norm(&v);
        if norm > T::from(1e-6).unwrap() {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn draw_mode<T: Scalar, R: Rng>(sys: &SwitchedSystem<T>, rng: &mut R) -> usize {
    let u = T::from(rng.random::<f64>()).unwrap();
    let mut cum = T::zero();
    for (k, &p) in sys.probs().iter().enumerate() {
        cum += p;
        if u < cum {
            return k;
        }
    }
    sys.num_modes() - 1
}

/// Runs the system for `len` steps from `x0` (normalized first), recording
/// every visited state and the mode drawn at each step.
pub fn simulate_trace<T: Scalar, R: Rng>(
    sys: &SwitchedSystem<T>,
    x0: &[T],
    len: usize,
    rng: &mut R,
) -> Result<Trace<T>, ModelError> {
    if len == 0 {
        return Err(ModelError::InvalidTrace("a trace needs at least one step".into()));
    }
    if x0.len() != sys.dim() {
        return Err(ModelError::InvalidTrace(format!(
            "starting point has dimension {}, expected {}",
            x0.len(),
            sys.dim()
        )));
    }
    let norm = vec_norm(x0);
    if !norm.is_finite() || norm <= T::zero() {
        return Err(ModelError::InvalidTrace("starting point must be nonzero and finite".into()));
    }
    let start: Vec<T> = x0.iter().map(|&x| x / norm).collect();
    let mut x = start.clone();
    let mut states = Vec::with_capacity(len);
    let mut modes = Vec::with_capacity(len);
    for _ in 0..len {
        let k = draw_mode(sys, rng);
        x = sys.mode(k).matvec(&x);
        states.push(x.clone());
        modes.push(k);
    }
    Trace::new(start, states, Some(modes))
}

/// One trace from a uniformly random unit starting point.
pub fn generate_trace<T: Scalar, R: Rng>(
    sys: &SwitchedSystem<T>,
    len: usize,
    rng: &mut R,
) -> Result<Trace<T>, ModelError> {
    let x0 = sample_unit_sphere(rng, sys.dim());
    simulate_trace(sys, &x0, len, rng)
}

/// A batch of independent traces; the claims are filled in from the true
/// generator.
pub fn generate_sample<T: Scalar, R: Rng>(
    sys: &SwitchedSystem<T>,
    n_traces: usize,
    len: usize,
    rng: &mut R,
) -> Result<SampleSet<T>, ModelError> {
    if n_traces == 0 {
        return Err(ModelError::InvalidSample("at least one trace is required".into()));
    }
    let traces = (0..n_traces)
        .map(|_| generate_trace(sys, len, rng))
        .collect::<Result<Vec<_>, _>>()?;
    SampleSet::new(traces, Some(sys.num_modes()), Some(sys.min_prob()))
}

/// Greedy growth-rate estimate from short products: the smallest over
/// product lengths `1..=depth` of the largest normalized product norm.
fn short_product_bound<T: Scalar>(modes: &[Mat<T>], depth: usize) -> T {
    let mut level: Vec<Mat<T>> = modes.to_vec();
    let mut best = T::infinity();
    for k in 1..=depth {
        let worst = level
            .iter()
            .map(spectral_norm_est)
            .fold(T::zero(), T::max);
        best = best.min(worst.powf(T::one() / T::from(k).unwrap()));
        if k < depth {
            level = level
                .iter()
                .flat_map(|p| modes.iter().map(move |a| a.matmul(p)))
                .collect();
        }
    }
    best
}

/// Random system with standard Gaussian mode entries, rescaled so that a
/// short-product growth estimate lands uniformly in `[0.6, 1.4]`; both
/// stable and unstable draws occur.
pub fn random_system<T: Scalar, R: Rng>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<SwitchedSystem<T>, ModelError> {
    if n == 0 || m == 0 {
        return Err(ModelError::InvalidSystem("dimension and mode count must be positive".into()));
    }
    // Keep the product enumeration small for larger mode counts.
    let mut depth = 1usize;
    while depth < 4 && m.saturating_pow(depth as u32 + 1) <= 256 {
        depth += 1;
    }
    for _ in 0..100 {
        let modes: Vec<Mat<T>> = (0..m)
            .map(|_| {
                Mat::from_fn(n, n, |_, _| {
                    T::from(rng.sample::<f64, _>(StandardNormal)).unwrap()
                })
            })
            .collect();
        let bound = short_product_bound(&modes, depth);
        if !(bound > T::from(1e-8).unwrap()) || !bound.is_finite() {
            continue;
        }
        let target = T::from(rng.random_range(0.6..1.4)).unwrap();
        // Product norms are degree-one homogeneous, so this is exact.
        let scale = target / bound;
        let sys = SwitchedSystem::uniform(modes.into_iter().map(|a| a.scaled(scale)).collect())?;
        return Ok(sys);
    }
    Err(ModelError::InvalidSystem("random draws kept degenerating".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(entries: &[f64]) -> Mat<f64> {
        let n = entries.len();
        Mat::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    #[test]
    fn system_validation() {
        assert!(SwitchedSystem::<f64>::new(vec![], vec![]).is_err());
        let a = diag(&[1.0, 2.0]);
        assert!(SwitchedSystem::new(vec![a.clone()], vec![0.5]).is_err());
        assert!(SwitchedSystem::new(vec![a.clone(), a.clone()], vec![0.5, 0.5]).is_ok());
        assert!(SwitchedSystem::new(vec![a.clone(), a.clone()], vec![1.0, -0.0]).is_err());
        let b = diag(&[1.0]);
        assert!(SwitchedSystem::new(vec![a, b], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn single_mode_doubling_trace_is_exact() {
        let sys = SwitchedSystem::uniform(vec![diag(&[2.0, 1.0])]).unwrap();
        let mut rng = rng_from_seed(0);
        let tr = simulate_trace(&sys, &[1.0, 0.0], 3, &mut rng).unwrap();
        assert_eq!(tr.states(), &[vec![2.0, 0.0], vec![4.0, 0.0], vec![8.0, 0.0]]);
        assert_eq!(tr.final_state(), &[8.0, 0.0]);
        assert_eq!(tr.hidden_modes(), Some(&[0usize, 0, 0][..]));
    }

    #[test]
    fn starting_points_are_normalized() {
        let sys = SwitchedSystem::uniform(vec![diag(&[1.0, 1.0])]).unwrap();
        let mut rng = rng_from_seed(0);
        let tr = simulate_trace(&sys, &[3.0, 4.0], 1, &mut rng).unwrap();
        assert!((tr.x0()[0] - 0.6).abs() < 1e-15);
        assert!((tr.x0()[1] - 0.8).abs() < 1e-15);
        assert!(simulate_trace(&sys, &[0.0, 0.0], 1, &mut rng).is_err());
    }

    #[test]
    fn generation_is_deterministic_per_stream() {
        let sys = random_system::<f64, _>(3, 2, &mut rng_from_seed(9)).unwrap();
        let s1 = generate_sample(&sys, 20, 4, &mut rng_stream(7, 3)).unwrap();
        let s2 = generate_sample(&sys, 20, 4, &mut rng_stream(7, 3)).unwrap();
        assert_eq!(s1, s2);
        let s3 = generate_sample(&sys, 20, 4, &mut rng_stream(7, 4)).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn mode_frequencies_match_probabilities() {
        let one = Mat::identity(1);
        let sys = SwitchedSystem::new(vec![one.clone(), one], vec![0.3, 0.7]).unwrap();
        let mut rng = rng_from_seed(13);
        let tr = simulate_trace(&sys, &[1.0], 10_000, &mut rng).unwrap();
        let count0 = tr.hidden_modes().unwrap().iter().filter(|&&k| k == 0).count();
        let freq = count0 as f64 / 10_000.0;
        // Three standard deviations of a Bernoulli(0.3) mean.
        assert!((freq - 0.3).abs() < 0.014, "freq = {freq}");
    }

    #[test]
    fn sphere_samples_are_unit_and_balanced() {
        let mut rng = rng_from_seed(21);
        let n = 3;
        let count = 2000;
        let mut mean = vec![0.0f64; n];
        let mut positive_first = 0usize;
        for _ in 0..count {
            let x = sample_unit_sphere::<f64, _>(&mut rng, n);
            let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for (m, v) in mean.iter_mut().zip(&x) {
                *m += v / count as f64;
            }
            if x[0] > 0.0 {
                positive_first += 1;
            }
        }
        for m in mean {
            assert!(m.abs() < 0.04, "coordinate mean {m}");
        }
        let frac = positive_first as f64 / count as f64;
        assert!((frac - 0.5).abs() < 0.04, "hemisphere fraction {frac}");
    }

    #[test]
    fn strip_hidden_is_idempotent_and_removes_labels() {
        let sys = random_system::<f64, _>(2, 2, &mut rng_from_seed(2)).unwrap();
        let sample = generate_sample(&sys, 5, 3, &mut rng_from_seed(3)).unwrap();
        assert!(sample.traces().iter().all(|t| t.hidden_modes().is_some()));
        let stripped = sample.clone().strip_hidden();
        assert!(stripped.traces().iter().all(|t| t.hidden_modes().is_none()));
        assert_eq!(stripped.clone().strip_hidden(), stripped);
        assert_eq!(stripped.claimed_m, Some(2));
    }

    #[test]
    fn random_systems_land_in_the_target_band() {
        for seed in 0..10 {
            let sys = random_system::<f64, _>(2, 2, &mut rng_from_seed(seed)).unwrap();
            assert_eq!(sys.dim(), 2);
            assert_eq!(sys.num_modes(), 2);
            let bound = short_product_bound(sys.modes(), 4);
            assert!(
                (0.59..=1.41).contains(&bound),
                "seed {seed}: short product bound {bound}"
            );
            assert!((sys.min_prob() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn trace_validation_rejects_bad_shapes() {
        assert!(Trace::new(vec![2.0], vec![vec![1.0]], None).is_err());
        assert!(Trace::<f64>::new(vec![1.0], vec![], None).is_err());
        assert!(Trace::new(vec![1.0, 0.0], vec![vec![1.0]], None).is_err());
        assert!(Trace::new(vec![1.0], vec![vec![1.0]], Some(vec![0, 1])).is_err());
        let t = Trace::new(vec![1.0], vec![vec![0.5]], Some(vec![0])).unwrap();
        assert_eq!(t.len(), 1);
        assert!(SampleSet::<f64>::new(vec![], None, None)
            .unwrap_err()
            .to_string()
            .contains("trace"));
        let t2 = Trace::new(vec![1.0], vec![vec![0.5], vec![0.25]], None).unwrap();
        assert!(SampleSet::new(vec![t.clone(), t2], None, None).is_err());
        assert!(SampleSet::new(vec![t], None, Some(0.0)).is_err());
    }
}
