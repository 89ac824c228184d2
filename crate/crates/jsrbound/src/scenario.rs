//! Growth-rate bounds computed from observed trajectories alone.
//!
//! Given a batch of sampled transitions, a bisection finds the smallest
//! contraction level admitted by some quadratic shape, and a second program
//! picks the roundest such shape. Scenario optimization limits the measure
//! of sphere directions the sampled constraints can miss; spherical cap
//! geometry converts that measure into a shrinkage factor. Together they
//! yield a deterministic lower bound and a probabilistic upper bound on the
//! worst-case growth rate of the hidden switched system.
//!
//! Infinite upper bounds are legitimate outcomes (the sample was too small
//! for the requested confidence) and are carried as an explicit
//! [`Bound::Infinite`], never as a sentinel float: `"inf"` in JSON, an empty
//! cell in CSV.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::lmi::{
    feasibility, min_lambda_max, QuadConstraint, SolveStatus, SolverOptions,
};
use crate::mat::{vec_norm, LinalgError};
use crate::scalar::Scalar;
use crate::specfun::{inv_reg_inc_beta, reg_inc_beta, BetaParams, SpecfunError};
use crate::symmat::{sym_eigen, SymMatrix};
use crate::sysmodel::{ModelError, SampleSet};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("{got} traces cannot pin down the shape; need at least {needed}")]
    SampleTooSmall { got: usize, needed: usize },
    #[error("no feasible contraction level found up to {limit}; the bracket hint may be too low")]
    BracketFailed { limit: f64 },
    #[error("shape optimization was infeasible even after relaxing the level once")]
    OptInfeasible,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Knobs for a bounds computation.
///
/// `m_claimed` and `min_mode_prob` are prior knowledge about the hidden
/// switching, not quantities estimated from data; the probability bound,
/// when given, takes precedence over the mode count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsConfig<T> {
    /// Confidence level for the upper bound, in `[0, 1)`.
    pub beta: T,
    /// Steps per trace.
    pub l: usize,
    /// Slack applied to the contraction level of the shape program.
    pub eta: T,
    /// Absolute width at which the level bisection stops.
    pub alpha: T,
    /// Optional starting upper endpoint for the bisection.
    pub bracket_hint: Option<T>,
    /// Claimed number of modes of the hidden system.
    pub m_claimed: usize,
    /// Claimed lower bound on every switching probability.
    pub min_mode_prob: Option<T>,
}

impl<T: Scalar> BoundsConfig<T> {
    /// Defaults: no level slack, bisection width `1e-3`, no hints.
    pub fn new(beta: T, l: usize, m_claimed: usize) -> Self {
        Self {
            beta,
            l,
            eta: T::zero(),
            alpha: T::from(1e-3).unwrap(),
            bracket_hint: None,
            m_claimed,
            min_mode_prob: None,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |what: &str| Err(ScenarioError::InvalidConfig(what.into()));
        if !self.beta.is_finite() || self.beta < T::zero() || self.beta >= T::one() {
            return bad("confidence must lie in [0, 1)");
        }
        if self.l == 0 {
            return bad("traces must have at least one step");
        }
        if !self.eta.is_finite() || self.eta < T::zero() {
            return bad("level slack must be nonnegative");
        }
        if !self.alpha.is_finite() || self.alpha <= T::zero() {
            return bad("bisection width must be positive");
        }
        if self.m_claimed == 0 {
            return bad("claimed mode count must be positive");
        }
        if let Some(u) = self.bracket_hint {
            if !u.is_finite() || u <= T::zero() {
                return bad("bracket hint must be positive and finite");
            }
        }
        if let Some(p) = self.min_mode_prob {
            if !p.is_finite() || p <= T::zero() || p > T::one() {
                return bad("probability bound must lie in (0, 1]");
            }
        }
        Ok(())
    }
}

/// A bound that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Bound<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            Bound::Finite(x) => Some(*x),
            Bound::Infinite => None,
        }
    }

    /// The smaller of two bounds; anything finite beats infinity.
    pub fn min_with(self, other: Self) -> Self {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.min(b)),
            (Bound::Finite(a), Bound::Infinite) => Bound::Finite(a),
            (Bound::Infinite, b) => b,
        }
    }

    fn csv_cell(&self) -> String {
        match self {
            Bound::Finite(x) => format!("{x}"),
            Bound::Infinite => String::new(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Bound<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(x) => write!(f, "{x}"),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

impl<T: Serialize> Serialize for Bound<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(x) => x.serialize(s),
            Bound::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Bound<T> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire<T> {
            Value(T),
            Tag(String),
        }
        match Wire::<T>::deserialize(de)? {
            Wire::Value(x) => Ok(Bound::Finite(x)),
            Wire::Tag(s) if s == "inf" => Ok(Bound::Infinite),
            Wire::Tag(s) => Err(serde::de::Error::custom(format!("unknown bound tag {s:?}"))),
        }
    }
}

/// Everything one bounds computation produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct BoundsReport<T> {
    /// Smallest contraction level admitted by the sample (bisection upper
    /// endpoint).
    pub gamma_star: T,
    /// The quadratic shape backing the bounds.
    #[serde(rename = "P")]
    pub p: SymMatrix<T>,
    /// Roundness penalty of `p`: distortion from its ellipsoid to the sphere.
    pub kappa: T,
    /// Scenario violation level at the requested confidence.
    pub epsilon: T,
    /// Violation measure transported to the sphere.
    pub eps_sphere: T,
    /// Shrinkage factor of the sphere hull after removing the violated part.
    pub delta: T,
    pub lower: T,
    pub upper: Bound<T>,
    /// Upper bound through the flatness route, often better when `kappa` is
    /// large.
    pub upper_alt: Bound<T>,
    pub upper_best: Bound<T>,
    #[serde(rename = "N")]
    pub num_traces: usize,
    pub n: usize,
    pub l: usize,
    pub m: usize,
    /// Shape parameters fitted by the scenario program: `n(n+1)/2`.
    pub d: usize,
    /// Some solver call exhausted its budget; the affected endpoint was
    /// treated conservatively.
    pub solver_undecided: bool,
    /// Both upper bounds are infinite.
    pub unbounded: bool,
}

impl<T: Scalar> BoundsReport<T> {
    /// Stability verdict readable off the bounds.
    pub fn verdict(&self) -> &'static str {
        if let Some(u) = self.upper_best.finite() {
            if u < T::one() {
                return "stable";
            }
        }
        if self.lower > T::one() {
            return "unstable";
        }
        "inconclusive"
    }

    pub fn status_label(&self) -> String {
        match (self.solver_undecided, self.unbounded) {
            (false, false) => "ok".into(),
            (true, false) => "undecided".into(),
            (false, true) => "unbounded".into(),
            (true, true) => "undecided+unbounded".into(),
        }
    }

    pub fn csv_header() -> &'static str {
        "N,l,gamma_star,epsilon,kappa,delta,lower,upper,upper_alt,upper_best,status"
    }

    pub fn csv_row(&self) -> String {
        [
            self.num_traces.to_string(),
            self.l.to_string(),
            format!("{}", self.gamma_star),
            format!("{}", self.epsilon),
            format!("{}", self.kappa),
            format!("{}", self.delta),
            format!("{}", self.lower),
            self.upper.csv_cell(),
            self.upper_alt.csv_cell(),
            self.upper_best.csv_cell(),
            self.status_label(),
        ]
        .join(",")
    }
}

/// A portion of the unit sphere cut off by the hyperplane `c·x = k`:
/// `{x on the sphere : c·x > k}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapSpec<T> {
    c: Vec<T>,
    k: T,
}

impl<T: Scalar> CapSpec<T> {
    pub fn new(c: Vec<T>, k: T) -> Result<Self, ScenarioError> {
        if c.is_empty() || c.iter().any(|x| !x.is_finite()) || !k.is_finite() {
            return Err(ScenarioError::InvalidConfig(
                "cap normal and offset must be finite and nonempty".into(),
            ));
        }
        if c.iter().all(|x| *x == T::zero()) {
            return Err(ScenarioError::InvalidConfig("cap normal must be nonzero".into()));
        }
        Ok(Self { c, k })
    }

    pub fn normal(&self) -> &[T] {
        &self.c
    }

    pub fn offset(&self) -> T {
        self.k
    }
}

/// Distance from the origin to the cap's cutting plane, clamped to the
/// sphere: the ball of this radius avoids the cap entirely.
pub fn cap_shrink<T: Scalar>(cap: &CapSpec<T>) -> T {
    (cap.k.abs() / vec_norm(&cap.c)).min(T::one())
}

/// Normalized surface measure of a cap at plane distance `delta_cap`, in
/// `[0, 1/2]`.
pub fn cap_measure<T: Scalar>(n: usize, delta_cap: T) -> Result<T, ScenarioError> {
    let one = T::one();
    let half = T::from(0.5).unwrap();
    if n < 2 {
        return Err(ScenarioError::InvalidConfig(
            "cap geometry needs dimension at least 2".into(),
        ));
    }
    if !delta_cap.is_finite() || delta_cap < T::zero() || delta_cap > one {
        return Err(ScenarioError::InvalidConfig(
            "plane distance must lie in [0, 1]".into(),
        ));
    }
    let a = (T::from(n).unwrap() - one) * half;
    let x = (one - delta_cap * delta_cap).max(T::zero());
    Ok(reg_inc_beta(x, BetaParams::new(a, half)?)? * half)
}

/// Violation level `ε` matching confidence `beta` after fitting `d` shape
/// parameters to `n_samples` scenarios: the root of
/// `scenario_confidence(ε, n_samples, d) = beta`.
pub fn epsilon_of_beta<T: Scalar>(
    beta: T,
    n_samples: usize,
    d: usize,
) -> Result<T, ScenarioError> {
    let one = T::one();
    if !beta.is_finite() || beta < T::zero() || beta >= one {
        return Err(ScenarioError::InvalidConfig("confidence must lie in [0, 1)".into()));
    }
    if n_samples <= d {
        return Err(ScenarioError::SampleTooSmall { got: n_samples, needed: d + 1 });
    }
    let a = T::from(n_samples - d).unwrap();
    let b = T::from(d + 1).unwrap();
    let x = inv_reg_inc_beta(one - beta, BetaParams::new(a, b)?)?;
    Ok((one - x).max(T::zero()).min(one))
}

/// Transports a violation level from sampled transitions to sphere
/// directions: a missed direction needs all `l` switching choices to miss,
/// so the measure grows by `m^l`, or by `1/p_min^l` when a lower bound on
/// the switching probabilities is known. Capped at 1.
pub fn violation_on_sphere<T: Scalar>(
    eps: T,
    m: usize,
    l: usize,
    min_mode_prob: Option<T>,
) -> Result<T, ScenarioError> {
    let one = T::one();
    if !eps.is_finite() || eps < T::zero() || eps > one {
        return Err(ScenarioError::InvalidConfig("violation level must lie in [0, 1]".into()));
    }
    if m == 0 || l == 0 {
        return Err(ScenarioError::InvalidConfig(
            "mode count and trace length must be positive".into(),
        ));
    }
    let growth = match min_mode_prob {
        Some(p) => {
            if !p.is_finite() || p <= T::zero() || p > one {
                return Err(ScenarioError::InvalidConfig(
                    "probability bound must lie in (0, 1]".into(),
                ));
            }
            (one / p).powi(l as i32)
        }
        None => T::from(m).unwrap().powi(l as i32),
    };
    Ok((eps * growth).min(one))
}

fn positive_spectrum<T: Scalar>(p: &SymMatrix<T>) -> Result<Vec<T>, ScenarioError> {
    let e = sym_eigen(p)?;
    if e.values.iter().any(|x| !x.is_finite() || *x <= T::zero()) {
        return Err(ScenarioError::Linalg(LinalgError::NotPositiveDefinite));
    }
    Ok(e.values)
}

/// Distortion from the ellipsoid of `p` to the sphere: how much a set's
/// measure can grow when pushed through the shape. Always at least 1,
/// with equality exactly for round shapes.
pub fn kappa<T: Scalar>(p: &SymMatrix<T>) -> Result<T, ScenarioError> {
    let values = positive_spectrum(p)?;
    let half = T::from(0.5).unwrap();
    let n_t = T::from(values.len()).unwrap();
    let log_det: T = values.iter().map(|x| x.ln()).sum();
    let lam_min = values[0];
    Ok((half * (log_det - n_t * lam_min.ln())).exp().max(T::one()))
}

/// Alternative bound on the violated sphere measure, through the flatness
/// of the shape instead of its distortion; clamped to `[0, 1]`.
pub fn kappa_alt_violation<T: Scalar>(
    eps_sphere: T,
    p: &SymMatrix<T>,
) -> Result<T, ScenarioError> {
    let one = T::one();
    if !eps_sphere.is_finite() || eps_sphere < T::zero() || eps_sphere > one {
        return Err(ScenarioError::InvalidConfig(
            "sphere violation measure must lie in [0, 1]".into(),
        ));
    }
    let values = positive_spectrum(p)?;
    let half = T::from(0.5).unwrap();
    let n_t = T::from(values.len()).unwrap();
    let log_det: T = values.iter().map(|x| x.ln()).sum();
    let lam_max = values[values.len() - 1];
    // Flatness in (0, 1]: det(P) / λ_max^n, square-rooted.
    let flat = (half * (log_det - n_t * lam_max.ln())).exp();
    Ok((one - (one - eps_sphere) * flat).max(T::zero()).min(one))
}

/// Radius of the largest origin-centered sphere inside the convex hull of
/// the unit sphere minus a symmetric violated set of the given half-measure.
///
/// Takes the half-measure so a symmetrized set (a set and its mirror image)
/// is not counted twice. Returns 0 once the doubled measure reaches 1 (the
/// hull may then contain no ball at all).
pub fn delta_shrink<T: Scalar>(half_measure: T, n: usize) -> Result<T, ScenarioError> {
    let one = T::one();
    let half = T::from(0.5).unwrap();
    if n < 2 {
        return Err(ScenarioError::InvalidConfig(
            "spherical shrinkage needs dimension at least 2".into(),
        ));
    }
    if half_measure.is_nan() || half_measure < T::zero() {
        return Err(ScenarioError::InvalidConfig(
            "violated half-measure must be nonnegative".into(),
        ));
    }
    let doubled = half_measure + half_measure;
    if doubled >= one {
        return Ok(T::zero());
    }
    if doubled == T::zero() {
        return Ok(one);
    }
    let a = (T::from(n).unwrap() - one) * half;
    let x = inv_reg_inc_beta(doubled, BetaParams::new(a, half)?)?;
    Ok((one - x).max(T::zero()).sqrt())
}

/// One quadratic constraint per trace: the final state must contract to the
/// level relative to the start.
fn transition_constraints<T: Scalar>(
    sample: &SampleSet<T>,
    level: T,
) -> Result<Vec<QuadConstraint<T>>, LinalgError> {
    sample
        .traces()
        .iter()
        .map(|t| QuadConstraint::new(t.final_state().to_vec(), t.x0().to_vec(), level))
        .collect()
}

/// Smallest sampled contraction level, with the shape that attains it.
#[derive(Debug, Clone)]
pub struct GammaStar<T> {
    /// Upper endpoint of the final bisection bracket; feasible by
    /// construction.
    pub value: T,
    /// Shape certifying feasibility at `value`; at least the identity.
    pub witness: SymMatrix<T>,
    /// Some probe exhausted the solver budget and was treated as
    /// infeasible, which can only push `value` up.
    pub solver_undecided: bool,
}

fn check_lengths<T: Scalar>(
    sample: &SampleSet<T>,
    cfg: &BoundsConfig<T>,
) -> Result<(), ScenarioError> {
    if sample.trace_len() != cfg.l {
        return Err(ScenarioError::InvalidSample(format!(
            "sample has {}-step traces but the configuration says {}",
            sample.trace_len(),
            cfg.l
        )));
    }
    Ok(())
}

/// Bisects for the smallest level `γ` at which some quadratic shape makes
/// every sampled transition a `γ^l`-contraction.
///
/// The starting upper endpoint is the largest observed `‖x_l‖^(1/l)`, which
/// the round shape always satisfies; a too-low `bracket_hint` is rescued by
/// doubling. The returned value is the feasible endpoint of a bracket of
/// width at most `alpha`.
pub fn gamma_star<T: Scalar>(
    sample: &SampleSet<T>,
    cfg: &BoundsConfig<T>,
) -> Result<GammaStar<T>, ScenarioError> {
    cfg.validate()?;
    check_lengths(sample, cfg)?;
    let n = sample.dim();
    let one = T::one();
    let half = T::from(0.5).unwrap();
    let opts = SolverOptions::<T>::default();
    let exponent = 2 * cfg.l as i32;

    let mut quads = transition_constraints(sample, one)?;
    let probe = |g: T, quads: &mut [QuadConstraint<T>]| {
        let level = g.powi(exponent);
        for q in quads.iter_mut() {
            q.set_level(level);
        }
        feasibility(n, quads, &[], opts.t_max, &opts)
    };

    let root = one / T::from(cfg.l).unwrap();
    let data_top = sample
        .traces()
        .iter()
        .map(|t| vec_norm(t.final_state()).powf(root))
        .fold(T::zero(), T::max);
    let mut hi = cfg.bracket_hint.unwrap_or(data_top).max(T::from(1e-12).unwrap());

    let mut undecided = false;
    let mut top = probe(hi, &mut quads)?;
    let mut tries = 0;
    while top.status != SolveStatus::Feasible {
        undecided |= top.status == SolveStatus::Undecided;
        tries += 1;
        if tries > 8 {
            return Err(ScenarioError::BracketFailed {
                limit: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        hi = hi + hi;
        top = probe(hi, &mut quads)?;
    }
    let mut witness = top.witness.expect("feasible outcome carries a witness");

    let mut lo = T::zero();
    while hi - lo > cfg.alpha {
        let mid = (hi + lo) * half;
        let r = probe(mid, &mut quads)?;
        if r.status == SolveStatus::Feasible {
            hi = mid;
            witness = r.witness.expect("feasible outcome carries a witness");
        } else {
            undecided |= r.status == SolveStatus::Undecided;
            lo = mid;
        }
    }
    Ok(GammaStar { value: hi, witness, solver_undecided: undecided })
}

/// Roundest shape admitting the level: minimizes the largest eigenvalue
/// subject to every sampled transition contracting at level
/// `(gamma·(1+eta))^l` and the shape dominating the identity.
///
/// A marginal bisection endpoint can leave the program empty at `eta = 0`;
/// one retry with the level inflated by the bisection width covers that
/// before giving up.
pub fn solve_opt<T: Scalar>(
    sample: &SampleSet<T>,
    gamma: T,
    cfg: &BoundsConfig<T>,
    warm_hint: Option<T>,
) -> Result<SymMatrix<T>, ScenarioError> {
    cfg.validate()?;
    check_lengths(sample, cfg)?;
    if !gamma.is_finite() || gamma < T::zero() {
        return Err(ScenarioError::InvalidConfig("level must be nonnegative".into()));
    }
    let one = T::one();
    let opts = SolverOptions::<T>::default();
    let base = ((one + cfg.eta) * gamma).powi(2 * cfg.l as i32);
    for level in [base, base * (one + cfg.alpha)] {
        let quads = transition_constraints(sample, level)?;
        let r = min_lambda_max(sample.dim(), &quads, &[], warm_hint, &opts)?;
        if r.status == SolveStatus::Feasible {
            return Ok(r.witness.expect("feasible outcome carries a witness"));
        }
    }
    Err(ScenarioError::OptInfeasible)
}

fn bound_from_shrinkage<T: Scalar>(level: T, delta: T, l: usize) -> Bound<T> {
    if delta > T::zero() {
        Bound::Finite(level / delta.powf(T::one() / T::from(l).unwrap()))
    } else {
        Bound::Infinite
    }
}

/// Full pipeline: level bisection, shape fit, confidence accounting, and
/// bound assembly.
///
/// The lower bound divides the certified-infeasible bracket endpoint by
/// `n^(1/(2l))` and needs no probability. The upper bounds divide the level
/// by a shrinkage factor and hold with probability `beta` over the sampling;
/// when the violated measure reaches 1 they are infinite and the report is
/// flagged unbounded. A pure function of its inputs.
pub fn analyze<T: Scalar>(
    sample: &SampleSet<T>,
    cfg: &BoundsConfig<T>,
) -> Result<BoundsReport<T>, ScenarioError> {
    cfg.validate()?;
    check_lengths(sample, cfg)?;
    let n = sample.dim();
    let num_traces = sample.len();
    if n < 2 {
        return Err(ScenarioError::InvalidSample(
            "bounds need state dimension at least 2".into(),
        ));
    }
    let d = n * (n + 1) / 2;
    if num_traces < d + 1 {
        return Err(ScenarioError::SampleTooSmall { got: num_traces, needed: d + 1 });
    }
    let one = T::one();
    let half = T::from(0.5).unwrap();

    let gs = gamma_star(sample, cfg)?;
    let warm = sym_eigen(&gs.witness).ok().map(|e| e.lambda_max());
    let (p, fell_back) = match solve_opt(sample, gs.value, cfg, warm) {
        Ok(p) => (p, false),
        // The bisection witness stays a valid, if less round, shape.
        Err(ScenarioError::OptInfeasible) => (gs.witness.clone(), true),
        Err(e) => return Err(e),
    };

    let kap = kappa(&p)?;
    let epsilon = epsilon_of_beta(cfg.beta, num_traces, d)?;
    let eps_sphere = violation_on_sphere(epsilon, cfg.m_claimed, cfg.l, cfg.min_mode_prob)?;
    let delta = delta_shrink(half * eps_sphere * kap, n)?;
    let alt_measure = kappa_alt_violation(eps_sphere, &p)?;
    let delta_alt = delta_shrink(half * alt_measure, n)?;

    let level = gs.value * (one + cfg.eta);
    let upper = bound_from_shrinkage(level, delta, cfg.l);
    let upper_alt = bound_from_shrinkage(level, delta_alt, cfg.l);
    let upper_best = upper.min_with(upper_alt);
    let dim_root = T::from(n).unwrap().powf(one / T::from(2 * cfg.l).unwrap());
    let lower = (gs.value - cfg.alpha).max(T::zero()) / dim_root;

    Ok(BoundsReport {
        gamma_star: gs.value,
        p,
        kappa: kap,
        epsilon,
        eps_sphere,
        delta,
        lower,
        upper,
        upper_alt,
        upper_best,
        num_traces,
        n,
        l: cfg.l,
        m: cfg.m_claimed,
        d,
        solver_undecided: gs.solver_undecided || fell_back,
        unbounded: !upper_best.is_finite(),
    })
}
