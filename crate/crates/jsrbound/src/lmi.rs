//! Feasibility of shape constraints on a symmetric matrix and minimization
//! of its largest eigenvalue subject to them.
//!
//! The decision variable is a symmetric matrix `P` constrained by
//!
//! * a spectral box `I ⪯ P ⪯ t·I`,
//! * quadratic pairs `uᵀPu <= c·vᵀPv`,
//! * matrix contractions `AᵀPA ⪯ c·P`.
//!
//! Every constraint is linear in the entries of `P`, so the solver runs a
//! central-cut ellipsoid method over `svec(P)`: evaluate the current center,
//! cut along the gradient of any violated constraint, and shrink. The lower
//! spectral bound `I ⪯ P` pins the scale that the homogeneous quadratic and
//! contraction constraints would otherwise leave free.
//!
//! Acceptance is relative: a quadratic pair is accepted when
//! `(uᵀPu - c·vᵀPv) / (c·vᵀPv)` is at most `tol_feas`, and a contraction when
//! `λ_max(AᵀPA - c·P) / (c·λ_min(P))` is. Normalizing by the right-hand side
//! keeps the tolerance meaningful across the many orders of magnitude the
//! propagated states span, and means a returned witness certifies every
//! constraint at level `c·(1 + tol_feas)`.
//!
//! `Infeasible` certifies that the points satisfying all constraints with the
//! above slack contain no ball of radius `collapse_radius` in `svec`
//! coordinates: the ellipsoid's geometric mean semi-axis, which never drops
//! below the inner radius of the retained set, has fallen under it.

use serde::{Deserialize, Serialize};

use crate::mat::{vec_dot, LinalgError, Mat};
use crate::scalar::Scalar;
use crate::symmat::{sym_eigen, SymMatrix};

/// Constraint `uᵀ P u <= c · vᵀ P v`.
#[derive(Debug, Clone)]
pub struct QuadConstraint<T> {
    u: Vec<T>,
    v: Vec<T>,
    c: T,
}

impl<T: Scalar> QuadConstraint<T> {
    pub fn new(u: Vec<T>, v: Vec<T>, c: T) -> Result<Self, LinalgError> {
        if u.is_empty() || u.len() != v.len() {
            return Err(LinalgError::Dimension(format!(
                "constraint vectors must be nonempty and of equal length, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        if !c.is_finite() || c < T::zero() || u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { u, v, c })
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// Contraction level `c`.
    pub fn level(&self) -> T {
        self.c
    }

    /// Replaces the level; bisections retune it in place.
    pub fn set_level(&mut self, c: T) {
        debug_assert!(c.is_finite() && c >= T::zero());
        self.c = c;
    }

    /// Violation relative to the right-hand side; at most zero when satisfied.
    pub fn violation(&self, p: &SymMatrix<T>) -> T {
        let lhs = p.quad_form(&self.u);
        let rhs = self.c * p.quad_form(&self.v);
        (lhs - rhs) / rhs.max(T::min_positive_value())
    }

    /// Constraint gradient `u uᵀ - c·v vᵀ` in matrix form.
    fn gradient(&self) -> SymMatrix<T> {
        pair_gradient(&self.u, &self.v, self.c)
    }
}

/// Constraint `Aᵀ P A ⪯ c · P`.
#[derive(Debug, Clone)]
pub struct LmiConstraint<T> {
    a: Mat<T>,
    c: T,
}

impl<T: Scalar> LmiConstraint<T> {
    pub fn new(a: Mat<T>, c: T) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        if a.rows() == 0 {
            return Err(LinalgError::Dimension("constraint matrix must be nonempty".into()));
        }
        if !c.is_finite() || c < T::zero() || !a.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { a, c })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn level(&self) -> T {
        self.c
    }

    pub fn set_level(&mut self, c: T) {
        debug_assert!(c.is_finite() && c >= T::zero());
        self.c = c;
    }

    /// Slack matrix `AᵀPA - c·P`.
    fn slack(&self, p: &SymMatrix<T>) -> SymMatrix<T> {
        p.congruence(&self.a).add_scaled(p, -self.c)
    }

    /// Relative violation together with the most violated direction.
    ///
    /// `lambda_min_p` is the smallest eigenvalue of `P`, which callers have
    /// already computed; it anchors the denominator `c·λ_min(P)`.
    pub fn violation(
        &self,
        p: &SymMatrix<T>,
        lambda_min_p: T,
    ) -> Result<(T, Vec<T>), LinalgError> {
        let e = sym_eigen(&self.slack(p))?;
        let denom = (self.c * lambda_min_p).max(T::min_positive_value());
        Ok((e.lambda_max() / denom, e.vector(self.dim() - 1)))
    }

    /// Gradient of the scalarized cut `wᵀ(AᵀPA - c·P)w <= 0`.
    fn gradient(&self, w: &[T]) -> SymMatrix<T> {
        let aw = self.a.matvec(w);
        pair_gradient(&aw, w, self.c)
    }
}

/// `u uᵀ - c·v vᵀ`.
fn pair_gradient<T: Scalar>(u: &[T], v: &[T], c: T) -> SymMatrix<T> {
    let n = u.len();
    let mut g = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            g.set(i, j, u[i] * u[j] - c * v[i] * v[j]);
        }
    }
    g
}

/// Outcome classification for a single solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// A witness satisfying every constraint within tolerance was found.
    Feasible,
    /// The tolerance-relaxed constraint set contains no ball of radius
    /// `collapse_radius`.
    Infeasible,
    /// Iteration cap or numerical breakdown before either certificate.
    Undecided,
}

/// Result of a feasibility or minimization call.
#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    pub status: SolveStatus,
    /// Feasible point, when one was found.
    pub witness: Option<SymMatrix<T>>,
    /// Minimized largest eigenvalue, for the minimization entry point.
    pub objective: Option<T>,
    /// Total ellipsoid iterations spent.
    pub iterations: usize,
    /// Bisection steps that had to treat an undecided solve as infeasible.
    pub undecided_steps: usize,
}

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    /// Relative acceptance slack for quadratic and contraction constraints.
    pub tol_feas: T,
    /// Relative acceptance slack for the spectral box checks.
    pub tol_psd: T,
    /// Relative gap at which the eigenvalue minimization stops.
    pub tol_obj: T,
    /// Largest spectral box ever considered.
    pub t_max: T,
    /// Mean-radius threshold certifying infeasibility.
    pub collapse_radius: T,
    /// Iteration cap as a multiple of `dim(svec)²`.
    pub max_iter_factor: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        let c = |x: f64| T::from(x).unwrap();
        Self {
            tol_feas: c(1e-7),
            tol_psd: c(1e-8),
            tol_obj: c(1e-4),
            t_max: c(1e6),
            collapse_radius: c(1e-9),
            max_iter_factor: 200,
        }
    }
}

fn validate_inputs<T: Scalar>(
    n: usize,
    quads: &[QuadConstraint<T>],
    lmis: &[LmiConstraint<T>],
    upper_box: T,
) -> Result<(), LinalgError> {
    if n == 0 {
        return Err(LinalgError::Dimension("matrix order must be at least 1".into()));
    }
    if let Some(q) = quads.iter().find(|q| q.dim() != n) {
        return Err(LinalgError::Dimension(format!(
            "quadratic constraint has dimension {}, expected {n}",
            q.dim()
        )));
    }
    if let Some(l) = lmis.iter().find(|l| l.dim() != n) {
        return Err(LinalgError::Dimension(format!(
            "contraction constraint has dimension {}, expected {n}",
            l.dim()
        )));
    }
    if !upper_box.is_finite() || upper_box <= T::zero() {
        return Err(LinalgError::Dimension("spectral box bound must be finite and positive".into()));
    }
    Ok(())
}

/// Checks a concrete point against the full constraint set.
fn test_point<T: Scalar>(
    p: SymMatrix<T>,
    quads: &[QuadConstraint<T>],
    lmis: &[LmiConstraint<T>],
    upper_box: T,
    opts: &SolverOptions<T>,
) -> Result<SolveOutcome<T>, LinalgError> {
    let one = T::one();
    let mut ok = quads.iter().all(|q| q.violation(&p) <= opts.tol_feas);
    let mut lambda_min_p = one;
    if ok {
        let e = sym_eigen(&p)?;
        lambda_min_p = e.lambda_min();
        ok = lambda_min_p >= one - opts.tol_psd
            && e.lambda_max() <= upper_box * (one + opts.tol_psd);
    }
    if ok {
        for lc in lmis {
            if lc.violation(&p, lambda_min_p)?.0 > opts.tol_feas {
                ok = false;
                break;
            }
        }
    }
    Ok(SolveOutcome {
        status: if ok { SolveStatus::Feasible } else { SolveStatus::Infeasible },
        witness: if ok { Some(p) } else { None },
        objective: None,
        iterations: 0,
        undecided_steps: 0,
    })
}

/// Scalar case: `p > 0` cancels from every constraint, so feasibility does
/// not depend on `p` and the witness is simply `1`.
fn solve_1d<T: Scalar>(
    quads: &[QuadConstraint<T>],
    lmis: &[LmiConstraint<T>],
    upper_box: T,
    opts: &SolverOptions<T>,
) -> SolveOutcome<T> {
    let one = T::one();
    let floor = T::min_positive_value();
    let box_ok = upper_box * (one + opts.tol_psd) >= one - opts.tol_psd;
    let quads_ok = quads.iter().all(|q| {
        let lhs = q.u[0] * q.u[0];
        let rhs = q.c * q.v[0] * q.v[0];
        (lhs - rhs) / rhs.max(floor) <= opts.tol_feas
    });
    let lmis_ok = lmis.iter().all(|l| {
        let a2 = l.a.get(0, 0) * l.a.get(0, 0);
        (a2 - l.c) / l.c.max(floor) <= opts.tol_feas
    });
    let ok = box_ok && quads_ok && lmis_ok;
    SolveOutcome {
        status: if ok { SolveStatus::Feasible } else { SolveStatus::Infeasible },
        witness: if ok { Some(SymMatrix::identity(1)) } else { None },
        objective: None,
        iterations: 0,
        undecided_steps: 0,
    }
}

/// Ellipsoid `{x : (x - center)ᵀ H⁻¹ (x - center) <= 1}`.
struct Ellipsoid<T> {
    center: Vec<T>,
    h: Mat<T>,
    logdet: T,
}

impl<T: Scalar> Ellipsoid<T> {
    fn ball(center: Vec<T>, radius: T) -> Self {
        let d = center.len();
        let r2 = radius * radius;
        let mut h = Mat::zeros(d, d);
        for i in 0..d {
            h.set(i, i, r2);
        }
        Ellipsoid { center, h, logdet: T::from(d).unwrap() * r2.ln() }
    }

    /// Geometric mean of the semi-axes; an upper bound on the inner radius
    /// of any set the ellipsoid contains.
    fn mean_radius(&self) -> T {
        let d = T::from(self.center.len()).unwrap();
        (self.logdet / (d + d)).exp()
    }

    /// Support half-width along `g`: the maximum of `g·(x - center)` over
    /// the ellipsoid.
    fn width_along(&self, g: &[T]) -> T {
        let hg = self.h.matvec(g);
        vec_dot(g, &hg).max(T::zero()).sqrt()
    }

    /// Central cut retaining `{x : g·(x - center) <= 0}`; `false` on
    /// numerical breakdown.
    fn cut(&mut self, g: &[T]) -> bool {
        let d = self.center.len();
        let one = T::one();
        let two = T::from(2.0).unwrap();
        let df = T::from(d).unwrap();

        let hg = self.h.matvec(g);
        let ghg = vec_dot(g, &hg);
        if !ghg.is_finite() || ghg <= T::zero() {
            return false;
        }
        let step = one / ((df + one) * ghg.sqrt());
        for i in 0..d {
            self.center[i] -= hg[i] * step;
        }
        let scale = df * df / (df * df - one);
        let k = two / ((df + one) * ghg);
        for i in 0..d {
            for j in i..d {
                let v = scale * (self.h.get(i, j) - k * hg[i] * hg[j]);
                self.h.set(i, j, v);
                self.h.set(j, i, v);
            }
        }
        self.logdet += df * scale.ln() + ((df - one) / (df + one)).ln();
        self.center.iter().all(|x| x.is_finite()) && self.logdet.is_finite()
    }
}

/// Decides whether some `P` with `I ⪯ P ⪯ upper_box·I` satisfies every
/// constraint, returning a witness when one exists.
pub fn feasibility<T: Scalar>(
    n: usize,
    quads: &[QuadConstraint<T>],
    lmis: &[LmiConstraint<T>],
    upper_box: T,
    opts: &SolverOptions<T>,
) -> Result<SolveOutcome<T>, LinalgError> {
    validate_inputs(n, quads, lmis, upper_box)?;
    let one = T::one();
    let half = T::from(0.5).unwrap();

    // A box this thin pins P to the identity up to tolerance; decide there.
    if upper_box <= one + T::from(1e-6).unwrap() {
        return if n == 1 {
            Ok(solve_1d(quads, lmis, upper_box, opts))
        } else {
            test_point(SymMatrix::identity(n), quads, lmis, upper_box, opts)
        };
    }
    if n == 1 {
        return Ok(solve_1d(quads, lmis, upper_box, opts));
    }

    let d = n * (n + 1) / 2;
    // Every admissible P satisfies ‖P - mid·I‖_F <= √n (t-1)/2; svec is an
    // isometry for the Frobenius norm, so a ball with a little margin covers
    // the whole feasible set.
    let mid = (one + upper_box) * half;
    let radius = T::from(n).unwrap().sqrt() * (upper_box - one) * half
        * T::from(1.05).unwrap()
        + one;
    let mut ell = Ellipsoid::ball(SymMatrix::scaled_identity(n, mid).svec(), radius);

    let max_iter = opts.max_iter_factor.saturating_mul(d * d);
    let mut qstart = 0usize;
    let mut lstart = 0usize;
    for iter in 0..max_iter {
        let p = SymMatrix::from_svec(n, &ell.center);
        // A violated cut together with the center's slack past the relaxed
        // bound, in the gradient's own scale.
        let mut cut: Option<(SymMatrix<T>, T)> = None;

        // Quadratic pairs first: they are the cheapest and the most numerous.
        for k in 0..quads.len() {
            let idx = (qstart + k) % quads.len();
            let lhs = p.quad_form(&quads[idx].u);
            let rhs = quads[idx].c * p.quad_form(&quads[idx].v);
            let denom = rhs.max(T::min_positive_value());
            if (lhs - rhs) / denom > opts.tol_feas {
                cut = Some((quads[idx].gradient(), lhs - rhs - opts.tol_feas * denom));
                qstart = (idx + 1) % quads.len();
                break;
            }
        }

        // Spectral box, then matrix contractions, sharing one decomposition.
        let mut lambda_min_p = one;
        if cut.is_none() {
            let e = sym_eigen(&p)?;
            lambda_min_p = e.lambda_min();
            if lambda_min_p < one - opts.tol_psd {
                // wᵀPw >= wᵀw violated along the bottom eigenvector.
                let w = e.vector(0);
                cut = Some((
                    pair_gradient(&w, &w, T::zero()).scaled_neg(),
                    one - opts.tol_psd - lambda_min_p,
                ));
            } else if e.lambda_max() > upper_box * (one + opts.tol_psd) {
                let w = e.vector(n - 1);
                cut = Some((
                    pair_gradient(&w, &w, T::zero()),
                    e.lambda_max() - upper_box * (one + opts.tol_psd),
                ));
            }
        }
        if cut.is_none() {
            for k in 0..lmis.len() {
                let idx = (lstart + k) % lmis.len();
                let (viol, w) = lmis[idx].violation(&p, lambda_min_p)?;
                if viol > opts.tol_feas {
                    let denom = (lmis[idx].c * lambda_min_p).max(T::min_positive_value());
                    cut = Some((lmis[idx].gradient(&w), (viol - opts.tol_feas) * denom));
                    lstart = (idx + 1) % lmis.len();
                    break;
                }
            }
        }

        let Some((gm, surplus)) = cut else {
            return Ok(SolveOutcome {
                status: SolveStatus::Feasible,
                witness: Some(p),
                objective: None,
                iterations: iter,
                undecided_steps: 0,
            });
        };
        let g = gm.svec();
        // Every point satisfying the violated constraint lies at least
        // `surplus` below the center along the gradient; if the ellipsoid is
        // thinner than that, it contains no admissible point at all, and it
        // has contained the whole admissible set since the start.
        if surplus > ell.width_along(&g) {
            return Ok(SolveOutcome {
                status: SolveStatus::Infeasible,
                witness: None,
                objective: None,
                iterations: iter + 1,
                undecided_steps: 0,
            });
        }
        if !ell.cut(&g) {
            return Ok(SolveOutcome {
                status: SolveStatus::Undecided,
                witness: None,
                objective: None,
                iterations: iter + 1,
                undecided_steps: 0,
            });
        }
        if ell.mean_radius() < opts.collapse_radius {
            return Ok(SolveOutcome {
                status: SolveStatus::Infeasible,
                witness: None,
                objective: None,
                iterations: iter + 1,
                undecided_steps: 0,
            });
        }
    }
    Ok(SolveOutcome {
        status: SolveStatus::Undecided,
        witness: None,
        objective: None,
        iterations: max_iter,
        undecided_steps: 0,
    })
}

/// Minimizes `λ_max(P)` over the feasible set by bisecting the spectral box.
///
/// `warm_hint` is a box size believed feasible (typically the largest
/// eigenvalue of a witness from an earlier solve); it shortcuts the upward
/// search. Undecided probes are treated as infeasible, which only enlarges
/// the reported objective, and are counted in `undecided_steps`.
pub fn min_lambda_max<T: Scalar>(
    n: usize,
    quads: &[QuadConstraint<T>],
    lmis: &[LmiConstraint<T>],
    warm_hint: Option<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveOutcome<T>, LinalgError> {
    validate_inputs(n, quads, lmis, opts.t_max)?;
    let one = T::one();
    let two = T::from(2.0).unwrap();
    let sixteen = T::from(16.0).unwrap();

    let mut iterations = 0usize;
    let mut undecided_steps = 0usize;

    // The identity is the smallest admissible shape; nothing can beat it.
    let base = feasibility(n, quads, lmis, one, opts)?;
    iterations += base.iterations;
    if base.status == SolveStatus::Feasible {
        return Ok(SolveOutcome {
            status: SolveStatus::Feasible,
            witness: base.witness,
            objective: Some(one),
            iterations,
            undecided_steps,
        });
    }

    // Escalate the box until some witness appears (or the cap rules it out).
    let mut lo = one;
    let mut hi = warm_hint
        .filter(|w| w.is_finite())
        .map(|w| w.max(two).min(opts.t_max))
        .unwrap_or(opts.t_max);
    let mut witness;
    loop {
        let r = feasibility(n, quads, lmis, hi, opts)?;
        iterations += r.iterations;
        match r.status {
            SolveStatus::Feasible => {
                witness = r.witness.unwrap();
                break;
            }
            status => {
                if status == SolveStatus::Undecided {
                    undecided_steps += 1;
                }
                if hi >= opts.t_max {
                    return Ok(SolveOutcome {
                        status,
                        witness: None,
                        objective: None,
                        iterations,
                        undecided_steps,
                    });
                }
                lo = hi;
                hi = (hi * sixteen).min(opts.t_max);
            }
        }
    }

    // The witness's own top eigenvalue is a feasible box size; pull down.
    let wmax = sym_eigen(&witness)?.lambda_max().max(one);
    if wmax < hi {
        hi = wmax;
    }

    while hi > lo * (one + opts.tol_obj) {
        let mid = (lo * hi).sqrt();
        let r = feasibility(n, quads, lmis, mid, opts)?;
        iterations += r.iterations;
        if r.status == SolveStatus::Feasible {
            let w = r.witness.unwrap();
            let wmax = sym_eigen(&w)?.lambda_max().max(one);
            witness = w;
            let pulled = wmax.min(mid);
            if pulled <= lo {
                hi = pulled;
                break;
            }
            hi = pulled;
        } else {
            if r.status == SolveStatus::Undecided {
                undecided_steps += 1;
            }
            lo = mid;
        }
    }

    Ok(SolveOutcome {
        status: SolveStatus::Feasible,
        witness: Some(witness),
        objective: Some(hi),
        iterations,
        undecided_steps,
    })
}

impl<T: Scalar> SymMatrix<T> {
    /// `-self`, used for the lower spectral bound cut.
    fn scaled_neg(&self) -> SymMatrix<T> {
        let n = self.dim();
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, -self.get(i, j));
            }
        }
        out
    }
}
