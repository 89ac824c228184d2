//! Reference growth-rate brackets computed from the mode matrices
//! themselves.
//!
//! These routines see the true system, so they are the measuring stick for
//! validating the trajectory-only estimators: enumerate all mode products up
//! to a depth, take the best spectral-radius root as a lower bound and the
//! best norm root as an upper bound, and optionally tighten the upper bound
//! with a common quadratic contraction certificate solved over products of a
//! fixed length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lmi::{feasibility, LmiConstraint, SolveStatus, SolverOptions};
use crate::mat::{spectral_radius, LinalgError, Mat};
use crate::scalar::Scalar;
use crate::symmat::{sym_eigen, SymMatrix};

/// Cap on the number of products enumerated in one call.
pub const PRODUCT_BUDGET: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum WhiteboxError {
    #[error(
        "enumerating {products} products ({m} modes, depth {depth}) exceeds the budget of {cap}"
    )]
    Budget { m: usize, depth: usize, products: u128, cap: u128 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How one end of a bracket was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMethod {
    /// Spectral radius of some enumerated product, taken to its root.
    ProductSpectralRadius,
    /// Largest spectral norm over products of one length, taken to its root.
    ProductNorm,
    /// Contraction level certified by a common quadratic shape.
    QuadraticCertificate,
}

/// Two-sided bracket on the worst-case exponential growth rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsrBracket<T> {
    pub lower: T,
    pub upper: T,
    /// Largest product length that entered the bracket.
    pub depth: usize,
    pub lower_method: BracketMethod,
    pub upper_method: BracketMethod,
}

impl<T: Scalar> JsrBracket<T> {
    fn new(
        lower: T,
        upper: T,
        depth: usize,
        lower_method: BracketMethod,
        upper_method: BracketMethod,
    ) -> Self {
        debug_assert!(lower <= upper * (T::one() + T::from(1e-6).unwrap()));
        // Rounding can nudge the two roots past each other when they agree.
        Self { lower: lower.min(upper), upper, depth, lower_method, upper_method }
    }

    /// Width of the bracket relative to its lower end.
    pub fn relative_gap(&self) -> T {
        (self.upper - self.lower) / self.lower.max(T::min_positive_value())
    }
}

fn validate_modes<T: Scalar>(modes: &[Mat<T>]) -> Result<usize, WhiteboxError> {
    if modes.is_empty() {
        return Err(WhiteboxError::Invalid("at least one mode is required".into()));
    }
    let n = modes[0].rows();
    if n == 0 {
        return Err(WhiteboxError::Invalid("modes must be nonempty matrices".into()));
    }
    for (k, a) in modes.iter().enumerate() {
        if !a.is_square() || a.rows() != n {
            return Err(WhiteboxError::Invalid(format!(
                "mode {k} is {}x{}, expected {n}x{n}",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_finite() {
            return Err(WhiteboxError::Invalid(format!("mode {k} has non-finite entries")));
        }
    }
    Ok(n)
}

fn check_budget(m: usize, depth: usize) -> Result<(), WhiteboxError> {
    let mut level: u128 = 1;
    let mut total: u128 = 0;
    for _ in 0..depth {
        level = level.saturating_mul(m as u128);
        total = total.saturating_add(level);
        if total > PRODUCT_BUDGET {
            return Err(WhiteboxError::Budget {
                m,
                depth,
                products: total,
                cap: PRODUCT_BUDGET,
            });
        }
    }
    Ok(())
}

/// Spectral norm through the symmetric eigensolver; accurate to roundoff,
/// which matters because the result feeds an upper bound.
fn spectral_norm<T: Scalar>(a: &Mat<T>) -> Result<T, LinalgError> {
    let top = sym_eigen(&SymMatrix::gram(a))?.lambda_max();
    Ok(top.max(T::zero()).sqrt())
}

/// Brackets the growth rate by enumerating every mode product of length up
/// to `depth`: `max ρ(Π)^(1/k)` from below, `min_k max_Π ‖Π‖^(1/k)` from
/// above.
pub fn bracket_by_products<T: Scalar>(
    modes: &[Mat<T>],
    depth: usize,
) -> Result<JsrBracket<T>, WhiteboxError> {
    validate_modes(modes)?;
    if depth == 0 {
        return Err(WhiteboxError::Invalid("depth must be at least 1".into()));
    }
    check_budget(modes.len(), depth)?;

    let one = T::one();
    let mut lower = T::zero();
    let mut upper = T::infinity();
    let mut level: Vec<Mat<T>> = modes.to_vec();
    for k in 1..=depth {
        let root = one / T::from(k).unwrap();
        let mut worst_norm = T::zero();
        for p in &level {
            lower = lower.max(spectral_radius(p)?.powf(root));
            worst_norm = worst_norm.max(spectral_norm(p)?);
        }
        upper = upper.min(worst_norm.powf(root));
        if k < depth {
            level = level
                .iter()
                .flat_map(|p| modes.iter().map(move |a| a.matmul(p)))
                .collect();
        }
    }
    Ok(JsrBracket::new(
        lower,
        upper,
        depth,
        BracketMethod::ProductSpectralRadius,
        BracketMethod::ProductNorm,
    ))
}

/// All products of exactly `len` modes.
fn products_of_length<T: Scalar>(modes: &[Mat<T>], len: usize) -> Vec<Mat<T>> {
    let mut level: Vec<Mat<T>> = modes.to_vec();
    for _ in 1..len {
        level = level
            .iter()
            .flat_map(|p| modes.iter().map(move |a| a.matmul(p)))
            .collect();
    }
    level
}

/// Least growth rate certified by a single quadratic shape common to all
/// products of length `order`: the smallest `γ` with some `P ≻ 0` making
/// every product a `γ^order`-contraction in the `P` norm.
///
/// The result is an upper bound on the growth rate for every order, and it
/// tightens (weakly) as the order doubles. Returned with the solver's
/// acceptance slack already applied, so it stays a valid upper bound.
pub fn common_quadratic_upper<T: Scalar>(
    modes: &[Mat<T>],
    order: usize,
    rel_tol: T,
    opts: &SolverOptions<T>,
) -> Result<T, WhiteboxError> {
    let n = validate_modes(modes)?;
    if order == 0 {
        return Err(WhiteboxError::Invalid("order must be at least 1".into()));
    }
    if !(rel_tol > T::zero()) {
        return Err(WhiteboxError::Invalid("relative tolerance must be positive".into()));
    }
    check_budget(modes.len(), order)?;

    let one = T::one();
    let two_l = T::from(2 * order).unwrap();
    let root = one / T::from(order).unwrap();
    let products = products_of_length(modes, order);

    // Norms give a feasible level (with P = I); spectral radii an
    // infeasible one. They bracket the bisection.
    let mut hi = T::zero();
    let mut lo = T::zero();
    for p in &products {
        hi = hi.max(spectral_norm(p)?.powf(root));
        lo = lo.max(spectral_radius(p)?.powf(root));
    }
    if hi <= T::from(1e-12).unwrap() {
        // Every product vanishes at this order.
        return Ok(hi);
    }
    hi = hi * (one + T::from(1e-9).unwrap());

    let mut lmis = products
        .into_iter()
        .map(|p| LmiConstraint::new(p, one))
        .collect::<Result<Vec<_>, _>>()?;

    while hi > lo.max(T::min_positive_value()) * (one + rel_tol) {
        let mid = if lo > hi * T::from(1e-12).unwrap() {
            (lo * hi).sqrt()
        } else {
            hi * T::from(0.25).unwrap()
        };
        let level = mid.powf(two_l);
        for lc in lmis.iter_mut() {
            lc.set_level(level);
        }
        let r = feasibility(n, &[], &lmis, opts.t_max, opts)?;
        if r.status == SolveStatus::Feasible {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi * (one + opts.tol_feas))
}

/// Product bracket tightened by the quadratic certificate; the validation
/// harness treats this as ground truth when its gap is small enough.
pub fn reference_bracket<T: Scalar>(
    modes: &[Mat<T>],
    depth: usize,
    order: usize,
    rel_tol: T,
    opts: &SolverOptions<T>,
) -> Result<JsrBracket<T>, WhiteboxError> {
    let bf = bracket_by_products(modes, depth)?;
    let cqf = common_quadratic_upper(modes, order, rel_tol, opts)?;
    let (upper, upper_method) = if cqf < bf.upper {
        (cqf, BracketMethod::QuadraticCertificate)
    } else {
        (bf.upper, BracketMethod::ProductNorm)
    };
    Ok(JsrBracket::new(bf.lower, upper, depth.max(order), bf.lower_method, upper_method))
}
