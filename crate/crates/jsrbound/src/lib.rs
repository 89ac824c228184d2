//! Stability certificates for switched linear systems observed only
//! through sampled trajectories.
//!
//! A switched linear system picks one of `m` matrices at every step,
//! `x_{k+1} = A_{s(k)} x_k`, and its worst-case growth rate is the joint
//! spectral radius of the mode set. This crate bounds that rate two ways:
//!
//! * [`whitebox`] works from the matrices themselves and brackets the rate
//!   with matrix-product norms and a common quadratic Lyapunov certificate.
//! * [`scenario`] works from finitely many observed traces with hidden
//!   switching. It fits the tightest quadratic growth certificate to the
//!   data, then converts the fit into a probabilistic upper bound and a
//!   deterministic lower bound on the growth rate, with an explicit
//!   confidence level backed by scenario optimization.
//!
//! Supporting layers are exposed for reuse: dense matrices ([`mat`]),
//! packed symmetric matrices with eigensolver ([`symmat`]), a central-cut
//! ellipsoid method for the semidefinite feasibility problems ([`lmi`]),
//! regularized incomplete beta functions ([`specfun`]), trace generation
//! ([`sysmodel`]), and file formats ([`io`]).
//!
//! Everything numeric is generic over the scalar type via [`scalar::Scalar`];
//! the `*64` aliases at the crate root fix `f64` for the common case.

#![forbid(unsafe_code)]

pub mod io;
pub mod lmi;
pub mod mat;
pub mod scalar;
pub mod scenario;
pub mod specfun;
pub mod symmat;
pub mod sysmodel;
pub mod whitebox;

pub use scenario::{analyze, epsilon_of_beta, gamma_star};

/// Dense matrix over `f64`.
pub type Mat64 = mat::Mat<f64>;
/// Symmetric matrix over `f64`.
pub type SymMatrix64 = symmat::SymMatrix<f64>;
/// Switched linear system over `f64`.
pub type SwitchedSystem64 = sysmodel::SwitchedSystem<f64>;
/// Single observed trajectory over `f64`.
pub type Trace64 = sysmodel::Trace<f64>;
/// Batch of observed trajectories over `f64`.
pub type SampleSet64 = sysmodel::SampleSet<f64>;
/// Analysis configuration over `f64`.
pub type BoundsConfig64 = scenario::BoundsConfig<f64>;
/// Analysis result over `f64`.
pub type BoundsReport64 = scenario::BoundsReport<f64>;
/// Upper bound that may be infinite, over `f64`.
pub type Bound64 = scenario::Bound<f64>;
/// White-box growth-rate bracket over `f64`.
pub type JsrBracket64 = whitebox::JsrBracket<f64>;
