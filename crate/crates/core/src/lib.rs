//! Anisotropic mixed-norm Rayleigh quotients on box domains.
//!
//! The crate evaluates mixed Lebesgue norms `||u||_p`, anisotropic gradient
//! norms `||∇u||_p = sum_i ||u_{x_i}||_{p_i}` and directional fractional
//! seminorms `[u]_{s,p}` of grid functions with homogeneous Dirichlet data,
//! provides their exact discrete first variations, and computes first
//! eigenvalues of the quotients `Q_p = ||∇u||_p / ||u||_p` and
//! `Q_{s,p} = [u]_{s,p} / ||u||_p`.
//!
//! Every numerical routine is generic over [`Real`]; the aliases at the crate
//! root fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so NaN lands in the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod eigensolver;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod norms;
pub mod scalar;
pub mod variations;

pub use error::{Error, ParseError, Result};
pub use scalar::Real;

pub type ExponentVector = exponents::ExponentVector<f64>;
pub type FractionalVector = exponents::FractionalVector<f64>;
pub type ValidityReport = exponents::ValidityReport<f64>;
pub type BoxDomain = grid::BoxDomain<f64>;
pub type TensorGrid = grid::TensorGrid<f64>;
pub type GridFunction = grid::GridFunction<f64>;
pub type FractionalSetup = norms::FractionalSetup<f64>;
pub type FractionalTerms = norms::FractionalTerms<f64>;
pub type PartialNormStack = norms::PartialNormStack<f64>;
pub type SolveReport = eigensolver::SolveReport<f64>;
pub type SweepTable = eigensolver::SweepTable<f64>;

pub use eigensolver::SolveConfig;
pub use norms::Window;
