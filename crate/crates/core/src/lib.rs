//! Exact epsilon-expansion toolkit for definite hypergeometric sums and
//! coupled linear difference/differential systems.
//!
//! The crate computes Laurent expansions in a regulator `ep` whose
//! coefficients are closed forms in (generalized) harmonic sums, and it
//! proves the recurrences it uses along the way:
//!
//! * [`algebra`]: arbitrary-precision rationals, multivariate polynomials
//!   and rational functions over the fixed variable set `k < N < ep < x`.
//! * [`sums`]: nested harmonic/S-sums, quasi-shuffle products, shift
//!   synchronization, exact and high-precision evaluation.
//! * [`series`]: truncated Laurent series in `ep` with sum-expression
//!   coefficients.
//! * [`gamma`]: Gamma/Beta factor expansion and whole-summand expansion.
//! * [`operators`]: scalar recurrence operators and their action.
//! * [`systems`]: coupled first-order systems, ODE-to-recurrence
//!   translation, forward-iteration oracles.
//! * [`telescoping`]: Gosper antidifferences, Zeilberger creative
//!   telescoping, certificate verification.
//! * [`solver`]: polynomial, hypergeometric and d'Alembertian solutions
//!   of linear recurrences, initial-value matching.
//! * [`eps`]: order-by-order epsilon bootstrap for recurrences with
//!   Laurent-series right-hand sides.
//! * [`coupled`]: cluster ordering, shift-algebra uncoupling, full
//!   coupled-system solving.
//! * [`parse`] / [`cli`]: the textual formats and the command-line jobs.

pub mod algebra;
pub mod constants;
pub mod numeric;
pub mod sums;
pub mod series;
pub mod parse;
pub mod gamma;
pub mod operators;
pub mod systems;
pub mod telescoping;
pub mod summation;
pub mod solver;
pub mod eps;
pub mod coupled;
pub mod cli;

pub use algebra::{Polynomial, RationalFunction, Var, Q};
pub use constants::{ConstExpr, FormalConstant};
pub use sums::{SSum, SumExpression, SumTerm};
