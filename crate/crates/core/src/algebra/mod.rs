//! Exact arithmetic kernel: rationals, multivariate polynomials over a
//! fixed variable set, rational functions, root finding and small exact
//! linear algebra.
//!
//! Everything downstream (sums, series, operators, solvers) reduces to the
//! types in this module, so canonical forms are enforced eagerly: equal
//! objects compare equal structurally.

mod gcd;
mod matrix;
mod poly;
mod ratfun;
mod roots;

pub use gcd::{dispersion_set, poly_gcd, poly_lcm, resultant_in};
pub use matrix::{Mat, Scalar};
pub use poly::{Mono, Polynomial, Var, NVARS};
pub use ratfun::{RatFunError, RationalFunction};
pub use roots::{integer_roots, integer_roots_i64, rational_roots};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational scalar used everywhere in the crate.
///
/// `num_rational::BigRational` already keeps values reduced with a positive
/// denominator, which is exactly the canonical form the crate relies on.
pub type Q = BigRational;

/// Rational from a numerator/denominator pair of machine integers.
///
/// Panics on a zero denominator; use only with literal arguments.
pub fn q(num: i64, den: i64) -> Q {
    assert!(den != 0, "rational literal with zero denominator");
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from a machine integer.
pub fn qi(num: i64) -> Q {
    Q::from_integer(BigInt::from(num))
}

/// True if `x` is an integer (denominator one).
pub fn q_is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Integer part of an integral rational.
pub fn q_to_bigint(x: &Q) -> Option<BigInt> {
    q_is_integer(x).then(|| x.numer().clone())
}

/// Integer value if `x` fits in an `i64`.
pub fn q_to_i64(x: &Q) -> Option<i64> {
    use num_traits::ToPrimitive;
    q_to_bigint(x).and_then(|z| z.to_i64())
}

/// gcd of two rationals' numerators when both are integers, else 1.
pub fn gcd_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    let g = a.gcd(b);
    if g.is_zero() {
        BigInt::one()
    } else {
        g.abs()
    }
}
