//! Rational functions: quotients of multivariate polynomials in canonical
//! form.
//!
//! Canonical means: numerator and denominator are integer polynomials with
//! coprime contents and coprime primitive parts, and the denominator's
//! leading coefficient (graded lex) is positive. Two equal rational
//! functions are structurally identical.

use super::gcd::poly_gcd;
use super::poly::{Polynomial, Var};
use super::{Q, q_is_integer};
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

/// Errors from rational-function arithmetic and evaluation.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum RatFunError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("evaluation hits a denominator zero")]
    PoleAtPoint,
    #[error("missing assignment for variable {0}")]
    Unassigned(&'static str),
}

impl RationalFunction {
    /// Build `num/den`, normalizing. Panics on a zero denominator; use
    /// [`RationalFunction::checked_new`] for fallible inputs.
    pub fn new(num: Polynomial, den: Polynomial) -> RationalFunction {
        Self::checked_new(num, den).expect("zero denominator")
    }

    pub fn checked_new(
        num: Polynomial,
        den: Polynomial,
    ) -> Result<RationalFunction, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RationalFunction {
                num: Polynomial::zero(),
                den: Polynomial::one(),
            });
        }
        let g = poly_gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.divide_exact(&g).expect("gcd divides numerator"),
                den.divide_exact(&g).expect("gcd divides denominator"),
            )
        };
        // scale so both sides are integer-primitive up to a shared rational,
        // then push that rational into the numerator
        let (pn, cn) = num.primitive_z();
        let (pd, cd) = den.primitive_z();
        let scale = cn / cd; // overall rational factor of the reduced quotient
        num = pn.scale(&scale);
        den = pd;
        // den has positive leading coefficient from primitive_z; keep num
        // integer when the scale is integral, which it is whenever inputs
        // were integer polynomials
        debug_assert!(den.leading_coeff().is_positive());
        Ok(RationalFunction { num, den })
    }

    pub fn zero() -> RationalFunction {
        RationalFunction {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> RationalFunction {
        RationalFunction {
            num: Polynomial::one(),
            den: Polynomial::one(),
        }
    }

    pub fn from_poly(p: Polynomial) -> RationalFunction {
        RationalFunction::new(p, Polynomial::one())
    }

    pub fn from_q(c: Q) -> RationalFunction {
        RationalFunction::from_poly(Polynomial::constant(c))
    }

    pub fn from_int(c: i64) -> RationalFunction {
        RationalFunction::from_poly(Polynomial::int(c))
    }

    pub fn var(v: Var) -> RationalFunction {
        RationalFunction::from_poly(Polynomial::var(v))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one() || self.den.as_constant().is_some()
    }

    /// The polynomial value when the denominator is constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&(Q::one() / c)))
    }

    pub fn as_constant(&self) -> Option<Q> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn vars(&self) -> Vec<Var> {
        Var::ALL
            .into_iter()
            .filter(|&v| self.contains_var(v))
            .collect()
    }

    pub fn inv(&self) -> Result<RationalFunction, RatFunError> {
        if self.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(RationalFunction::new(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &RationalFunction) -> Option<RationalFunction> {
        if other.is_zero() {
            return None;
        }
        Some(self * &other.inv().unwrap())
    }

    pub fn pow(&self, e: i64) -> Result<RationalFunction, RatFunError> {
        if e < 0 && self.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = RationalFunction::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Substitute a polynomial for a variable.
    pub fn subst(&self, v: Var, value: &Polynomial) -> RationalFunction {
        RationalFunction::new(self.num.subst(v, value), self.den.subst(v, value))
    }

    /// Shift `v -> v + j`.
    pub fn shift(&self, v: Var, j: i64) -> RationalFunction {
        if j == 0 {
            return self.clone();
        }
        RationalFunction::new(self.num.shift(v, j), self.den.shift(v, j))
    }

    /// Specialize the regulator to a rational value.
    pub fn specialize_ep(&self, value: &Q) -> RationalFunction {
        RationalFunction::new(
            self.num.subst_q(Var::Ep, value),
            self.den.subst_q(Var::Ep, value),
        )
    }

    /// Evaluate with the given assignment; unassigned occurring variables
    /// or a denominator zero are errors.
    pub fn eval(&self, assign: &dyn Fn(Var) -> Option<Q>) -> Result<Q, RatFunError> {
        let num = self.num.eval(assign).ok_or_else(|| {
            RatFunError::Unassigned(
                self.vars()
                    .first()
                    .map(|v| v.name())
                    .unwrap_or("?"),
            )
        })?;
        let den = self
            .den
            .eval(assign)
            .ok_or(RatFunError::Unassigned("?"))?;
        if den.is_zero() {
            return Err(RatFunError::PoleAtPoint);
        }
        Ok(num / den)
    }

    /// Evaluate a rational function of a single variable.
    pub fn eval_one(&self, v: Var, x: &Q) -> Result<Q, RatFunError> {
        self.eval(&|var| if var == v { Some(x.clone()) } else { None })
    }

    /// True when numerator and denominator are integer polynomials (the
    /// denominator always is; the numerator may carry rational content).
    pub fn has_integer_coeffs(&self) -> bool {
        self.num.terms().all(|(_, c)| q_is_integer(c))
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            &(&self.num * &rhs.den) - &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        // cross-reduce first to keep intermediate products small
        let g1 = poly_gcd(&self.num, &rhs.den);
        let g2 = poly_gcd(&rhs.num, &self.den);
        let n1 = self.num.divide_exact(&g1).unwrap();
        let d2 = rhs.den.divide_exact(&g1).unwrap();
        let n2 = rhs.num.divide_exact(&g2).unwrap();
        let d1 = self.den.divide_exact(&g2).unwrap();
        RationalFunction::new(&n1 * &n2, &d1 * &d2)
    }
}

impl Div for &RationalFunction {
    type Output = RationalFunction;
    fn div(self, rhs: &RationalFunction) -> RationalFunction {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.num_terms() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    fn n() -> Polynomial {
        Polynomial::var(Var::N)
    }

    #[test]
    fn canonical_reduction() {
        // (N^2 - 1)/(N + 1) = N - 1
        let r = RationalFunction::new(
            &(&n() * &n()) - &Polynomial::one(),
            Polynomial::var_plus(Var::N, 1),
        );
        assert!(r.is_polynomial());
        assert_eq!(r.as_polynomial().unwrap(), Polynomial::var_plus(Var::N, -1));
    }

    #[test]
    fn denominator_sign_normalized() {
        let r = RationalFunction::new(Polynomial::one(), -&Polynomial::var_plus(Var::N, 2));
        assert!(r.den().leading_coeff().is_positive());
        let s = RationalFunction::new(-&Polynomial::one(), Polynomial::var_plus(Var::N, 2));
        assert_eq!(r, s);
    }

    #[test]
    fn field_axioms_spot() {
        let a = RationalFunction::new(Polynomial::var_plus(Var::N, 1), Polynomial::var(Var::N));
        let b = RationalFunction::new(Polynomial::one(), Polynomial::var_plus(Var::N, 2));
        let s = &a + &b;
        let back = &s - &b;
        assert_eq!(back, a);
        let p = &a * &b;
        let div = &p / &b;
        assert_eq!(div, a);
    }

    #[test]
    fn rational_content_kept_in_numerator() {
        // (1/2) * N / 1
        let r = RationalFunction::new(n().scale(&q(1, 2)), Polynomial::one());
        assert_eq!(r.den(), &Polynomial::one());
        assert_eq!(r.eval_one(Var::N, &qi(4)).unwrap(), qi(2));
    }

    #[test]
    fn shift_and_eval() {
        let r = RationalFunction::new(Polynomial::one(), Polynomial::var_plus(Var::N, 1));
        let s = r.shift(Var::N, 2); // 1/(N+3)
        assert_eq!(s.eval_one(Var::N, &qi(1)).unwrap(), q(1, 4));
        assert!(matches!(
            s.eval_one(Var::N, &qi(-3)),
            Err(RatFunError::PoleAtPoint)
        ));
    }
}
