//! Truncated Laurent series in ep with closed-form coefficients.
//!
//! A series records its starting order, the known coefficients, and the
//! first unknown order. `trunc = None` marks an exact series (every
//! unlisted order is zero), which arises from polynomial data like a
//! single Gamma prefactor. Truncation bookkeeping is pessimistic: an
//! operation never reports an order its inputs cannot certify.

use crate::algebra::{Polynomial, Q, RatFunError, RationalFunction, Var};
use crate::constants::ConstExpr;
use crate::sums::{pow_q, SumExpression};
use num_traits::{One, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("cannot invert a series with no known nonzero coefficient")]
    NotInvertible,
    #[error("leading coefficient is not a pure rational function")]
    NonRationalLeading,
    #[error("series argument must start at a positive order")]
    BadExpansionPoint,
    #[error("requested order {0} is beyond the known window")]
    InsufficientTruncation(i64),
    #[error("coefficient evaluation failed: {0}")]
    Eval(#[from] RatFunError),
}

#[derive(Clone, Debug)]
pub struct EpsSeries {
    start: i64,
    coeffs: Vec<SumExpression>,
    // first unknown order = start + coeffs.len(); None marks an exact series
    trunc: Option<i64>,
    var: Var,
}

impl EpsSeries {
    /// Known window start..start+coeffs.len(), everything beyond unknown.
    pub fn new_truncated(start: i64, coeffs: Vec<SumExpression>, var: Var) -> EpsSeries {
        assert!(!coeffs.is_empty(), "a truncated series needs a known window");
        for c in &coeffs {
            assert_eq!(c.var(), var);
        }
        let trunc = Some(start + coeffs.len() as i64);
        EpsSeries {
            start,
            coeffs,
            trunc,
            var,
        }
    }

    /// Exact series: all orders outside the listed window are zero.
    pub fn new_exact(start: i64, coeffs: Vec<SumExpression>, var: Var) -> EpsSeries {
        for c in &coeffs {
            assert_eq!(c.var(), var);
        }
        let mut s = EpsSeries {
            start,
            coeffs,
            trunc: None,
            var,
        };
        s.trim_exact();
        s
    }

    pub fn zero(var: Var) -> EpsSeries {
        EpsSeries {
            start: 0,
            coeffs: Vec::new(),
            trunc: None,
            var,
        }
    }

    /// Unknown-from-`trunc` zero series: all known orders are zero.
    pub fn zero_truncated(start: i64, trunc: i64, var: Var) -> EpsSeries {
        assert!(trunc > start);
        EpsSeries::new_truncated(
            start,
            vec![SumExpression::zero(var); (trunc - start) as usize],
            var,
        )
    }

    pub fn one(var: Var) -> EpsSeries {
        EpsSeries::from_expr(SumExpression::one(var), 0)
    }

    /// expr * ep^order, exact.
    pub fn from_expr(e: SumExpression, order: i64) -> EpsSeries {
        let var = e.var();
        EpsSeries::new_exact(order, vec![e], var)
    }

    pub fn from_const(c: &ConstExpr, var: Var) -> EpsSeries {
        EpsSeries::from_expr(SumExpression::from_const_expr(var, c), 0)
    }

    pub fn from_q(c: Q, var: Var) -> EpsSeries {
        EpsSeries::from_expr(SumExpression::from_q(var, c), 0)
    }

    fn trim_exact(&mut self) {
        if self.trunc.is_none() {
            while self.coeffs.last().map_or(false, |c| c.is_zero()) {
                self.coeffs.pop();
            }
            while self.coeffs.first().map_or(false, |c| c.is_zero()) {
                self.coeffs.remove(0);
                self.start += 1;
            }
            if self.coeffs.is_empty() {
                self.start = 0;
            }
        }
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// First unknown order; None when the series is exact.
    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// First order with a nonzero known coefficient.
    pub fn effective_start(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.start + i as i64)
    }

    /// The coefficient of ep^order. None when the order lies at or beyond
    /// the truncation; zero expressions for orders below the window.
    pub fn coeff(&self, order: i64) -> Option<SumExpression> {
        if let Some(t) = self.trunc {
            if order >= t {
                return None;
            }
        }
        if order < self.start || order >= self.start + self.coeffs.len() as i64 {
            return Some(SumExpression::zero(self.var));
        }
        Some(self.coeffs[(order - self.start) as usize].clone())
    }

    pub fn known_orders(&self) -> impl Iterator<Item = (i64, &SumExpression)> {
        let start = self.start;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (start + i as i64, c))
    }

    pub fn add(&self, other: &EpsSeries) -> EpsSeries {
        assert_eq!(self.var, other.var);
        let trunc = match (self.trunc, other.trunc) {
            (None, None) => None,
            (Some(t), None) | (None, Some(t)) => Some(t),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let lo = self.start.min(other.start);
        let hi = match trunc {
            Some(t) => t,
            None => (self.start + self.coeffs.len() as i64)
                .max(other.start + other.coeffs.len() as i64),
        };
        if hi <= lo {
            return match trunc {
                Some(t) => EpsSeries::zero_truncated(t - 1, t, self.var),
                None => EpsSeries::zero(self.var),
            };
        }
        let mut coeffs = Vec::with_capacity((hi - lo) as usize);
        for order in lo..hi {
            let a = self
                .coeff(order)
                .expect("order below both truncations");
            let b = other
                .coeff(order)
                .expect("order below both truncations");
            coeffs.push(a.add(&b));
        }
        let mut out = EpsSeries {
            start: lo,
            coeffs,
            trunc,
            var: self.var,
        };
        out.trim_exact();
        out
    }

    pub fn neg(&self) -> EpsSeries {
        EpsSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            trunc: self.trunc,
            var: self.var,
        }
    }

    pub fn sub(&self, other: &EpsSeries) -> EpsSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &EpsSeries) -> EpsSeries {
        assert_eq!(self.var, other.var);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            // only exact zeros carry an empty window; 0 * b = 0 exactly
            return EpsSeries::zero(self.var);
        }
        let start = self.start + other.start;
        let trunc = self.mul_trunc(other);
        let hi = match trunc {
            Some(t) => t,
            None => start + (self.coeffs.len() + other.coeffs.len()) as i64 - 1,
        };
        let mut coeffs = vec![SumExpression::zero(self.var); (hi - start).max(0) as usize];
        for (i, a) in self.known_orders() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.known_orders() {
                let order = i + j;
                if order >= hi {
                    break;
                }
                let slot = (order - start) as usize;
                coeffs[slot] = coeffs[slot].add(&a.mul(b));
            }
        }
        let mut out = EpsSeries {
            start,
            coeffs,
            trunc,
            var: self.var,
        };
        out.trim_exact();
        out
    }

    fn mul_trunc(&self, other: &EpsSeries) -> Option<i64> {
        match (self.trunc, other.trunc) {
            (None, None) => None,
            (Some(t), None) => Some(t + other.start),
            (None, Some(t)) => Some(t + self.start),
            (Some(ta), Some(tb)) => Some((ta + other.start).min(tb + self.start)),
        }
    }

    pub fn scale_expr(&self, e: &SumExpression) -> EpsSeries {
        let mut out = EpsSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c.mul(e)).collect(),
            trunc: self.trunc,
            var: self.var,
        };
        out.trim_exact();
        out
    }

    pub fn scale_rat(&self, f: &RationalFunction) -> EpsSeries {
        let mut out = EpsSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c.scale(f)).collect(),
            trunc: self.trunc,
            var: self.var,
        };
        out.trim_exact();
        out
    }

    pub fn scale_q(&self, c: &Q) -> EpsSeries {
        self.scale_rat(&RationalFunction::from_q(c.clone()))
    }

    /// Multiply by ep^k (k may be negative: division by ep).
    pub fn shift_order(&self, k: i64) -> EpsSeries {
        EpsSeries {
            start: self.start + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc.map(|t| t + k),
            var: self.var,
        }
    }

    /// Divide by ep^k, the footnote operation that lowers lambda.
    pub fn div_eps(&self, k: u32) -> EpsSeries {
        self.shift_order(-(k as i64))
    }

    /// Drop all knowledge at orders >= to.
    pub fn truncate(&self, to: i64) -> EpsSeries {
        if let Some(t) = self.trunc {
            if to >= t {
                return self.clone();
            }
        }
        if to <= self.start {
            return EpsSeries::zero_truncated(to - 1, to, self.var);
        }
        let keep = (to - self.start).min(self.coeffs.len() as i64) as usize;
        let mut coeffs = self.coeffs[..keep].to_vec();
        while (coeffs.len() as i64) < to - self.start {
            coeffs.push(SumExpression::zero(self.var));
        }
        EpsSeries {
            start: self.start,
            coeffs,
            trunc: Some(to),
            var: self.var,
        }
    }

    /// Synchronize every coefficient from argument var+j to var.
    pub fn shift_arg(&self, j: i64) -> EpsSeries {
        EpsSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c.shift(j)).collect(),
            trunc: self.trunc,
            var: self.var,
        }
    }

    /// Multiplicative inverse, truncated to the same relative window
    /// length. The leading coefficient must be a nonzero rational function.
    /// Only the inverse of an exact monomial is exact; widen the input
    /// with `truncate` first when more orders are needed.
    pub fn inverse(&self) -> Result<EpsSeries, SeriesError> {
        let eff = self.effective_start().ok_or(SeriesError::NotInvertible)?;
        let lead = self
            .coeff(eff)
            .expect("effective start is known")
            .as_rational()
            .ok_or(SeriesError::NonRationalLeading)?;
        let lead_inv = lead.inv().map_err(|_| SeriesError::NotInvertible)?;
        let exact_monomial = self.trunc.is_none()
            && self.coeffs.iter().filter(|c| !c.is_zero()).count() == 1;
        // window length counted from the effective start
        let len = match self.trunc {
            Some(t) => (t - eff) as usize,
            None => self.coeffs.len() - (eff - self.start) as usize,
        };
        let mut inv_coeffs: Vec<SumExpression> = Vec::with_capacity(len);
        inv_coeffs.push(SumExpression::from_rat(self.var, lead_inv.clone()));
        for n in 1..len {
            // b_n = -1/a_0 * sum_{i=1..n} a_i b_{n-i}
            let mut acc = SumExpression::zero(self.var);
            for i in 1..=n {
                let a_i = self
                    .coeff(eff + i as i64)
                    .expect("inside the known window");
                if a_i.is_zero() {
                    continue;
                }
                acc = acc.add(&a_i.mul(&inv_coeffs[n - i]));
            }
            inv_coeffs.push(acc.neg().scale(&lead_inv));
        }
        Ok(EpsSeries {
            start: -eff,
            coeffs: inv_coeffs,
            trunc: if exact_monomial {
                None
            } else {
                Some(-eff + len as i64)
            },
            var: self.var,
        })
    }

    pub fn div(&self, other: &EpsSeries) -> Result<EpsSeries, SeriesError> {
        Ok(self.mul(&other.inverse()?))
    }

    /// exp of a series with positive effective start; exact inputs are
    /// expanded through `order_cap` orders beyond their start.
    pub fn exp(&self, order_cap: i64) -> Result<EpsSeries, SeriesError> {
        if let Some(eff) = self.effective_start() {
            if eff < 1 {
                return Err(SeriesError::BadExpansionPoint);
            }
        }
        let hi = match self.trunc {
            Some(t) => t,
            None => order_cap,
        };
        let mut acc = EpsSeries::one(self.var);
        let mut power = EpsSeries::one(self.var);
        let mut fact = Q::one();
        let mut m = 1i64;
        loop {
            power = power.mul(self).truncate(hi);
            fact *= crate::algebra::qi(m);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power.scale_q(&(Q::one() / &fact)));
            m += 1;
            if m > hi.max(1) * 4 + 8 {
                break;
            }
        }
        // exp is known exactly as far as the argument certifies
        Ok(match self.trunc {
            Some(t) => acc.truncate(t),
            None => acc.truncate(order_cap),
        })
    }

    /// log(1 + s) for s with positive effective start.
    pub fn log1p(&self, order_cap: i64) -> Result<EpsSeries, SeriesError> {
        if let Some(eff) = self.effective_start() {
            if eff < 1 {
                return Err(SeriesError::BadExpansionPoint);
            }
        }
        let hi = match self.trunc {
            Some(t) => t,
            None => order_cap,
        };
        let mut acc = EpsSeries::zero(self.var).truncate(hi);
        let mut power = EpsSeries::one(self.var);
        let mut m = 1i64;
        loop {
            power = power.mul(self).truncate(hi);
            if power.is_zero() {
                break;
            }
            let sign = if m % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&power.scale_q(&crate::algebra::q(sign, m)));
            m += 1;
            if m > hi.max(1) * 4 + 8 {
                break;
            }
        }
        Ok(acc)
    }

    /// Exact numeric value sum_j coeff_j(n) * eps^j over the known window.
    pub fn eval_window(&self, n: i64, eps: &Q, digits: u32) -> Result<Q, SeriesError> {
        let mut acc = Q::zero();
        for (order, c) in self.known_orders() {
            let v = c.eval_float(n, digits)?;
            acc += v * pow_q(eps, order);
        }
        Ok(acc)
    }

    /// Substitute an exact rational for a coefficient parameter variable.
    pub fn specialize_param(&self, v: Var, value: &Q) -> EpsSeries {
        let mut out = EpsSeries {
            start: self.start,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.specialize_param(v, value))
                .collect(),
            trunc: self.trunc,
            var: self.var,
        };
        out.trim_exact();
        out
    }

    pub fn rename_var(&self, to: Var) -> EpsSeries {
        EpsSeries {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c.rename_var(to)).collect(),
            trunc: self.trunc,
            var: to,
        }
    }

    /// Requested window available? Errors with the first missing order.
    pub fn require_through(&self, order: i64) -> Result<(), SeriesError> {
        match self.trunc {
            Some(t) if t <= order => Err(SeriesError::InsufficientTruncation(t)),
            _ => Ok(()),
        }
    }
}

impl PartialEq for EpsSeries {
    /// Semantic equality: identical truncation and identical coefficients
    /// order by order (leading-zero padding is irrelevant).
    fn eq(&self, other: &Self) -> bool {
        if self.var != other.var || self.trunc != other.trunc {
            return false;
        }
        let lo = self.start.min(other.start);
        let hi = (self.start + self.coeffs.len() as i64)
            .max(other.start + other.coeffs.len() as i64);
        (lo..hi).all(|o| {
            let a = self.coeff(o);
            let b = other.coeff(o);
            match (a, b) {
                (Some(a), Some(b)) => a == b,
                (None, None) => true,
                _ => false,
            }
        })
    }
}

impl Eq for EpsSeries {}

impl fmt::Display for EpsSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (order, c) in self.known_orders() {
            // a zero prints only as the recorded leading order of a
            // truncated series
            if c.is_zero() && !(order == self.start && self.trunc.is_some()) {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            write!(f, "ep^{order}*({c})")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        if let Some(t) = self.trunc {
            write!(f, " + O[ep]^{t}")?;
        }
        Ok(())
    }
}

/// The exact polynomial p(ep) viewed as a series (p must only involve ep
/// and coefficient parameters handled by the caller).
pub fn poly_in_eps(p: &Polynomial, var: Var) -> EpsSeries {
    let coeffs = p.coeffs_in(Var::Ep);
    let exprs: Vec<SumExpression> = coeffs
        .iter()
        .map(|c| SumExpression::from_poly(var, c.clone()))
        .collect();
    EpsSeries::new_exact(0, exprs, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};
    use crate::constants::FormalConstant;
    use crate::sums::SSum;
    use num_traits::Signed;
    use rand::{Rng, SeedableRng};

    fn c(x: i64) -> SumExpression {
        SumExpression::from_q(Var::N, qi(x))
    }

    #[test]
    fn pole_times_positive_power_cancels() {
        let a = EpsSeries::new_exact(-1, vec![c(1)], Var::N);
        let b = EpsSeries::new_exact(1, vec![c(1)], Var::N);
        let p = a.mul(&b);
        assert_eq!(p, EpsSeries::one(Var::N));
        assert!(p.is_exact());
    }

    #[test]
    fn self_subtraction_keeps_truncation() {
        let a = EpsSeries::new_truncated(-2, vec![c(3), c(1), c(4)], Var::N);
        let d = a.sub(&a);
        assert!(d.is_zero());
        assert_eq!(d.trunc(), Some(1));
    }

    #[test]
    fn initial_value_fixture_rescaled_by_eps_cubed() {
        // (2/3 ep^-3 - 11/6 ep^-2 + (z2/4 + 79/24) ep^-1) * ep^3
        let z2 = ConstExpr::from_symbol(FormalConstant::zeta(2));
        let c1 = SumExpression::from_const_expr(Var::N, &z2.scale(&q(1, 4)).add(&ConstExpr::from_q(q(79, 24))));
        let f1 = EpsSeries::new_truncated(
            -3,
            vec![
                SumExpression::from_q(Var::N, q(2, 3)),
                SumExpression::from_q(Var::N, q(-11, 6)),
                c1.clone(),
            ],
            Var::N,
        );
        let shifted = f1.shift_order(3);
        assert_eq!(shifted.start(), 0);
        assert_eq!(shifted.coeff(0).unwrap(), SumExpression::from_q(Var::N, q(2, 3)));
        assert_eq!(shifted.coeff(2).unwrap(), c1);
        assert_eq!(shifted.trunc(), Some(3));
    }

    #[test]
    fn division_by_eps_lowers_start() {
        let a = EpsSeries::new_truncated(-3, vec![c(1), c(2)], Var::N);
        let d = a.div_eps(1);
        assert_eq!(d.start(), -4);
        assert_eq!(d.trunc(), Some(-2));
        let z = EpsSeries::zero(Var::N).div_eps(2);
        assert!(z.is_zero());
    }

    #[test]
    fn truncation_window_of_products() {
        let a = EpsSeries::new_truncated(-1, vec![c(1)], Var::N); // known -1..0
        let b = EpsSeries::new_truncated(1, vec![c(1)], Var::N); // known 1..2
        let p = a.mul(&b);
        assert_eq!(p.start(), 0);
        assert_eq!(p.trunc(), Some(1));
        assert_eq!(p.coeff(0).unwrap(), c(1));
        assert_eq!(p.coeff(1), None);
    }

    #[test]
    fn inverse_of_one_plus_eps() {
        let a = EpsSeries::new_exact(0, vec![c(1), c(1)], Var::N).truncate(5);
        let inv = a.inverse().unwrap();
        for k in 0..5 {
            let expect = if k % 2 == 0 { qi(1) } else { qi(-1) };
            assert_eq!(
                inv.coeff(k).unwrap(),
                SumExpression::from_q(Var::N, expect)
            );
        }
        let prod = a.mul(&inv);
        assert_eq!(prod.coeff(0).unwrap(), c(1));
        for k in 1..5 {
            assert!(prod.coeff(k).unwrap().is_zero());
        }
    }

    #[test]
    fn inverse_of_pure_pole_factor() {
        // (r*ep)^-1 = (1/r) ep^-1, exact
        let a = EpsSeries::new_exact(1, vec![SumExpression::from_q(Var::N, q(-3, 2))], Var::N);
        let inv = a.inverse().unwrap();
        assert!(inv.is_exact());
        assert_eq!(inv.start(), -1);
        assert_eq!(
            inv.coeff(-1).unwrap(),
            SumExpression::from_q(Var::N, q(-2, 3))
        );
    }

    #[test]
    fn exp_log_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let coeffs: Vec<SumExpression> = (0..4)
                .map(|_| {
                    SumExpression::from_q(Var::N, q(rng.gen_range(-5..=5), rng.gen_range(1..=4)))
                })
                .collect();
            let s = EpsSeries::new_truncated(1, coeffs, Var::N);
            let logv = EpsSeries::one(Var::N).add(&s).sub(&EpsSeries::one(Var::N));
            let back = logv.log1p(6).unwrap().exp(6).unwrap();
            let expect = EpsSeries::one(Var::N).add(&s);
            assert_eq!(back, expect.truncate(back.trunc().unwrap()));
        }
    }

    #[test]
    fn exp_collects_sum_coefficients() {
        // exp(ep*S1(N)) to order 3: 1 + S1 ep + (S1^2/2) ep^2
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let s = EpsSeries::new_exact(1, vec![s1.clone()], Var::N);
        let e = s.exp(3).unwrap();
        assert_eq!(e.coeff(0).unwrap(), SumExpression::one(Var::N));
        assert_eq!(e.coeff(1).unwrap(), s1);
        assert_eq!(e.coeff(2).unwrap(), s1.mul(&s1).scale_q(&q(1, 2)));
    }

    #[test]
    fn pointwise_product_agreement() {
        // exact polynomial series multiply exactly
        let a = EpsSeries::new_exact(0, vec![c(2), c(-1), c(3)], Var::N);
        let b = EpsSeries::new_exact(-1, vec![c(5), c(7)], Var::N);
        let p = a.mul(&b);
        for eps in [q(1, 100), q(1, 1000)] {
            for n in 0..5 {
                let pa = a.eval_window(n, &eps, 30).unwrap();
                let pb = b.eval_window(n, &eps, 30).unwrap();
                let pp = p.eval_window(n, &eps, 30).unwrap();
                assert_eq!(pp, pa * pb);
            }
        }
    }

    #[test]
    fn truncated_product_defect_is_high_order() {
        let a = EpsSeries::new_exact(0, vec![c(1), c(1), c(1), c(1), c(1)], Var::N).truncate(2);
        let b = EpsSeries::new_exact(0, vec![c(1), c(2)], Var::N);
        let p = a.mul(&b);
        assert_eq!(p.trunc(), Some(2));
        let eps = q(1, 100);
        let full = (qi(1) + &eps + pow_q(&eps, 2) + pow_q(&eps, 3) + pow_q(&eps, 4))
            * (qi(1) + qi(2) * &eps);
        let approx = p.eval_window(0, &eps, 30).unwrap();
        let defect = (full - approx).abs();
        assert!(defect < q(1, 1000), "defect {defect} too large");
        assert!(defect > Q::zero());
    }

    #[test]
    fn equality_ignores_leading_zero_padding() {
        let a = EpsSeries::new_truncated(-3, vec![c(0), c(0), c(5)], Var::N);
        let b = EpsSeries::new_truncated(-1, vec![c(5)], Var::N);
        assert_eq!(a, b);
        let c_ = EpsSeries::new_truncated(-1, vec![c(5), c(0)], Var::N);
        assert_ne!(a, c_, "different truncation is a different series");
    }

    #[test]
    fn display_shape() {
        let s = EpsSeries::new_truncated(
            -3,
            vec![c(0), SumExpression::from_q(Var::N, q(-16, 3)), c(0), c(2)],
            Var::N,
        );
        assert_eq!(
            format!("{s}"),
            "ep^-3*(0) + ep^-2*(-16/3) + ep^0*(2) + O[ep]^1"
        );
        assert_eq!(format!("{}", EpsSeries::zero(Var::N)), "0");
    }

    #[test]
    fn require_through_reports_missing_orders() {
        let a = EpsSeries::new_truncated(-2, vec![c(1), c(2)], Var::N);
        assert!(a.require_through(-1).is_ok());
        assert_eq!(
            a.require_through(0),
            Err(SeriesError::InsufficientTruncation(0))
        );
        assert!(EpsSeries::one(Var::N).require_through(100).is_ok());
    }
}
