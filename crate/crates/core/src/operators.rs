//! Linear difference operators with polynomial coefficients.
//!
//! An operator is a_0 + a_1 E + ... + a_d E^d acting on sequences in one
//! variable, E the forward shift. Coefficients live in Q[ep, var]. The
//! stored form is content-free with nonzero first and last coefficient;
//! a power of E factored out during trimming is kept as `offset`.

use crate::algebra::{poly_gcd, Polynomial, Q, RationalFunction, Var};
use crate::series::{poly_in_eps, EpsSeries};
use crate::sums::SumExpression;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Mutex;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("leading coefficient vanishes at n = {0}")]
    SingularPivot(i64),
    #[error("value requested below the base index {0}")]
    BelowBase(i64),
    #[error("initial values must cover {0} consecutive points from the base")]
    BadSeed(usize),
    #[error("evaluation failed at n = {0}")]
    Eval(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecOperator {
    coeffs: Vec<Polynomial>,
    var: Var,
    offset: i64,
}

/// Divide out the polynomial and integer content and fix the sign so the
/// last coefficient's leading term is positive.
pub(crate) fn remove_content(coeffs: &mut [Polynomial]) {
    let mut g = Polynomial::zero();
    for c in coeffs.iter() {
        g = poly_gcd(&g, c);
        if g.as_constant().map_or(false, |q| q.is_one()) {
            break;
        }
    }
    if !g.is_zero() && g.as_constant().is_none() {
        for c in coeffs.iter_mut() {
            *c = c.divide_exact(&g).expect("gcd divides");
        }
    }
    // common denominator, then integer content
    let mut den = BigInt::one();
    for c in coeffs.iter() {
        for (_, q) in c.terms() {
            den = den.lcm(q.denom());
        }
    }
    let mut num = BigInt::zero();
    for c in coeffs.iter() {
        for (_, q) in c.terms() {
            num = num.gcd(&(q.numer() * &den));
        }
    }
    if num.is_zero() {
        return;
    }
    let scale = Q::new(den, num);
    for c in coeffs.iter_mut() {
        *c = c.scale(&scale.abs());
    }
    if coeffs
        .last()
        .map_or(false, |c| c.leading_coeff().is_negative())
    {
        for c in coeffs.iter_mut() {
            *c = -&*c;
        }
    }
}

impl RecOperator {
    /// Build from a_0..a_d; zero ends are trimmed into `offset` and the
    /// content is removed. Panics on the zero operator.
    pub fn new(coeffs: Vec<Polynomial>, var: Var) -> RecOperator {
        let mut lo = 0usize;
        while lo < coeffs.len() && coeffs[lo].is_zero() {
            lo += 1;
        }
        assert!(lo < coeffs.len(), "zero operator");
        let mut hi = coeffs.len();
        while coeffs[hi - 1].is_zero() {
            hi -= 1;
        }
        let mut trimmed: Vec<Polynomial> = coeffs[lo..hi].to_vec();
        remove_content(&mut trimmed);
        RecOperator {
            coeffs: trimmed,
            var,
            offset: lo as i64,
        }
    }

    /// As given, no content removal; zero ends still trimmed.
    pub fn new_raw(coeffs: Vec<Polynomial>, var: Var) -> RecOperator {
        let mut lo = 0usize;
        while lo < coeffs.len() && coeffs[lo].is_zero() {
            lo += 1;
        }
        assert!(lo < coeffs.len(), "zero operator");
        let mut hi = coeffs.len();
        while coeffs[hi - 1].is_zero() {
            hi -= 1;
        }
        RecOperator {
            coeffs: coeffs[lo..hi].to_vec(),
            var,
            offset: lo as i64,
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn var(&self) -> Var {
        self.var
    }

    /// Power of the shift factored out while trimming zero coefficients.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn coeff(&self, i: usize) -> &Polynomial {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn leading(&self) -> &Polynomial {
        self.coeffs.last().unwrap()
    }

    pub fn trailing(&self) -> &Polynomial {
        &self.coeffs[0]
    }

    pub fn is_eps_free(&self) -> bool {
        self.coeffs.iter().all(|c| !c.contains_var(Var::Ep))
    }

    /// Coefficients specialized at a rational ep.
    pub fn at_eps(&self, eps: &Q) -> RecOperator {
        let coeffs: Vec<Polynomial> = self
            .coeffs
            .iter()
            .map(|c| c.subst_q(Var::Ep, eps))
            .collect();
        assert!(
            !coeffs.last().unwrap().is_zero() && !coeffs[0].is_zero(),
            "operator degenerates at ep = {eps}"
        );
        RecOperator {
            coeffs,
            var: self.var,
            offset: self.offset,
        }
    }

    /// Sum of a_i(ep, var) * e(var + offset + i), normalized.
    pub fn apply(&self, e: &SumExpression, eps: Option<&Q>) -> SumExpression {
        assert_eq!(e.var(), self.var);
        let mut acc = SumExpression::zero(self.var);
        for (i, a) in self.coeffs.iter().enumerate() {
            let a = match eps {
                Some(v) => a.subst_q(Var::Ep, v),
                None => a.clone(),
            };
            if a.is_zero() {
                continue;
            }
            let shifted = e.shift(self.offset + i as i64);
            acc = acc.add(&shifted.scale(&RationalFunction::from_poly(a)));
        }
        acc
    }

    /// Operator action on an ep-series: coefficients expand as exact
    /// polynomial series and multiply shifted coefficient series.
    pub fn apply_to_series(&self, s: &EpsSeries) -> EpsSeries {
        assert_eq!(s.var(), self.var);
        let mut acc = EpsSeries::zero(self.var);
        for (i, a) in self.coeffs.iter().enumerate() {
            let a_series = poly_in_eps(a, self.var);
            let term = a_series.mul(&s.shift_arg(self.offset + i as i64));
            acc = acc.add(&term);
        }
        acc
    }

    /// The ep^k Taylor coefficients of a_0..a_d, in the base variable
    /// alone. May be all zero; callers handle the divide-by-ep path.
    pub fn specialize_eps(&self, k: u32) -> Vec<Polynomial> {
        self.coeffs
            .iter()
            .map(|c| c.coeff_of(Var::Ep, k))
            .collect()
    }

    /// Largest power of ep dividing every coefficient.
    pub fn eps_valuation(&self) -> u32 {
        (0..)
            .find(|&k| self.specialize_eps(k).iter().any(|p| !p.is_zero()))
            .unwrap()
    }

    /// a_i as an exact series in ep.
    pub fn coeff_series(&self, i: usize) -> EpsSeries {
        poly_in_eps(&self.coeffs[i], self.var)
    }
}

impl fmt::Display for RecOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.var.name();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let s = self.offset + i as i64;
            if s == 0 {
                write!(f, "({a})*F[{v}]")?;
            } else if s > 0 {
                write!(f, "({a})*F[{v}+{s}]")?;
            } else {
                write!(f, "({a})*F[{v}{s}]")?;
            }
        }
        Ok(())
    }
}

/// A recurrence with its expanded inhomogeneous side.
#[derive(Clone, Debug)]
pub struct ScalarRecurrence {
    pub op: RecOperator,
    pub rhs: EpsSeries,
}

impl ScalarRecurrence {
    pub fn new(op: RecOperator, rhs: EpsSeries) -> ScalarRecurrence {
        assert_eq!(op.var(), rhs.var());
        ScalarRecurrence { op, rhs }
    }
}

/// Forward-iterating sequence fiber at fixed rational ep. Values are
/// memoized; the step closure sees the history from the base index.
/// Single-threaded by design: evaluation takes &mut, the memo is behind
/// a mutex only to keep the type shareable after filling.
pub struct SequenceOracle {
    base: i64,
    memo: Mutex<Vec<Q>>,
    step: Box<dyn Fn(&[Q], i64) -> Result<Q, OracleError> + Send>,
}

impl SequenceOracle {
    pub fn new(
        base: i64,
        seed: Vec<Q>,
        step: Box<dyn Fn(&[Q], i64) -> Result<Q, OracleError> + Send>,
    ) -> SequenceOracle {
        SequenceOracle {
            base,
            memo: Mutex::new(seed),
            step,
        }
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn value(&self, n: i64) -> Result<Q, OracleError> {
        if n < self.base {
            return Err(OracleError::BelowBase(self.base));
        }
        let mut memo = self.memo.lock().unwrap();
        while (memo.len() as i64) <= n - self.base {
            let next = self.base + memo.len() as i64;
            let v = (self.step)(&memo, next)?;
            memo.push(v);
        }
        Ok(memo[(n - self.base) as usize].clone())
    }
}

/// Oracle for op(F) = rhs at fixed ep, from d consecutive initial values
/// starting at `base`. The rhs closure supplies exact values of the
/// inhomogeneous side at the argument where the recurrence is anchored:
/// a_0(n)F(n) + ... + a_d(n)F(n+d) = rhs(n).
pub fn rec_oracle(
    op: &RecOperator,
    eps: Option<&Q>,
    rhs: impl Fn(i64) -> Result<Q, OracleError> + Send + 'static,
    base: i64,
    seed: Vec<Q>,
) -> Result<SequenceOracle, OracleError> {
    let op = match eps {
        Some(v) => op.at_eps(v),
        None => {
            assert!(op.is_eps_free(), "symbolic ep needs a specialization");
            op.clone()
        }
    };
    let d = op.order();
    if seed.len() < d {
        return Err(OracleError::BadSeed(d));
    }
    let coeffs = op.coeffs().to_vec();
    let var = op.var();
    let off = op.offset();
    let step = move |hist: &[Q], next: i64| -> Result<Q, OracleError> {
        // anchor so that var + offset + d = next
        let n = next - off - d as i64;
        let at = |v: Var| -> Option<Q> {
            if v == var {
                Some(Q::from(BigInt::from(n)))
            } else {
                None
            }
        };
        let lead = coeffs[d].eval(&at).ok_or(OracleError::Eval(n))?;
        if lead.is_zero() {
            return Err(OracleError::SingularPivot(n));
        }
        let mut acc = rhs(n)?;
        for (i, a) in coeffs.iter().enumerate().take(d) {
            let idx = n + off + i as i64 - base;
            if idx < 0 || idx as usize >= hist.len() {
                return Err(OracleError::Eval(n));
            }
            let av = a.eval(&at).ok_or(OracleError::Eval(n))?;
            acc -= av * &hist[idx as usize];
        }
        Ok(acc / lead)
    };
    Ok(SequenceOracle::new(base, seed, Box::new(step)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};
    use crate::parse::{parse, to_poly, to_sum_expr};
    use crate::sums::SSum;

    fn pol(s: &str) -> Polynomial {
        to_poly(&parse(s).unwrap()).unwrap()
    }

    fn sexpr(s: &str) -> SumExpression {
        to_sum_expr(&parse(s).unwrap(), Var::N).unwrap()
    }

    #[test]
    fn shift_minus_one_on_harmonic() {
        let op = RecOperator::new(vec![Polynomial::int(-1), Polynomial::one()], Var::N);
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let r = op.apply(&s1, None);
        assert_eq!(r, sexpr("1/(N+1)"));
    }

    #[test]
    fn apply_to_zero_is_zero() {
        let op = RecOperator::new(vec![pol("N^2+1"), pol("-3*N"), pol("N+5")], Var::N);
        let r = op.apply(&SumExpression::zero(Var::N), None);
        assert!(r.is_zero());
    }

    #[test]
    fn printed_second_order_recurrence_for_the_pole_term() {
        let op = RecOperator::new(
            vec![
                pol("(16*N^3+144*N^2+413*N+384)*(N+1)^2"),
                pol("-(N+2)*(2*N+5)*(16*N^3+112*N^2+221*N+113)"),
                pol("(N+3)^2*(16*N^3+96*N^2+173*N+99)"),
            ],
            Var::N,
        );
        let f = sexpr(
            "(1/12-z2/8)*(1-4*N)/(N+1) + (-14*N-13)/(N+1)^2 + (4*N-1)*S[1](N)/(N+1) \
             + (1-4*N)*S[1](N)^2/(6*(N+1)) + (14*N+13)*S[1](N)/(3*(N+1)^2) \
             + (175*N^2+334*N+155)/(12*(N+1)^3) + (1-4*N)*S[2](N)/(6*(N+1)) \
             + z2/(8*(N+1))",
        );
        let rhs = sexpr(
            "z2*(4*N^2+21*N+29)/2 \
             + (-64*N^5-500*N^4-1133*N^3+203*N^2+3516*N+3090)/(3*(N+2)*(N+3))",
        );
        assert_eq!(op.apply(&f, None), rhs);
    }

    #[test]
    fn content_and_sign_normalization() {
        let a = RecOperator::new(vec![pol("2*N+2"), pol("-4*(N+1)*(N+2)")], Var::N);
        let b = RecOperator::new(vec![pol("-(N+1)"), pol("2*(N+1)*(N+2)")], Var::N);
        assert_eq!(a, b);
        assert_eq!(a.coeffs()[0], pol("-1"));
        assert_eq!(a.coeffs()[1], pol("2*N+4"));
    }

    #[test]
    fn offset_records_trimmed_shifts() {
        let op = RecOperator::new(
            vec![Polynomial::zero(), pol("N"), pol("N+1")],
            Var::N,
        );
        assert_eq!(op.offset(), 1);
        assert_eq!(op.order(), 1);
        // acts as N*e(N+1) + (N+1)*e(N+2)
        let e = sexpr("N");
        assert_eq!(op.apply(&e, None), sexpr("N*(N+1) + (N+1)*(N+2)"));
    }

    #[test]
    fn eps_taylor_coefficients_of_the_order_two_operator() {
        let op = RecOperator::new(
            vec![
                pol("2*(N+1)^2"),
                pol("3*ep^2+3*ep*N+9*ep-4*N^2-12*N-8"),
                pol("-(2*ep-N-1)*(ep+2*N+6)"),
            ],
            Var::N,
        );
        let at0 = op.specialize_eps(0);
        assert_eq!(at0[0], pol("2*(N+1)^2"));
        assert_eq!(at0[1], pol("-4*N^2-12*N-8"));
        assert_eq!(at0[2], pol("(N+1)*(2*N+6)"));

        // reassembly: sum over k of ep^k * (taylor slice) gives back a_i
        for (i, a) in op.coeffs().iter().enumerate() {
            let mut acc = Polynomial::zero();
            for k in 0..4u32 {
                let part = op.specialize_eps(k)[i].clone();
                acc = &acc + &(&part * &Polynomial::var(Var::Ep).pow(k));
            }
            assert_eq!(&acc, a);
        }
    }

    #[test]
    fn eps_free_and_eps_multiple_specializations() {
        let free = RecOperator::new(vec![pol("-1"), pol("1")], Var::N);
        assert_eq!(free.specialize_eps(0), free.coeffs().to_vec());
        assert!(free.specialize_eps(1).iter().all(|p| p.is_zero()));
        assert_eq!(free.eps_valuation(), 0);

        let scaled = RecOperator::new_raw(vec![pol("-ep"), pol("ep")], Var::N);
        assert!(scaled.specialize_eps(0).iter().all(|p| p.is_zero()));
        assert_eq!(scaled.eps_valuation(), 1);
    }

    #[test]
    fn forward_iteration_reproduces_inverse_factorials() {
        // (N+1) F(N+1) = F(N), F(0) = 1
        let op = RecOperator::new(vec![pol("-1"), pol("N+1")], Var::N);
        let oracle = rec_oracle(&op, None, |_| Ok(Q::zero()), 0, vec![qi(1)]).unwrap();
        let mut fact = qi(1);
        for n in 1..=15i64 {
            fact *= qi(n);
            assert_eq!(oracle.value(n).unwrap(), qi(1) / &fact);
        }
    }

    #[test]
    fn oracle_matches_symbolic_application() {
        // random-ish op applied to S1(N): oracle fiber vs exact values
        let op = RecOperator::new(vec![pol("N+3"), pol("-2*N"), pol("N^2+1")], Var::N);
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let rhs_closed = op.apply(&s1, None);
        let rhs = move |n: i64| {
            rhs_closed
                .eval_exact(n)
                .map_err(|_| OracleError::Eval(n))
                .and_then(|c| c.as_q().ok_or(OracleError::Eval(n)))
        };
        let seed: Vec<Q> = (1..=2)
            .map(|n| SumExpression::from_ssum(SSum::harmonic(&[1], Var::N))
                .eval_exact(n)
                .unwrap()
                .as_q()
                .unwrap())
            .collect();
        let oracle = rec_oracle(&op, None, rhs, 1, seed).unwrap();
        for n in 1..=20i64 {
            let expect = s1.eval_exact(n).unwrap().as_q().unwrap();
            assert_eq!(oracle.value(n).unwrap(), expect);
        }
    }

    #[test]
    fn series_application_tracks_eps_coefficients() {
        // op = ep*(shift - 1) applied to constant-in-ep series S1(N)
        let op = RecOperator::new_raw(vec![pol("-ep"), pol("ep")], Var::N);
        let s = EpsSeries::from_expr(
            SumExpression::from_ssum(SSum::harmonic(&[1], Var::N)),
            0,
        );
        let r = op.apply_to_series(&s);
        assert_eq!(r.coeff(1).unwrap(), sexpr("1/(N+1)"));
        assert!(r.coeff(0).unwrap().is_zero());
    }

    #[test]
    fn specialize_at_rational_eps() {
        let op = RecOperator::new(vec![pol("ep-1"), pol("ep+N")], Var::N);
        let at = op.at_eps(&q(1, 3));
        assert_eq!(at.coeffs()[0], pol("-2/3"));
        assert_eq!(at.coeffs()[1], pol("N+1/3"));
    }
}
