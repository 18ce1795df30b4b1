//! Epsilon expansion of Gamma and Beta factors into harmonic sums.
//!
//! Two expansion anchors cover everything here: Gamma(1 + r ep) in terms
//! of gamma_E and zeta values, and Gamma(v + p + r ep) relative to the
//! symbolic prefactor Gamma(v + p) in terms of S_j(v + p - 1). Poles at
//! nonpositive integer offsets are peeled off with Gamma(z) = Gamma(z+1)/z
//! before expanding at a regular point.

use crate::algebra::{q_to_i64, qi, Polynomial, Q, RationalFunction, Var};
use crate::constants::{ConstExpr, FormalConstant};
use crate::parse::{to_series, Ast, Node, ParseError};
use crate::series::{poly_in_eps, EpsSeries, SeriesError};
use crate::sums::{pow_q, SSum, SumExpression};
use crate::telescoping::{split_term, HyperTerm, TeleError};
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GammaError {
    #[error("variable-free gamma argument must be an integer plus r*ep: {0}")]
    NonIntegerOffset(String),
    #[error("unsupported gamma argument: {0}")]
    UnsupportedArg(String),
    #[error("gamma pole at a nonpositive integer with no ep offset: {0}")]
    Pole(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Term(#[from] TeleError),
    #[error("{0}")]
    Parse(String),
}

impl From<ParseError> for GammaError {
    fn from(e: ParseError) -> GammaError {
        GammaError::Parse(e.to_string())
    }
}

/// Symbolic prefactor Gamma(var + offset) left unexpanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaToken {
    pub var: Var,
    pub offset: i64,
}

/// Gamma(1 + r ep), known through ep^order:
/// exp(-eg r ep + sum_{j>=2} (-1)^j zeta_j (r ep)^j / j).
pub fn gamma_one_plus(r: &Q, var: Var, order: i64) -> EpsSeries {
    assert!(order >= 0);
    if r.is_zero() {
        return EpsSeries::one(var);
    }
    let cap = order + 1;
    if cap <= 1 {
        return EpsSeries::one(var).truncate(cap);
    }
    let mut coeffs: Vec<SumExpression> = Vec::new();
    for j in 1..cap {
        let c = if j == 1 {
            ConstExpr::from_symbol(FormalConstant::EulerGamma).scale(&-r.clone())
        } else {
            let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
            ConstExpr::from_symbol(FormalConstant::zeta(j as u32))
                .scale(&(sign * pow_q(r, j) / qi(j)))
        };
        coeffs.push(SumExpression::from_const_expr(var, &c));
    }
    let log = EpsSeries::new_truncated(1, coeffs, var);
    log.exp(cap).expect("positive start by construction")
}

/// Gamma(c0 + r ep) for integer c0, known through ep^order. Nonpositive
/// c0 costs a simple 1/ep pole via the functional equation.
pub fn gamma_const(c0: i64, r: &Q, var: Var, order: i64) -> Result<EpsSeries, GammaError> {
    if r.is_zero() {
        if c0 >= 1 {
            let mut f = Q::one();
            for i in 2..c0 {
                f *= qi(i);
            }
            return Ok(EpsSeries::from_q(f, var));
        }
        return Err(GammaError::Pole(format!("Gamma[{c0}]")));
    }
    let work = order + 2;
    let factor = |i: i64| -> EpsSeries {
        let p = &Polynomial::int(i) + &Polynomial::var(Var::Ep).scale(r);
        poly_in_eps(&p, var)
    };
    let mut s = gamma_one_plus(r, var, work);
    if c0 >= 2 {
        for i in 1..c0 {
            s = s.mul(&factor(i));
        }
    } else if c0 <= 0 {
        for i in c0..=0 {
            let f = factor(i);
            let f = if i == 0 { f } else { f.truncate(work + 1) };
            s = s.div(&f)?;
        }
    }
    Ok(s.truncate(order + 1))
}

/// Gamma(v + p + r ep) = Gamma(v + p) * series, the series in terms of
/// S_j(v + p - 1) synchronized to v, known through ep^order. Valid where
/// v + p stays positive.
pub fn gamma_var(v: Var, p: i64, r: &Q, order: i64) -> (GammaToken, EpsSeries) {
    assert!(order >= 0);
    let token = GammaToken { var: v, offset: p };
    if r.is_zero() {
        return (token, EpsSeries::one(v));
    }
    let cap = order + 1;
    if cap <= 1 {
        return (token, EpsSeries::one(v).truncate(cap));
    }
    let mut coeffs: Vec<SumExpression> = Vec::new();
    for j in 1..cap {
        // (-1)^(j-1) (r ep)^j S_j(v+p-1) / j
        let sign = if j % 2 == 1 { Q::one() } else { -Q::one() };
        let sj = SumExpression::from_ssum(SSum::harmonic(&[j], v)).shift(p - 1);
        coeffs.push(sj.scale_q(&(sign * pow_q(r, j) / qi(j))));
    }
    let log = EpsSeries::new_truncated(1, coeffs, v);
    let tail = log.exp(cap).expect("positive start by construction");
    (token, gamma_one_plus(r, v, order).mul(&tail).truncate(cap))
}

/// Expansion of Gamma(var + p + r ep) when a shift variable is present,
/// Gamma(p + r ep) otherwise. The symbolic token is None in the
/// variable-free case.
pub fn gamma_expand(
    p: i64,
    shift_var: Option<Var>,
    r: &Q,
    series_var: Var,
    order: i64,
) -> Result<(Option<GammaToken>, EpsSeries), GammaError> {
    match shift_var {
        Some(v) => {
            let (tok, s) = gamma_var(v, p, r, order);
            Ok((Some(tok), s))
        }
        None => Ok((None, gamma_const(p, r, series_var, order)?)),
    }
}

/// ep-linear pieces of a Gamma argument already vetted by the
/// hypergeometric layer.
struct ArgParts {
    vars: Vec<(Var, i64)>,
    c0: Q,
    r: Q,
}

fn arg_parts(arg: &Polynomial) -> ArgParts {
    let r = arg
        .coeff_of(Var::Ep, 1)
        .as_constant()
        .unwrap_or_else(Q::zero);
    let mut vars = Vec::new();
    for &v in &[Var::K, Var::N, Var::X] {
        if let Some(c) = arg.coeff_of(v, 1).as_constant() {
            if let Some(m) = q_to_i64(&c) {
                if m != 0 {
                    vars.push((v, m));
                }
            }
        }
    }
    let c0 = arg.eval(&|_| Some(Q::zero())).unwrap_or_else(Q::zero);
    ArgParts { vars, c0, r }
}

fn series_pow(s: &EpsSeries, e: i64, var: Var) -> Result<EpsSeries, SeriesError> {
    if e == 0 {
        return Ok(EpsSeries::one(var));
    }
    let base = if e < 0 { s.inverse()? } else { s.clone() };
    let mut acc = base.clone();
    for _ in 1..e.abs() {
        acc = acc.mul(&base);
    }
    Ok(acc)
}

/// Splits a summand into an ep-free hypergeometric part and a Laurent
/// series in ep with coefficients in the summation variable `sv`, known
/// through ep^order. All rational content lands in the series; the
/// hypergeometric part keeps signs, geometric factors, and the
/// irreducible Gamma prefactors.
pub fn summand_expand(
    node: &Node,
    sv: Var,
    order: i64,
) -> Result<(HyperTerm, EpsSeries), GammaError> {
    let (t, scalars) = split_term(node)?;

    enum Piece {
        Const { c0: i64, r: Q, exp: i64 },
        Shifted { p: i64, r: Q, exp: i64 },
        Scalar { node: Node, exp: i64 },
    }

    let mut pieces: Vec<Piece> = Vec::new();
    let mut hyper = HyperTerm::one();
    for v in t.sign_vars() {
        hyper.mul_sign(*v);
    }
    for (v, c) in t.geom_factors() {
        hyper.mul_geom(*v, c);
    }

    for (arg, e) in t.gammas() {
        if !arg.contains_var(Var::Ep) {
            hyper.mul_gamma(arg.clone(), *e)?;
            continue;
        }
        let parts = arg_parts(arg);
        let offset = || {
            q_to_i64(&parts.c0)
                .filter(|_| parts.c0.is_integer())
                .ok_or_else(|| GammaError::NonIntegerOffset(arg.to_string()))
        };
        match parts.vars.as_slice() {
            [] => pieces.push(Piece::Const {
                c0: offset()?,
                r: parts.r.clone(),
                exp: *e,
            }),
            [(v, 1)] if *v == sv => pieces.push(Piece::Shifted {
                p: offset()?,
                r: parts.r.clone(),
                exp: *e,
            }),
            _ => return Err(GammaError::UnsupportedArg(arg.to_string())),
        }
    }
    for (n, e) in scalars {
        pieces.push(Piece::Scalar { node: n, exp: e });
    }

    // net starting order decides how wide each factor must expand
    let rational = t.rational_part().clone();
    let rat_start = eps_valuation(rational.num()) - eps_valuation(rational.den());
    let mut net_start = rat_start;
    for p in &pieces {
        if let Piece::Const { c0, r, exp } = p {
            if *c0 <= 0 && !r.is_zero() {
                net_start -= exp;
            }
        }
    }
    let width = (order + 1 - net_start).max(1);

    let mut series = expand_rational(&rational, sv, width)?;
    for p in &pieces {
        let factor = match p {
            Piece::Const { c0, r, exp } => {
                let s = gamma_const(*c0, r, sv, width - 1)?;
                series_pow(&s, *exp, sv)?
            }
            Piece::Shifted { p, r, exp } => {
                let (tok, s) = gamma_var(sv, *p, r, width - 1);
                if *exp != 0 {
                    hyper.mul_gamma(
                        &Polynomial::var(tok.var) + &Polynomial::int(tok.offset),
                        *exp,
                    )?;
                }
                series_pow(&s, *exp, sv)?
            }
            Piece::Scalar { node, exp } => {
                let s = scalar_series(node, sv, width)?;
                series_pow(&s, *exp, sv)?
            }
        };
        series = series.mul(&factor);
    }

    // fold rational quotients from same-variable prefactor families into
    // the series and hand back a rational-free hypergeometric part
    let mut reduced = hyper.reduce_tokens(sv);
    let extra = reduced.rational_part().clone();
    if !extra.is_one() {
        series = series.scale_rat(&extra);
        reduced.mul_rat(&extra.inv().expect("nonzero by construction"));
    }
    Ok((reduced, series.truncate(order + 1)))
}

/// Var-free factors that escaped the rational layer, Exp[...] foremost.
fn scalar_series(node: &Node, sv: Var, width: i64) -> Result<EpsSeries, GammaError> {
    if let Ast::Call { head, args, .. } = &node.ast {
        if head == "Exp" && args.len() == 1 {
            let arg = to_series(&args[0], sv)?;
            return Ok(arg.exp(width)?);
        }
    }
    Ok(to_series(node, sv)?)
}

fn eps_valuation(p: &Polynomial) -> i64 {
    p.degree_in(Var::Ep)
        .map(|top| {
            (0..=top)
                .find(|&j| !p.coeff_of(Var::Ep, j).is_zero())
                .unwrap_or(0) as i64
        })
        .unwrap_or(0)
}

/// A rational function of (vars, ep) as an ep-series with closed-form
/// coefficients, `width` orders from its leading power.
fn expand_rational(
    r: &RationalFunction,
    sv: Var,
    width: i64,
) -> Result<EpsSeries, GammaError> {
    if !r.num().contains_var(Var::Ep) && !r.den().contains_var(Var::Ep) {
        let e = SumExpression::from_rat(sv, r.clone());
        return Ok(EpsSeries::from_expr(e, 0));
    }
    let num = poly_in_eps(r.num(), sv);
    let dv = eps_valuation(r.den());
    let dtop = r.den().degree_in(Var::Ep).map_or(0, |d| d as i64);
    let den = poly_in_eps(r.den(), sv);
    // a monomial denominator inverts exactly, anything wider is cut to
    // the window the quotient needs
    let den = if dtop > dv { den.truncate(dv + width) } else { den };
    Ok(num.div(&den)?)
}
