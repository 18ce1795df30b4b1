//! Hypergeometric terms and creative telescoping.
//!
//! A term here is a product of sign flips, geometric factors, Gamma
//! factors with arguments linear in the discrete variables, and a
//! rational function. Shift quotients in every variable are rational,
//! which is all Gosper's and Zeilberger's algorithms need.

use crate::algebra::{
    dispersion_set, poly_gcd, poly_lcm, q_is_integer, q_to_i64, Mat, Polynomial, Q,
    RationalFunction, Var,
};
use crate::operators::{remove_content, RecOperator};
use crate::parse::{to_poly, to_q, Ast, Node};
use crate::sums::pow_q;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TeleError {
    #[error("gamma argument must be linear with integer coefficients on discrete variables: {0}")]
    BadGammaArg(String),
    #[error("factor is not hypergeometric: {0}")]
    NotHypergeometric(String),
    #[error("no telescoping operator up to order {0}")]
    NoOperator(usize),
    #[error("boundary term hits a pole of the certificate at {0}")]
    SingularBoundary(String),
    #[error("substitution must be integer-linear here: {0}")]
    BadSubst(String),
    #[error("numeric evaluation failed")]
    EvalFailed,
}

fn factorial_q(m: i64) -> Q {
    let mut acc = BigInt::one();
    for i in 2..=m {
        acc *= BigInt::from(i);
    }
    Q::from(acc)
}

/// Gamma(arg + m) / Gamma(arg) as a rational function of the argument.
pub fn gamma_quotient(arg: &Polynomial, m: i64) -> RationalFunction {
    let mut num = Polynomial::one();
    let mut den = Polynomial::one();
    if m >= 0 {
        for i in 0..m {
            num = &num * &(arg + &Polynomial::int(i));
        }
    } else {
        for i in 1..=(-m) {
            den = &den * &(arg - &Polynomial::int(i));
        }
    }
    RationalFunction::new(num, den)
}

fn check_gamma_arg(p: &Polynomial) -> Result<(), TeleError> {
    for (m, c) in p.terms() {
        if m.total_degree() > 1 {
            return Err(TeleError::BadGammaArg(p.to_string()));
        }
        for v in [Var::K, Var::N, Var::X] {
            if *m == crate::algebra::Mono::var(v) && !q_is_integer(c) {
                return Err(TeleError::BadGammaArg(p.to_string()));
            }
        }
        if *m == crate::algebra::Mono::var(Var::T) {
            return Err(TeleError::BadGammaArg(p.to_string()));
        }
    }
    Ok(())
}

/// Linear integer coefficient of `v` in a checked gamma argument.
fn var_coeff(p: &Polynomial, v: Var) -> i64 {
    p.coeff_of(v, 1)
        .as_constant()
        .and_then(|q| q_to_i64(&q))
        .unwrap_or(0)
}

#[derive(Clone, Debug)]
pub struct HyperTerm {
    rational: RationalFunction,
    signs: Vec<Var>,
    geoms: BTreeMap<Var, Q>,
    gammas: Vec<(Polynomial, i64)>,
}

impl HyperTerm {
    pub fn one() -> HyperTerm {
        HyperTerm {
            rational: RationalFunction::one(),
            signs: Vec::new(),
            geoms: BTreeMap::new(),
            gammas: Vec::new(),
        }
    }

    pub fn from_rational(r: RationalFunction) -> HyperTerm {
        let mut t = HyperTerm::one();
        t.rational = r;
        t
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero()
    }

    pub fn rational_part(&self) -> &RationalFunction {
        &self.rational
    }

    pub fn gammas(&self) -> &[(Polynomial, i64)] {
        &self.gammas
    }

    pub fn sign_vars(&self) -> &[Var] {
        &self.signs
    }

    pub fn geom_factors(&self) -> &BTreeMap<Var, Q> {
        &self.geoms
    }

    pub fn mul_rat(&mut self, r: &RationalFunction) {
        self.rational = &self.rational * r;
    }

    pub fn mul_sign(&mut self, v: Var) {
        if let Some(i) = self.signs.iter().position(|&s| s == v) {
            self.signs.remove(i);
        } else {
            self.signs.push(v);
            self.signs.sort();
        }
    }

    /// base^v with any nonzero rational base; signs split off so stored
    /// bases stay positive.
    pub fn mul_geom(&mut self, v: Var, base: &Q) {
        assert!(!base.is_zero(), "geometric base must be nonzero");
        let mut b = base.clone();
        if b.is_negative() {
            self.mul_sign(v);
            b = -b;
        }
        let cur = self.geoms.remove(&v).unwrap_or_else(Q::one);
        let next = cur * b;
        if !next.is_one() {
            self.geoms.insert(v, next);
        }
    }

    /// Gamma(arg)^exp. Constant integer arguments >= 1 fold into the
    /// rational part at once.
    pub fn mul_gamma(&mut self, arg: Polynomial, exp: i64) -> Result<(), TeleError> {
        if exp == 0 {
            return Ok(());
        }
        check_gamma_arg(&arg)?;
        if let Some(c) = arg.as_constant() {
            if q_is_integer(&c) {
                let m = q_to_i64(&c).ok_or_else(|| TeleError::BadGammaArg(arg.to_string()))?;
                if m >= 1 {
                    let f = pow_q(&factorial_q(m - 1), exp);
                    self.rational = &self.rational * &RationalFunction::from_q(f);
                    return Ok(());
                }
            }
        }
        if let Some(i) = self.gammas.iter().position(|(a, _)| a == &arg) {
            self.gammas[i].1 += exp;
            if self.gammas[i].1 == 0 {
                self.gammas.remove(i);
            }
        } else {
            self.gammas.push((arg, exp));
        }
        Ok(())
    }

    pub fn mul(&self, other: &HyperTerm) -> HyperTerm {
        let mut out = self.clone();
        out.mul_rat(&other.rational);
        for v in &other.signs {
            out.mul_sign(*v);
        }
        for (v, c) in &other.geoms {
            out.mul_geom(*v, c);
        }
        for (arg, e) in &other.gammas {
            out.mul_gamma(arg.clone(), *e).expect("validated before");
        }
        out
    }

    /// t with v replaced by v + 1, divided by t. Rational in all
    /// remaining variables and ep.
    pub fn ratio(&self, v: Var) -> Result<RationalFunction, TeleError> {
        let mut r = RationalFunction::one();
        if self.signs.contains(&v) {
            r = &r * &RationalFunction::from_q(-Q::one());
        }
        if let Some(c) = self.geoms.get(&v) {
            r = &r * &RationalFunction::from_q(c.clone());
        }
        if self.rational.contains_var(v) {
            r = &r * &(&self.rational.shift(v, 1) / &self.rational);
        }
        for (arg, e) in &self.gammas {
            let m = var_coeff(arg, v);
            if m != 0 {
                let q = gamma_quotient(arg, m)
                    .pow(*e)
                    .map_err(|_| TeleError::BadGammaArg(arg.to_string()))?;
                r = &r * &q;
            }
        }
        Ok(r)
    }

    /// Substitute an integer-linear polynomial for v.
    pub fn subst(&self, v: Var, p: &Polynomial) -> Result<HyperTerm, TeleError> {
        let lin_coeffs: Vec<(Var, i64)> = Var::ALL
            .iter()
            .filter_map(|&w| {
                let c = p.coeff_of(w, 1).as_constant()?;
                q_to_i64(&c).filter(|&m| m != 0).map(|m| (w, m))
            })
            .collect();
        let c0 = p.eval(&|_| Some(Q::zero()));
        let needs_int = self.signs.contains(&v) || self.geoms.contains_key(&v);
        if needs_int {
            let ok_lin = p
                .terms()
                .all(|(m, c)| m.total_degree() == 0 || (m.total_degree() == 1 && q_is_integer(c)));
            let c0q = c0.clone().filter(|q| q_is_integer(q));
            if !ok_lin || c0q.is_none() {
                return Err(TeleError::BadSubst(p.to_string()));
            }
        }
        let mut out = HyperTerm::one();
        out.mul_rat(&self.rational.subst(v, p));
        for s in &self.signs {
            if *s == v {
                for (w, m) in &lin_coeffs {
                    if m.is_odd() {
                        out.mul_sign(*w);
                    }
                }
                let c0i = q_to_i64(&c0.clone().unwrap()).ok_or_else(|| {
                    TeleError::BadSubst(p.to_string())
                })?;
                if c0i.is_odd() {
                    out.mul_rat(&RationalFunction::from_q(-Q::one()));
                }
            } else {
                out.mul_sign(*s);
            }
        }
        for (w, c) in &self.geoms {
            if *w == v {
                for (u, m) in &lin_coeffs {
                    out.mul_geom(*u, &pow_q(c, *m));
                }
                let c0i = q_to_i64(&c0.clone().unwrap()).ok_or_else(|| {
                    TeleError::BadSubst(p.to_string())
                })?;
                out.mul_rat(&RationalFunction::from_q(pow_q(c, c0i)));
            } else {
                out.mul_geom(*w, c);
            }
        }
        for (arg, e) in &self.gammas {
            out.mul_gamma(arg.subst(v, p), *e)?;
        }
        Ok(out)
    }

    pub fn shift(&self, v: Var, j: i64) -> HyperTerm {
        self.subst(v, &(&Polynomial::var(v) + &Polynomial::int(j)))
            .expect("shift is integer-linear")
    }

    /// Rewrites every Gamma token whose argument is `v` plus an integer
    /// constant against the family's minimal offset, folding the rising
    /// factorial quotients into the rational part.
    pub fn reduce_tokens(&self, v: Var) -> HyperTerm {
        let vp = Polynomial::var(v);
        let mut family: BTreeMap<i64, i64> = BTreeMap::new();
        let mut out = self.clone();
        out.gammas.clear();
        for (arg, e) in &self.gammas {
            let diff = arg - &vp;
            match diff.as_constant().and_then(|c| q_to_i64(&c)) {
                Some(p) => *family.entry(p).or_insert(0) += e,
                None => out.gammas.push((arg.clone(), *e)),
            }
        }
        family.retain(|_, e| *e != 0);
        let Some(&p0) = family.keys().next() else {
            return out;
        };
        let base = &vp + &Polynomial::int(p0);
        let mut net = 0i64;
        for (p, e) in family {
            net += e;
            if p != p0 {
                let q = gamma_quotient(&base, p - p0)
                    .pow(e)
                    .expect("rising factorial quotients are nonzero");
                out.rational = &out.rational * &q;
            }
        }
        if net != 0 {
            out.mul_gamma(base, net).expect("argument already validated");
        }
        out
    }

    /// The rational part, when no sign, geometric, or Gamma factors
    /// remain.
    pub fn as_pure_rational(&self) -> Option<&RationalFunction> {
        (self.signs.is_empty() && self.geoms.is_empty() && self.gammas.is_empty())
            .then_some(&self.rational)
    }

    /// True when a constant nonpositive-integer Gamma argument sits in
    /// the denominator with net negative exponent, or the rational part
    /// vanishes identically.
    pub fn is_structurally_zero(&self) -> bool {
        if self.rational.is_zero() {
            return true;
        }
        let net: i64 = self
            .gammas
            .iter()
            .filter_map(|(arg, e)| {
                let c = arg.as_constant()?;
                let m = q_to_i64(&c)?;
                if q_is_integer(&arg.as_constant().unwrap()) && m <= 0 {
                    Some(*e)
                } else {
                    None
                }
            })
            .sum();
        net < 0
    }

    /// Exact value when every Gamma argument comes out a rational
    /// integer. Nonpositive arguments with net negative exponent give
    /// zero; anything irrational or genuinely singular gives None.
    pub fn eval_q(&self, assign: &dyn Fn(Var) -> Option<Q>) -> Option<Q> {
        if self.rational.is_zero() {
            return Some(Q::zero());
        }
        let mut acc = self.rational.eval(assign).ok()?;
        for v in &self.signs {
            let x = assign(*v)?;
            if !q_is_integer(&x) {
                return None;
            }
            if q_to_i64(&x)?.is_odd() {
                acc = -acc;
            }
        }
        for (v, c) in &self.geoms {
            let x = assign(*v)?;
            if !q_is_integer(&x) {
                return None;
            }
            acc *= pow_q(c, q_to_i64(&x)?);
        }
        let mut pole = 0i64;
        let mut seen_pole = false;
        for (arg, e) in &self.gammas {
            let x = arg.eval(assign)?;
            if !q_is_integer(&x) {
                return None;
            }
            let m = q_to_i64(&x)?;
            if m >= 1 {
                acc *= pow_q(&factorial_q(m - 1), *e);
            } else {
                pole += e;
                seen_pole = true;
            }
        }
        if pole < 0 {
            return Some(Q::zero());
        }
        if pole > 0 || seen_pole {
            return None;
        }
        Some(acc)
    }
}

impl fmt::Display for HyperTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for v in &self.signs {
            parts.push(format!("(-1)^{}", v.name()));
        }
        for (v, c) in &self.geoms {
            if c.is_integer() {
                parts.push(format!("{}^{}", c, v.name()));
            } else {
                parts.push(format!("({})^{}", c, v.name()));
            }
        }
        if !self.rational.is_one() || (self.signs.is_empty() && self.geoms.is_empty() && self.gammas.is_empty()) {
            parts.push(format!("({})", self.rational));
        }
        for (arg, e) in &self.gammas {
            if *e == 1 {
                parts.push(format!("Gamma[{arg}]"));
            } else {
                parts.push(format!("Gamma[{arg}]^{e}"));
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Splits a parsed product into a hypergeometric term and leftover
/// variable-free factors (exponentials and the like) that scale the
/// whole sequence without touching shift quotients.
pub fn split_term(node: &Node) -> Result<(HyperTerm, Vec<(Node, i64)>), TeleError> {
    let mut t = HyperTerm::one();
    let mut scalars = Vec::new();
    collect_factors(node, 1, &mut t, &mut scalars)?;
    Ok((t, scalars))
}

/// Reads the term syntax into a [`HyperTerm`]; variable-free factors it
/// cannot absorb (such as Exp[..]) are rejected here, use [`split_term`]
/// when those may be present.
pub fn hyper_from_term(node: &Node) -> Result<HyperTerm, TeleError> {
    let (t, scalars) = split_term(node)?;
    if let Some((n, _)) = scalars.first() {
        return Err(TeleError::NotHypergeometric(format!(
            "variable-free factor at {}:{} needs split_term",
            n.line, n.col
        )));
    }
    Ok(t)
}

fn node_is_var_free(node: &Node) -> bool {
    match &node.ast {
        Ast::Num(_) => true,
        Ast::Sym(s) => !matches!(s.as_str(), "k" | "N" | "x"),
        Ast::Call { args, applied, .. } => {
            args.iter().all(node_is_var_free)
                && applied.as_ref().map_or(true, |a| node_is_var_free(a))
        }
        Ast::List(xs) => xs.iter().all(node_is_var_free),
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) | Ast::Pow(a, b) => {
            node_is_var_free(a) && node_is_var_free(b)
        }
        Ast::Neg(a) | Ast::Factorial(a) => node_is_var_free(a),
    }
}

fn as_int(node: &Node) -> Option<i64> {
    use num_traits::ToPrimitive;
    match &node.ast {
        Ast::Num(n) => n.to_i64(),
        Ast::Neg(a) => as_int(a).map(|v| -v),
        _ => None,
    }
}

fn collect_factors(
    node: &Node,
    exp: i64,
    t: &mut HyperTerm,
    scalars: &mut Vec<(Node, i64)>,
) -> Result<(), TeleError> {
    let bad = |n: &Node| {
        TeleError::NotHypergeometric(format!("unsupported factor at {}:{}", n.line, n.col))
    };
    match &node.ast {
        Ast::Mul(a, b) => {
            collect_factors(a, exp, t, scalars)?;
            collect_factors(b, exp, t, scalars)
        }
        Ast::Div(a, b) => {
            collect_factors(a, exp, t, scalars)?;
            collect_factors(b, -exp, t, scalars)
        }
        Ast::Neg(a) => {
            if exp.is_odd() {
                t.mul_rat(&RationalFunction::from_q(-Q::one()));
            }
            collect_factors(a, exp, t, scalars)
        }
        Ast::Factorial(a) => {
            let p = to_poly(a).map_err(|_| bad(node))?;
            t.mul_gamma(&p + &Polynomial::one(), exp)
        }
        Ast::Pow(base, e) => {
            // rational base with a variable exponent is geometric
            if let Ok(c) = to_q(base) {
                let p = to_poly(e).map_err(|_| bad(node))?;
                if !p.is_constant() {
                    let c = pow_q(&c, exp);
                    if c.is_zero() {
                        return Err(bad(node));
                    }
                    let mut c0 = Q::zero();
                    for (m, q) in p.terms() {
                        if m.is_one() {
                            c0 = q.clone();
                        } else if m.total_degree() != 1 {
                            return Err(bad(node));
                        }
                    }
                    for &w in Var::ALL.iter() {
                        if let Some(mq) = p.coeff_of(w, 1).as_constant() {
                            if let Some(m) = q_to_i64(&mq) {
                                if m != 0 {
                                    t.mul_geom(w, &pow_q(&c, m));
                                }
                            } else {
                                return Err(bad(node));
                            }
                        }
                    }
                    if !c0.is_zero() {
                        let c0 = q_to_i64(&c0).ok_or_else(|| bad(node))?;
                        t.mul_rat(&RationalFunction::from_q(pow_q(&c, c0)));
                    }
                    return Ok(());
                }
            }
            let m = as_int(e).ok_or_else(|| bad(node))?;
            collect_factors(base, exp * m, t, scalars)
        }
        Ast::Call { head, args, .. } => match (head.as_str(), args.len()) {
            ("Gamma", 1) => {
                let p = to_poly(&args[0]).map_err(|_| bad(node))?;
                t.mul_gamma(p, exp)
            }
            ("Beta", 2) => {
                let a = to_poly(&args[0]).map_err(|_| bad(node))?;
                let b = to_poly(&args[1]).map_err(|_| bad(node))?;
                t.mul_gamma(a.clone(), exp)?;
                t.mul_gamma(b.clone(), exp)?;
                t.mul_gamma(&a + &b, -exp)
            }
            ("Binomial", 2) => {
                let a = to_poly(&args[0]).map_err(|_| bad(node))?;
                let b = to_poly(&args[1]).map_err(|_| bad(node))?;
                if a.contains_var(Var::Ep) || b.contains_var(Var::Ep) {
                    return Err(bad(node));
                }
                let one = Polynomial::one();
                t.mul_gamma(&a + &one, exp)?;
                t.mul_gamma(&b + &one, -exp)?;
                t.mul_gamma(&(&a - &b) + &one, -exp)
            }
            ("Exp", 1) => {
                if node_is_var_free(node) {
                    scalars.push((node.clone(), exp));
                    Ok(())
                } else {
                    Err(bad(node))
                }
            }
            _ => Err(bad(node)),
        },
        // plain rational content
        _ => match crate::parse::to_ratfun(node) {
            Ok(r) => {
                if r.is_zero() {
                    return Err(bad(node));
                }
                let r = r.pow(exp).map_err(|_| bad(node))?;
                t.mul_rat(&r);
                Ok(())
            }
            Err(_) => {
                if node_is_var_free(node) {
                    scalars.push((node.clone(), exp));
                    Ok(())
                } else {
                    Err(bad(node))
                }
            }
        },
    }
}

/// Gosper-Petkovsek decomposition: r = (a/b) * c(v+1)/c(v) with
/// gcd(a(v), b(v+j)) = 1 for every j >= 0.
pub(crate) fn gp_decompose(
    num: Polynomial,
    den: Polynomial,
    v: Var,
) -> (Polynomial, Polynomial, Polynomial) {
    let mut a = num;
    let mut b = den;
    let mut c = Polynomial::one();
    for j in dispersion_set(&a, &b, v) {
        let g = poly_gcd(&a, &b.shift(v, j));
        if g.is_constant() {
            continue;
        }
        a = a.divide_exact(&g).expect("gcd divides");
        b = b.divide_exact(&g.shift(v, -j)).expect("gcd divides");
        for i in 1..=j {
            c = &c * &g.shift(v, -i);
        }
    }
    (a, b, c)
}

/// Degree bound for polynomial x with a(v)x(v+1) - b(v)x(v) of degree
/// `deg_rhs`. None when no nonnegative degree is possible.
fn x_degree_bound(a: &Polynomial, b: &Polynomial, deg_rhs: i64, v: Var) -> Option<i64> {
    let da = a.degree_in(v).map_or(0, |d| d as i64);
    let db = b.degree_in(v).map_or(0, |d| d as i64);
    let s = da.max(db);
    let la = a.leading_coeff_in(v);
    let lb = b.leading_coeff_in(v);
    let bound = if da != db || la != lb {
        deg_rhs - s
    } else {
        let d1 = deg_rhs - s + 1;
        let a1 = if s >= 1 { a.coeff_of(v, s as u32 - 1) } else { Polynomial::zero() };
        let b1 = if s >= 1 { b.coeff_of(v, s as u32 - 1) } else { Polynomial::zero() };
        let d2 = (&b1 - &a1)
            .divide_exact(&la)
            .and_then(|p| p.as_constant())
            .filter(q_is_integer)
            .and_then(|q| q_to_i64(&q));
        match d2 {
            Some(d2) if d2 >= 0 => d1.max(d2),
            _ => d1,
        }
    };
    (bound >= 0).then_some(bound)
}

/// Rows of k-power coefficients for the given column polynomials.
fn k_coefficient_rows(cols: &[Polynomial], v: Var) -> Vec<Vec<RationalFunction>> {
    let height = cols
        .iter()
        .map(|p| p.degree_in(v).map_or(0, |d| d as usize) + 1)
        .max()
        .unwrap_or(1);
    let mut rows = vec![vec![RationalFunction::zero(); cols.len()]; height];
    for (j, p) in cols.iter().enumerate() {
        for (i, c) in p.coeffs_in(v).into_iter().enumerate() {
            rows[i][j] = RationalFunction::from_poly(c);
        }
    }
    rows
}

fn poly_pow_shift(v: Var, m: usize, shift: i64) -> Polynomial {
    (&Polynomial::var(v) + &Polynomial::int(shift)).pow(m as u32)
}

/// Certificate R with R(v+1) r(v) - R(v) = 1 when the term with shift
/// quotient r has a hypergeometric antidifference, None otherwise.
pub fn gosper(r: &RationalFunction, v: Var) -> Option<RationalFunction> {
    let (a, b, c) = gp_decompose(r.num().clone(), r.den().clone(), v);
    let bsh = b.shift(v, -1);
    let deg_c = c.degree_in(v).map_or(0, |d| d as i64);
    let bound = x_degree_bound(&a, &bsh, deg_c, v)?;
    let cols: Vec<Polynomial> = (0..=bound as usize)
        .map(|m| &(&a * &poly_pow_shift(v, m, 1)) - &(&bsh * &poly_pow_shift(v, m, 0)))
        .collect();
    let mut rows = k_coefficient_rows(&cols, v);
    let rhs_polys = c.coeffs_in(v);
    let mut rhs = vec![RationalFunction::zero(); rows.len().max(rhs_polys.len())];
    while rows.len() < rhs.len() {
        rows.push(vec![RationalFunction::zero(); cols.len()]);
    }
    for (i, p) in rhs_polys.into_iter().enumerate() {
        rhs[i] = RationalFunction::from_poly(p);
    }
    let x = Mat::from_rows(rows).solve(&rhs)?;
    let mut xp = RationalFunction::zero();
    for (m, coef) in x.iter().enumerate() {
        xp = &xp + &(coef * &RationalFunction::from_poly(poly_pow_shift(v, m, 0)));
    }
    Some(&(&RationalFunction::from_poly(bsh) * &xp) / &RationalFunction::from_poly(c))
}

/// Result of creative telescoping on a definite sum over k up to N.
#[derive(Clone, Debug)]
pub struct Telescoped {
    pub op: RecOperator,
    /// R(N,k) with sum_i a_i t(N+i,k) = R(N,k+1)t(N,k+1) - R(N,k)t(N,k).
    pub certificate: RationalFunction,
    /// Inhomogeneous pieces: coefficient in Q(ep,N) times a term in N.
    pub boundary: Vec<(RationalFunction, HyperTerm)>,
}

/// Zeilberger's algorithm for F(N) = sum_{k=lo}^{N} t(N,k): the minimal
/// operator with polynomial coefficients annihilating F up to boundary
/// terms, plus its certificate.
pub fn zeilberger(
    t: &HyperTerm,
    n: Var,
    k: Var,
    lo: i64,
    max_order: usize,
) -> Result<Telescoped, TeleError> {
    let rk = t.ratio(k)?;
    let rn = t.ratio(n)?;
    for d in 0..=max_order {
        // u_i = t(N+i,k)/t(N,k); clear k-denominators with v
        let mut u = vec![RationalFunction::one()];
        for i in 0..d {
            let next = &u[i] * &rn.shift(n, i as i64);
            u.push(next);
        }
        let mut vden = Polynomial::one();
        for ui in &u {
            vden = poly_lcm(&vden, ui.den());
        }
        let pnum: Vec<Polynomial> = u
            .iter()
            .map(|ui| ui.num() * &vden.divide_exact(ui.den()).expect("lcm divides"))
            .collect();
        let r0 = &rk * &RationalFunction::new(vden.clone(), vden.shift(k, 1));
        let (a, b, c) = gp_decompose(r0.num().clone(), r0.den().clone(), k);
        let bsh = b.shift(k, -1);
        let deg_p = pnum
            .iter()
            .map(|p| p.degree_in(k).map_or(0, |d| d as i64))
            .max()
            .unwrap_or(0);
        let deg_c = c.degree_in(k).map_or(0, |d| d as i64) + deg_p;
        let xdeg = x_degree_bound(&a, &bsh, deg_c, k);
        let ncols_x = xdeg.map_or(0, |b| b as usize + 1);

        let mut cols: Vec<Polynomial> = (0..ncols_x)
            .map(|m| &(&a * &poly_pow_shift(k, m, 1)) - &(&bsh * &poly_pow_shift(k, m, 0)))
            .collect();
        for p in &pnum {
            cols.push(-&(&c * p));
        }
        let rows = k_coefficient_rows(&cols, k);
        let basis = Mat::from_rows(rows).nullspace();
        let Some(sol) = basis
            .into_iter()
            .find(|vcol| vcol[ncols_x..].iter().any(|s| !s.is_zero()))
        else {
            continue;
        };

        // normalize sigma to content-free polynomials, rescale x the same
        let sigma = &sol[ncols_x..];
        let mut den_l = Polynomial::one();
        for s in sigma {
            den_l = poly_lcm(&den_l, s.den());
        }
        let mut sig_polys: Vec<Polynomial> = sigma
            .iter()
            .map(|s| s.num() * &den_l.divide_exact(s.den()).expect("lcm divides"))
            .collect();
        let before = sig_polys.clone();
        remove_content(&mut sig_polys);
        let j = sig_polys.iter().rposition(|p| !p.is_zero()).unwrap();
        let unit = &RationalFunction::from_poly(sig_polys[j].clone())
            / &(&RationalFunction::from_poly(before[j].clone())
                / &RationalFunction::from_poly(den_l.clone()));

        let mut xp = RationalFunction::zero();
        for (m, coef) in sol[..ncols_x].iter().enumerate() {
            xp = &xp + &(coef * &RationalFunction::from_poly(poly_pow_shift(k, m, 0)));
        }
        let cert = &(&unit * &(&RationalFunction::from_poly(bsh) * &xp))
            / &RationalFunction::from_poly(&c * &vden);

        let op = RecOperator::new_raw(sig_polys.clone(), n);

        let mut boundary: Vec<(RationalFunction, HyperTerm)> = Vec::new();
        let npoly = Polynomial::var(n);
        // top: +R(N, N+d+1) t(N, N+d+1)
        let top_at = &npoly + &Polynomial::int(d as i64 + 1);
        let t_top = t.subst(k, &top_at)?;
        if !t_top.is_structurally_zero() {
            if cert.den().subst(k, &top_at).is_zero() {
                return Err(TeleError::SingularBoundary(format!("k = {top_at}")));
            }
            boundary.push((cert.subst(k, &top_at), t_top));
        }
        // bottom: -R(N, lo) t(N, lo)
        let lo_poly = Polynomial::int(lo);
        let t_lo = t.subst(k, &lo_poly)?;
        if !t_lo.is_structurally_zero() {
            if cert.den().subst(k, &lo_poly).is_zero() {
                return Err(TeleError::SingularBoundary(format!("k = {lo}")));
            }
            let coef = -&cert.subst(k, &lo_poly);
            if !coef.is_zero() {
                boundary.push((coef, t_lo));
            }
        }
        // corrections: -sigma_i t(N+i, N+j) for i < j <= d
        for (i, sp) in sig_polys.iter().enumerate() {
            if sp.is_zero() {
                continue;
            }
            for j in (i + 1)..=d {
                let t_ij = t.shift(n, i as i64).subst(k, &(&npoly + &Polynomial::int(j as i64)))?;
                if !t_ij.is_structurally_zero() {
                    boundary.push((
                        -&RationalFunction::from_poly(sp.clone()),
                        t_ij,
                    ));
                }
            }
        }

        return Ok(Telescoped {
            op,
            certificate: cert,
            boundary,
        });
    }
    Err(TeleError::NoOperator(max_order))
}

/// Exact check of sum_i a_i t(N+i,k) = R(N,k+1)t(N,k+1) - R(N,k)t(N,k),
/// both sides divided by t(N,k).
pub fn certificate_verify(
    t: &HyperTerm,
    op: &RecOperator,
    cert: &RationalFunction,
    n: Var,
    k: Var,
) -> Result<bool, TeleError> {
    let rk = t.ratio(k)?;
    let rn = t.ratio(n)?;
    let top = op.offset() + op.order() as i64;
    let mut u = vec![RationalFunction::one()];
    for s in 0..top {
        let next = &u[s as usize] * &rn.shift(n, s);
        u.push(next);
    }
    let mut lhs = RationalFunction::zero();
    for i in 0..=op.order() {
        let s = (op.offset() + i as i64) as usize;
        lhs = &lhs + &(&RationalFunction::from_poly(op.coeff(i).clone()) * &u[s]);
    }
    let rhs = &(&cert.shift(k, 1) * &rk) - cert;
    Ok((&lhs - &rhs).is_zero())
}

/// Table of t(n,k)/t(anchor) for anchor.0 <= n <= n_max and
/// anchor.1 <= k <= k_max, by multiplying shift quotients along the
/// anchor column and then along rows. Extra variables (ep) come from
/// `assign`.
pub fn relative_table(
    t: &HyperTerm,
    n: Var,
    k: Var,
    anchor: (i64, i64),
    n_max: i64,
    k_max: i64,
    assign: &dyn Fn(Var) -> Option<Q>,
) -> Result<HashMap<(i64, i64), Q>, TeleError> {
    let rn = t.ratio(n)?;
    let rk = t.ratio(k)?;
    let (n0, k0) = anchor;
    let mut tab = HashMap::new();
    tab.insert((n0, k0), Q::one());
    let at = |nv: i64, kv: i64| {
        move |v: Var| -> Option<Q> {
            if v == n {
                Some(Q::from(BigInt::from(nv)))
            } else if v == k {
                Some(Q::from(BigInt::from(kv)))
            } else {
                assign(v)
            }
        }
    };
    let mut cur = Q::one();
    for nn in n0..n_max {
        if !cur.is_zero() {
            let step = rn.eval(&at(nn, k0)).map_err(|_| TeleError::EvalFailed)?;
            cur *= step;
        }
        tab.insert((nn + 1, k0), cur.clone());
    }
    for nn in n0..=n_max {
        let mut cur = tab[&(nn, k0)].clone();
        for kk in k0..k_max {
            if !cur.is_zero() {
                let step = rk.eval(&at(nn, kk)).map_err(|_| TeleError::EvalFailed)?;
                cur *= step;
            }
            tab.insert((nn, kk + 1), cur.clone());
        }
    }
    Ok(tab)
}
