//! Nested harmonic and generalized S-sums with canonical normalization.
//!
//! A sum S_{a1,...,ad}(x1,...,xd; n) nests d layers of
//! sum_{i=1}^{m} x^i / i^a. Signed harmonic indices are absorbed into the
//! weights: S_{-2}(n) is stored as index (2, -1). Expressions are kept in a
//! stuffle-linearized basis, so a product of sums never survives
//! normalization; structural equality of normalized expressions is the
//! crate's notion of symbolic equality.

use crate::algebra::{qi, Polynomial, Q, RatFunError, RationalFunction, Var};
use crate::constants::{ConstExpr, ConstMono};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// c^e for rational c and integer e (negative allowed, c != 0).
pub fn pow_q(c: &Q, e: i64) -> Q {
    if e == 0 {
        return Q::one();
    }
    assert!(!c.is_zero() || e > 0, "zero base with negative exponent");
    let mut acc = Q::one();
    for _ in 0..e.unsigned_abs() {
        acc *= c;
    }
    if e < 0 {
        acc = Q::one() / acc;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SSum {
    // (a_i, x_i) pairs, outermost first; a_i >= 1, x_i != 0
    indices: Vec<(u32, Q)>,
    var: Var,
}

impl SSum {
    pub fn new(indices: Vec<(u32, Q)>, var: Var) -> SSum {
        assert!(!indices.is_empty(), "an S-sum needs at least one index");
        for (a, x) in &indices {
            assert!(*a >= 1, "index depth must be positive");
            assert!(!x.is_zero(), "zero weight in an S-sum");
        }
        SSum { indices, var }
    }

    /// Signed harmonic indices: `harmonic(&[1, -2], N)` is S_{1,-2}(N).
    pub fn harmonic(signed: &[i64], var: Var) -> SSum {
        let indices = signed
            .iter()
            .map(|&a| {
                assert!(a != 0, "harmonic index zero is not defined");
                (a.unsigned_abs() as u32, if a < 0 { qi(-1) } else { qi(1) })
            })
            .collect();
        SSum::new(indices, var)
    }

    pub fn indices(&self) -> &[(u32, Q)] {
        &self.indices
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn weight(&self) -> u32 {
        self.indices.iter().map(|(a, _)| *a).sum()
    }

    /// All weights in {1, -1}, the harmonic-sum case.
    pub fn is_harmonic(&self) -> bool {
        self.indices
            .iter()
            .all(|(_, x)| x == &qi(1) || x == &qi(-1))
    }

    /// Exact nested summation up to n. Runs innermost-out with prefix
    /// accumulation, O(n * depth) rational operations.
    pub fn eval_exact(&self, n: i64) -> Q {
        assert!(n >= 0, "S-sums are evaluated at nonnegative arguments");
        let n = n as usize;
        let mut level = vec![Q::one(); n + 1];
        for (a, x) in self.indices.iter().rev() {
            let mut cur = Vec::with_capacity(n + 1);
            cur.push(Q::zero());
            let mut xp = Q::one();
            let mut acc = Q::zero();
            for (i, upper) in level.iter().enumerate().skip(1) {
                xp *= x;
                acc += &xp / qi(i as i64).pow(*a as i32) * upper;
                cur.push(acc.clone());
            }
            level = cur;
        }
        level[n].clone()
    }
}

impl fmt::Display for SSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S[")?;
        let plain = self.is_harmonic();
        for (i, (a, x)) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if plain {
                if x == &qi(-1) {
                    write!(f, "-{a}")?;
                } else {
                    write!(f, "{a}")?;
                }
            } else {
                write!(f, "{{{a},{x}}}")?;
            }
        }
        write!(f, "]({})", self.var.name())
    }
}

/// Canonical key of a term: geometric base, constant monomial, optional
/// single S-sum. Products of sums are linearized away before storage.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TermKey {
    pub geom: Q,
    pub consts: ConstMono,
    pub sum: Option<SSum>,
}

impl TermKey {
    fn plain() -> TermKey {
        TermKey {
            geom: qi(1),
            consts: ConstMono::new(),
            sum: None,
        }
    }
}

/// A single product term in builder form; `sums` may hold a product that
/// `SumExpression::from_terms` will linearize.
#[derive(Clone, Debug)]
pub struct SumTerm {
    pub coeff: RationalFunction,
    pub consts: ConstMono,
    pub geom: Q,
    pub sums: Vec<SSum>,
}

impl SumTerm {
    pub fn rational(coeff: RationalFunction) -> SumTerm {
        SumTerm {
            coeff,
            consts: ConstMono::new(),
            geom: qi(1),
            sums: Vec::new(),
        }
    }

    pub fn with_sum(coeff: RationalFunction, s: SSum) -> SumTerm {
        SumTerm {
            coeff,
            consts: ConstMono::new(),
            geom: qi(1),
            sums: vec![s],
        }
    }
}

/// Quasi-shuffle of two index lists: the linear combination such that
/// S_a(n) * S_b(n) = sum of coeff * S_idx(n). Pure combinatorics, no
/// variable involved.
pub fn stuffle_indices(a: &[(u32, Q)], b: &[(u32, Q)]) -> BTreeMap<Vec<(u32, Q)>, Q> {
    let mut out = BTreeMap::new();
    if a.is_empty() {
        out.insert(b.to_vec(), Q::one());
        return out;
    }
    if b.is_empty() {
        out.insert(a.to_vec(), Q::one());
        return out;
    }
    let push = |head: (u32, Q), tails: BTreeMap<Vec<(u32, Q)>, Q>, sign: i64, out: &mut BTreeMap<Vec<(u32, Q)>, Q>| {
        for (tail, c) in tails {
            let mut idx = Vec::with_capacity(tail.len() + 1);
            idx.push(head.clone());
            idx.extend(tail);
            let entry = out.entry(idx).or_insert_with(Q::zero);
            *entry += c * qi(sign);
        }
    };
    let a1 = &a[0];
    let b1 = &b[0];
    push(a1.clone(), stuffle_indices(&a[1..], b), 1, &mut out);
    push(b1.clone(), stuffle_indices(a, &b[1..]), 1, &mut out);
    push(
        (a1.0 + b1.0, &a1.1 * &b1.1),
        stuffle_indices(&a[1..], &b[1..]),
        -1,
        &mut out,
    );
    out.retain(|_, c| !c.is_zero());
    out
}

/// Canonical linear combination of term keys with rational-function
/// coefficients, all S-sums sharing one argument variable. Zero is the
/// empty map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumExpression {
    var: Var,
    terms: BTreeMap<TermKey, RationalFunction>,
}

impl SumExpression {
    pub fn zero(var: Var) -> SumExpression {
        SumExpression {
            var,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(var: Var) -> SumExpression {
        SumExpression::from_rat(var, RationalFunction::one())
    }

    pub fn from_rat(var: Var, coeff: RationalFunction) -> SumExpression {
        let mut e = SumExpression::zero(var);
        e.add_term(TermKey::plain(), coeff);
        e
    }

    pub fn from_poly(var: Var, p: Polynomial) -> SumExpression {
        SumExpression::from_rat(var, RationalFunction::from_poly(p))
    }

    pub fn from_q(var: Var, c: Q) -> SumExpression {
        SumExpression::from_rat(var, RationalFunction::from_q(c))
    }

    pub fn from_ssum(s: SSum) -> SumExpression {
        let var = s.var();
        let mut e = SumExpression::zero(var);
        e.add_term(
            TermKey {
                geom: qi(1),
                consts: ConstMono::new(),
                sum: Some(s),
            },
            RationalFunction::one(),
        );
        e
    }

    /// base^var as an expression.
    pub fn geometric(var: Var, base: Q) -> SumExpression {
        assert!(!base.is_zero());
        let mut e = SumExpression::zero(var);
        e.add_term(
            TermKey {
                geom: base,
                consts: ConstMono::new(),
                sum: None,
            },
            RationalFunction::one(),
        );
        e
    }

    pub fn from_const_expr(var: Var, c: &ConstExpr) -> SumExpression {
        let mut e = SumExpression::zero(var);
        for (mono, q) in c.terms() {
            e.add_term(
                TermKey {
                    geom: qi(1),
                    consts: mono.clone(),
                    sum: None,
                },
                RationalFunction::from_q(q.clone()),
            );
        }
        e
    }

    pub fn from_terms(var: Var, terms: Vec<SumTerm>) -> SumExpression {
        let mut out = SumExpression::zero(var);
        for t in terms {
            let mut piece = SumExpression::zero(var);
            piece.add_term(
                TermKey {
                    geom: t.geom,
                    consts: t.consts,
                    sum: None,
                },
                t.coeff,
            );
            for s in t.sums {
                assert_eq!(s.var(), var, "sum argument variable mismatch");
                piece = piece.mul(&SumExpression::from_ssum(s));
            }
            out = out.add(&piece);
        }
        out
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The purely rational part (key with no geom, consts, sum), if the
    /// expression is just that.
    pub fn as_rational(&self) -> Option<RationalFunction> {
        if self.terms.is_empty() {
            return Some(RationalFunction::zero());
        }
        if self.terms.len() == 1 {
            let (k, c) = self.terms.iter().next().unwrap();
            if *k == TermKey::plain() {
                return Some(c.clone());
            }
        }
        None
    }

    /// Constant expression view when no variable content remains.
    pub fn as_const_expr(&self) -> Option<ConstExpr> {
        let mut acc = ConstExpr::zero();
        for (k, c) in &self.terms {
            if k.sum.is_some() || !k.geom.is_one() {
                return None;
            }
            let q = c.as_constant()?;
            acc = acc.add(&ConstExpr::from_mono(k.consts.clone(), q));
        }
        Some(acc)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &RationalFunction)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest S-sum weight appearing, 0 when sum-free.
    pub fn max_weight(&self) -> u32 {
        self.terms
            .keys()
            .filter_map(|k| k.sum.as_ref().map(|s| s.weight()))
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, key: TermKey, coeff: RationalFunction) {
        if coeff.is_zero() {
            return;
        }
        if let Some(s) = &key.sum {
            assert_eq!(s.var(), self.var, "sum argument variable mismatch");
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let merged = o.get() + &coeff;
                if merged.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = merged;
                }
            }
        }
    }

    pub fn add(&self, other: &SumExpression) -> SumExpression {
        assert_eq!(self.var, other.var, "argument variables must match");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SumExpression) -> SumExpression {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SumExpression {
        let mut out = SumExpression::zero(self.var);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }

    pub fn scale(&self, f: &RationalFunction) -> SumExpression {
        let mut out = SumExpression::zero(self.var);
        if f.is_zero() {
            return out;
        }
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * f);
        }
        out
    }

    pub fn scale_q(&self, c: &Q) -> SumExpression {
        self.scale(&RationalFunction::from_q(c.clone()))
    }

    pub fn scale_const(&self, ce: &ConstExpr) -> SumExpression {
        let mut out = SumExpression::zero(self.var);
        for (mono, q) in ce.terms() {
            for (k, c) in &self.terms {
                let mut key = k.clone();
                for (sym, p) in mono {
                    *key.consts.entry(sym.clone()).or_insert(0) += p;
                }
                out.add_term(key, c * &RationalFunction::from_q(q.clone()));
            }
        }
        out
    }

    /// Product in the stuffle-linearized basis.
    pub fn mul(&self, other: &SumExpression) -> SumExpression {
        assert_eq!(self.var, other.var, "argument variables must match");
        let mut out = SumExpression::zero(self.var);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let coeff = ca * cb;
                let geom = &ka.geom * &kb.geom;
                let mut consts = ka.consts.clone();
                for (sym, p) in &kb.consts {
                    *consts.entry(sym.clone()).or_insert(0) += p;
                }
                match (&ka.sum, &kb.sum) {
                    (None, None) => out.add_term(
                        TermKey {
                            geom,
                            consts,
                            sum: None,
                        },
                        coeff,
                    ),
                    (Some(s), None) | (None, Some(s)) => out.add_term(
                        TermKey {
                            geom,
                            consts,
                            sum: Some(s.clone()),
                        },
                        coeff,
                    ),
                    (Some(sa), Some(sb)) => {
                        for (idx, c) in stuffle_indices(sa.indices(), sb.indices()) {
                            out.add_term(
                                TermKey {
                                    geom: geom.clone(),
                                    consts: consts.clone(),
                                    sum: Some(SSum::new(idx, self.var)),
                                },
                                &coeff * &RationalFunction::from_q(c),
                            );
                        }
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> SumExpression {
        let mut acc = SumExpression::one(self.var);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Rewrite the expression at argument var+j on the var basis.
    pub fn shift(&self, j: i64) -> SumExpression {
        let mut cur = self.clone();
        let step = if j >= 0 { 1 } else { -1 };
        for _ in 0..j.unsigned_abs() {
            cur = cur.shift_one(step);
        }
        cur
    }

    fn shift_one(&self, step: i64) -> SumExpression {
        debug_assert!(step == 1 || step == -1);
        let mut out = SumExpression::zero(self.var);
        for (key, coeff) in &self.terms {
            let shifted = &coeff.shift(self.var, step) * &RationalFunction::from_q(pow_q(&key.geom, step));
            let mut piece = SumExpression::zero(self.var);
            piece.add_term(
                TermKey {
                    geom: key.geom.clone(),
                    consts: key.consts.clone(),
                    sum: None,
                },
                shifted,
            );
            if let Some(s) = &key.sum {
                piece = piece.mul(&ssum_shift_one(s, step));
            }
            out = out.add(&piece);
        }
        out
    }

    /// Evaluate at var = n over the constants field. Errors if a
    /// coefficient has a pole at n or mentions another variable.
    pub fn eval_exact(&self, n: i64) -> Result<ConstExpr, RatFunError> {
        assert!(n >= 0, "evaluation needs a nonnegative argument");
        let var = self.var;
        let point = move |v: Var| if v == var { Some(qi(n)) } else { None };
        let mut acc = ConstExpr::zero();
        for (key, coeff) in &self.terms {
            let mut val = coeff.eval(&point)?;
            val *= pow_q(&key.geom, n);
            if let Some(s) = &key.sum {
                val *= s.eval_exact(n);
            }
            acc = acc.add(&ConstExpr::from_mono(key.consts.clone(), val));
        }
        Ok(acc)
    }

    /// Numeric value at var = n with the formal constants replaced by
    /// `digits`-good rational approximations.
    pub fn eval_float(&self, n: i64, digits: u32) -> Result<Q, RatFunError> {
        Ok(crate::numeric::const_expr_value(
            &self.eval_exact(n)?,
            digits,
        ))
    }

    /// Re-canonicalize; a no-op for values built through this module's
    /// operations, kept as the explicit idempotent entry point.
    pub fn normalize(&self) -> SumExpression {
        let mut out = SumExpression::zero(self.var);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    /// Substitute an exact value for a parameter variable occurring in
    /// coefficients (never the argument variable).
    pub fn specialize_param(&self, v: Var, value: &Q) -> SumExpression {
        assert_ne!(v, self.var, "cannot specialize the argument variable");
        let mut out = SumExpression::zero(self.var);
        let vp = Polynomial::constant(value.clone());
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.subst(v, &vp));
        }
        out
    }

    /// Rename the argument variable (coefficients substitute too).
    pub fn rename_var(&self, to: Var) -> SumExpression {
        if to == self.var {
            return self.clone();
        }
        let mut out = SumExpression::zero(to);
        let target = Polynomial::var(to);
        for (k, c) in &self.terms {
            assert!(
                !c.contains_var(to),
                "target variable already occurs in a coefficient"
            );
            let sum = k.sum.as_ref().map(|s| SSum::new(s.indices().to_vec(), to));
            out.add_term(
                TermKey {
                    geom: k.geom.clone(),
                    consts: k.consts.clone(),
                    sum,
                },
                c.subst(self.var, &target),
            );
        }
        out
    }
}

/// S(var + step) on the var basis for a single sum, step in {1, -1}.
fn ssum_shift_one(s: &SSum, step: i64) -> SumExpression {
    let var = s.var();
    let (a1, x1) = s.indices()[0].clone();
    let rest = &s.indices()[1..];
    let mut out = SumExpression::from_ssum(s.clone());
    // the boundary summand f(m) = x1^m / m^a1 at m = var+1 (step 1) or
    // m = var (step -1)
    let rest_expr = if rest.is_empty() {
        SumExpression::one(var)
    } else {
        let r = SSum::new(rest.to_vec(), var);
        if step == 1 {
            ssum_shift_one(&r, 1)
        } else {
            SumExpression::from_ssum(r)
        }
    };
    let m = if step == 1 {
        Polynomial::var_plus(var, 1)
    } else {
        Polynomial::var(var)
    };
    let denom = m.pow(a1 as u32);
    let mut f = SumExpression::geometric(var, x1.clone())
        .scale(&RationalFunction::new(Polynomial::one(), denom));
    if step == 1 {
        // x1^{var+1} = x1 * x1^var
        f = f.scale_q(&x1);
    }
    let boundary = f.mul(&rest_expr);
    if step == 1 {
        out = out.add(&boundary);
    } else {
        out = out.sub(&boundary);
    }
    out
}

impl fmt::Display for SumExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, coeff) in &self.terms {
            let neg = coeff.num().leading_coeff().is_negative();
            let printed = if neg { -coeff } else { coeff.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let has_tail =
                !key.geom.is_one() || !key.consts.is_empty() || key.sum.is_some();
            if !(printed.is_one() && has_tail) {
                factors.push(coeff_string(&printed));
            }
            if !key.geom.is_one() {
                factors.push(geom_string(&key.geom, self.var));
            }
            for (sym, p) in &key.consts {
                if *p == 1 {
                    factors.push(format!("{sym}"));
                } else {
                    factors.push(format!("{sym}^{p}"));
                }
            }
            if let Some(s) = &key.sum {
                factors.push(format!("{s}"));
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

fn coeff_string(rf: &RationalFunction) -> String {
    if let Some(c) = rf.as_constant() {
        return format!("{c}");
    }
    if rf.is_polynomial() {
        let p = rf.num().clone();
        if p.num_terms() > 1 {
            return format!("({p})");
        }
        return format!("{p}");
    }
    format!("{rf}")
}

fn geom_string(base: &Q, var: Var) -> String {
    let v = var.name();
    if base.is_integer() && !base.is_negative() {
        format!("{base}^{v}")
    } else {
        format!("({base})^{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;
    use rand::{Rng, SeedableRng};

    fn s(signed: &[i64]) -> SSum {
        SSum::harmonic(signed, Var::N)
    }

    // Frozen direct-summation oracles. These values were computed by the
    // nested definition alone and pin eval_exact before any algebra is
    // trusted.

    #[test]
    fn direct_summation_oracles() {
        assert_eq!(s(&[1]).eval_exact(3), q(11, 6));
        assert_eq!(s(&[-2]).eval_exact(3), q(-31, 36));
        assert_eq!(s(&[2, 1]).eval_exact(2), q(11, 8));
        assert_eq!(s(&[1]).eval_exact(0), qi(0));
        assert_eq!(s(&[3, -1, 2]).eval_exact(0), qi(0));
        // generalized weight: sum 2^i/i for i=1..3
        let g = SSum::new(vec![(1, qi(2))], Var::N);
        assert_eq!(g.eval_exact(3), q(20, 3));
    }

    #[test]
    fn harmonic_number_ten_as_float() {
        let e = SumExpression::from_ssum(s(&[1]));
        let v = e.eval_float(10, 30).unwrap();
        assert_eq!(s(&[1]).eval_exact(10), q(7381, 2520));
        assert!(crate::numeric::close_to(&v, &q(7381, 2520), 28));
    }

    #[test]
    fn stuffle_square_of_s1() {
        let s1 = SumExpression::from_ssum(s(&[1]));
        let prod = s1.mul(&s1);
        let expected = SumExpression::from_ssum(s(&[1, 1]))
            .scale_q(&qi(2))
            .sub(&SumExpression::from_ssum(s(&[2])));
        assert_eq!(prod, expected);
        // N=2: (3/2)^2 = 2*(7/4) - 5/4
        assert_eq!(
            prod.eval_exact(2).unwrap().as_q().unwrap(),
            q(9, 4)
        );
    }

    #[test]
    fn stuffle_matches_products_pointwise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        for _ in 0..50 {
            let depth_a = rng.gen_range(1..=3);
            let depth_b = rng.gen_range(1..=2);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng, d: usize| {
                let idx: Vec<(u32, Q)> = (0..d)
                    .map(|_| {
                        let a = rng.gen_range(1..=3u32);
                        let x = [qi(1), qi(-1), q(1, 2)][rng.gen_range(0..3)].clone();
                        (a, x)
                    })
                    .collect();
                SSum::new(idx, Var::N)
            };
            let sa = mk(&mut rng, depth_a);
            let sb = mk(&mut rng, depth_b);
            let prod = SumExpression::from_ssum(sa.clone())
                .mul(&SumExpression::from_ssum(sb.clone()));
            for n in 0..=12 {
                let lhs = sa.eval_exact(n) * sb.eval_exact(n);
                let rhs = prod.eval_exact(n).unwrap().as_q().unwrap();
                assert_eq!(lhs, rhs, "stuffle mismatch for {sa} * {sb} at {n}");
            }
        }
    }

    #[test]
    fn geometric_bases_multiply() {
        let m = SumExpression::geometric(Var::N, qi(-1));
        let sq = m.mul(&m);
        assert_eq!(sq, SumExpression::one(Var::N));
        let e = SumExpression::one(Var::N);
        assert_eq!(e.mul(&e), e);
    }

    #[test]
    fn shift_of_single_sums() {
        // S2(N+1) = S2(N) + 1/(N+1)^2
        let e = SumExpression::from_ssum(s(&[2])).shift(1);
        let expected = SumExpression::from_ssum(s(&[2])).add(&SumExpression::from_rat(
            Var::N,
            RationalFunction::new(
                Polynomial::one(),
                Polynomial::var_plus(Var::N, 1).pow(2),
            ),
        ));
        assert_eq!(e, expected);

        // S_{1,1}(N+1) = S_{1,1}(N) + S1(N)/(N+1) + 1/(N+1)^2
        let e = SumExpression::from_ssum(s(&[1, 1])).shift(1);
        let np1 = Polynomial::var_plus(Var::N, 1);
        let expected = SumExpression::from_ssum(s(&[1, 1]))
            .add(&SumExpression::from_ssum(s(&[1])).scale(&RationalFunction::new(
                Polynomial::one(),
                np1.clone(),
            )))
            .add(&SumExpression::from_rat(
                Var::N,
                RationalFunction::new(Polynomial::one(), np1.pow(2)),
            ));
        assert_eq!(e, expected);

        // (-1)^(N+1) = -(-1)^N
        let m = SumExpression::geometric(Var::N, qi(-1));
        assert_eq!(m.shift(1), m.neg());
    }

    #[test]
    fn shift_roundtrip_and_pointwise_consistency() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let a = rng.gen_range(1..=3u32);
            let b = rng.gen_range(1..=2u32);
            let e = SumExpression::from_ssum(SSum::new(
                vec![(a, qi(1)), (b, qi(-1))],
                Var::N,
            ))
            .scale(&RationalFunction::new(
                Polynomial::var(Var::N),
                Polynomial::var_plus(Var::N, 2),
            ))
            .add(&SumExpression::geometric(Var::N, q(1, 2)));
            let rt = e.shift(1).shift(-1);
            assert_eq!(rt, e);
            for n in 0..=10 {
                let lhs = e.shift(1).eval_exact(n).unwrap();
                let rhs = e.eval_exact(n + 1).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn telescoping_identity() {
        // S(n) - S(n-1) = outer summand at n
        for idx in [vec![(2, qi(1))], vec![(1, qi(-1)), (2, qi(1))], vec![(1, q(1, 2)), (1, qi(1)), (1, qi(1))]] {
            let full = SSum::new(idx.clone(), Var::N);
            for n in 1..=40i64 {
                let delta = full.eval_exact(n) - full.eval_exact(n - 1);
                let (a1, x1) = &idx[0];
                let mut expected = pow_q(x1, n) / qi(n).pow(*a1 as i32);
                if idx.len() > 1 {
                    expected *= SSum::new(idx[1..].to_vec(), Var::N).eval_exact(n);
                }
                assert_eq!(delta, expected);
            }
        }
    }

    #[test]
    fn normalization_merges_and_cancels() {
        let s2 = SumExpression::from_ssum(s(&[2]));
        let np1 = RationalFunction::new(Polynomial::one(), Polynomial::var_plus(Var::N, 1));
        let a = s2.scale(&np1).scale_q(&qi(2)).add(&s2.scale(&np1));
        let b = s2.scale(&np1).scale_q(&qi(3));
        assert_eq!(a, b);
        assert!(s2.sub(&s2).is_zero());
        assert_eq!(a.normalize(), a);
    }

    #[test]
    fn construction_order_is_irrelevant() {
        let parts = [
            SumExpression::from_ssum(s(&[1])),
            SumExpression::geometric(Var::N, qi(2)),
            SumExpression::from_q(Var::N, q(7, 3)),
            SumExpression::from_ssum(s(&[-2])).scale(&RationalFunction::var(Var::N)),
        ];
        let fwd = parts.iter().fold(SumExpression::zero(Var::N), |acc, p| acc.add(p));
        let rev = parts.iter().rev().fold(SumExpression::zero(Var::N), |acc, p| acc.add(p));
        assert_eq!(fwd, rev);
    }

    #[test]
    fn eval_reports_poles_and_free_variables() {
        let inv_n = SumExpression::from_rat(
            Var::N,
            RationalFunction::new(Polynomial::one(), Polynomial::var(Var::N)),
        );
        assert_eq!(inv_n.eval_exact(0), Err(RatFunError::PoleAtPoint));
        assert!(inv_n.eval_exact(2).is_ok());
        let with_ep = SumExpression::from_rat(Var::N, RationalFunction::var(Var::Ep));
        assert!(matches!(
            with_ep.eval_exact(1),
            Err(RatFunError::Unassigned(_))
        ));
    }

    #[test]
    fn const_coefficients_ride_along() {
        // (zeta_2 / 4 + 79/24) as an expression, evaluated
        let ce = ConstExpr::from_symbol(crate::constants::FormalConstant::zeta(2))
            .scale(&q(1, 4))
            .add(&ConstExpr::from_q(q(79, 24)));
        let e = SumExpression::from_const_expr(Var::N, &ce);
        assert_eq!(e.eval_exact(5).unwrap(), ce);
        let scaled = SumExpression::from_ssum(s(&[1])).scale_const(&ce);
        let v = scaled.eval_exact(2).unwrap();
        assert_eq!(v, ce.scale(&q(3, 2)));
    }

    #[test]
    fn display_format_is_stable() {
        let np1 = Polynomial::var_plus(Var::N, 1);
        let e = SumExpression::from_ssum(s(&[1]))
            .scale(&RationalFunction::new(
                Polynomial::from_coeffs_in(Var::N, &[Polynomial::int(-1), Polynomial::int(4)]),
                np1.clone(),
            ))
            .add(&SumExpression::from_rat(
                Var::N,
                RationalFunction::new(Polynomial::one(), np1.pow(2).scale(&qi(8))),
            ).scale_const(&ConstExpr::from_symbol(crate::constants::FormalConstant::zeta(2))))
            .add(&SumExpression::geometric(Var::N, qi(-1)).scale_q(&q(-1, 2)));
        let txt = format!("{e}");
        assert_eq!(
            txt,
            "-1/2*(-1)^N + (4*N-1)/(N+1)*S[1](N) + (1/8)/(N^2+2*N+1)*z2"
        );
    }

    #[test]
    fn generalized_sum_display() {
        let g = SSum::new(vec![(1, q(1, 2)), (1, qi(1))], Var::N);
        assert_eq!(format!("{g}"), "S[{1,1/2},{1,1}](N)");
        assert_eq!(format!("{}", s(&[1, -2])), "S[1,-2](N)");
    }

    #[test]
    fn rename_and_specialize() {
        let e = SumExpression::from_ssum(SSum::harmonic(&[2], Var::K))
            .scale(&RationalFunction::new(
                Polynomial::var(Var::N),
                Polynomial::var_plus(Var::K, 1),
            ));
        let at_n3 = e.specialize_param(Var::N, &qi(3));
        assert_eq!(
            at_n3.eval_exact(2).unwrap().as_q().unwrap(),
            qi(3) * q(5, 4) / qi(3)
        );
        let renamed = SumExpression::from_ssum(SSum::harmonic(&[1], Var::K)).rename_var(Var::N);
        assert_eq!(renamed, SumExpression::from_ssum(s(&[1])));
    }
}
