//! Symbolic solving of linear recurrences with polynomial coefficients.
//!
//! The solution class is built from first-order pieces: polynomial
//! solutions, hypergeometric solutions found by factor enumeration, and
//! nested indefinite sums over them.  A second-order equation whose
//! kernel contains one hypergeometric solution h is reduced by the
//! substitution F = h * Sum[G]; the reduced equation has lower order and
//! the process repeats.  Solutions that leave the class are kept as
//! formal products or sums so the caller still sees a full-rank answer
//! where one exists.

use crate::algebra::{
    poly_lcm, q, q_is_integer, q_to_i64, qi, rational_roots, Polynomial, Q, RationalFunction, Var,
};
use crate::constants::{ConstExpr, ConstMono};
use crate::operators::RecOperator;
use crate::summation::indefinite_sum;
use crate::sums::{pow_q, SumExpression};
use crate::telescoping::HyperTerm;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("operator coefficients depend on ep; specialize or expand first")]
    EpsPresent,
    #[error("initial values cannot be used: {0}")]
    InitialValues(String),
    #[error("initial values are inconsistent: {0}")]
    Inconsistent(String),
    #[error("solution leaves the nested-sum class: {0}")]
    NotInClass(String),
    #[error("candidate solution failed verification: {0}")]
    Verification(String),
}

/// A kernel element that could not be written inside the nested-sum
/// class: a closed prefactor times a formal product or sum expression.
#[derive(Clone, Debug)]
pub struct FormalSolution {
    pub factor: SumExpression,
    pub body: String,
}

impl fmt::Display for FormalSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*{}", self.factor, self.body)
    }
}

#[derive(Clone, Debug)]
pub enum BasisElement {
    Closed(SumExpression),
    Formal(FormalSolution),
}

impl BasisElement {
    pub fn as_closed(&self) -> Option<&SumExpression> {
        match self {
            BasisElement::Closed(e) => Some(e),
            BasisElement::Formal(_) => None,
        }
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisElement::Closed(e) => write!(f, "{e}"),
            BasisElement::Formal(s) => write!(f, "{s}"),
        }
    }
}

/// Kernel basis and particular solution of one scalar recurrence.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    var: Var,
    order: usize,
    pub basis: Vec<BasisElement>,
    pub particular: Option<SumExpression>,
    pub warnings: Vec<String>,
}

impl SolutionSet {
    pub fn var(&self) -> Var {
        self.var
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// True when the basis spans the whole kernel.
    pub fn is_complete(&self) -> bool {
        self.basis.len() == self.order
    }

    pub fn free_constants(&self) -> Vec<String> {
        (1..=self.basis.len()).map(|i| format!("c{i}")).collect()
    }
}

/// A first-order right factor of the operator: a solution with rational
/// consecutive-term ratio.  `term` is the gamma-product form of the
/// solution when its ratio factors over linear pieces.
#[derive(Clone, Debug)]
pub struct HyperSolution {
    pub ratio: RationalFunction,
    pub term: Option<HyperTerm>,
}

/// Result of pinning the free constants against initial values.
#[derive(Clone, Debug)]
pub struct MatchedSolution {
    pub expr: SumExpression,
    pub constants: Vec<ConstExpr>,
    pub unique: bool,
}

pub(crate) struct LinSolve {
    pub particulars: Vec<Option<Vec<Q>>>,
    pub nullspace: Vec<Vec<Q>>,
}

/// Gaussian elimination over Q with several right-hand sides sharing one
/// coefficient matrix.  Rows of `a` all have the same length; each rhs
/// has `a.len()` entries.
pub(crate) fn solve_q(a: &[Vec<Q>], rhs: &[Vec<Q>]) -> LinSolve {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let nr = rhs.len();
    let mut m: Vec<Vec<Q>> = (0..rows)
        .map(|i| {
            let mut row = a[i].clone();
            for r in rhs {
                row.push(r[i].clone());
            }
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0usize;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][c].clone().recip();
        for x in m[rank].iter_mut() {
            *x *= &inv;
        }
        let prow = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= &(&f * p);
                }
            }
        }
        pivot_of_col[c] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    let mut nullspace = Vec::new();
    for c in 0..cols {
        if pivot_of_col[c].is_some() {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[c] = Q::one();
        for (pc, pr) in pivot_of_col.iter().enumerate() {
            if let Some(r) = pr {
                v[pc] = -m[*r][c].clone();
            }
        }
        nullspace.push(v);
    }
    let particulars = (0..nr)
        .map(|k| {
            let consistent = (rank..rows).all(|r| m[r][cols + k].is_zero());
            consistent.then(|| {
                let mut v = vec![Q::zero(); cols];
                for (pc, pr) in pivot_of_col.iter().enumerate() {
                    if let Some(r) = pr {
                        v[pc] = m[*r][cols + k].clone();
                    }
                }
                v
            })
        })
        .collect();
    LinSolve {
        particulars,
        nullspace,
    }
}

fn binom_q(n: i64, k: i64) -> Q {
    if k < 0 || k > n {
        return Q::zero();
    }
    let mut acc = Q::one();
    for i in 0..k {
        acc *= &(qi(n - i) / qi(i + 1));
    }
    acc
}

/// All polynomial solutions of `op(F) = rhs` for a rational `rhs`.
/// Returns a kernel basis together with one particular solution when the
/// inhomogeneous equation is solvable by a polynomial.
pub fn polynomial_solutions(
    op: &RecOperator,
    rhs: &SumExpression,
) -> (Vec<Polynomial>, Option<Polynomial>) {
    assert!(op.is_eps_free(), "expected numeric operator coefficients");
    let v = op.var();
    let rat = rhs
        .as_rational()
        .expect("polynomial right-hand side must be free of sums");
    let den = rat
        .den()
        .as_constant()
        .expect("polynomial right-hand side must have constant denominator");
    let rp = rat.num().scale(&den.recip());
    let abs: Vec<(i64, Polynomial)> = (0..=op.order())
        .map(|i| (op.offset() + i as i64, op.coeff(i).clone()))
        .collect();
    poly_solutions_at(&abs, v, &rp)
}

/// Core polynomial solver over explicit shift/coefficient pairs, shifts
/// all nonnegative.
fn poly_solutions_at(
    abs: &[(i64, Polynomial)],
    v: Var,
    rhs: &Polynomial,
) -> (Vec<Polynomial>, Option<Polynomial>) {
    let max_s = abs.iter().map(|(s, _)| *s).max().unwrap_or(0);
    debug_assert!(abs.iter().all(|(s, _)| *s >= 0));
    // b_j picks out the action on degree drops: op(v^t) has top behaviour
    // governed by sum_s a_s * binom(s, j) at falling-power level j.
    let bs: Vec<Polynomial> = (0..=max_s)
        .map(|j| {
            abs.iter().fold(Polynomial::zero(), |acc, (s, a)| {
                &acc + &a.scale(&binom_q(*s, j))
            })
        })
        .collect();
    let cap = bs
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.is_zero())
        .map(|(j, b)| b.degree_in(v).unwrap_or(0) as i64 - j as i64)
        .max();
    let Some(cap) = cap else {
        // zero operator: anything solves the homogeneous equation, which
        // cannot happen for a trimmed operator
        return (Vec::new(), rhs.is_zero().then(Polynomial::zero));
    };
    let t = Var::T;
    let mut lam = Polynomial::zero();
    for (j, b) in bs.iter().enumerate() {
        if b.is_zero() || b.degree_in(v).unwrap_or(0) as i64 - j as i64 != cap {
            continue;
        }
        let lc = b
            .leading_coeff_in(v)
            .as_constant()
            .expect("numeric leading coefficient");
        let mut fall = Polynomial::constant(lc);
        for l in 0..j as i64 {
            fall = &fall * &Polynomial::var_plus(t, -l);
        }
        lam = &lam + &fall;
    }
    let mut bound: i64 = -1;
    if !rhs.is_zero() {
        bound = bound.max(rhs.degree_in(v).unwrap_or(0) as i64 - cap);
    }
    for (root, _) in rational_roots(&lam, t) {
        if q_is_integer(&root) {
            if let Some(r) = q_to_i64(&root) {
                if r >= 0 {
                    bound = bound.max(r);
                }
            }
        }
    }
    if bound < 0 {
        return (Vec::new(), rhs.is_zero().then(Polynomial::zero));
    }
    let cols: Vec<Polynomial> = (0..=bound)
        .map(|deg| {
            abs.iter().fold(Polynomial::zero(), |acc, (s, a)| {
                &acc + &(a * &Polynomial::var_plus(v, *s).pow(deg as u32))
            })
        })
        .collect();
    let max_deg = cols
        .iter()
        .chain(std::iter::once(rhs))
        .filter_map(|p| p.degree_in(v))
        .max()
        .unwrap_or(0) as usize;
    let coeff_at = |p: &Polynomial, d: usize| -> Q {
        p.coeffs_in(v)
            .get(d)
            .map(|c| c.as_constant().expect("numeric coefficient"))
            .unwrap_or_else(Q::zero)
    };
    let a: Vec<Vec<Q>> = (0..=max_deg)
        .map(|d| cols.iter().map(|c| coeff_at(c, d)).collect())
        .collect();
    let r: Vec<Q> = (0..=max_deg).map(|d| coeff_at(rhs, d)).collect();
    let sol = solve_q(&a, &[r]);
    let from_vec = |u: &[Q]| -> Polynomial {
        u.iter().enumerate().fold(Polynomial::zero(), |acc, (i, c)| {
            &acc + &Polynomial::var(v).pow(i as u32).scale(c)
        })
    };
    let mut basis: Vec<Polynomial> = sol
        .nullspace
        .iter()
        .map(|u| {
            let p = from_vec(u).primitive_z().0;
            let lead = p
                .leading_coeff_in(v)
                .as_constant()
                .unwrap_or_else(Q::one);
            if lead.is_negative() {
                p.scale(&-Q::one())
            } else {
                p
            }
        })
        .collect();
    basis.sort_by_key(|p| (p.degree_in(v).unwrap_or(0), p.to_string()));
    let particular = sol.particulars[0].as_ref().map(|u| from_vec(u));
    (basis, particular)
}

fn lin_factor(v: Var, root: &Q, l: i64) -> Polynomial {
    // v - root + l
    &Polynomial::var(v) - &Polynomial::constant(root - &qi(l))
}

/// Splits off the rational linear factors: returns the roots with
/// multiplicity and the remaining monic rootless cofactor.
fn linear_split(p: &Polynomial, v: Var) -> (Vec<(Q, u32)>, Polynomial) {
    let deg = p.degree_in(v).unwrap_or(0);
    if deg == 0 {
        return (Vec::new(), Polynomial::one());
    }
    let roots = rational_roots(p, v);
    let mut cof = p.clone();
    for (r, m) in &roots {
        for _ in 0..*m {
            cof = cof
                .divide_exact(&lin_factor(v, r, 0))
                .expect("root divides");
        }
    }
    let lc = cof
        .leading_coeff_in(v)
        .as_constant()
        .expect("numeric leading coefficient");
    (roots, cof.scale(&lc.recip()))
}

/// Monic divisors of `p` assembled from its linear factors plus one
/// rootless cofactor block, capped to keep enumeration small.
fn monic_factors(p: &Polynomial, v: Var) -> Vec<Polynomial> {
    let (roots, cof) = linear_split(p, v);
    let mut atoms: Vec<Polynomial> = Vec::new();
    for (r, m) in &roots {
        for _ in 0..*m {
            atoms.push(lin_factor(v, r, 0));
        }
    }
    if !cof.is_one() {
        atoms.push(cof);
    }
    let mut out: Vec<Polynomial> = vec![Polynomial::one()];
    for atom in &atoms {
        let mut next = out.clone();
        for f in &out {
            let g = f * atom;
            if !next.contains(&g) {
                next.push(g);
            }
            if next.len() > 128 {
                break;
            }
        }
        out = next;
        if out.len() > 128 {
            out.truncate(128);
        }
    }
    out.sort_by_key(|f| (f.degree_in(v).unwrap_or(0), f.to_string()));
    out.dedup();
    out
}

fn satisfies_ratio(abs: &[Polynomial], v: Var, ratio: &RationalFunction) -> bool {
    let mut acc = RationalFunction::zero();
    let mut prod = RationalFunction::one();
    for (l, a) in abs.iter().enumerate() {
        acc = &acc + &(&RationalFunction::from_poly(a.clone()) * &prod);
        if l < abs.len() - 1 {
            prod = &prod * &ratio.shift(v, l as i64);
        }
    }
    acc.is_zero()
}

fn hyper_solution(ratio: RationalFunction, v: Var) -> HyperSolution {
    HyperSolution {
        term: hyper_term_from_ratio(&ratio, v),
        ratio,
    }
}

/// All hypergeometric solutions of the homogeneous equation `op(F) = 0`:
/// solutions with F(v+1)/F(v) a rational function.  The returned ratios
/// are pairwise distinct and each is verified against the operator.
pub fn hypergeometric_solutions(op: &RecOperator) -> Vec<HyperSolution> {
    assert!(op.is_eps_free(), "expected numeric operator coefficients");
    let v = op.var();
    let d = op.order();
    if d == 0 {
        return Vec::new();
    }
    // rebase to shifts 0..d so the ratio refers to F(v+1)/F(v)
    let at: Vec<Polynomial> = (0..=d)
        .map(|i| op.coeff(i).shift(v, -op.offset()))
        .collect();
    if d == 1 {
        let ratio = RationalFunction::new(-&at[0], at[1].clone());
        return vec![hyper_solution(ratio, v)];
    }
    let mut found: Vec<RationalFunction> = Vec::new();
    let tail = at[d].shift(v, -(d as i64 - 1));
    for a_part in monic_factors(&at[0], v) {
        for b_part in monic_factors(&tail, v) {
            // P_i = a_i * prod_{l<i} A(v+l) * prod_{i<=l<d} B(v+l)
            let ps: Vec<Polynomial> = (0..=d)
                .map(|i| {
                    let mut p = at[i].clone();
                    for l in 0..i as i64 {
                        p = &p * &a_part.shift(v, l);
                    }
                    for l in i as i64..d as i64 {
                        p = &p * &b_part.shift(v, l);
                    }
                    p
                })
                .collect();
            let top = ps
                .iter()
                .filter_map(|p| p.degree_in(v))
                .max()
                .unwrap_or(0);
            let t = Var::T;
            let mut zpoly = Polynomial::zero();
            for (i, p) in ps.iter().enumerate() {
                if p.degree_in(v) == Some(top) {
                    let lc = p
                        .leading_coeff_in(v)
                        .as_constant()
                        .expect("numeric leading coefficient");
                    zpoly = &zpoly + &Polynomial::var(t).pow(i as u32).scale(&lc);
                }
            }
            for (z, _) in rational_roots(&zpoly, t) {
                if z.is_zero() {
                    continue;
                }
                let scaled: Vec<(i64, Polynomial)> = ps
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i as i64, p.scale(&pow_q(&z, i as i64))))
                    .collect();
                let (cs, _) = poly_solutions_at(&scaled, v, &Polynomial::zero());
                for c in cs {
                    let num = &(&a_part * &c.shift(v, 1)).scale(&z);
                    let ratio = RationalFunction::new(num.clone(), &b_part * &c);
                    if satisfies_ratio(&at, v, &ratio) && !found.contains(&ratio) {
                        found.push(ratio);
                    }
                }
            }
        }
    }
    found.sort_by_key(|r| {
        (
            r.num().degree_in(v).unwrap_or(0) + r.den().degree_in(v).unwrap_or(0),
            r.to_string(),
        )
    });
    found.into_iter().map(|r| hyper_solution(r, v)).collect()
}

fn expand_roots(roots: &[(Q, u32)]) -> Vec<Q> {
    let mut out = Vec::new();
    for (r, m) in roots {
        for _ in 0..*m {
            out.push(r.clone());
        }
    }
    out
}

const COFACTOR_SHIFT_CAP: i64 = 16;

/// Writes a product with ratio `ratio` as `z^v * f(v)` when possible:
/// the geometric base and a rational function with f(v+1)/f(v) * z equal
/// to the ratio.  Root pairing is greedy over integer distances.
pub fn product_closed_form(ratio: &RationalFunction, v: Var) -> Option<(Q, RationalFunction)> {
    let num = ratio.num();
    let den = ratio.den();
    if num.degree_in(v).unwrap_or(0) != den.degree_in(v).unwrap_or(0) {
        return None;
    }
    let z = num.leading_coeff_in(v).as_constant()? / den.leading_coeff_in(v).as_constant()?;
    let (nroots, ncof) = linear_split(num, v);
    let (droots, dcof) = linear_split(den, v);
    let mut nlist = expand_roots(&nroots);
    let mut dlist: Vec<Option<Q>> = expand_roots(&droots).into_iter().map(Some).collect();
    if nlist.len() != dlist.len() {
        return None;
    }
    nlist.sort();
    nlist.reverse();
    let mut f = RationalFunction::one();
    for u in &nlist {
        let mut best: Option<usize> = None;
        for (j, slot) in dlist.iter().enumerate() {
            if let Some(w) = slot {
                if q_is_integer(&(u - w)) {
                    let better = match best {
                        None => true,
                        Some(b) => dlist[b].as_ref().expect("occupied") < w,
                    };
                    if better {
                        best = Some(j);
                    }
                }
            }
        }
        let w = dlist[best?].take().expect("occupied");
        let m = q_to_i64(&(u - &w))?;
        if m >= 0 {
            for l in 0..m {
                f = &f * &RationalFunction::new(Polynomial::one(), lin_factor(v, u, l));
            }
        } else {
            for l in 1..=(-m) {
                f = &f * &RationalFunction::from_poly(lin_factor(v, u, -l));
            }
        }
    }
    if ncof != dcof {
        let mut matched = false;
        for k in 1..=COFACTOR_SHIFT_CAP {
            if ncof == dcof.shift(v, k) {
                let mut prod = Polynomial::one();
                for l in 0..k {
                    prod = &prod * &dcof.shift(v, l);
                }
                f = &f * &RationalFunction::from_poly(prod);
                matched = true;
                break;
            }
            if dcof == ncof.shift(v, k) {
                let mut prod = Polynomial::one();
                for l in 0..k {
                    prod = &prod * &ncof.shift(v, l);
                }
                f = &f * &RationalFunction::new(Polynomial::one(), prod);
                matched = true;
                break;
            }
        }
        if !matched {
            return None;
        }
    }
    debug_assert!({
        let lhs = &f.shift(v, 1) * &RationalFunction::from_q(z.clone());
        let rhs = ratio * &f;
        (&lhs - &rhs).is_zero()
    });
    Some((z, f))
}

/// Gamma-product form of a product with the given consecutive-term
/// ratio, when the ratio factors into rational-rooted linears up to a
/// shift-stable cofactor.
fn hyper_term_from_ratio(ratio: &RationalFunction, v: Var) -> Option<HyperTerm> {
    let num = ratio.num();
    let den = ratio.den();
    let zn = num.leading_coeff_in(v).as_constant()?;
    let zd = den.leading_coeff_in(v).as_constant()?;
    let z = zn / zd;
    let mut term = HyperTerm::one();
    if !z.is_one() {
        term.mul_geom(v, &z);
    }
    let (nroots, ncof) = linear_split(num, v);
    let (droots, dcof) = linear_split(den, v);
    for (u, m) in &nroots {
        term.mul_gamma(lin_factor(v, u, 0), *m as i64).ok()?;
    }
    for (w, m) in &droots {
        term.mul_gamma(lin_factor(v, w, 0), -(*m as i64)).ok()?;
    }
    if ncof != dcof {
        let mut matched = false;
        for k in 1..=COFACTOR_SHIFT_CAP {
            if ncof == dcof.shift(v, k) {
                let mut prod = Polynomial::one();
                for l in 0..k {
                    prod = &prod * &dcof.shift(v, l);
                }
                term.mul_rat(&RationalFunction::from_poly(prod));
                matched = true;
                break;
            }
            if dcof == ncof.shift(v, k) {
                let mut prod = Polynomial::one();
                for l in 0..k {
                    prod = &prod * &ncof.shift(v, l);
                }
                term.mul_rat(&RationalFunction::new(Polynomial::one(), prod));
                matched = true;
                break;
            }
        }
        if !matched {
            return None;
        }
    }
    Some(term)
}

fn ratfun_to_poly(r: &RationalFunction) -> Polynomial {
    let c = r
        .den()
        .as_constant()
        .expect("denominator cleared by construction");
    r.num().scale(&c.recip())
}

/// Solves `op(F) = rhs` by peeling hypergeometric right factors.  Each
/// layer divides out one product solution and sums the reduced problem;
/// layers whose sum or product cannot be written in the nested-sum class
/// stay formal.  Infallible: gaps are reported through `warnings` and
/// basis completeness.
pub fn dalembertian_solve(op: &RecOperator, rhs: &SumExpression) -> SolutionSet {
    assert!(op.is_eps_free(), "expected numeric operator coefficients");
    let v = op.var();
    let d = op.order();
    let off = op.offset();
    if d == 0 {
        let particular = (!rhs.is_zero()).then(|| {
            let a0 = RationalFunction::from_poly(op.coeff(0).clone())
                .inv()
                .expect("trimmed operator has nonzero coefficient");
            rhs.scale(&a0).shift(-off)
        });
        return SolutionSet {
            var: v,
            order: 0,
            basis: Vec::new(),
            particular,
            warnings: Vec::new(),
        };
    }
    let candidates = hypergeometric_solutions(op);
    if candidates.is_empty() {
        let mut warnings = vec![format!(
            "no hypergeometric right factor of the order-{d} operator"
        )];
        if !rhs.is_zero() {
            warnings.push("right-hand side left unreduced".into());
        }
        return SolutionSet {
            var: v,
            order: d,
            basis: Vec::new(),
            particular: None,
            warnings,
        };
    }
    let picked = candidates
        .iter()
        .find_map(|c| product_closed_form(&c.ratio, v).map(|(z, f)| (c.ratio.clone(), z, f)));
    let Some((ratio, z, f)) = picked else {
        // products exist but none stays in the class
        let warnings = vec![format!(
            "hypergeometric solutions found only as formal products ({})",
            candidates.len()
        )];
        let basis = candidates
            .into_iter()
            .map(|c| {
                BasisElement::Formal(FormalSolution {
                    factor: SumExpression::one(v),
                    body: format!("Prod[{}]", c.ratio),
                })
            })
            .collect();
        return SolutionSet {
            var: v,
            order: d,
            basis,
            particular: None,
            warnings,
        };
    };
    let h_expr = SumExpression::geometric(v, z.clone()).scale(&f);
    // substitute F = h * G and divide by h(v+off): the shifted equation
    // telescopes, leaving an order d-1 operator in H = G(v+1) - G(v)
    let bs: Vec<RationalFunction> = (0..=d)
        .map(|i| {
            let mut b = RationalFunction::from_poly(op.coeff(i).clone());
            for l in 0..i as i64 {
                b = &b * &ratio.shift(v, off + l);
            }
            b
        })
        .collect();
    debug_assert!(
        bs.iter().fold(RationalFunction::zero(), |a, b| &a + b).is_zero(),
        "ratio must annihilate the operator"
    );
    let cs: Vec<RationalFunction> = (1..=d)
        .map(|l| bs[l..].iter().fold(RationalFunction::zero(), |a, b| &a + b))
        .collect();
    let dlcm = cs
        .iter()
        .fold(Polynomial::one(), |acc, c| poly_lcm(&acc, c.den()));
    let mut coeffs = vec![Polynomial::zero(); off as usize];
    for c in &cs {
        coeffs.push(ratfun_to_poly(&(c * &RationalFunction::from_poly(dlcm.clone()))));
    }
    let op_h = RecOperator::new_raw(coeffs, v);
    let f_inv = f
        .shift(v, off)
        .inv()
        .expect("closed-form factor is nonzero");
    let rhs_h = rhs
        .scale(&(&RationalFunction::from_poly(dlcm.clone()) * &f_inv))
        .scale_q(&pow_q(&z, -off))
        .mul(&SumExpression::geometric(v, z.recip()));
    let sub = dalembertian_solve(&op_h, &rhs_h);
    let mut warnings = sub.warnings.clone();
    let mut basis = vec![BasisElement::Closed(h_expr.clone())];
    for elem in &sub.basis {
        match elem {
            BasisElement::Closed(g) => match indefinite_sum(g) {
                Ok(t) => basis.push(BasisElement::Closed(h_expr.mul(&t.shift(-1)))),
                Err(e) => {
                    warnings.push(format!("kernel layer sum left formal: {e}"));
                    basis.push(BasisElement::Formal(FormalSolution {
                        factor: h_expr.clone(),
                        body: format!("Sum[{g}]"),
                    }));
                }
            },
            BasisElement::Formal(fs) => {
                basis.push(BasisElement::Formal(FormalSolution {
                    factor: h_expr.clone(),
                    body: format!("Sum[({})*{}]", fs.factor, fs.body),
                }));
            }
        }
    }
    let particular = match &sub.particular {
        Some(p) if p.is_zero() => Some(SumExpression::zero(v)),
        Some(p) => match indefinite_sum(p) {
            Ok(t) => Some(h_expr.mul(&t.shift(-1))),
            Err(e) => {
                warnings.push(format!("particular sum left formal: {e}"));
                None
            }
        },
        None => None,
    };
    if basis.len() < d {
        warnings.push(format!("kernel basis incomplete: {} of {d}", basis.len()));
    }
    SolutionSet {
        var: v,
        order: d,
        basis,
        particular,
        warnings,
    }
}

/// Determines the free constants from values `F(n) = value` at the given
/// points.  Formal constants in the values and in the solution are
/// treated as algebraically independent, so the linear system splits per
/// constant monomial.
pub fn match_initial_values(
    sol: &SolutionSet,
    ivs: &[(i64, ConstExpr)],
) -> Result<MatchedSolution, SolveError> {
    let m = sol.basis.len();
    let mut closed = Vec::with_capacity(m);
    for b in &sol.basis {
        closed.push(b.as_closed().ok_or_else(|| {
            SolveError::NotInClass(format!("formal kernel element {b} cannot be matched"))
        })?);
    }
    if ivs.len() < m {
        return Err(SolveError::InitialValues(format!(
            "{} values given, {m} constants free",
            ivs.len()
        )));
    }
    let eval = |e: &SumExpression, n: i64| -> Result<ConstExpr, SolveError> {
        e.eval_exact(n)
            .map_err(|err| SolveError::InitialValues(format!("cannot evaluate at {n}: {err}")))
    };
    let mut a: Vec<Vec<Q>> = Vec::with_capacity(ivs.len());
    let mut residuals: Vec<ConstExpr> = Vec::with_capacity(ivs.len());
    for (n, value) in ivs {
        let mut row = Vec::with_capacity(m);
        for e in &closed {
            let c = eval(e, *n)?;
            row.push(c.as_q().ok_or_else(|| {
                SolveError::InitialValues(format!(
                    "basis value at {n} is not rational: {c}"
                ))
            })?);
        }
        a.push(row);
        let mut r = value.clone();
        if let Some(p) = &sol.particular {
            r = r.sub(&eval(p, *n)?);
        }
        residuals.push(r);
    }
    let mut monos: BTreeSet<ConstMono> = BTreeSet::new();
    for r in &residuals {
        for (mono, _) in r.terms() {
            monos.insert(mono.clone());
        }
    }
    if monos.is_empty() {
        monos.insert(ConstMono::new());
    }
    let monos: Vec<ConstMono> = monos.into_iter().collect();
    let rhs: Vec<Vec<Q>> = monos
        .iter()
        .map(|mono| {
            residuals
                .iter()
                .map(|r| {
                    r.terms()
                        .find(|(m2, _)| *m2 == mono)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(Q::zero)
                })
                .collect()
        })
        .collect();
    let lin = solve_q(&a, &rhs);
    let mut constants = vec![ConstExpr::zero(); m];
    for (mono, part) in monos.iter().zip(&lin.particulars) {
        let Some(x) = part else {
            return Err(SolveError::Inconsistent(format!(
                "no match in the {} component",
                ConstExpr::from_mono(mono.clone(), Q::one())
            )));
        };
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                constants[i] = constants[i].add(&ConstExpr::from_mono(mono.clone(), xi.clone()));
            }
        }
    }
    let var = sol.var;
    let mut expr = sol
        .particular
        .clone()
        .unwrap_or_else(|| SumExpression::zero(var));
    for (e, c) in closed.iter().zip(&constants) {
        if !c.is_zero() {
            expr = expr.add(&e.scale_const(c));
        }
    }
    Ok(MatchedSolution {
        expr,
        constants,
        unique: lin.nullspace.is_empty(),
    })
}

/// End-to-end scalar solver: kernel plus particular solution, constants
/// pinned by initial values, result verified against the equation.
pub fn solve_rec(
    op: &RecOperator,
    rhs: &SumExpression,
    ivs: &[(i64, ConstExpr)],
) -> Result<SumExpression, SolveError> {
    if !op.is_eps_free() {
        return Err(SolveError::EpsPresent);
    }
    let sol = dalembertian_solve(op, rhs);
    if sol.particular.is_none() && !rhs.is_zero() {
        return Err(SolveError::NotInClass(
            "no particular solution in the nested-sum class".into(),
        ));
    }
    let matched = match_initial_values(&sol, ivs).map_err(|e| match e {
        SolveError::Inconsistent(msg) if !sol.is_complete() => SolveError::NotInClass(format!(
            "kernel basis incomplete and initial values unmatched: {msg}"
        )),
        other => other,
    })?;
    let residual = op.apply(&matched.expr, None).sub(rhs);
    if !residual.is_zero() {
        return Err(SolveError::Verification(format!(
            "residual {residual} is not zero"
        )));
    }
    Ok(matched.expr)
}
