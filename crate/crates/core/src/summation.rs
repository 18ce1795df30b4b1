//! Indefinite summation over the nested-sum class.
//!
//! `indefinite_sum(g)` returns T with T(n) - T(n-1) = g(n) as an identity
//! of expressions; the additive constant is not pinned. Recognized kernels
//! per term: a polynomial times a geometric factor, rational coefficients
//! whose denominators factor over the argument variable, and any of these
//! times a nested sum. Integer poles reduce to shifted sums; non-integer
//! poles and factors without rational roots must telescope along their
//! own integer-shift chain. Polynomial parts against a sum reduce by
//! summation by parts and offset poles by argument synchronization.
//! Terms are processed deepest first
//! and the shallower leftovers of each step return to the work pool, so
//! pieces that only telescope jointly cancel before they are summed.

use crate::algebra::{
    poly_gcd, q_is_integer, q_to_i64, rational_roots, Mat, Polynomial, Q, RationalFunction, Var,
};
use crate::constants::ConstExpr;
use crate::sums::{pow_q, SSum, SumExpression, SumTerm};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SumError {
    #[error("kernel outside the summable class: {0}")]
    Unrecognized(String),
}

/// Antidifference of g in its argument variable. Formal constants ride
/// along as scalars; the work pool shrinks in sum depth each round.
pub fn indefinite_sum(g: &SumExpression) -> Result<SumExpression, SumError> {
    let var = g.var();
    let mut out = SumExpression::zero(var);
    let mut rest = g.clone();
    while !rest.is_zero() {
        let (key, coeff) = rest
            .terms()
            .max_by_key(|(k, _)| k.sum.as_ref().map_or(0, SSum::depth))
            .map(|(k, c)| (k.clone(), c.clone()))
            .expect("nonzero expression has a term");
        let (mut done, mut residual) = sum_step(&coeff, &key.geom, key.sum.as_ref(), var)?;
        if !key.consts.is_empty() {
            let mono = ConstExpr::from_mono(key.consts.clone(), Q::one());
            done = done.scale_const(&mono);
            residual = residual.scale_const(&mono);
        }
        let term = SumExpression::from_terms(
            var,
            vec![SumTerm {
                coeff,
                consts: key.consts,
                geom: key.geom,
                sums: key.sum.into_iter().collect(),
            }],
        );
        rest = rest.sub(&term).add(&residual);
        out = out.add(&done);
    }
    Ok(out)
}

/// Fraction W(v) / A(v+shift)^mult over a shifted copy of a base block;
/// deg_v W < deg_v A and the coefficients of W are free of v.
#[derive(Clone, Debug)]
struct AtomFrac {
    base: Polynomial,
    shift: i64,
    mult: u32,
    num: RationalFunction,
}

/// r(v) split as sum of poly coefficients times v-powers, c/(v-root)^mult
/// pieces with rational roots, and block fractions over factors that have
/// no rational root. All coefficients are free of v.
struct PartialFractions {
    poly: Vec<(u32, RationalFunction)>,
    fracs: Vec<(Q, u32, RationalFunction)>,
    afracs: Vec<AtomFrac>,
}

fn unrecognized(r: &RationalFunction) -> SumError {
    SumError::Unrecognized(r.to_string())
}

fn monic_in(p: &Polynomial, v: Var) -> Polynomial {
    let lead = p
        .leading_coeff_in(v)
        .as_constant()
        .expect("numeric leading coefficient");
    p.scale(&(Q::one() / lead))
}

const SHIFT_CAP: i64 = 24;

/// Splits a monic polynomial without rational roots into blocks A(v+s)^m
/// sharing one base A per chain; bases are found through gcds with
/// shifted copies. A block overlapping no shift of itself stays whole.
fn shift_atoms(r0: &Polynomial, v: Var) -> Vec<(Polynomial, i64, u32)> {
    let mut out = Vec::new();
    let mut r = r0.clone();
    while r.degree_in(v).unwrap_or(0) > 0 {
        let mut atom = r.clone();
        loop {
            let overlap = (1..=SHIFT_CAP).find_map(|k| {
                let g = poly_gcd(&atom, &atom.shift(v, k));
                (g.degree_in(v).unwrap_or(0) >= 1).then(|| monic_in(&g, v))
            });
            match overlap {
                Some(gm) if gm != atom => atom = gm,
                _ => break,
            }
        }
        for s in -SHIFT_CAP..=SHIFT_CAP {
            let factor = atom.shift(v, s);
            let mut mult = 0u32;
            while let Some(q) = r.divide_exact(&factor) {
                r = q;
                mult += 1;
            }
            if mult > 0 {
                out.push((atom.clone(), s, mult));
            }
        }
    }
    out
}

enum BlockKind {
    Root(Q),
    Atom { base: Polynomial, shift: i64 },
}

struct Block {
    factor: Polynomial,
    mult: u32,
    kind: BlockKind,
}

fn partial_fractions(r: &RationalFunction, v: Var) -> Result<PartialFractions, SumError> {
    let num = r.num();
    let den = r.den();
    let dcoeffs = den.coeffs_in(v);
    let mut content = Polynomial::zero();
    for c in &dcoeffs {
        content = poly_gcd(&content, c);
    }
    let den_v = den.divide_exact(&content).expect("content divides");
    if den_v.vars().iter().any(|&w| w != v) {
        return Err(unrecognized(r));
    }
    let dv = den_v.degree_in(v).unwrap_or(0);
    if dv == 0 {
        // v-free denominator: a polynomial in v over the parameters
        let global = RationalFunction::new(Polynomial::one(), den.clone());
        let poly = num
            .coeffs_in(v)
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, c)| (t as u32, &RationalFunction::from_poly(c.clone()) * &global))
            .collect();
        return Ok(PartialFractions {
            poly,
            fracs: Vec::new(),
            afracs: Vec::new(),
        });
    }
    let roots = rational_roots(&den_v, v);
    let lead = den_v
        .leading_coeff_in(v)
        .as_constant()
        .ok_or_else(|| unrecognized(r))?;
    let mut blocks: Vec<Block> = Vec::new();
    let mut lin_all = Polynomial::one();
    for (root, m) in &roots {
        let lin = &Polynomial::var(v) - &Polynomial::constant(root.clone());
        lin_all = &lin_all * &lin.pow(*m);
        blocks.push(Block {
            factor: lin,
            mult: *m,
            kind: BlockKind::Root(root.clone()),
        });
    }
    let mut d_monic = lin_all.clone();
    let covered: u32 = roots.iter().map(|(_, m)| *m).sum();
    if covered < dv {
        let rest = monic_in(
            &den_v.divide_exact(&lin_all).expect("linear part divides"),
            v,
        );
        for (base, s, m) in shift_atoms(&rest, v) {
            let factor = base.shift(v, s);
            d_monic = &d_monic * &factor.pow(m);
            blocks.push(Block {
                factor,
                mult: m,
                kind: BlockKind::Atom { base, shift: s },
            });
        }
    }
    let global = RationalFunction::new(
        Polynomial::one(),
        content.scale(&lead),
    );
    let (quot, rem) = divmod_monic(num, &d_monic, v);
    let poly = quot
        .coeffs_in(v)
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(t, c)| (t as u32, &RationalFunction::from_poly(c.clone()) * &global))
        .collect();
    // rem/D = sum over blocks of W_{b,k}(v) D/factor^k solved by
    // coefficient comparison; columns are cofactor times v-powers
    let n = dv as usize;
    let mut meta: Vec<(usize, u32, u32)> = Vec::with_capacity(n);
    let mut mat = Mat::<RationalFunction>::zeros(n, n);
    let mut col = 0usize;
    for (bi, block) in blocks.iter().enumerate() {
        let degb = block.factor.degree_in(v).unwrap_or(0);
        let mut cof = d_monic.clone();
        for k in 1..=block.mult {
            cof = cof.divide_exact(&block.factor).expect("factor divides");
            for t in 0..degb {
                let colp = &cof * &Polynomial::var(v).pow(t);
                for (s, c) in colp.coeffs_in(v).iter().enumerate() {
                    mat.set(s, col, RationalFunction::from_poly(c.clone()));
                }
                meta.push((bi, k, t));
                col += 1;
            }
        }
    }
    debug_assert_eq!(col, n);
    let mut rhs = vec![RationalFunction::zero(); n];
    for (s, c) in rem.coeffs_in(v).iter().enumerate() {
        rhs[s] = RationalFunction::from_poly(c.clone());
    }
    let sol = mat.solve(&rhs).expect("partial fractions are unique");
    let mut fracs: Vec<(Q, u32, RationalFunction)> = Vec::new();
    let mut awork: Vec<((usize, u32), RationalFunction)> = Vec::new();
    for ((bi, k, t), u) in meta.iter().zip(sol) {
        if u.is_zero() {
            continue;
        }
        match &blocks[*bi].kind {
            BlockKind::Root(root) => fracs.push((root.clone(), *k, &u * &global)),
            BlockKind::Atom { .. } => {
                let w = &u * &RationalFunction::from_poly(Polynomial::var(v).pow(*t));
                match awork.iter_mut().find(|(key, _)| *key == (*bi, *k)) {
                    Some((_, acc)) => *acc = &*acc + &w,
                    None => awork.push(((*bi, *k), w)),
                }
            }
        }
    }
    let afracs = awork
        .into_iter()
        .map(|((bi, k), w)| {
            let BlockKind::Atom { base, shift } = &blocks[bi].kind else {
                unreachable!()
            };
            AtomFrac {
                base: base.clone(),
                shift: *shift,
                mult: k,
                num: &w * &global,
            }
        })
        .collect();
    Ok(PartialFractions { poly, fracs, afracs })
}

/// Division with remainder by a monic-in-v divisor; coefficients may
/// involve other variables.
fn divmod_monic(num: &Polynomial, d: &Polynomial, v: Var) -> (Polynomial, Polynomial) {
    let dd = d.degree_in(v).unwrap_or(0) as usize;
    if dd == 0 {
        return (num.clone(), Polynomial::zero());
    }
    let mut rem = num.coeffs_in(v);
    if rem.len() <= dd {
        return (Polynomial::zero(), num.clone());
    }
    let dc = d.coeffs_in(v);
    debug_assert!(dc.last().map_or(false, |c| c.is_one()));
    let mut quot = vec![Polynomial::zero(); rem.len() - dd];
    for t in (dd..rem.len()).rev() {
        let c = rem[t].clone();
        if c.is_zero() {
            continue;
        }
        quot[t - dd] = c.clone();
        for (s, ds) in dc.iter().enumerate() {
            rem[t - dd + s] = &rem[t - dd + s] - &(&c * ds);
        }
    }
    (
        Polynomial::from_coeffs_in(v, &quot),
        Polynomial::from_coeffs_in(v, &rem[..dd]),
    )
}

fn binom_q(n: u32, k: u32) -> Q {
    let mut acc = Q::one();
    for i in 0..k {
        acc *= Q::from_integer((n - i).into());
        acc /= Q::from_integer((i + 1).into());
    }
    acc
}

fn neg_one_pow(e: usize) -> Q {
    if e % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// T with T(v) - T(v-1) = x^v v^k, solved by polynomial ansatz.
fn power_antidifference(k: u32, x: &Q, var: Var) -> SumExpression {
    let k = k as usize;
    let n = k + 1;
    if x.is_one() {
        // degree k+1 with zero constant term; column t-1 holds the
        // coefficients of v^t - (v-1)^t
        let mut m = Mat::<Q>::zeros(n, n);
        for t in 1..=n {
            for s in 0..t {
                m.set(s, t - 1, -binom_q(t as u32, s as u32) * neg_one_pow(t - s));
            }
        }
        let mut rhs = vec![Q::zero(); n];
        rhs[k] = Q::one();
        let sol = m.solve(&rhs).expect("triangular with diagonal t");
        let mut coeffs = vec![Polynomial::zero(); n + 1];
        for (t, c) in sol.into_iter().enumerate() {
            coeffs[t + 1] = Polynomial::constant(c);
        }
        SumExpression::from_poly(var, Polynomial::from_coeffs_in(var, &coeffs))
    } else {
        // x^v q(v) with q(v) - (1/x) q(v-1) = v^k
        let xinv = Q::one() / x;
        let mut m = Mat::<Q>::zeros(n, n);
        for t in 0..n {
            for s in 0..=t {
                let mut c = -(&xinv * binom_q(t as u32, s as u32) * neg_one_pow(t - s));
                if s == t {
                    c += Q::one();
                }
                m.set(s, t, c);
            }
        }
        let mut rhs = vec![Q::zero(); n];
        rhs[k] = Q::one();
        let sol = m.solve(&rhs).expect("diagonal 1 - 1/x is nonzero");
        let coeffs: Vec<Polynomial> = sol.into_iter().map(Polynomial::constant).collect();
        SumExpression::geometric(var, x.clone()).scale(&RationalFunction::from_poly(
            Polynomial::from_coeffs_in(var, &coeffs),
        ))
    }
}

fn poly_part_antidiff(poly: &[(u32, RationalFunction)], x: &Q, var: Var) -> SumExpression {
    let mut out = SumExpression::zero(var);
    for (k, c) in poly {
        out = out.add(&power_antidifference(*k, x, var).scale(c));
    }
    out
}

/// Rational F with Delta(x^v F(v)) = x^v times the chain parts. Fractions
/// over shifted copies of one base block A form a chain; the ansatz
/// sum_s D_s(v)/A(v+s)^k forces D_s(v) = C_s(v) + D_{s+1}(v-1)/x running
/// from the top shift down, and the final carry must vanish for the chain
/// to telescope inside the class.
fn chain_antidiff(afracs: &[AtomFrac], x: &Q, var: Var) -> Result<RationalFunction, SumError> {
    let xinv = RationalFunction::from_q(Q::one() / x);
    let mut groups: Vec<(Polynomial, u32, BTreeMap<i64, RationalFunction>)> = Vec::new();
    for af in afracs {
        let pos = groups
            .iter()
            .position(|(b, k, _)| *b == af.base && *k == af.mult);
        let map = match pos {
            Some(i) => &mut groups[i].2,
            None => {
                groups.push((af.base.clone(), af.mult, BTreeMap::new()));
                &mut groups.last_mut().expect("just pushed").2
            }
        };
        map.insert(af.shift, af.num.clone());
    }
    let mut f = RationalFunction::zero();
    for (base, k, cs) in &groups {
        let (&lo, _) = cs.first_key_value().expect("chain is nonempty");
        let (&hi, _) = cs.last_key_value().expect("chain is nonempty");
        let mut carry = RationalFunction::zero();
        for s in (lo..=hi).rev() {
            let c = cs.get(&s).cloned().unwrap_or_else(RationalFunction::zero);
            carry = &c + &(&carry.shift(var, -1) * &xinv);
            if !carry.is_zero() {
                let den = base.shift(var, s).pow(*k);
                f = &f + &(&carry * &RationalFunction::new(Polynomial::one(), den));
            }
        }
        if !carry.is_zero() {
            return Err(SumError::Unrecognized(format!(
                "pole chain over {base} does not telescope"
            )));
        }
    }
    Ok(f)
}

/// S(v) - S(v-1): the outer summand x1^v / v^a1 times the inner sum at v.
fn delta_ssum(s: &SSum, var: Var) -> SumExpression {
    let (a1, x1) = s.indices()[0].clone();
    let rest = &s.indices()[1..];
    let mut f = SumExpression::geometric(var, x1).scale(&RationalFunction::new(
        Polynomial::one(),
        Polynomial::var(var).pow(a1),
    ));
    if !rest.is_empty() {
        f = f.mul(&SumExpression::from_ssum(SSum::new(rest.to_vec(), var)));
    }
    f
}

/// One reduction step on a single term. Returns (t, r) with
/// term = (t(v) - t(v-1)) + r, where r only involves strictly smaller
/// sum depth; the caller merges r back into its pool.
fn sum_step(
    coeff: &RationalFunction,
    x: &Q,
    sum: Option<&SSum>,
    var: Var,
) -> Result<(SumExpression, SumExpression), SumError> {
    let PartialFractions {
        poly,
        fracs,
        mut afracs,
    } = partial_fractions(coeff, var)?;
    let mut int_fracs: Vec<(i64, u32, RationalFunction)> = Vec::new();
    for (root, m, c) in &fracs {
        if q_is_integer(root) {
            let e = -q_to_i64(root).expect("integer root fits");
            int_fracs.push((e, *m, c.clone()));
        } else {
            // v - root = base(v+s) with base = v - theta and s = -floor
            let fl = root.floor();
            let s = -q_to_i64(&fl).expect("chain offset fits");
            afracs.push(AtomFrac {
                base: &Polynomial::var(var) - &Polynomial::constant(root - &fl),
                shift: s,
                mult: *m,
                num: c.clone(),
            });
        }
    }
    // poly part and pole chains share one exact antidifference
    let mut f = poly_part_antidiff(&poly, x, var);
    let chain_f = chain_antidiff(&afracs, x, var)?;
    if !chain_f.is_zero() {
        f = f.add(&SumExpression::geometric(var, x.clone()).scale(&chain_f));
    }
    match sum {
        None => {
            let mut t = f;
            for (e, m, c) in &int_fracs {
                let ss = SSum::new(vec![(*m, x.clone())], var);
                t = t.add(
                    &SumExpression::from_ssum(ss)
                        .shift(*e)
                        .scale_q(&pow_q(x, -*e))
                        .scale(c),
                );
            }
            Ok((t, SumExpression::zero(var)))
        }
        Some(s) => {
            let mut done = SumExpression::zero(var);
            let mut lower = SumExpression::zero(var);
            let s_expr = SumExpression::from_ssum(s.clone());
            if !f.is_zero() {
                // by parts: sum(F' S) = F S - sum(F(v-1) (S(v) - S(v-1)))
                done = done.add(&f.mul(&s_expr));
                lower = lower.add(&f.shift(-1).mul(&delta_ssum(s, var)));
            }
            for (e, m, c) in &int_fracs {
                let mut idx = vec![(*m, x.clone())];
                idx.extend(s.indices().iter().cloned());
                let prepended = SumExpression::from_ssum(SSum::new(idx, var));
                if *e == 0 {
                    // x^v/v^m S_b(y; v) is the outer layer of S_{(m,x),b}
                    done = done.add(&prepended.scale(c));
                } else {
                    // synchronize the sum argument to v+e; the boundary part
                    // is strictly shallower and returns to the pool
                    done = done.add(&prepended.shift(*e).scale_q(&pow_q(x, -*e)).scale(c));
                    let boundary = s_expr.shift(*e).sub(&s_expr);
                    let factor = SumExpression::geometric(var, x.clone())
                        .scale(&RationalFunction::new(
                            Polynomial::one(),
                            Polynomial::var_plus(var, *e).pow(*m),
                        ))
                        .scale(c);
                    lower = lower.add(&factor.mul(&boundary));
                }
            }
            Ok((done, lower.neg()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};
    use crate::parse::{parse, to_ratfun, to_sum_expr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rf(s: &str) -> RationalFunction {
        to_ratfun(&parse(s).unwrap()).unwrap()
    }

    fn expr(s: &str) -> SumExpression {
        to_sum_expr(&parse(s).unwrap(), Var::N).unwrap()
    }

    fn telescopes(t: &SumExpression, g: &SumExpression) {
        assert_eq!(&t.sub(&t.shift(-1)), g, "antidifference identity failed");
    }

    fn matches_partial_sums(t: &SumExpression, g: &SumExpression, from: i64, to: i64) {
        let mut acc = t.eval_exact(from).unwrap();
        for n in from + 1..=to {
            acc = acc.add(&g.eval_exact(n).unwrap());
            assert_eq!(t.eval_exact(n).unwrap(), acc, "partial sum mismatch at {n}");
        }
    }

    #[test]
    fn polynomial_kernels_telescope_and_match_partial_sums() {
        for k in 0..=4u32 {
            let g = SumExpression::from_poly(Var::N, Polynomial::var(Var::N).pow(k));
            let t = indefinite_sum(&g).unwrap();
            telescopes(&t, &g);
            matches_partial_sums(&t, &g, 0, 12);
        }
        // squares pin the classical closed form
        let g = expr("N^2");
        let t = indefinite_sum(&g).unwrap();
        let shifted = t.eval_exact(6).unwrap().sub(&t.eval_exact(0).unwrap());
        assert_eq!(shifted.as_q().unwrap(), qi(91));
    }

    #[test]
    fn parameter_coefficients_ride_along() {
        let g = expr("ep*N");
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        assert_eq!(t, expr("ep*N*(N+1)/2"));
    }

    #[test]
    fn geometric_polynomial_kernels() {
        // sum of j*2^j from 1 to n is (n-1)*2^(n+1) + 2
        let g = SumExpression::geometric(Var::N, qi(2)).scale(&RationalFunction::var(Var::N));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        let base = t.eval_exact(0).unwrap();
        for n in 1..=10i64 {
            let v = t.eval_exact(n).unwrap().sub(&base).as_q().unwrap();
            assert_eq!(v, qi(n - 1) * pow_q(&qi(2), n + 1) + qi(2));
        }
        // alternating polynomial
        let g = SumExpression::geometric(Var::N, qi(-1))
            .scale(&rf("N^2+1"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 12);
    }

    #[test]
    fn single_pole_kernels_become_shifted_sums() {
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        // 1/(j+3)
        let g = SumExpression::from_rat(Var::N, rf("1/(N+3)"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        assert_eq!(t, s1.shift(3));
        matches_partial_sums(&t, &g, 0, 12);
        // 1/(j-2) telescopes symbolically even though early values hit the pole
        let g = SumExpression::from_rat(Var::N, rf("1/(N-2)"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        // 1/(j+1)^2
        let g = SumExpression::from_rat(Var::N, rf("1/(N+1)^2"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 12);
        // 2^j/(j+1)
        let g = SumExpression::geometric(Var::N, qi(2)).scale(&rf("1/(N+1)"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 12);
    }

    #[test]
    fn offset_pole_chains_telescope_to_rational_functions() {
        // poles at 1/4 and 5/4 sit on one chain and cancel
        let g = expr("1/((4*N-5)*(4*N-1))");
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(t, expr("-1/(4*(4*N-1))"));
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 10);
        // with a geometric weight the chain condition picks up the base
        let g = SumExpression::geometric(Var::N, qi(2))
            .scale(&rf("(6-4*N)/((2*N-1)*(2*N+1))"));
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(
            t,
            SumExpression::geometric(Var::N, qi(2)).scale(&rf("-4/(2*N+1)"))
        );
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 10);
        // integer poles and chain poles mix freely
        let g = expr("1/(N+1)").add(&expr("1/((4*N-5)*(4*N-1))"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 10);
    }

    #[test]
    fn rootless_factor_chains_telescope() {
        // N^2+N+1 and its shift N^2-N+1 form one block chain
        let u = expr("1/(N^2+N+1)");
        let g = u.sub(&u.shift(-1));
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(t, u);
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 10);
        // geometric weight and polynomial numerators ride the same chain
        let target = SumExpression::geometric(Var::N, qi(2)).scale(&rf("N/(N^2+1)"));
        let g = target.sub(&target.shift(-1));
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(t, target);
        matches_partial_sums(&t, &g, 0, 10);
        // a sum coefficient over a block chain reduces by parts with the
        // leftover cancelling in the pool
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let target = s1.scale(&rf("1/(N^2+N+1)"));
        let g = target.sub(&target.shift(-1));
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(t, target);
        matches_partial_sums(&t, &g, 1, 10);
    }

    #[test]
    fn joint_cancellation_across_terms_is_found() {
        // Delta(S1(v)/(4v-1)) splits into two terms; the leftover of the
        // by-parts step only telescopes against the second term
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let target = s1.scale(&rf("1/(4*N-1)"));
        let g = target.sub(&target.shift(-1));
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(t, target);
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 1, 12);
        // a lone chain coefficient against a sum leaves a one-sided chain
        let g = s1.scale(&rf("1/((4*N-5)*(4*N-1))"));
        assert!(matches!(
            indefinite_sum(&g),
            Err(SumError::Unrecognized(_))
        ));
    }

    #[test]
    fn matching_offset_forms_the_nested_sum_directly() {
        // 1/j * S1(j) sums to S_{1,1}
        let g = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N)).scale(&rf("1/N"));
        let t = indefinite_sum(&g).unwrap();
        assert_eq!(
            t,
            SumExpression::from_ssum(SSum::harmonic(&[1, 1], Var::N))
        );
        // (1/2)^j/j * S_{1,1}(j) prepends a weighted index
        let inner = SSum::harmonic(&[1, 1], Var::N);
        let g = SumExpression::from_ssum(inner.clone())
            .scale(&rf("1/N"))
            .mul(&SumExpression::geometric(Var::N, q(1, 2)));
        let t = indefinite_sum(&g).unwrap();
        let mut idx = vec![(1u32, q(1, 2))];
        idx.extend(inner.indices().iter().cloned());
        assert_eq!(t, SumExpression::from_ssum(SSum::new(idx, Var::N)));
    }

    #[test]
    fn summing_a_plain_sum_by_parts() {
        // sum of S1 is (N+1) S1(N) - N
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let t = indefinite_sum(&s1).unwrap();
        let expected = s1
            .scale(&rf("N+1"))
            .sub(&SumExpression::from_poly(Var::N, Polynomial::var(Var::N)));
        assert_eq!(t, expected);
        telescopes(&t, &s1);
    }

    #[test]
    fn offset_pole_against_a_sum_synchronizes() {
        let s1 = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N));
        let g = s1.scale(&rf("1/(N+1)"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 14);
        // deeper: 1/(j+2)^2 * S2(j)
        let g = SumExpression::from_ssum(SSum::harmonic(&[2], Var::N)).scale(&rf("1/(N+2)^2"));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 14);
        // alternating with offset: (-1)^j/(j+1) * S1(j)
        let g = SumExpression::from_ssum(SSum::harmonic(&[1], Var::N))
            .scale(&rf("1/(N+1)"))
            .mul(&SumExpression::geometric(Var::N, qi(-1)));
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
        matches_partial_sums(&t, &g, 0, 14);
    }

    #[test]
    fn formal_constants_scale_through() {
        let z2 = ConstExpr::from_symbol(crate::constants::FormalConstant::zeta(2));
        let g = SumExpression::from_rat(Var::N, rf("1/(N+1)")).scale_const(&z2);
        let t = indefinite_sum(&g).unwrap();
        telescopes(&t, &g);
    }

    #[test]
    fn random_kernels_telescope() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51a);
        let bases = [qi(1), qi(1), qi(2), qi(-1), q(1, 2)];
        let sums: [Option<Vec<(u32, Q)>>; 6] = [
            None,
            Some(vec![(1, qi(1))]),
            Some(vec![(2, qi(1))]),
            Some(vec![(1, qi(1)), (1, qi(1))]),
            Some(vec![(1, q(1, 2))]),
            Some(vec![(2, qi(1)), (1, qi(-1))]),
        ];
        for case in 0..40 {
            let numer: Polynomial = (0..=2u32)
                .map(|p| {
                    Polynomial::var(Var::N)
                        .pow(p)
                        .scale(&qi(rng.gen_range(-3..=3)))
                })
                .fold(Polynomial::zero(), |a, b| &a + &b);
            let numer = if numer.is_zero() { Polynomial::one() } else { numer };
            let mut denom = Polynomial::one();
            for _ in 0..rng.gen_range(0..=2) {
                let e = rng.gen_range(0..=2);
                denom = &denom * &Polynomial::var_plus(Var::N, e);
            }
            let mut g = SumExpression::from_rat(Var::N, RationalFunction::new(numer, denom));
            let base = bases[rng.gen_range(0..bases.len())].clone();
            if !base.is_one() {
                g = g.mul(&SumExpression::geometric(Var::N, base));
            }
            if let Some(idx) = &sums[rng.gen_range(0..sums.len())] {
                g = g.mul(&SumExpression::from_ssum(SSum::new(idx.clone(), Var::N)));
            }
            let t = indefinite_sum(&g).unwrap_or_else(|e| panic!("case {case}: {e}"));
            telescopes(&t, &g);
            // evaluation path: partial sums away from small-n poles
            let mut acc = t.eval_exact(5).unwrap();
            for n in 6..=11 {
                acc = acc.add(&g.eval_exact(n).unwrap());
                assert_eq!(t.eval_exact(n).unwrap(), acc, "case {case} at {n}");
            }
        }
    }

    #[test]
    fn kernels_outside_the_class_are_reported() {
        for bad in ["1/(2*N+1)", "1/(N^2+1)", "1/(N+ep)"] {
            let g = SumExpression::from_rat(Var::N, rf(bad));
            assert!(
                matches!(indefinite_sum(&g), Err(SumError::Unrecognized(_))),
                "{bad} should stay formal"
            );
        }
    }
}
