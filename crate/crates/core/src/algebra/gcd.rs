//! Multivariate gcd, lcm, resultants and shift dispersion.
//!
//! gcd uses the primitive pseudo-remainder sequence recursively over the
//! variable order; it is deterministic and returns a monic result.
//! Resultants are computed from a Sylvester matrix with fraction-free
//! (Bareiss) elimination, which stays exact under specialization of the
//! remaining variables.

use super::poly::{Mono, Polynomial, Var};
use super::roots::integer_roots;
use super::Q;
use num_traits::{One, Zero};

/// Highest variable occurring in either polynomial.
fn main_var(a: &Polynomial, b: &Polynomial) -> Option<Var> {
    Var::ALL
        .into_iter()
        .rev()
        .find(|&v| a.contains_var(v) || b.contains_var(v))
}

/// Content of `p` viewed in `v`: the gcd of its `v`-coefficients.
fn content_in(p: &Polynomial, v: Var) -> Polynomial {
    let coeffs = p.coeffs_in(v);
    let mut g = Polynomial::zero();
    for c in &coeffs {
        if !c.is_zero() {
            g = poly_gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
    }
    g
}

/// Monic greatest common divisor.
///
/// `poly_gcd(0, b)` is monic `b`; `poly_gcd(0, 0)` is zero. Constant
/// arguments behave as units: the gcd of anything with a nonzero constant
/// is 1.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.make_monic();
    }
    if b.is_zero() {
        return a.make_monic();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one();
    }
    let v = main_var(a, b).expect("nonconstant polynomials have a main var");
    // reduce to primitive parts in v; contents recurse into lower vars
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let cont = poly_gcd(&ca, &cb);
    let mut p = a
        .divide_exact(&ca)
        .expect("content divides its polynomial");
    let mut q = b
        .divide_exact(&cb)
        .expect("content divides its polynomial");
    if p.degree_in(v).unwrap_or(0) < q.degree_in(v).unwrap_or(0) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        if q.is_zero() {
            break;
        }
        if q.degree_in(v).unwrap_or(0) == 0 {
            // a nontrivial v-free remainder: primitive parts are coprime in v
            p = Polynomial::one();
            break;
        }
        let r = p.pseudo_rem(&q, v);
        let r = if r.is_zero() {
            r
        } else {
            let c = content_in(&r, v);
            r.divide_exact(&c).expect("content divides")
        };
        p = q;
        q = r;
    }
    let pp = if p.is_one() {
        p
    } else {
        let c = content_in(&p, v);
        p.divide_exact(&c).expect("content divides")
    };
    (&cont * &pp).make_monic()
}

/// Least common multiple, normalized integer-primitive with positive
/// leading coefficient (so results are stable denominators).
pub fn poly_lcm(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero();
    }
    let g = poly_gcd(a, b);
    let q = a.divide_exact(&g).expect("gcd divides");
    let (prim, _) = (&q * b).primitive_z();
    prim
}

/// Resultant of `a` and `b` with respect to `v`, as a polynomial in the
/// remaining variables. Returns zero iff the inputs share a factor
/// involving `v` (or one of them is zero).
pub fn resultant_in(a: &Polynomial, b: &Polynomial, v: Var) -> Polynomial {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero();
    }
    let ac = a.coeffs_in(v);
    let bc = b.coeffs_in(v);
    let m = ac.len() - 1; // deg a
    let n = bc.len() - 1; // deg b
    if m == 0 && n == 0 {
        return Polynomial::one();
    }
    if m == 0 {
        return ac[0].pow(n as u32);
    }
    if n == 0 {
        return bc[0].pow(m as u32);
    }
    // Sylvester matrix, (m+n) x (m+n)
    let size = m + n;
    let mut mat: Vec<Vec<Polynomial>> = vec![vec![Polynomial::zero(); size]; size];
    for row in 0..n {
        for (j, c) in ac.iter().enumerate() {
            mat[row][row + (m - j)] = c.clone();
        }
    }
    for row in 0..m {
        for (j, c) in bc.iter().enumerate() {
            mat[n + row][row + (n - j)] = c.clone();
        }
    }
    bareiss_det(mat)
}

/// Fraction-free determinant; exact for polynomial entries.
fn bareiss_det(mut m: Vec<Vec<Polynomial>>) -> Polynomial {
    let n = m.len();
    if n == 0 {
        return Polynomial::one();
    }
    let mut sign = Q::one();
    let mut prev = Polynomial::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            // pivot search below row k
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Polynomial::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .divide_exact(&prev)
                    .expect("Bareiss division is exact");
            }
            m[i][k] = Polynomial::zero();
        }
        prev = m[k][k].clone();
    }
    m[n - 1][n - 1].scale(&sign)
}

/// Nonnegative integer shifts `h` with `gcd(a(v), b(v+h))` nonconstant,
/// treating all other variables as transcendental parameters.
///
/// Sorted ascending; empty when either polynomial is free of `v`.
pub fn dispersion_set(a: &Polynomial, b: &Polynomial, v: Var) -> Vec<i64> {
    if a.degree_in(v).unwrap_or(0) == 0 || b.degree_in(v).unwrap_or(0) == 0 {
        return Vec::new();
    }
    assert!(
        !a.contains_var(Var::T) && !b.contains_var(Var::T),
        "auxiliary variable t is reserved for the dispersion offset"
    );
    let shifted = b.subst(v, &(&Polynomial::var(v) + &Polynomial::var(Var::T)));
    let res = resultant_in(a, &shifted, v);
    // res is a polynomial in t and the parameters; a shift h qualifies iff
    // res vanishes identically at t = h, i.e. every t-coefficient-in-params
    // polynomial has h as a root.
    let mut common: Option<Polynomial> = None;
    // group by parameter monomials: collect coefficients of res as a
    // univariate polynomial in t with Q coefficients per parameter monomial
    let mut per_param: std::collections::BTreeMap<Mono, Vec<Q>> = std::collections::BTreeMap::new();
    for (m, c) in res.terms() {
        let tdeg = m.0[Var::T as usize] as usize;
        let mut rest = *m;
        rest.0[Var::T as usize] = 0;
        let entry = per_param.entry(rest).or_default();
        if entry.len() <= tdeg {
            entry.resize(tdeg + 1, Q::zero());
        }
        entry[tdeg] = c.clone();
    }
    for (_, coeffs) in per_param {
        let poly = Polynomial::from_coeffs_in(
            Var::T,
            &coeffs
                .into_iter()
                .map(Polynomial::constant)
                .collect::<Vec<_>>(),
        );
        common = Some(match common {
            None => poly,
            Some(g) => poly_gcd(&g, &poly),
        });
        if common.as_ref().map(|g| g.is_one()).unwrap_or(false) {
            return Vec::new();
        }
    }
    let Some(g) = common else {
        // resultant identically zero: inputs share a v-factor at every
        // shift, which cannot happen for squarefree-coprime callers; be
        // conservative and report no structured shifts.
        return Vec::new();
    };
    let mut out: Vec<i64> = integer_roots(&g, Var::T)
        .into_iter()
        .filter_map(|(r, _)| {
            use num_traits::ToPrimitive;
            r.to_i64().filter(|&h| h >= 0)
        })
        .collect();
    out.sort_unstable();
    out
}
