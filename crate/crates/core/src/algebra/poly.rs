//! Multivariate polynomials with rational coefficients.
//!
//! The variable set is fixed and globally ordered: `k < N < ep < x < t`.
//! `t` is an auxiliary slot reserved for internal computations (dispersion
//! offsets, symbolic degree analysis); the textual formats never mention it.
//! Terms are kept in a map keyed by exponent vectors under graded
//! lexicographic order, with no explicit zero coefficients.

use super::Q;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Number of variable slots.
pub const NVARS: usize = 5;

/// The global variable alphabet, in its fixed order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Var {
    /// Inner summation index.
    K = 0,
    /// Outer sequence index.
    N = 1,
    /// Dimensional regulator.
    Ep = 2,
    /// Generating-function variable.
    X = 3,
    /// Internal auxiliary variable.
    T = 4,
}

impl Var {
    pub const ALL: [Var; NVARS] = [Var::K, Var::N, Var::Ep, Var::X, Var::T];

    pub fn name(self) -> &'static str {
        match self {
            Var::K => "k",
            Var::N => "N",
            Var::Ep => "ep",
            Var::X => "x",
            Var::T => "t",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        match s {
            "k" => Some(Var::K),
            "N" => Some(Var::N),
            "ep" => Some(Var::Ep),
            "x" => Some(Var::X),
            "t" => Some(Var::T),
            _ => None,
        }
    }
}

/// Exponent vector, one slot per variable in the global order.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Mono(pub [u16; NVARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; NVARS]);

    pub fn var(v: Var) -> Mono {
        let mut e = [0u16; NVARS];
        e[v as usize] = 1;
        Mono(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let mut e = [0u16; NVARS];
        for i in 0..NVARS {
            e[i] = self.0[i]
                .checked_add(other.0[i])
                .expect("monomial exponent overflow");
        }
        Mono(e)
    }

    /// Exact monomial quotient, `None` when some exponent underflows.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut e = [0u16; NVARS];
        for i in 0..NVARS {
            e[i] = self.0[i].checked_sub(other.0[i])?;
        }
        Some(Mono(e))
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

// Graded lex: total degree first, ties broken lexicographically with `k`
// most significant. This is the single monomial order used crate-wide.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial over [`Q`].
///
/// Invariant: `terms` never holds a zero coefficient, so the zero
/// polynomial is the empty map and structural equality is semantic
/// equality.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Mono, Q>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Polynomial {
        Polynomial::constant(Q::one())
    }

    pub fn constant(c: Q) -> Polynomial {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::ONE, c);
        }
        Polynomial { terms }
    }

    pub fn int(c: i64) -> Polynomial {
        Polynomial::constant(super::qi(c))
    }

    pub fn var(v: Var) -> Polynomial {
        Polynomial::monomial(Mono::var(v), Q::one())
    }

    pub fn monomial(m: Mono, c: Q) -> Polynomial {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    /// `v + c` for a machine-integer offset, a ubiquitous building block.
    pub fn var_plus(v: Var, c: i64) -> Polynomial {
        &Polynomial::var(v) + &Polynomial::int(c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::ONE)
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(Mono::is_one)
    }

    /// The constant value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            Some(Q::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading (monomial, coefficient) under graded lex; `None` when zero.
    pub fn leading_term(&self) -> Option<(&Mono, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Q {
        self.leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(Mono::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Degree in one variable; `None` for the zero polynomial.
    pub fn degree_in(&self, v: Var) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        Some(
            self.terms
                .keys()
                .map(|m| m.0[v as usize] as u32)
                .max()
                .unwrap(),
        )
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.0[v as usize] > 0)
    }

    /// Variables that actually occur.
    pub fn vars(&self) -> Vec<Var> {
        Var::ALL
            .into_iter()
            .filter(|&v| self.contains_var(v))
            .collect()
    }

    fn insert_add(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (*m, a * c))
                .collect(),
        }
    }

    pub fn mul_mono(&self, m: &Mono) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(mm, c)| (mm.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute a polynomial for a variable.
    pub fn subst(&self, v: Var, value: &Polynomial) -> Polynomial {
        let deg = match self.degree_in(v) {
            None => return Polynomial::zero(),
            Some(d) => d,
        };
        // cache value^0..value^deg
        let mut powers = Vec::with_capacity(deg as usize + 1);
        powers.push(Polynomial::one());
        for i in 1..=deg as usize {
            powers.push(&powers[i - 1] * value);
        }
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.0[v as usize] as usize;
            let mut rest = *m;
            rest.0[v as usize] = 0;
            let contrib = powers[e].mul_mono(&rest).scale(c);
            out = &out + &contrib;
        }
        out
    }

    /// Substitute a rational constant for a variable.
    pub fn subst_q(&self, v: Var, value: &Q) -> Polynomial {
        self.subst(v, &Polynomial::constant(value.clone()))
    }

    /// Shift `v -> v + j`.
    pub fn shift(&self, v: Var, j: i64) -> Polynomial {
        if j == 0 || !self.contains_var(v) {
            return self.clone();
        }
        self.subst(v, &Polynomial::var_plus(v, j))
    }

    /// Full evaluation; every occurring variable must be assigned.
    pub fn eval(&self, assign: &dyn Fn(Var) -> Option<Q>) -> Option<Q> {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for v in Var::ALL {
                let e = m.0[v as usize];
                if e > 0 {
                    let val = assign(v)?;
                    let mut p = Q::one();
                    for _ in 0..e {
                        p *= &val;
                    }
                    term *= p;
                }
            }
            acc += term;
        }
        Some(acc)
    }

    /// View as univariate in `v`: coefficient polynomials by ascending power.
    ///
    /// The result has length `degree_in(v) + 1` (empty for zero).
    pub fn coeffs_in(&self, v: Var) -> Vec<Polynomial> {
        let deg = match self.degree_in(v) {
            None => return Vec::new(),
            Some(d) => d as usize,
        };
        let mut out = vec![Polynomial::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.0[v as usize] as usize;
            let mut rest = *m;
            rest.0[v as usize] = 0;
            out[e].insert_add(rest, c.clone());
        }
        out
    }

    /// Inverse of [`coeffs_in`]: `sum coeffs[i] * v^i`.
    pub fn from_coeffs_in(v: Var, coeffs: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero();
        for (i, c) in coeffs.iter().enumerate() {
            let mut m = Mono::ONE;
            m.0[v as usize] = u16::try_from(i).expect("degree overflow");
            out = &out + &c.mul_mono(&m);
        }
        out
    }

    /// Leading coefficient as univariate in `v` (zero polynomial for zero).
    pub fn leading_coeff_in(&self, v: Var) -> Polynomial {
        self.coeffs_in(v).pop().unwrap_or_else(Polynomial::zero)
    }

    /// Coefficient of `v^e`.
    pub fn coeff_of(&self, v: Var, e: u32) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if m.0[v as usize] as u32 == e {
                let mut rest = *m;
                rest.0[v as usize] = 0;
                out.insert_add(rest, c.clone());
            }
        }
        out
    }

    /// Exact division under graded lex; `None` when `self` is not a
    /// polynomial multiple of `div`.
    pub fn divide_exact(&self, div: &Polynomial) -> Option<Polynomial> {
        assert!(!div.is_zero(), "division by zero polynomial");
        let (dm, dc) = {
            let (m, c) = div.leading_term().unwrap();
            (*m, c.clone())
        };
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        while let Some((m, c)) = rem.leading_term().map(|(m, c)| (*m, c.clone())) {
            let qm = m.div(&dm)?;
            let qc = c / &dc;
            let piece = Polynomial::monomial(qm, qc);
            quot = &quot + &piece;
            rem = &rem - &(&piece * div);
        }
        Some(quot)
    }

    /// Pseudo-remainder of `self` by `div`, both viewed in `v`:
    /// `lc(div)^(da-db+1) * self = q*div + r` with `deg_v r < deg_v div`.
    pub fn pseudo_rem(&self, div: &Polynomial, v: Var) -> Polynomial {
        let db = div.degree_in(v).expect("pseudo_rem by zero") as i64;
        let lc_div = div.leading_coeff_in(v);
        let mut r = self.clone();
        let mut da = r.degree_in(v).map(|d| d as i64).unwrap_or(-1);
        if da < db {
            // still multiply by the unit power for determinism of callers
            return r;
        }
        while da >= db {
            let lc_r = r.leading_coeff_in(v);
            // r := lc_div * r - lc_r * v^(da-db) * div
            let mut shift_m = Mono::ONE;
            shift_m.0[v as usize] = (da - db) as u16;
            r = &(&r * &lc_div) - &(&lc_r.mul_mono(&shift_m) * div);
            let new_da = r.degree_in(v).map(|d| d as i64).unwrap_or(-1);
            debug_assert!(new_da < da);
            da = new_da;
        }
        r
    }

    /// Split into `(primitive, content)` over the integers: `self =
    /// content * primitive` with integer, content-free coefficients and a
    /// positive leading coefficient. The zero polynomial yields content 0.
    pub fn primitive_z(&self) -> (Polynomial, Q) {
        use num_bigint::BigInt;
        if self.is_zero() {
            return (Polynomial::zero(), Q::zero());
        }
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            let g = super::gcd_bigint(&den_lcm, c.denom());
            den_lcm = den_lcm * c.denom() / g;
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let scaled = c.numer() * (&den_lcm / c.denom());
            num_gcd = super::gcd_bigint(&num_gcd, &scaled);
        }
        let mut content = Q::new(num_gcd, den_lcm);
        if self.leading_coeff().is_negative() {
            content = -content;
        }
        let prim = self.scale(&(Q::one() / &content));
        (prim, content)
    }

    /// Monic under the global monomial order.
    pub fn make_monic(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        self.scale(&(Q::one() / self.leading_coeff()))
    }

    /// Map every coefficient (used by series/derivative style rewrites).
    pub fn map_coeffs(&self, f: &dyn Fn(&Q) -> Q) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.insert_add(*m, f(c));
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_add(*m, c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_add(*m, -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert_add(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Q::one())
    }
}

fn fmt_coeff(c: &Q) -> String {
    if c.denom().is_one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: graded-lex descending, `k`-major, explicit `*` and
    /// `^`, e.g. `16*N^3+144*N^2+413*N+384`. Re-parseable by the crate's
    /// own parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, "-")?;
            } else {
                write!(f, "+")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                parts.push(fmt_coeff(&abs));
            }
            for v in Var::ALL {
                let e = m.0[v as usize];
                if e == 1 {
                    parts.push(v.name().to_string());
                } else if e > 1 {
                    parts.push(format!("{}^{}", v.name(), e));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}
