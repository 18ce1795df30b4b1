//! Formal transcendental constants and exact linear combinations of their
//! monomials.
//!
//! Zeta values, the Euler-Mascheroni constant and logarithms of positive
//! rationals are carried as opaque symbols: they never mix with rational
//! arithmetic, so `z2/2 + 3` stays exactly that. [`ConstExpr`] is the
//! Q-linear span of products of such symbols; it is the value domain for
//! exact evaluation of sum expressions at integer arguments.

use crate::algebra::Q;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// A single formal constant.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum FormalConstant {
    /// `zeta(k)` for `k >= 2`, printed `z2`, `z3`, ...
    Zeta(u32),
    /// Euler-Mascheroni gamma, printed `eg`.
    EulerGamma,
    /// `log(q)` of a positive rational, printed `log[q]`.
    Log(Q),
}

impl FormalConstant {
    pub fn zeta(k: u32) -> FormalConstant {
        assert!(k >= 2, "zeta symbols start at weight 2");
        FormalConstant::Zeta(k)
    }
}

impl fmt::Display for FormalConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormalConstant::Zeta(k) => write!(f, "z{k}"),
            FormalConstant::EulerGamma => write!(f, "eg"),
            FormalConstant::Log(q) => {
                if q.denom().is_one() {
                    write!(f, "log[{}]", q.numer())
                } else {
                    write!(f, "log[{}/{}]", q.numer(), q.denom())
                }
            }
        }
    }
}

/// Multiset of formal constants: one monomial like `z2*eg^2`.
pub type ConstMono = BTreeMap<FormalConstant, u32>;

/// Exact element of Q[z2, z3, ..., eg, log q]: a finite Q-linear
/// combination of constant monomials. The empty monomial is the rational
/// part.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ConstExpr {
    terms: BTreeMap<ConstMono, Q>,
}

impl ConstExpr {
    pub fn zero() -> ConstExpr {
        ConstExpr::default()
    }

    pub fn from_q(c: Q) -> ConstExpr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(ConstMono::new(), c);
        }
        ConstExpr { terms }
    }

    pub fn from_symbol(s: FormalConstant) -> ConstExpr {
        let mut m = ConstMono::new();
        m.insert(s, 1);
        let mut terms = BTreeMap::new();
        terms.insert(m, Q::one());
        ConstExpr { terms }
    }

    pub fn from_mono(m: ConstMono, c: Q) -> ConstExpr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ConstExpr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational part (coefficient of the empty monomial).
    pub fn rational_part(&self) -> Q {
        self.terms
            .get(&ConstMono::new())
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// `Some(q)` when the expression is purely rational.
    pub fn as_q(&self) -> Option<Q> {
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&ConstMono::new()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ConstMono, &Q)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, m: ConstMono, c: Q) {
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

    pub fn add(&self, other: &ConstExpr) -> ConstExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ConstExpr) -> ConstExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ConstExpr {
        ConstExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> ConstExpr {
        if c.is_zero() {
            return ConstExpr::zero();
        }
        ConstExpr {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &ConstExpr) -> ConstExpr {
        let mut out = ConstExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (s, e) in m2 {
                    *m.entry(s.clone()).or_insert(0) += e;
                }
                out.insert_add(m, c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
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
            if !abs.is_one() || m.is_empty() {
                if abs.denom().is_one() {
                    parts.push(format!("{}", abs.numer()));
                } else {
                    parts.push(format!("{}/{}", abs.numer(), abs.denom()));
                }
            }
            for (s, e) in m {
                if *e == 1 {
                    parts.push(format!("{s}"));
                } else {
                    parts.push(format!("{s}^{e}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    #[test]
    fn arithmetic_keeps_symbols_apart() {
        let z2 = ConstExpr::from_symbol(FormalConstant::zeta(2));
        let e = z2.scale(&q(1, 2)).add(&ConstExpr::from_q(qi(3)));
        assert_eq!(e.rational_part(), qi(3));
        assert!(e.as_q().is_none());
        let diff = e.sub(&z2.scale(&q(1, 2)));
        assert_eq!(diff.as_q(), Some(qi(3)));
    }

    #[test]
    fn products_build_monomials() {
        let z2 = ConstExpr::from_symbol(FormalConstant::zeta(2));
        let z2sq = z2.mul(&z2);
        let mut m = ConstMono::new();
        m.insert(FormalConstant::zeta(2), 2);
        assert_eq!(z2sq, ConstExpr::from_mono(m, qi(1)));
    }

    #[test]
    fn display_is_canonical() {
        let e = ConstExpr::from_symbol(FormalConstant::zeta(3))
            .add(&ConstExpr::from_symbol(FormalConstant::EulerGamma).scale(&qi(-2)))
            .add(&ConstExpr::from_q(q(7, 3)));
        assert_eq!(format!("{e}"), "7/3+z3-2*eg");
    }
}
