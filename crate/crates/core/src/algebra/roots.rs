//! Integer and rational roots of univariate polynomials.
//!
//! Candidates come from divisors of the extreme coefficients (rational
//! root theorem); divisor enumeration factors the coefficients by trial
//! division plus Pollard rho with a Miller-Rabin primality check, so large
//! trailing coefficients stay cheap. Every candidate is verified by exact
//! evaluation, multiplicities by repeated exact division.

use super::poly::{Polynomial, Var};
use super::Q;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

fn miller_rabin(n: &BigInt) -> bool {
    if n < &BigInt::from(2) {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let pb = BigInt::from(p);
        if n == &pb {
            return true;
        }
        if (n % &pb).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigInt::from(2u32), n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &BigInt) -> BigInt {
    // n must be odd composite, not a prime power of 2
    let one = BigInt::one();
    let mut c = BigInt::from(1u32);
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let mut x = BigInt::from(2u32);
        let mut y = BigInt::from(2u32);
        let mut d = BigInt::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
        }
        if !d.is_one() && &d != n {
            return d;
        }
        c += &one;
    }
}

/// Prime factorization of a positive integer.
fn factorize(n: &BigInt) -> BTreeMap<BigInt, u32> {
    let mut out = BTreeMap::new();
    let mut n = n.clone();
    assert!(n.is_positive());
    for p in [2u32, 3, 5] {
        let pb = BigInt::from(p);
        while (&n % &pb).is_zero() {
            *out.entry(pb.clone()).or_insert(0) += 1;
            n /= &pb;
        }
    }
    // trial division with a 2-3-5 wheel up to 2^20
    let mut d = BigInt::from(7u32);
    let wheel = [4u32, 2, 4, 2, 4, 6, 2, 6];
    let mut wi = 0;
    let limit = BigInt::from(1u32 << 20);
    while &d <= &limit && &(&d * &d) <= &n {
        if (&n % &d).is_zero() {
            *out.entry(d.clone()).or_insert(0) += 1;
            n /= &d;
        } else {
            d += wheel[wi];
            wi = (wi + 1) % wheel.len();
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if miller_rabin(&m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let f = pollard_rho(&m);
            stack.push(&m / &f);
            stack.push(f);
        }
    }
    out
}

/// All positive divisors. The count is capped; root candidates beyond the
/// cap would mean astronomically composite extreme coefficients.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    const CAP: usize = 1 << 20;
    let mut out = vec![BigInt::one()];
    if n.is_zero() {
        return out;
    }
    for (p, e) in factorize(&n.abs()) {
        let base = out.clone();
        let mut pk = BigInt::one();
        for _ in 0..e {
            pk = &pk * &p;
            for d in &base {
                out.push(d * &pk);
                assert!(out.len() <= CAP, "divisor explosion in root finding");
            }
        }
    }
    out
}

/// Strip the content and denominators: returns integer-primitive `p` with
/// positive leading coefficient (zero stays zero).
fn primitive(p: &Polynomial) -> Polynomial {
    p.primitive_z().0
}

fn eval_univar(p: &Polynomial, v: Var, x: &Q) -> Q {
    p.eval(&|var| if var == v { Some(x.clone()) } else { None })
        .expect("polynomial must be univariate in v")
}

/// Rational roots with multiplicities of a univariate polynomial in `v`,
/// sorted ascending.
pub fn rational_roots(p: &Polynomial, v: Var) -> Vec<(Q, u32)> {
    assert!(
        p.vars().iter().all(|&w| w == v),
        "rational_roots needs a univariate polynomial"
    );
    if p.is_zero() || p.degree_in(v).unwrap_or(0) == 0 {
        return Vec::new();
    }
    let mut p = primitive(p);
    let mut roots: Vec<(Q, u32)> = Vec::new();
    // factor out v^m
    let coeffs = p.coeffs_in(v);
    let zero_mult = coeffs.iter().take_while(|c| c.is_zero()).count() as u32;
    if zero_mult > 0 {
        roots.push((Q::zero(), zero_mult));
        p = Polynomial::from_coeffs_in(v, &coeffs[zero_mult as usize..]);
    }
    if p.degree_in(v).unwrap_or(0) == 0 {
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        return roots;
    }
    let trailing = p.coeff_of(v, 0).as_constant().expect("univariate");
    let leading = p.leading_coeff_in(v).as_constant().expect("univariate");
    let nums = divisors(trailing.numer());
    let dens = divisors(leading.numer());
    let mut candidates: Vec<Q> = Vec::new();
    for n in &nums {
        for d in &dens {
            let c = Q::new(n.clone(), d.clone());
            candidates.push(c.clone());
            candidates.push(-c);
        }
    }
    candidates.sort();
    candidates.dedup();
    for cand in candidates {
        if eval_univar(&p, v, &cand).is_zero() {
            let lin = &Polynomial::var(v) - &Polynomial::constant(cand.clone());
            let mut mult = 0u32;
            while let Some(q) = p.divide_exact(&lin) {
                mult += 1;
                p = q;
                if p.degree_in(v).unwrap_or(0) == 0 {
                    break;
                }
            }
            roots.push((cand, mult));
        }
    }
    roots.sort_by(|a, b| a.0.cmp(&b.0));
    roots
}

/// Integer roots with multiplicities, sorted ascending.
pub fn integer_roots(p: &Polynomial, v: Var) -> Vec<(BigInt, u32)> {
    rational_roots(p, v)
        .into_iter()
        .filter_map(|(r, m)| super::q_to_bigint(&r).map(|z| (z, m)))
        .collect()
}

/// Integer roots that fit in `i64`.
pub fn integer_roots_i64(p: &Polynomial, v: Var) -> Vec<(i64, u32)> {
    integer_roots(p, v)
        .into_iter()
        .filter_map(|(r, m)| r.to_i64().map(|z| (z, m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};

    #[test]
    fn factorize_small_and_large() {
        let f = factorize(&BigInt::from(360u32));
        assert_eq!(f.get(&BigInt::from(2u32)), Some(&3));
        assert_eq!(f.get(&BigInt::from(3u32)), Some(&2));
        assert_eq!(f.get(&BigInt::from(5u32)), Some(&1));
        // product of two 10-digit primes exercises the rho path
        let a = BigInt::from(1000000007u64);
        let b = BigInt::from(1000000009u64);
        let f = factorize(&(&a * &b));
        assert_eq!(f.len(), 2);
        assert_eq!(f.get(&a), Some(&1));
        assert_eq!(f.get(&b), Some(&1));
    }

    #[test]
    fn roots_with_multiplicity() {
        // (N-2)^2 (N+5) (3N-1)
        let p = &(&Polynomial::var_plus(Var::N, -2).pow(2) * &Polynomial::var_plus(Var::N, 5))
            * &(&Polynomial::var(Var::N).scale(&qi(3)) - &Polynomial::one());
        let roots = rational_roots(&p, Var::N);
        assert_eq!(
            roots,
            vec![(qi(-5), 1), (q(1, 3), 1), (qi(2), 2)]
        );
        let iroots = integer_roots(&p, Var::N);
        assert_eq!(iroots.len(), 2);
        assert_eq!(iroots[0], (BigInt::from(-5), 1));
        assert_eq!(iroots[1], (BigInt::from(2), 2));
    }

    #[test]
    fn root_at_zero() {
        // N^3 (N - 1)
        let p = &Polynomial::var(Var::N).pow(3) * &Polynomial::var_plus(Var::N, -1);
        let roots = rational_roots(&p, Var::N);
        assert_eq!(roots, vec![(qi(0), 3), (qi(1), 1)]);
    }

    #[test]
    fn no_rational_roots() {
        // N^2 + 1 and the cubic from a trailing operator coefficient
        let p = &(&Polynomial::var(Var::N) * &Polynomial::var(Var::N)) + &Polynomial::one();
        assert!(rational_roots(&p, Var::N).is_empty());
        let cubic = Polynomial::from_coeffs_in(
            Var::N,
            &[
                Polynomial::int(384),
                Polynomial::int(413),
                Polynomial::int(144),
                Polynomial::int(16),
            ],
        );
        assert!(rational_roots(&cubic, Var::N).is_empty());
    }
}
