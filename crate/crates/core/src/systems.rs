//! Coupled first-order systems and the generating-function translation.
//!
//! A differential system D_x u_i = sum_j m_ij(x,ep) u_j + sum_r c_ir(x,ep) B_r
//! over power series u_i(x) = sum_N U_i(N) x^N turns into a linear difference
//! system for the coefficient sequences by clearing x-denominators and
//! comparing coefficients: x^p D_x u contributes (N-p+1) U(N-p+1) and
//! x^p u contributes U(N-p).

use crate::algebra::{poly_lcm, Mat, Polynomial, Q, RationalFunction, Var};
use crate::operators::{OracleError, SequenceOracle};
use crate::parse::{parse, to_poly, to_ratfun, to_series};
use crate::series::EpsSeries;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

#[derive(Clone, Debug, thiserror::Error)]
pub enum SysError {
    #[error("matrix entry must be rational in x and ep only: {0}")]
    NotRationalInX(String),
    #[error("system shape is inconsistent: {0}")]
    Shape(String),
    #[error("unknown name {0} is not declared")]
    UnknownName(String),
    #[error("missing expansion for named input {0}")]
    MissingExpansion(String),
    #[error("bad system file: {0}")]
    Format(String),
    #[error("{0}")]
    Parse(String),
}

/// D_x u_i = sum_j matrix[i][j] u_j + sum (name, coeff) pairs in rhs[i].
/// Entries are rational in (x, ep).
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSystem {
    pub unknowns: Vec<String>,
    pub matrix: Vec<Vec<RationalFunction>>,
    pub rhs: Vec<Vec<(String, RationalFunction)>>,
}

/// Right side of one translated difference equation.
#[derive(Clone, Debug, PartialEq)]
pub enum RecRhs {
    Zero,
    /// sum of coeff(ep, N) * Name(N + shift)
    Named(Vec<(String, i64, Polynomial)>),
    Series(EpsSeries),
}

/// One equation sum_j sum_s terms[j][s] U_j(N + shift) = rhs, valid for
/// N >= the owning system's base.
#[derive(Clone, Debug, PartialEq)]
pub struct RecEquation {
    /// per unknown: sorted (shift, nonzero coeff) pairs
    pub terms: Vec<Vec<(i64, Polynomial)>>,
    pub rhs: RecRhs,
}

impl RecEquation {
    pub fn coeff(&self, unknown: usize, shift: i64) -> Option<&Polynomial> {
        self.terms[unknown]
            .iter()
            .find(|(s, _)| *s == shift)
            .map(|(_, c)| c)
    }

    fn push(&mut self, unknown: usize, shift: i64, c: Polynomial) {
        if c.is_zero() {
            return;
        }
        let row = &mut self.terms[unknown];
        match row.binary_search_by_key(&shift, |(s, _)| *s) {
            Ok(i) => {
                let merged = &row[i].1 + &c;
                if merged.is_zero() {
                    row.remove(i);
                } else {
                    row[i].1 = merged;
                }
            }
            Err(i) => row.insert(i, (shift, c)),
        }
    }

    fn shifts(&self) -> impl Iterator<Item = i64> + '_ {
        self.terms.iter().flatten().map(|(s, _)| *s)
    }
}

/// Linear difference system over coefficient sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct RecSystem {
    pub unknowns: Vec<String>,
    pub eqs: Vec<RecEquation>,
    /// smallest N for which every equation holds
    pub base: i64,
}

impl RecSystem {
    pub fn size(&self) -> usize {
        self.unknowns.len()
    }

    pub fn shift_range(&self) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for eq in &self.eqs {
            for s in eq.shifts() {
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        assert!(lo <= hi, "system has no terms");
        (lo, hi)
    }

    /// Reindexed copy with all shifts >= 0 (minimum exactly 0), plus the
    /// offset o that was applied: new equations at M correspond to old
    /// ones at N = M + o. Sequence arguments are untouched.
    pub fn normalized(&self) -> (RecSystem, i64) {
        let (lo, _) = self.shift_range();
        if lo == 0 {
            return (self.clone(), 0);
        }
        let off = -lo;
        let eqs = self
            .eqs
            .iter()
            .map(|eq| RecEquation {
                terms: eq
                    .terms
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|(s, c)| (s + off, c.shift(Var::N, off)))
                            .collect()
                    })
                    .collect(),
                rhs: match &eq.rhs {
                    RecRhs::Zero => RecRhs::Zero,
                    RecRhs::Named(parts) => RecRhs::Named(
                        parts
                            .iter()
                            .map(|(n, s, c)| (n.clone(), s + off, c.shift(Var::N, off)))
                            .collect(),
                    ),
                    RecRhs::Series(s) => RecRhs::Series(s.shift_arg(off)),
                },
            })
            .collect();
        (
            RecSystem {
                unknowns: self.unknowns.clone(),
                eqs,
                base: self.base - off,
            },
            off,
        )
    }

    /// Replaces named right sides with assembled series from the given
    /// coefficient expansions.
    pub fn resolve_rhs(
        &self,
        expansions: &BTreeMap<String, EpsSeries>,
    ) -> Result<RecSystem, SysError> {
        let eqs = self
            .eqs
            .iter()
            .map(|eq| {
                let rhs = match &eq.rhs {
                    RecRhs::Named(parts) => {
                        let mut acc: Option<EpsSeries> = None;
                        for (name, shift, coeff) in parts {
                            let b = expansions
                                .get(name)
                                .ok_or_else(|| SysError::MissingExpansion(name.clone()))?;
                            let term = b
                                .shift_arg(*shift)
                                .scale_rat(&RationalFunction::from_poly(coeff.clone()));
                            acc = Some(match acc {
                                Some(a) => a.add(&term),
                                None => term,
                            });
                        }
                        match acc {
                            Some(s) => RecRhs::Series(s),
                            None => RecRhs::Zero,
                        }
                    }
                    other => other.clone(),
                };
                Ok(RecEquation {
                    terms: eq.terms.clone(),
                    rhs,
                })
            })
            .collect::<Result<_, SysError>>()?;
        Ok(RecSystem {
            unknowns: self.unknowns.clone(),
            eqs,
            base: self.base,
        })
    }
}

impl fmt::Display for RecSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, eq) in self.eqs.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let mut first = true;
            for (j, row) in eq.terms.iter().enumerate() {
                for (s, c) in row {
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    write!(f, "({c})*{}({})", self.unknowns[j], shifted_n(*s))?;
                }
            }
            if first {
                write!(f, "0")?;
            }
            write!(f, " = ")?;
            match &eq.rhs {
                RecRhs::Zero => write!(f, "0")?,
                RecRhs::Named(parts) => {
                    for (t, (name, s, c)) in parts.iter().enumerate() {
                        if t > 0 {
                            write!(f, " + ")?;
                        }
                        if c.is_one() {
                            write!(f, "{name}({})", shifted_n(*s))?;
                        } else {
                            write!(f, "({c})*{name}({})", shifted_n(*s))?;
                        }
                    }
                }
                RecRhs::Series(s) => write!(f, "{s}")?,
            }
        }
        Ok(())
    }
}

fn shifted_n(s: i64) -> String {
    match s.cmp(&0) {
        std::cmp::Ordering::Equal => "N".into(),
        std::cmp::Ordering::Greater => format!("N+{s}"),
        std::cmp::Ordering::Less => format!("N-{}", -s),
    }
}

fn check_x_rational(r: &RationalFunction) -> Result<(), SysError> {
    for v in [Var::K, Var::N, Var::T] {
        if r.contains_var(v) {
            return Err(SysError::NotRationalInX(r.to_string()));
        }
    }
    Ok(())
}

/// Coefficient comparison on sum_N U(N) x^N: translates the differential
/// system into a difference system for the coefficient sequences. Each
/// equation is cleared by the lcm of its x-denominators first.
pub fn ode_to_rec(sys: &OdeSystem) -> Result<RecSystem, SysError> {
    let m = sys.unknowns.len();
    if sys.matrix.len() != m || sys.rhs.len() != m {
        return Err(SysError::Shape(format!(
            "{} unknowns, {} matrix rows, {} rhs rows",
            m,
            sys.matrix.len(),
            sys.rhs.len()
        )));
    }
    let mut eqs = Vec::with_capacity(m);
    let mut base = 0i64;
    for i in 0..m {
        if sys.matrix[i].len() != m {
            return Err(SysError::Shape(format!("matrix row {i} has wrong width")));
        }
        for e in &sys.matrix[i] {
            check_x_rational(e)?;
        }
        for (_, c) in &sys.rhs[i] {
            check_x_rational(c)?;
        }
        let mut clear = Polynomial::one();
        for e in sys.matrix[i].iter().chain(sys.rhs[i].iter().map(|(_, c)| c)) {
            clear = poly_lcm(&clear, e.den());
        }

        let mut eq = RecEquation {
            terms: vec![Vec::new(); m],
            rhs: RecRhs::Zero,
        };

        // x^p * D_x u_i -> (N-p+1) u_i(N-p+1)
        for (p, c) in clear.coeffs_in(Var::X).iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = p as i64;
            let shift = 1 - p;
            let weight = &Polynomial::var(Var::N) + &Polynomial::int(shift);
            eq.push(i, shift, c * &weight);
            base = base.max(-shift);
        }
        // - P_ij x^p u_j -> -P_ij,p u_j(N-p)
        for j in 0..m {
            let p = &sys.matrix[i][j] * &RationalFunction::from_poly(clear.clone());
            debug_assert!(p.den().is_one(), "lcm clears every denominator");
            for (pw, c) in p.num().coeffs_in(Var::X).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let shift = -(pw as i64);
                eq.push(j, shift, -c);
                base = base.max(-shift);
            }
        }
        // named inputs stay on the right
        let mut named: Vec<(String, i64, Polynomial)> = Vec::new();
        for (name, coeff) in &sys.rhs[i] {
            let p = coeff * &RationalFunction::from_poly(clear.clone());
            debug_assert!(p.den().is_one(), "lcm clears every denominator");
            for (pw, c) in p.num().coeffs_in(Var::X).iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let shift = -(pw as i64);
                named.push((name.clone(), shift, c.clone()));
                base = base.max(-shift);
            }
        }
        if !named.is_empty() {
            eq.rhs = RecRhs::Named(named);
        }
        eqs.push(eq);
    }
    Ok(RecSystem {
        unknowns: sys.unknowns.clone(),
        eqs,
        base,
    })
}

struct SysState {
    eps: Q,
    sys: RecSystem,
    top: i64,
    /// values[j][t] = U_j(start + t)
    start: i64,
    values: Vec<Vec<Q>>,
    rhs: Vec<Box<dyn Fn(i64) -> Result<Q, OracleError> + Send>>,
}

impl SysState {
    fn extend_to(&mut self, n: i64) -> Result<(), OracleError> {
        let m = self.sys.size();
        while self.start + (self.values[0].len() as i64) <= n {
            let next = self.start + self.values[0].len() as i64;
            // equations indexed at eq_n determine U_*(eq_n + top)
            let eq_n = next - self.top;
            if eq_n < self.sys.base {
                return Err(OracleError::BelowBase(self.sys.base + self.top));
            }
            let assign = |v: Var| -> Option<Q> {
                match v {
                    Var::N => Some(Q::from_integer(eq_n.into())),
                    Var::Ep => Some(self.eps.clone()),
                    _ => None,
                }
            };
            let mut mat = Mat::<Q>::zeros(m, m);
            let mut rhs_vec: Vec<Q> = Vec::with_capacity(m);
            for (i, eq) in self.sys.eqs.iter().enumerate() {
                let mut b = match &eq.rhs {
                    RecRhs::Zero => Q::zero(),
                    _ => (self.rhs[i])(eq_n)?,
                };
                for (j, row) in eq.terms.iter().enumerate() {
                    for (s, c) in row {
                        let cv = c.eval(&assign).expect("N and ep cover the coefficients");
                        if *s == self.top {
                            let v = mat.at(i, j) + &cv;
                            mat.set(i, j, v);
                        } else {
                            let idx = eq_n + s - self.start;
                            debug_assert!(idx >= 0);
                            b -= cv * &self.values[j][idx as usize];
                        }
                    }
                }
                rhs_vec.push(b);
            }
            let sol = mat
                .solve(&rhs_vec)
                .ok_or(OracleError::SingularPivot(eq_n))?;
            for (j, v) in sol.into_iter().enumerate() {
                self.values[j].push(v);
            }
        }
        Ok(())
    }
}

/// Exact forward iteration of a difference system at fixed rational ep.
pub struct SystemOracle {
    shared: Arc<Mutex<SysState>>,
    start: i64,
    size: usize,
}

/// Seeds give U_j(start), ..., U_j(start + top - 1) per unknown, where
/// top is the largest shift of the normalized system and
/// start = base + min shift of the original indexing. rhs closures are
/// consulted per original equation index.
pub fn system_oracle(
    sys: &RecSystem,
    eps: &Q,
    seeds: Vec<Vec<Q>>,
    rhs: Vec<Box<dyn Fn(i64) -> Result<Q, OracleError> + Send>>,
) -> Result<SystemOracle, OracleError> {
    let (norm, off) = sys.normalized();
    let (_, top) = norm.shift_range();
    let m = norm.size();
    assert_eq!(seeds.len(), m, "one seed row per unknown");
    assert_eq!(rhs.len(), m, "one rhs closure per equation");
    for s in &seeds {
        assert_eq!(s.len(), top as usize, "seed rows cover the shift depth");
    }
    // normalized equations live at M = N - off; their rhs closures expect
    // the original index N = M + off
    let rhs: Vec<Box<dyn Fn(i64) -> Result<Q, OracleError> + Send>> = rhs
        .into_iter()
        .map(|f| {
            let g: Box<dyn Fn(i64) -> Result<Q, OracleError> + Send> =
                Box::new(move |m: i64| f(m + off));
            g
        })
        .collect();
    let start = norm.base;
    let state = SysState {
        eps: eps.clone(),
        sys: norm,
        top,
        start,
        values: seeds,
        rhs,
    };
    Ok(SystemOracle {
        shared: Arc::new(Mutex::new(state)),
        start,
        size: m,
    })
}

impl SystemOracle {
    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn value(&self, unknown: usize, n: i64) -> Result<Q, OracleError> {
        assert!(unknown < self.size);
        if n < self.start {
            return Err(OracleError::BelowBase(self.start));
        }
        let mut st = self.shared.lock().unwrap();
        st.extend_to(n)?;
        Ok(st.values[unknown][(n - self.start) as usize].clone())
    }

    /// One memoizing sequence view per unknown, sharing this iterator.
    pub fn into_oracles(self) -> Vec<SequenceOracle> {
        (0..self.size)
            .map(|j| {
                let shared = self.shared.clone();
                let start = self.start;
                SequenceOracle::new(
                    start,
                    Vec::new(),
                    Box::new(move |_, n| {
                        let mut st = shared.lock().unwrap();
                        st.extend_to(n)?;
                        Ok(st.values[j][(n - start) as usize].clone())
                    }),
                )
            })
            .collect()
    }
}

/// Either side of the generating-function dictionary.
#[derive(Clone, Debug, PartialEq)]
pub enum CoupledSystem {
    Ode(OdeSystem),
    Rec(RecSystem),
}

impl CoupledSystem {
    pub fn from_json_str(text: &str) -> Result<CoupledSystem, SysError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SysError::Format(e.to_string()))?;
        let kind = v
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| SysError::Format("missing \"kind\"".into()))?;
        let vars: Vec<String> = v
            .get("vars")
            .and_then(|x| x.as_array())
            .ok_or_else(|| SysError::Format("missing \"vars\" list".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| SysError::Format("vars entries must be strings".into()))
            })
            .collect::<Result<_, _>>()?;
        match kind {
            "ode" => {
                let matrix = v
                    .get("matrix")
                    .and_then(|x| x.as_array())
                    .ok_or_else(|| SysError::Format("missing \"matrix\"".into()))?
                    .iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| SysError::Format("matrix rows must be lists".into()))?
                            .iter()
                            .map(|e| parse_rat(e))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let rhs = match v.get("rhs") {
                    None => vec![Vec::new(); vars.len()],
                    Some(r) => r
                        .as_array()
                        .ok_or_else(|| SysError::Format("rhs must be a list".into()))?
                        .iter()
                        .map(|entry| {
                            let obj = entry.as_object().ok_or_else(|| {
                                SysError::Format("rhs entries must be name->coeff maps".into())
                            })?;
                            obj.iter()
                                .map(|(name, c)| Ok((name.clone(), parse_rat(c)?)))
                                .collect::<Result<Vec<_>, SysError>>()
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                };
                Ok(CoupledSystem::Ode(OdeSystem {
                    unknowns: vars,
                    matrix,
                    rhs,
                }))
            }
            "rec" => {
                let base = v.get("base").and_then(|b| b.as_i64()).unwrap_or(0);
                let eqs = v
                    .get("equations")
                    .and_then(|x| x.as_array())
                    .ok_or_else(|| SysError::Format("missing \"equations\"".into()))?
                    .iter()
                    .map(|entry| parse_rec_equation(entry, &vars))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(CoupledSystem::Rec(RecSystem {
                    unknowns: vars,
                    eqs,
                    base,
                }))
            }
            other => Err(SysError::Format(format!("unknown kind {other:?}"))),
        }
    }

    pub fn to_json_string(&self) -> String {
        match self {
            CoupledSystem::Ode(sys) => {
                let matrix: Vec<Vec<String>> = sys
                    .matrix
                    .iter()
                    .map(|row| row.iter().map(|e| e.to_string()).collect())
                    .collect();
                let rhs: Vec<serde_json::Value> = sys
                    .rhs
                    .iter()
                    .map(|parts| {
                        serde_json::Value::Object(
                            parts
                                .iter()
                                .map(|(n, c)| (n.clone(), serde_json::Value::String(c.to_string())))
                                .collect(),
                        )
                    })
                    .collect();
                serde_json::json!({
                    "kind": "ode",
                    "vars": sys.unknowns,
                    "matrix": matrix,
                    "rhs": rhs,
                })
                .to_string()
            }
            CoupledSystem::Rec(sys) => {
                let eqs: Vec<serde_json::Value> = sys
                    .eqs
                    .iter()
                    .map(|eq| {
                        let lhs: Vec<serde_json::Value> = eq
                            .terms
                            .iter()
                            .enumerate()
                            .flat_map(|(j, row)| {
                                let name = sys.unknowns[j].clone();
                                row.iter().map(move |(s, c)| {
                                    serde_json::json!([name, s, c.to_string()])
                                })
                            })
                            .collect();
                        let rhs = match &eq.rhs {
                            RecRhs::Zero => serde_json::Value::Null,
                            RecRhs::Named(parts) => serde_json::json!({
                                "named": parts
                                    .iter()
                                    .map(|(n, s, c)| {
                                        serde_json::json!([n, s, c.to_string()])
                                    })
                                    .collect::<Vec<_>>()
                            }),
                            RecRhs::Series(s) => serde_json::json!({ "series": s.to_string() }),
                        };
                        serde_json::json!({ "lhs": lhs, "rhs": rhs })
                    })
                    .collect();
                serde_json::json!({
                    "kind": "rec",
                    "vars": sys.unknowns,
                    "base": sys.base,
                    "equations": eqs,
                })
                .to_string()
            }
        }
    }
}

fn parse_rat(v: &serde_json::Value) -> Result<RationalFunction, SysError> {
    let s = v
        .as_str()
        .ok_or_else(|| SysError::Format("expected a rational-function string".into()))?;
    let node = parse(s).map_err(|e| SysError::Parse(e.to_string()))?;
    to_ratfun(&node).map_err(|e| SysError::Parse(e.to_string()))
}

fn parse_rec_equation(
    entry: &serde_json::Value,
    vars: &[String],
) -> Result<RecEquation, SysError> {
    let lhs = entry
        .get("lhs")
        .and_then(|x| x.as_array())
        .ok_or_else(|| SysError::Format("equation needs a \"lhs\" list".into()))?;
    let mut eq = RecEquation {
        terms: vec![Vec::new(); vars.len()],
        rhs: RecRhs::Zero,
    };
    for t in lhs {
        let triple = t
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| SysError::Format("lhs terms are [name, shift, coeff]".into()))?;
        let name = triple[0]
            .as_str()
            .ok_or_else(|| SysError::Format("term name must be a string".into()))?;
        let j = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SysError::UnknownName(name.into()))?;
        let shift = triple[1]
            .as_i64()
            .ok_or_else(|| SysError::Format("term shift must be an integer".into()))?;
        let node = parse(
            triple[2]
                .as_str()
                .ok_or_else(|| SysError::Format("term coeff must be a string".into()))?,
        )
        .map_err(|e| SysError::Parse(e.to_string()))?;
        let c = to_poly(&node).map_err(|e| SysError::Parse(e.to_string()))?;
        eq.push(j, shift, c);
    }
    match entry.get("rhs") {
        None | Some(serde_json::Value::Null) => {}
        Some(serde_json::Value::Object(obj)) => {
            if let Some(series) = obj.get("series") {
                let s = series
                    .as_str()
                    .ok_or_else(|| SysError::Format("series rhs must be a string".into()))?;
                let node = parse(s).map_err(|e| SysError::Parse(e.to_string()))?;
                let series =
                    to_series(&node, Var::N).map_err(|e| SysError::Parse(e.to_string()))?;
                eq.rhs = RecRhs::Series(series);
            } else if let Some(named) = obj.get("named").and_then(|x| x.as_array()) {
                let mut parts = Vec::new();
                for t in named {
                    let triple = t.as_array().filter(|a| a.len() == 3).ok_or_else(|| {
                        SysError::Format("named rhs terms are [name, shift, coeff]".into())
                    })?;
                    let name = triple[0]
                        .as_str()
                        .ok_or_else(|| SysError::Format("rhs name must be a string".into()))?;
                    let shift = triple[1]
                        .as_i64()
                        .ok_or_else(|| SysError::Format("rhs shift must be an integer".into()))?;
                    let node = parse(
                        triple[2]
                            .as_str()
                            .ok_or_else(|| SysError::Format("rhs coeff must be a string".into()))?,
                    )
                    .map_err(|e| SysError::Parse(e.to_string()))?;
                    let c = to_poly(&node).map_err(|e| SysError::Parse(e.to_string()))?;
                    parts.push((name.to_owned(), shift, c));
                }
                eq.rhs = RecRhs::Named(parts);
            } else {
                return Err(SysError::Format(
                    "rhs object needs \"series\" or \"named\"".into(),
                ));
            }
        }
        Some(_) => return Err(SysError::Format("rhs must be null or an object".into())),
    }
    Ok(eq)
}

/// d/dx restricted to the x-variable.
pub fn x_derivative(p: &Polynomial) -> Polynomial {
    let coeffs = p.coeffs_in(Var::X);
    if coeffs.len() <= 1 {
        return Polynomial::int(0);
    }
    let scaled: Vec<Polynomial> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(&Q::from_integer((k as i64).into())))
        .collect();
    Polynomial::from_coeffs_in(Var::X, &scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qi};
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rf(s: &str) -> RationalFunction {
        to_ratfun(&parse(s).unwrap()).unwrap()
    }

    fn pol(s: &str) -> Polynomial {
        to_poly(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn derivative_alone_shifts_the_index_up() {
        // D_x f = f  ->  (N+1) f(N+1) = f(N)
        let sys = OdeSystem {
            unknowns: vec!["f".into()],
            matrix: vec![vec![RationalFunction::one()]],
            rhs: vec![Vec::new()],
        };
        let rec = ode_to_rec(&sys).unwrap();
        assert_eq!(rec.base, 0);
        assert_eq!(rec.eqs[0].coeff(0, 1), Some(&pol("N+1")));
        assert_eq!(rec.eqs[0].coeff(0, 0), Some(&pol("-1")));
        assert_eq!(rec.eqs[0].rhs, RecRhs::Zero);

        // forward iteration from f(0) = 1 gives 1/N!
        let oracle = system_oracle(
            &rec,
            &q(1, 7),
            vec![vec![Q::one()]],
            vec![Box::new(|_| Ok(Q::zero()))],
        )
        .unwrap();
        let mut fact = Q::one();
        for n in 1..=12i64 {
            fact *= qi(n);
            assert_eq!(oracle.value(0, n).unwrap(), Q::one() / &fact);
        }
    }

    #[test]
    fn coupled_fixture_first_equation_translates_to_the_printed_line() {
        // D_x I1 = -(-ep+x-1)/((x-1)x) I1 - 2/((x-1)x) I2 + 1/((x-1)x) B1
        let sys = OdeSystem {
            unknowns: vec!["I1".into(), "I2".into()],
            matrix: vec![
                vec![rf("-(-ep+x-1)/((x-1)*x)"), rf("-2/((x-1)*x)")],
                vec![RationalFunction::zero(), RationalFunction::zero()],
            ],
            rhs: vec![vec![("B1".into(), rf("1/((x-1)*x)"))], Vec::new()],
        };
        let rec = ode_to_rec(&sys).unwrap();
        // N I1(N-1) - (ep+N+1) I1(N) + 2 I2(N) = B1(N)
        let eq = &rec.eqs[0];
        assert_eq!(eq.coeff(0, -1), Some(&pol("N")));
        assert_eq!(eq.coeff(0, 0), Some(&pol("-(ep+N+1)")));
        assert_eq!(eq.coeff(1, 0), Some(&pol("2")));
        assert_eq!(eq.coeff(1, -1), None);
        assert_eq!(
            eq.rhs,
            RecRhs::Named(vec![("B1".into(), 0, Polynomial::one())])
        );
        assert_eq!(rec.base, 1);
        assert_eq!(
            format!("{rec}").lines().next().unwrap(),
            "(N)*I1(N-1) + (-N-ep-1)*I1(N) + (2)*I2(N) = B1(N)"
        );
    }

    #[test]
    fn geometric_denominator_keeps_constants_constant() {
        // D_x f = 1/(1-x) f has solution 1/(1-x): f(N) = 1 must satisfy
        // the translated equation identically
        let sys = OdeSystem {
            unknowns: vec!["f".into()],
            matrix: vec![vec![rf("1/(1-x)")]],
            rhs: vec![Vec::new()],
        };
        let rec = ode_to_rec(&sys).unwrap();
        let (lo, hi) = rec.shift_range();
        assert_eq!((lo, hi), (0, 1));
        // sum of coefficients vanishes iff the constant sequence solves it
        let total = rec.eqs[0]
            .terms
            .iter()
            .flatten()
            .fold(Polynomial::int(0), |acc, (_, c)| &acc + c);
        assert!(total.is_zero());
    }

    #[test]
    fn fermionic_line_iterates_exactly_at_half() {
        // N I1(N-1) - (ep+N+1) I1(N) = 0 with I1(0) = 1 at ep = 1/2
        let eq = RecEquation {
            terms: vec![vec![(-1, pol("N")), (0, pol("-(ep+N+1)"))]],
            rhs: RecRhs::Zero,
        };
        let sys = RecSystem {
            unknowns: vec!["I1".into()],
            eqs: vec![eq],
            base: 1,
        };
        let eps = q(1, 2);
        let oracle = system_oracle(
            &sys,
            &eps,
            vec![vec![Q::one()]],
            vec![Box::new(|_| Ok(Q::zero()))],
        )
        .unwrap();
        for n in 1..=30i64 {
            let lhs = qi(n) * oracle.value(0, n - 1).unwrap();
            let rhs = (&eps + qi(n + 1)) * oracle.value(0, n).unwrap();
            assert_eq!(lhs, rhs, "N = {n}");
        }
    }

    #[test]
    fn random_first_order_systems_resubstitute_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1ab1e);
        let eps = q(1, 3);
        for case in 0..12 {
            let m = 2 + (case % 2);
            let mut eqs = Vec::new();
            for i in 0..m {
                let mut eq = RecEquation {
                    terms: vec![Vec::new(); m],
                    rhs: RecRhs::Zero,
                };
                for j in 0..m {
                    let c0 = qi(rng.gen_range(-4..=4));
                    if !c0.is_zero() {
                        eq.push(
                            j,
                            0,
                            &Polynomial::constant(c0)
                                + &Polynomial::var(Var::N).scale(&qi(rng.gen_range(-2..=2))),
                        );
                    }
                    // diagonal dominance keeps the top matrix invertible
                    let c1 = if i == j {
                        qi(rng.gen_range(1..=3))
                    } else {
                        Q::zero()
                    };
                    if !c1.is_zero() {
                        eq.push(j, 1, Polynomial::constant(c1));
                    }
                }
                eqs.push(eq);
            }
            let sys = RecSystem {
                unknowns: (0..m).map(|j| format!("u{j}")).collect(),
                eqs,
                base: 0,
            };
            let seeds: Vec<Vec<Q>> = (0..m)
                .map(|_| vec![q(rng.gen_range(-9..=9), rng.gen_range(1..=5))])
                .collect();
            let oracle = system_oracle(
                &sys,
                &eps,
                seeds,
                (0..m)
                    .map(|_| {
                        let b: Box<dyn Fn(i64) -> Result<Q, OracleError> + Send> =
                            Box::new(|_| Ok(Q::zero()));
                        b
                    })
                    .collect(),
            )
            .unwrap();
            // re-substitute the generated sequences into every equation
            for n in 0..=50i64 {
                for eq in &sys.eqs {
                    let mut acc = Q::zero();
                    for (j, row) in eq.terms.iter().enumerate() {
                        for (s, c) in row {
                            let cv = c
                                .eval(&|v| match v {
                                    Var::N => Some(qi(n)),
                                    Var::Ep => Some(eps.clone()),
                                    _ => None,
                                })
                                .unwrap();
                            acc += cv * oracle.value(j, n + s).unwrap();
                        }
                    }
                    assert!(acc.is_zero(), "case {case}, N = {n}");
                }
            }
        }
    }

    #[test]
    fn truncated_generating_function_satisfies_the_ode() {
        // 2x2 system with entries analytic away from x = 1; its power
        // series solution is rebuilt from the recurrence and checked
        // against the differential form through x^28
        let sys = OdeSystem {
            unknowns: vec!["u".into(), "v".into()],
            matrix: vec![
                vec![rf("ep/(1-x)"), rf("1/(1-x)")],
                vec![rf("-1/(1-x)"), rf("2/(1-x)")],
            ],
            rhs: vec![Vec::new(), Vec::new()],
        };
        let rec = ode_to_rec(&sys).unwrap();
        let eps = q(1, 3);
        let k = 30usize;
        let oracle = system_oracle(
            &rec,
            &eps,
            vec![vec![qi(2)], vec![qi(-1)]],
            vec![Box::new(|_| Ok(Q::zero())), Box::new(|_| Ok(Q::zero()))],
        )
        .unwrap();
        // assemble truncated series as polynomials in x
        let mut hats: Vec<Polynomial> = Vec::new();
        for j in 0..2 {
            let coeffs: Vec<Polynomial> = (0..=k as i64)
                .map(|n| Polynomial::constant(oracle.value(j, n).unwrap()))
                .collect();
            hats.push(Polynomial::from_coeffs_in(Var::X, &coeffs));
        }
        let clear = pol("1-x");
        let epsp = Polynomial::constant(eps.clone());
        for i in 0..2 {
            // (1-x) D_x u_i - sum_j p_ij u_j with p in polynomials
            let mut res = &clear * &x_derivative(&hats[i]);
            for j in 0..2 {
                let p = &sys.matrix[i][j] * &RationalFunction::from_poly(clear.clone());
                assert!(p.den().is_one());
                let pn = p.num().subst(Var::Ep, &epsp);
                res = &res - &(&pn * &hats[j]);
            }
            // residual supported only above the truncation horizon
            for (pw, c) in res.coeffs_in(Var::X).iter().enumerate() {
                if pw < k {
                    assert!(c.is_zero(), "equation {i}, x^{pw}");
                }
            }
        }
    }

    #[test]
    fn singular_pivot_is_reported_with_its_index() {
        // (N-5) f(N+1) = f(N) breaks down when N reaches 5
        let eq = RecEquation {
            terms: vec![vec![(0, pol("-1")), (1, pol("N-5"))]],
            rhs: RecRhs::Zero,
        };
        let sys = RecSystem {
            unknowns: vec!["f".into()],
            eqs: vec![eq],
            base: 0,
        };
        let oracle = system_oracle(
            &sys,
            &Q::zero(),
            vec![vec![Q::one()]],
            vec![Box::new(|_| Ok(Q::zero()))],
        )
        .unwrap();
        assert!(oracle.value(0, 5).is_ok());
        assert!(matches!(
            oracle.value(0, 6),
            Err(OracleError::SingularPivot(5))
        ));
    }

    #[test]
    fn named_rhs_resolves_against_supplied_expansions() {
        let eq = RecEquation {
            terms: vec![vec![(0, pol("1"))]],
            rhs: RecRhs::Named(vec![("B".into(), -1, pol("N"))]),
        };
        let sys = RecSystem {
            unknowns: vec!["f".into()],
            eqs: vec![eq],
            base: 1,
        };
        let b = to_series(&parse("ep^-1*(1/(N+1)) + O[ep]^0").unwrap(), Var::N).unwrap();
        let mut lib = BTreeMap::new();
        lib.insert("B".to_string(), b);
        let resolved = sys.resolve_rhs(&lib).unwrap();
        match &resolved.eqs[0].rhs {
            RecRhs::Series(s) => {
                // N * B(N-1) at order -1 is N * 1/N = 1
                let one = crate::parse::to_sum_expr(&parse("1").unwrap(), Var::N).unwrap();
                assert_eq!(s.coeff(-1).unwrap(), one);
            }
            other => panic!("expected a series rhs, got {other:?}"),
        }
        assert!(sys.resolve_rhs(&BTreeMap::new()).is_err());
    }

    #[test]
    fn json_roundtrip_preserves_both_kinds() {
        let text = r#"{
            "kind": "ode",
            "vars": ["I1", "I2"],
            "matrix": [["-(-ep+x-1)/((x-1)*x)", "-2/((x-1)*x)"],
                       ["0", "0"]],
            "rhs": [{"B1": "1/((x-1)*x)"}, {}]
        }"#;
        let sys = CoupledSystem::from_json_str(text).unwrap();
        let rt = CoupledSystem::from_json_str(&sys.to_json_string()).unwrap();
        assert_eq!(sys, rt);

        let rec_text = r#"{
            "kind": "rec",
            "vars": ["I1", "I2"],
            "base": 1,
            "equations": [
                {"lhs": [["I1", -1, "N"], ["I1", 0, "-(ep+N+1)"], ["I2", 0, "2"]],
                 "rhs": {"named": [["B1", 0, "1"]]}},
                {"lhs": [["I2", 0, "1"]],
                 "rhs": {"series": "ep^-1*(1/(N+1)) + O[ep]^0"}}
            ]
        }"#;
        let rec = CoupledSystem::from_json_str(rec_text).unwrap();
        let rt = CoupledSystem::from_json_str(&rec.to_json_string()).unwrap();
        assert_eq!(rec, rt);
        match &rec {
            CoupledSystem::Rec(r) => {
                assert_eq!(r.base, 1);
                assert_eq!(r.eqs[0].coeff(0, -1), Some(&pol("N")));
            }
            _ => panic!("expected rec kind"),
        }
    }

    #[test]
    fn normalization_moves_every_shift_up() {
        let eq = RecEquation {
            terms: vec![vec![(-1, pol("N")), (0, pol("-(ep+N+1)"))]],
            rhs: RecRhs::Zero,
        };
        let sys = RecSystem {
            unknowns: vec!["I1".into()],
            eqs: vec![eq],
            base: 1,
        };
        let (norm, off) = sys.normalized();
        assert_eq!(off, 1);
        assert_eq!(norm.base, 0);
        assert_eq!(norm.eqs[0].coeff(0, 0), Some(&pol("N+1")));
        assert_eq!(norm.eqs[0].coeff(0, 1), Some(&pol("-(ep+N+2)")));
    }

    #[test]
    fn non_rational_entries_are_rejected() {
        let sys = OdeSystem {
            unknowns: vec!["f".into()],
            matrix: vec![vec![rf("N/(1-x)")]],
            rhs: vec![Vec::new()],
        };
        assert!(matches!(ode_to_rec(&sys), Err(SysError::NotRationalInX(_))));
    }
}
