//! Text input for polynomials, closed forms, series, and summand terms.
//!
//! One tokenizer and one Pratt parser feed every reader in the crate.
//! The grammar covers `+ - * / ^`, integer and rational literals,
//! variables `N k x ep t`, nested sums `S[1,-2](N)` and
//! `S[{1,1/2},{1,1}](N)`, the constants `z2 z3 ... eg log[q]`,
//! geometric factors `2^N` and `(-1)^N`, bracketed heads such as
//! `Gamma[...]`, `Beta[...]`, `Binomial[N,k]`, `F[N+2]`, factorials
//! `k!`, and the series tail `O[ep]^m`. Interpretation into a concrete
//! domain type happens after parsing, so error positions survive.

use crate::algebra::{Polynomial, Q, RationalFunction, Var};
use crate::constants::{ConstExpr, FormalConstant};
use crate::series::EpsSeries;
use crate::sums::{pow_q, SSum, SumExpression};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

fn err<T>(line: u32, col: u32, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Bang,
    Comma,
    Equals,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Name(s) => write!(f, "{s}"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
            Tok::Caret => write!(f, "^"),
            Tok::Bang => write!(f, "!"),
            Tok::Comma => write!(f, ","),
            Tok::Equals => write!(f, "="),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            let n: BigInt = s.parse().expect("digit run");
            out.push(Spanned {
                tok: Tok::Int(n),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            out.push(Spanned {
                tok: Tok::Name(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '!' => Tok::Bang,
            ',' => Tok::Comma,
            '=' => Tok::Equals,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            other => return err(tl, tc, format!("unexpected character '{other}'")),
        };
        i += 1;
        col += 1;
        out.push(Spanned {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigInt),
    Sym(String),
    /// head[args] with an optional trailing (argument), as in S[1,2](N)
    Call {
        head: String,
        args: Vec<Node>,
        applied: Option<Box<Node>>,
    },
    /// {a, b} index pairs inside S-brackets
    List(Vec<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Factorial(Box<Node>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub ast: Ast,
    pub line: u32,
    pub col: u32,
}

impl Node {
    fn new(ast: Ast, at: (u32, u32)) -> Node {
        Node {
            ast,
            line: at.0,
            col: at.1,
        }
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        err(self.line, self.col, msg)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn at(&self) -> (u32, u32) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            err(t.line, t.col, format!("expected '{want}', found '{}'", t.tok))
        }
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Node, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (lbp, rbp) = match self.peek() {
                Tok::Plus | Tok::Minus => (10, 11),
                Tok::Star | Tok::Slash => (20, 21),
                Tok::Caret => (31, 30),
                Tok::Bang => (40, 0),
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            let op = self.next();
            if op.tok == Tok::Bang {
                lhs = Node::new(Ast::Factorial(Box::new(lhs)), (op.line, op.col));
                continue;
            }
            let rhs = self.parse_expr(rbp)?;
            let ast = match op.tok {
                Tok::Plus => Ast::Add(Box::new(lhs), Box::new(rhs)),
                Tok::Minus => Ast::Sub(Box::new(lhs), Box::new(rhs)),
                Tok::Star => Ast::Mul(Box::new(lhs), Box::new(rhs)),
                Tok::Slash => Ast::Div(Box::new(lhs), Box::new(rhs)),
                Tok::Caret => Ast::Pow(Box::new(lhs), Box::new(rhs)),
                _ => unreachable!(),
            };
            lhs = Node::new(ast, (op.line, op.col));
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Node, ParseError> {
        let at = self.at();
        match self.peek() {
            Tok::Minus => {
                self.next();
                // unary minus binds between '*' and '^'
                let inner = self.parse_expr(25)?;
                Ok(Node::new(Ast::Neg(Box::new(inner)), at))
            }
            Tok::Plus => {
                self.next();
                self.parse_expr(25)
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Node, ParseError> {
        let t = self.next();
        let at = (t.line, t.col);
        match t.tok {
            Tok::Int(n) => Ok(Node::new(Ast::Num(n), at)),
            Tok::Name(head) => {
                if *self.peek() == Tok::LBracket {
                    self.next();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RBracket {
                        loop {
                            args.push(self.parse_expr(0)?);
                            if *self.peek() == Tok::Comma {
                                self.next();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RBracket)?;
                    let applied = if *self.peek() == Tok::LParen {
                        self.next();
                        let arg = self.parse_expr(0)?;
                        self.expect(Tok::RParen)?;
                        Some(Box::new(arg))
                    } else {
                        None
                    };
                    Ok(Node::new(
                        Ast::Call {
                            head,
                            args,
                            applied,
                        },
                        at,
                    ))
                } else {
                    Ok(Node::new(Ast::Sym(head), at))
                }
            }
            Tok::LParen => {
                let inner = self.parse_expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::LBrace => {
                let mut items = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        items.push(self.parse_expr(0)?);
                        if *self.peek() == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Node::new(Ast::List(items), at))
            }
            other => err(at.0, at.1, format!("unexpected '{other}'")),
        }
    }
}

/// Parse a single expression; trailing input is an error.
pub fn parse(src: &str) -> Result<Node, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let node = p.parse_expr(0)?;
    let t = p.next();
    if t.tok != Tok::End {
        return err(t.line, t.col, format!("unexpected trailing '{}'", t.tok));
    }
    Ok(node)
}

/// Parse `lhs = rhs` into the two sides.
pub fn parse_equation(src: &str) -> Result<(Node, Node), ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let lhs = p.parse_expr(0)?;
    p.expect(Tok::Equals)?;
    let rhs = p.parse_expr(0)?;
    let t = p.next();
    if t.tok != Tok::End {
        return err(t.line, t.col, format!("unexpected trailing '{}'", t.tok));
    }
    Ok((lhs, rhs))
}

/// Constant folding to an exact rational.
pub fn to_q(node: &Node) -> Result<Q, ParseError> {
    match &node.ast {
        Ast::Num(n) => Ok(Q::from(n.clone())),
        Ast::Neg(a) => Ok(-to_q(a)?),
        Ast::Add(a, b) => Ok(to_q(a)? + to_q(b)?),
        Ast::Sub(a, b) => Ok(to_q(a)? - to_q(b)?),
        Ast::Mul(a, b) => Ok(to_q(a)? * to_q(b)?),
        Ast::Div(a, b) => {
            let d = to_q(b)?;
            if d.is_zero() {
                return node.fail("division by zero");
            }
            Ok(to_q(a)? / d)
        }
        Ast::Pow(a, b) => {
            let e = int_exponent(b)?;
            let base = to_q(a)?;
            if base.is_zero() && e < 0 {
                return node.fail("division by zero");
            }
            Ok(pow_q(&base, e))
        }
        _ => node.fail("expected a rational constant"),
    }
}

fn int_exponent(node: &Node) -> Result<i64, ParseError> {
    let q = to_q(node)?;
    if !q.is_integer() {
        return node.fail("exponent must be an integer");
    }
    q.to_integer()
        .to_i64()
        .ok_or(())
        .or_else(|_| node.fail("exponent out of range"))
}

/// A polynomial over the named variables; division only by constants.
pub fn to_poly(node: &Node) -> Result<Polynomial, ParseError> {
    match &node.ast {
        Ast::Num(_) => Ok(Polynomial::constant(to_q(node)?)),
        Ast::Sym(name) => match Var::from_name(name) {
            Some(v) => Ok(Polynomial::var(v)),
            None => node.fail(format!("unknown variable '{name}'")),
        },
        Ast::Neg(a) => Ok(-&to_poly(a)?),
        Ast::Add(a, b) => Ok(&to_poly(a)? + &to_poly(b)?),
        Ast::Sub(a, b) => Ok(&to_poly(a)? - &to_poly(b)?),
        Ast::Mul(a, b) => Ok(&to_poly(a)? * &to_poly(b)?),
        Ast::Div(a, b) => {
            let d = to_q(b).or_else(|_| node.fail("polynomial division needs a constant divisor"))?;
            if d.is_zero() {
                return node.fail("division by zero");
            }
            Ok(to_poly(a)?.scale(&(Q::one() / d)))
        }
        Ast::Pow(a, b) => {
            let e = int_exponent(b)?;
            if e < 0 {
                return node.fail("negative power is not a polynomial");
            }
            Ok(to_poly(a)?.pow(e as u32))
        }
        _ => node.fail("not a polynomial expression"),
    }
}

/// A rational function over the named variables.
pub fn to_ratfun(node: &Node) -> Result<RationalFunction, ParseError> {
    match &node.ast {
        Ast::Num(_) => Ok(RationalFunction::from_q(to_q(node)?)),
        Ast::Sym(name) => match Var::from_name(name) {
            Some(v) => Ok(RationalFunction::from_poly(Polynomial::var(v))),
            None => node.fail(format!("unknown variable '{name}'")),
        },
        Ast::Neg(a) => Ok(-&to_ratfun(a)?),
        Ast::Add(a, b) => Ok(&to_ratfun(a)? + &to_ratfun(b)?),
        Ast::Sub(a, b) => Ok(&to_ratfun(a)? - &to_ratfun(b)?),
        Ast::Mul(a, b) => Ok(&to_ratfun(a)? * &to_ratfun(b)?),
        Ast::Div(a, b) => {
            let d = to_ratfun(b)?;
            if d.is_zero() {
                return node.fail("division by zero");
            }
            Ok(&to_ratfun(a)? / &d)
        }
        Ast::Pow(a, b) => {
            let e = int_exponent(b)?;
            let base = to_ratfun(a)?;
            base.pow(e).or_else(|_| node.fail("division by zero"))
        }
        _ => node.fail("not a rational-function expression"),
    }
}

fn const_symbol(name: &str) -> Option<FormalConstant> {
    if name == "eg" {
        return Some(FormalConstant::EulerGamma);
    }
    if let Some(rest) = name.strip_prefix('z') {
        if let Ok(k) = rest.parse::<u32>() {
            if k >= 2 {
                return Some(FormalConstant::zeta(k));
            }
        }
    }
    None
}

fn sum_indices(args: &[Node]) -> Result<Vec<(u32, Q)>, ParseError> {
    let mut out = Vec::new();
    for arg in args {
        match &arg.ast {
            Ast::List(pair) => {
                if pair.len() != 2 {
                    return arg.fail("sum index pair must be {degree, weight}");
                }
                let a = to_q(&pair[0])?;
                if !a.is_integer() || !a.is_positive() {
                    return pair[0].fail("sum index degree must be a positive integer");
                }
                let x = to_q(&pair[1])?;
                if x.is_zero() {
                    return pair[1].fail("sum index weight must be nonzero");
                }
                out.push((a.to_integer().to_u32().unwrap(), x));
            }
            _ => {
                let a = to_q(arg)?;
                if !a.is_integer() || a.is_zero() {
                    return arg.fail("sum index must be a nonzero integer");
                }
                let sign = if a.is_positive() { Q::one() } else { -Q::one() };
                out.push((a.abs().to_integer().to_u32().unwrap(), sign));
            }
        }
    }
    if out.is_empty() {
        return err(0, 0, "sum needs at least one index");
    }
    Ok(out)
}

fn applied_var(node: &Node, applied: &Option<Box<Node>>) -> Result<Var, ParseError> {
    let arg = match applied {
        Some(a) => a,
        None => return node.fail("sum is missing its argument, as in S[1](N)"),
    };
    match &arg.ast {
        Ast::Sym(name) => Var::from_name(name)
            .ok_or(())
            .or_else(|_| arg.fail(format!("unknown variable '{name}'"))),
        _ => arg.fail("sum argument must be a variable"),
    }
}

/// Interpret a geometric power c^(m*var+j) as a SumExpression factor.
fn geometric_pow(
    node: &Node,
    base: &Node,
    exp: &Node,
    var: Var,
) -> Result<Option<SumExpression>, ParseError> {
    let exp_poly = match to_poly(exp) {
        Ok(p) => p,
        Err(_) => return Ok(None),
    };
    if exp_poly.as_constant().is_some() {
        return Ok(None);
    }
    if exp_poly.degree_in(var) != Some(1) {
        return node.fail("exponent must be linear in the summation variable");
    }
    let coeffs = exp_poly.coeffs_in(var);
    let j = coeffs[0]
        .as_constant()
        .ok_or(())
        .or_else(|_| node.fail("exponent must be linear with constant offset"))?;
    let m = coeffs[1]
        .as_constant()
        .ok_or(())
        .or_else(|_| node.fail("exponent must be linear with constant offset"))?;
    if !j.is_integer() || !m.is_integer() {
        return node.fail("exponent coefficients must be integers");
    }
    let c = to_q(base).or_else(|_| node.fail("geometric base must be a rational constant"))?;
    if c.is_zero() {
        return node.fail("geometric base must be nonzero");
    }
    let scaled_base = pow_q(&c, m.to_integer().to_i64().unwrap());
    let prefactor = pow_q(&c, j.to_integer().to_i64().unwrap());
    Ok(Some(
        SumExpression::geometric(var, scaled_base).scale_q(&prefactor),
    ))
}

/// A closed form in `var`: rational functions, geometric factors,
/// formal constants, and nested sums, combined by + - * / ^.
pub fn to_sum_expr(node: &Node, var: Var) -> Result<SumExpression, ParseError> {
    match &node.ast {
        Ast::Num(_) => Ok(SumExpression::from_q(var, to_q(node)?)),
        Ast::Sym(name) => {
            if let Some(sym) = const_symbol(name) {
                return Ok(SumExpression::from_const_expr(
                    var,
                    &ConstExpr::from_symbol(sym),
                ));
            }
            match Var::from_name(name) {
                Some(v) => Ok(SumExpression::from_poly(var, Polynomial::var(v))),
                None => node.fail(format!("unknown name '{name}'")),
            }
        }
        Ast::Call {
            head,
            args,
            applied,
        } if head == "S" => {
            let indices = sum_indices(args).map_err(|mut e| {
                if e.line == 0 {
                    e.line = node.line;
                    e.col = node.col;
                }
                e
            })?;
            let v = applied_var(node, applied)?;
            if v != var {
                return node.fail(format!(
                    "sum argument '{}' does not match expression variable '{}'",
                    v.name(),
                    var.name()
                ));
            }
            Ok(SumExpression::from_ssum(SSum::new(indices, v)))
        }
        Ast::Call { head, args, .. } if head == "log" => {
            if args.len() != 1 {
                return node.fail("log takes one rational argument");
            }
            let q = to_q(&args[0])?;
            Ok(SumExpression::from_const_expr(
                var,
                &ConstExpr::from_symbol(FormalConstant::Log(q)),
            ))
        }
        Ast::Call { head, .. } => {
            node.fail(format!("'{head}[...]' is not valid in a closed form"))
        }
        Ast::List(_) => node.fail("index list is only valid inside S[...]"),
        Ast::Neg(a) => Ok(to_sum_expr(a, var)?.neg()),
        Ast::Add(a, b) => Ok(to_sum_expr(a, var)?.add(&to_sum_expr(b, var)?)),
        Ast::Sub(a, b) => Ok(to_sum_expr(a, var)?.sub(&to_sum_expr(b, var)?)),
        Ast::Mul(a, b) => Ok(to_sum_expr(a, var)?.mul(&to_sum_expr(b, var)?)),
        Ast::Div(a, b) => {
            let d = to_sum_expr(b, var)?;
            let dr = d
                .as_rational()
                .ok_or(())
                .or_else(|_| b.fail("cannot divide by sums or constants"))?;
            if dr.is_zero() {
                return b.fail("division by zero");
            }
            let inv = dr.inv().expect("nonzero");
            Ok(to_sum_expr(a, var)?.scale(&inv))
        }
        Ast::Pow(a, b) => {
            if let Some(g) = geometric_pow(node, a, b, var)? {
                return Ok(g);
            }
            let e = int_exponent(b)?;
            let base = to_sum_expr(a, var)?;
            if e >= 0 {
                Ok(base.pow(e as u32))
            } else {
                let br = base
                    .as_rational()
                    .ok_or(())
                    .or_else(|_| a.fail("cannot invert sums or constants"))?;
                let p = br.pow(e).or_else(|_| a.fail("division by zero"))?;
                Ok(SumExpression::from_rat(var, p))
            }
        }
        Ast::Factorial(_) => node.fail("factorials are only valid in summand terms"),
    }
}

/// A Laurent series in ep with closed-form coefficients in `var`.
/// `O[ep]^m` marks the truncation; its absence yields an exact series.
/// Divisions by exact multi-term series develop enough orders to reach
/// the outermost truncation marker.
pub fn to_series(node: &Node, var: Var) -> Result<EpsSeries, ParseError> {
    to_series_capped(node, var, scan_trunc(node))
}

/// Highest O[ep]^m marker in the expression, if any.
fn scan_trunc(node: &Node) -> Option<i64> {
    let mut best: Option<i64> = None;
    let mut push = |m: i64| best = Some(best.map_or(m, |b: i64| b.max(m)));
    match &node.ast {
        Ast::Call { head, args, .. } => {
            if head == "O" {
                push(1);
            }
            for a in args {
                if let Some(m) = scan_trunc(a) {
                    push(m);
                }
            }
        }
        Ast::Pow(a, b) => {
            if let Ast::Call { head, .. } = &a.ast {
                if head == "O" {
                    if let Ok(m) = int_exponent(b) {
                        push(m);
                    }
                }
            }
            for n in [a, b] {
                if let Some(m) = scan_trunc(n) {
                    push(m);
                }
            }
        }
        Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b) => {
            for n in [a, b] {
                if let Some(m) = scan_trunc(n) {
                    push(m);
                }
            }
        }
        Ast::Neg(a) | Ast::Factorial(a) => {
            if let Some(m) = scan_trunc(a) {
                push(m);
            }
        }
        Ast::List(items) => {
            for n in items {
                if let Some(m) = scan_trunc(n) {
                    push(m);
                }
            }
        }
        Ast::Num(_) | Ast::Sym(_) => {}
    }
    best
}

/// Widen an exact multi-term series so its inverse reaches order `cap`.
/// Monomials invert exactly and are left alone.
fn widen_for_inverse(s: EpsSeries, cap: Option<i64>) -> EpsSeries {
    let Some(c) = cap else { return s };
    if s.trunc().is_some() {
        return s;
    }
    let Some(eff) = s.effective_start() else {
        return s;
    };
    if s.known_orders().filter(|(_, e)| !e.is_zero()).count() <= 1 {
        return s;
    }
    let end = s.start() + s.known_orders().count() as i64;
    // input truncated at t inverts with window through t - 2*eff
    let t = (c + 2 * eff).max(end);
    s.truncate(t)
}

pub fn to_series_capped(
    node: &Node,
    var: Var,
    cap: Option<i64>,
) -> Result<EpsSeries, ParseError> {
    match &node.ast {
        Ast::Sym(name) if name == "ep" => {
            Ok(EpsSeries::from_expr(SumExpression::one(var), 1))
        }
        Ast::Call { head, args, .. } if head == "O" => {
            check_big_o_arg(node, args)?;
            Ok(EpsSeries::zero_truncated(0, 1, var))
        }
        Ast::Pow(a, b) => {
            if let Ast::Call { head, args, .. } = &a.ast {
                if head == "O" {
                    check_big_o_arg(a, args)?;
                    let m = int_exponent(b)?;
                    return Ok(EpsSeries::zero_truncated(m - 1, m, var));
                }
            }
            if let Ast::Sym(name) = &a.ast {
                if name == "ep" {
                    let m = int_exponent(b)?;
                    return Ok(EpsSeries::from_expr(SumExpression::one(var), m));
                }
            }
            // geometric and rational powers fall through to the closed form
            if let Some(g) = geometric_pow(node, a, b, var).unwrap_or(None) {
                return Ok(EpsSeries::from_expr(g, 0));
            }
            let e = int_exponent(b)?;
            let base = to_series_capped(a, var, cap)?;
            if e >= 0 {
                let mut acc = EpsSeries::one(var);
                for _ in 0..e {
                    acc = acc.mul(&base);
                }
                Ok(acc)
            } else {
                let inv = widen_for_inverse(base, cap)
                    .inverse()
                    .map_err(|se| ParseError {
                        line: a.line,
                        col: a.col,
                        msg: se.to_string(),
                    })?;
                let mut acc = EpsSeries::one(var);
                for _ in 0..(-e) {
                    acc = acc.mul(&inv);
                }
                Ok(acc)
            }
        }
        Ast::Neg(a) => Ok(to_series_capped(a, var, cap)?.neg()),
        Ast::Add(a, b) => {
            Ok(to_series_capped(a, var, cap)?.add(&to_series_capped(b, var, cap)?))
        }
        Ast::Sub(a, b) => {
            Ok(to_series_capped(a, var, cap)?.sub(&to_series_capped(b, var, cap)?))
        }
        Ast::Mul(a, b) => {
            Ok(to_series_capped(a, var, cap)?.mul(&to_series_capped(b, var, cap)?))
        }
        Ast::Div(a, b) => {
            let d = widen_for_inverse(to_series_capped(b, var, cap)?, cap);
            let num = to_series_capped(a, var, cap)?;
            num.div(&d).map_err(|se| ParseError {
                line: b.line,
                col: b.col,
                msg: se.to_string(),
            })
        }
        // everything else is an ep-free closed form
        _ => Ok(EpsSeries::from_expr(to_sum_expr(node, var)?, 0)),
    }
}

fn check_big_o_arg(node: &Node, args: &[Node]) -> Result<(), ParseError> {
    if args.len() == 1 {
        if let Ast::Sym(s) = &args[0].ast {
            if s == "ep" {
                return Ok(());
            }
        }
    }
    node.fail("truncation marker must be written O[ep]")
}
