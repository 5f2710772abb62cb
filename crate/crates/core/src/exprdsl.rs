//! Expression language for problem data.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' ['-'] INTEGER)?
//! primary := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'
//! ```
//! Variables are `x1..xn`, `y1..yn`, `t`, `r2` (|z|²) and `gauge`
//! ((|z|⁴ + t²)^{1/4}); functions are `sin cos exp sqrt log`.

use std::fmt;

use crate::error::{Error, Result};
use crate::hgroup::{circular_average, JetField, Point, ScalarField};
use crate::jet::{Jet2, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// 1-based.
    X(usize),
    Y(usize),
    T,
    R2,
    Gauge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, at) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[start];
        if c.is_ascii_digit() || c == b'.' {
            let mut i = start;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &self.src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            self.pos = i;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut i = start;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            self.pos = i;
            return Ok((Tok::Ident(self.src[start..i].to_string()), start));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax { offset: start, message: format!("unexpected character `{ch}`") })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn unexpected(&self) -> Error {
        let message = match self.peek() {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(v) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier `{s}`"),
            Tok::Sym(c) => format!("unexpected `{c}`"),
        };
        Error::Syntax { offset: self.offset(), message }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let neg = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                self.bump();
                let k = v as i32;
                Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }))
            }
            Tok::Num(_) => Err(Error::Syntax { offset: at, message: "exponent must be an integer literal".into() }),
            _ => Err(self.unexpected()),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(f) = Func::from_name(&name) {
                    return self.call(f, &name, at);
                }
                let var = parse_var(&name, self.n)
                    .ok_or(Error::UnknownIdentifier { offset: at, name: name.clone() })?;
                Ok(Expr::Var(var))
            }
            _ => Err(self.unexpected()),
        }
    }

    fn call(&mut self, f: Func, name: &str, at: usize) -> Result<Expr> {
        if *self.peek() != Tok::Sym('(') {
            return Err(Error::Arity { offset: at, name: name.into(), found: 0 });
        }
        self.bump();
        if *self.peek() == Tok::Sym(')') {
            return Err(Error::Arity { offset: at, name: name.into(), found: 0 });
        }
        let arg = self.expr()?;
        let mut count = 1;
        while *self.peek() == Tok::Sym(',') {
            self.bump();
            self.expr()?;
            count += 1;
        }
        self.expect(')')?;
        if count != 1 {
            return Err(Error::Arity { offset: at, name: name.into(), found: count });
        }
        Ok(Expr::Call(f, Box::new(arg)))
    }
}

fn parse_var(name: &str, n: usize) -> Option<Var> {
    match name {
        "t" => return Some(Var::T),
        "r2" => return Some(Var::R2),
        "gauge" => return Some(Var::Gauge),
        _ => {}
    }
    let (head, idx) = name.split_at(1);
    if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) || idx.starts_with('0') {
        return None;
    }
    let j: usize = idx.parse().ok()?;
    if j == 0 || j > n {
        return None;
    }
    match head {
        "x" => Some(Var::X(j)),
        "y" => Some(Var::Y(j)),
        _ => None,
    }
}

/// Parse `src` for the group dimension `n`.
pub fn parse(src: &str, n: usize) -> Result<Expr> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, i: 0, n };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(e)
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X(j)) => write!(f, "x{j}"),
            Expr::Var(Var::Y(j)) => write!(f, "y{j}"),
            Expr::Var(Var::T) => write!(f, "t"),
            Expr::Var(Var::R2) => write!(f, "r2"),
            Expr::Var(Var::Gauge) => write!(f, "gauge"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.write_at(f, 3)
            }
            Expr::Pow(b, k) => {
                b.write_at(f, 5)?;
                write!(f, "^{k}")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                write!(f, ")")
            }
            Expr::Bin(op, a, b) => {
                let (p, sym) = match op {
                    BinOp::Add => (1, " + "),
                    BinOp::Sub => (1, " - "),
                    BinOp::Mul => (2, " * "),
                    BinOp::Div => (2, " / "),
                };
                a.write_at(f, p)?;
                write!(f, "{sym}")?;
                b.write_at(f, p + 1)
            }
        }
    }

    /// Largest variable index used (0 if none).
    pub fn max_index(&self) -> usize {
        match self {
            Expr::Var(Var::X(j) | Var::Y(j)) => *j,
            Expr::Var(_) | Expr::Num(_) => 0,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_index(),
            Expr::Bin(_, a, b) => a.max_index().max(b.max_index()),
        }
    }

    /// Uses only t, r2, gauge and literals.
    pub fn is_syntactically_circular(&self) -> bool {
        self.max_index() == 0
    }

    fn is_gauge(&self) -> bool {
        matches!(self, Expr::Var(Var::Gauge))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

fn domain(e: &Expr) -> Error {
    Error::Domain(e.to_string())
}

/// Evaluate on the real chart (x_1..x_n, y_1..y_n, t).
pub fn eval_chart<S: Scalar>(e: &Expr, c: &[S]) -> Result<S> {
    let n = (c.len() - 1) / 2;
    if e.max_index() > n {
        return Err(Error::DimensionMismatch { expected: e.max_index(), found: n });
    }
    eval_node(e, c, n)
}

fn r2_of<S: Scalar>(c: &[S], n: usize) -> S {
    let mut r2 = c[0].clone() * c[0].clone();
    for v in &c[1..2 * n] {
        r2 = r2 + v.clone() * v.clone();
    }
    r2
}

fn gauge4<S: Scalar>(c: &[S], n: usize) -> S {
    let r2 = r2_of(c, n);
    let t = c[2 * n].clone();
    r2.clone() * r2 + t.clone() * t
}

fn eval_node<S: Scalar>(e: &Expr, c: &[S], n: usize) -> Result<S> {
    let v = match e {
        Expr::Num(v) => c[0].lift(*v),
        Expr::Var(Var::X(j)) => c[j - 1].clone(),
        Expr::Var(Var::Y(j)) => c[n + j - 1].clone(),
        Expr::Var(Var::T) => c[2 * n].clone(),
        Expr::Var(Var::R2) => r2_of(c, n),
        Expr::Var(Var::Gauge) => gauge4(c, n).sqrt().sqrt(),
        Expr::Neg(a) => -eval_node(a, c, n)?,
        Expr::Bin(op, a, b) => {
            let x = eval_node(a, c, n)?;
            let y = eval_node(b, c, n)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.value() == 0.0 {
                        return Err(domain(e));
                    }
                    x / y
                }
            }
        }
        // Powers of the gauge that are multiples of four are polynomials
        // and stay differentiable at the identity.
        Expr::Pow(b, k) if b.is_gauge() && k % 4 == 0 => gauge4(c, n).powi(k / 4),
        Expr::Pow(b, k) => {
            let x = eval_node(b, c, n)?;
            if *k < 0 && x.value() == 0.0 {
                return Err(domain(e));
            }
            x.powi(*k)
        }
        Expr::Call(f, a) => {
            let x = eval_node(a, c, n)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Sqrt => {
                    if x.value() < 0.0 {
                        return Err(domain(e));
                    }
                    x.sqrt()
                }
                Func::Log => {
                    if x.value() <= 0.0 {
                        return Err(domain(e));
                    }
                    x.ln()
                }
            }
        }
    };
    if !v.is_finite() {
        return Err(domain(e));
    }
    Ok(v)
}

pub fn eval(e: &Expr, p: &Point) -> Result<f64> {
    eval_chart(e, &p.chart())
}

pub fn jet_eval(e: &Expr, p: &Point) -> Result<Jet2> {
    eval_chart(e, &Jet2::seed(&p.chart()))
}

impl ScalarField for Expr {
    fn eval(&self, p: &Point) -> Result<f64> {
        eval(self, p)
    }
}

impl JetField for Expr {
    fn jet(&self, p: &Point) -> Result<Jet2> {
        jet_eval(self, p)
    }
}

/// Fixed probe set inside the unit ball used by the numeric circularity check.
pub fn circularity_probes(n: usize) -> Vec<Point> {
    let mut out = Vec::new();
    let mut k = 0usize;
    for &rho in &[0.3, 0.55, 0.8] {
        for &psi in &[-1.1, -0.4, 0.2, 0.9] {
            let mut p = Point::identity(n);
            let r = rho * (psi as f64).cos().sqrt();
            // spread the direction over the coordinates deterministically
            let mut norm = 0.0;
            let mut dir = vec![0.0; 2 * n];
            for (i, d) in dir.iter_mut().enumerate() {
                *d = ((k * 7 + i * 3) % 11) as f64 / 11.0 + 0.1;
                norm += *d * *d;
            }
            let norm = norm.sqrt();
            for j in 0..n {
                p.x[j] = r * dir[j] / norm;
                p.y[j] = r * dir[n + j] / norm;
            }
            p.t = rho * rho * psi.sin();
            out.push(p);
            k += 1;
        }
    }
    out
}

/// Circle invariance, syntactically when possible, otherwise by comparing
/// values with their 32-point circle averages on the fixed probe set.
pub fn is_circular(e: &Expr, tol: f64, n: usize) -> bool {
    if e.is_syntactically_circular() {
        return true;
    }
    circularity_probes(n).iter().all(|p| match (eval(e, p), circular_average(e, p, 32)) {
        (Ok(v), Ok(a)) => (v - a).abs() < tol,
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(parse("t", 1).unwrap(), Expr::Var(Var::T));
        let e = parse("1 - gauge^4", 1).unwrap();
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Sub,
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Pow(Box::new(Expr::Var(Var::Gauge)), 4))
            )
        );
        assert!(matches!(parse("x1*", 1), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn precedence() {
        let e = parse("-x1^2", 1).unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        let e = parse("1 - 2 - 3", 1).unwrap();
        assert_eq!(eval(&e, &Point::identity(1)).unwrap(), -4.0);
        let e = parse("8 / 2 / 2 * 3", 1).unwrap();
        assert_eq!(eval(&e, &Point::identity(1)).unwrap(), 6.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("foo", 1), Err(Error::UnknownIdentifier { offset: 0, .. })));
        assert!(matches!(parse("x2", 1), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse("1 + sin", 1), Err(Error::Arity { offset: 4, .. })));
        assert!(matches!(parse("cos(t, t)", 1), Err(Error::Arity { found: 2, .. })));
        assert!(matches!(parse("t^1.5", 1), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(t", 1), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("t $", 1), Err(Error::Syntax { offset: 2, .. })));
    }

    #[test]
    fn eval_examples() {
        let p = Point::h1(1.0, 2.0, 0.0);
        assert_eq!(eval(&parse("r2", 1).unwrap(), &p).unwrap(), 5.0);
        let q = Point::h1(0.0, 0.0, 4.0);
        assert_eq!(eval(&parse("gauge", 1).unwrap(), &q).unwrap(), 2.0);
        let j = jet_eval(&parse("t^2", 1).unwrap(), &p).unwrap();
        assert_eq!(j.hess, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        assert!(matches!(eval(&parse("sqrt(t - 1)", 1).unwrap(), &p), Err(Error::Domain(s)) if s == "sqrt(t - 1)"));
    }

    #[test]
    fn gauge_power_is_smooth_at_identity() {
        let e = parse("(1 - gauge^4)^2", 1).unwrap();
        let j = jet_eval(&e, &Point::identity(1)).unwrap();
        assert_eq!(j.value, 1.0);
        assert!(jet_eval(&parse("gauge", 1).unwrap(), &Point::identity(1)).is_err());
    }

    #[test]
    fn circularity() {
        assert!(is_circular(&parse("t + r2^2", 1).unwrap(), 1e-10, 1));
        assert!(!is_circular(&parse("x1", 1).unwrap(), 1e-8, 1));
        assert!(is_circular(&parse("sin(gauge)", 1).unwrap(), 1e-10, 1));
        assert!(is_circular(&parse("x1^2 + y1^2", 1).unwrap(), 1e-10, 1));
    }

    #[test]
    fn printing_round_trips() {
        for src in ["-x1^2", "(1 - gauge^4)^2", "1 - (2 - 3)", "a", "t^-2 / (r2 * 3)", "-(-t)", "exp(-t) * 2.5e-3"] {
            let Ok(e) = parse(src, 1) else { continue };
            let s1 = e.to_string();
            let e2 = parse(&s1, 1).unwrap();
            assert_eq!(e, e2, "{src} -> {s1}");
            assert_eq!(e2.to_string(), s1);
        }
    }
}
