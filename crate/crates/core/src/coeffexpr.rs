//! Expression language for coefficient and test functions of `x`.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := unary (("*"|"/") unary)* ;
//! unary  := "-" unary | factor ;
//! factor := base ("^" ["-"] int)? ;
//! base   := number | "i" | "x" | ident "(" expr ")" | "(" expr ")" ;
//! ident  := "sin"|"cos"|"exp"|"sqrt"|"abs"|"tanh"|"step" ;
//! ```
//!
//! Evaluation is over complex numbers with `x` real. Expressions can also be
//! evaluated on second-order jets, which yields exact first and second
//! derivatives in `x` (`step` contributes zero derivatives away from its jump).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the imaginary part of a `step` argument.
const STEP_IMAG_TOL: f64 = 1e-12;
/// Uniform cells used to bracket sign changes of `step` arguments.
const JUMP_SCAN_CELLS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Tanh,
    Step,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "tanh" => Func::Tanh,
            "step" => Func::Step,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Step => "step",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    ImagUnit,
    X,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text and the abscissae in
/// [0, 1] where it may jump.
#[derive(Debug, Clone)]
pub struct CoefficientExpr {
    root: Node,
    source: String,
    jumps: Vec<f64>,
}

impl PartialEq for CoefficientExpr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl CoefficientExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        let tok = parser.peek();
        if tok.kind != Tok::End {
            return Err(Error::Syntax {
                offset: tok.offset,
                expected: "operator or end of input".into(),
            });
        }
        let mut expr = CoefficientExpr {
            root,
            source: source.to_string(),
            jumps: Vec::new(),
        };
        expr.jumps = expr.locate_jumps();
        Ok(expr)
    }

    /// The constant expression `c`.
    pub fn constant(c: f64) -> Self {
        Self::parse(&format_number(c)).expect("formatted constant parses")
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Sorted abscissae in the open interval (0, 1) at which a `step`
    /// argument changes sign. The value at each abscissa is the right limit.
    pub fn jump_points(&self) -> &[f64] {
        &self.jumps
    }

    /// True if the expression is the literal zero (after parsing, not after
    /// simplification).
    pub fn is_literal_zero(&self) -> bool {
        matches!(self.root, Node::Num(v) if v == 0.0)
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        eval_node(&self.root, x, Complex64::new(x, 0.0))
    }

    /// Value with first and second derivative in `x`.
    pub fn eval_jet(&self, x: f64) -> Result<Jet> {
        eval_node(&self.root, x, Jet::variable(x))
    }

    fn locate_jumps(&self) -> Vec<f64> {
        let mut args = Vec::new();
        collect_step_args(&self.root, &mut args);
        let mut jumps = Vec::new();
        for arg in args {
            let positive =
                |x: f64| -> Option<bool> { eval_node(arg, x, Complex64::new(x, 0.0)).ok().map(|v| v.re >= 0.0) };
            let h = 1.0 / JUMP_SCAN_CELLS as f64;
            let mut prev = positive(0.0);
            for j in 1..=JUMP_SCAN_CELLS {
                let xr = j as f64 * h;
                let cur = positive(xr);
                if let (Some(a), Some(b)) = (prev, cur) {
                    if a != b {
                        let (mut lo, mut hi) = ((j - 1) as f64 * h, xr);
                        // bisect down to adjacent floats; `hi` is the first point on the right side
                        loop {
                            let mid = 0.5 * (lo + hi);
                            if mid <= lo || mid >= hi {
                                break;
                            }
                            match positive(mid) {
                                Some(s) if s == a => lo = mid,
                                Some(_) => hi = mid,
                                None => break,
                            }
                        }
                        if hi > 0.0 && hi < 1.0 {
                            jumps.push(hi);
                        }
                    }
                }
                prev = cur;
            }
        }
        jumps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        jumps.dedup();
        jumps
    }
}

impl FromStr for CoefficientExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CoefficientExpr::parse(s)
    }
}

fn collect_step_args<'a>(node: &'a Node, out: &mut Vec<&'a Node>) {
    match node {
        Node::Num(_) | Node::ImagUnit | Node::X => {}
        Node::Neg(a) | Node::Pow(a, _) => collect_step_args(a, out),
        Node::Binary(_, a, b) => {
            collect_step_args(a, out);
            collect_step_args(b, out);
        }
        Node::Call(f, a) => {
            if *f == Func::Step {
                out.push(a);
            }
            collect_step_args(a, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Printing

fn format_number(v: f64) -> String {
    // Debug output is the shortest string that round-trips
    let s = format!("{v:?}");
    if v < 0.0 {
        format!("(-{})", &s[1..])
    } else {
        s
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => f.write_str(&format_number(*v)),
            Node::ImagUnit => f.write_str("i"),
            Node::X => f.write_str("x"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a}{sym}{b})")
            }
            Node::Pow(a, n) => write!(f, "({a})^{n}"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Prints a fully parenthesised form that parses back to the same tree.
impl fmt::Display for CoefficientExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// Truncated Taylor jet: value, first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        Jet {
            v,
            d1: Complex64::new(0.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn variable(x: f64) -> Self {
        Jet {
            v: Complex64::new(x, 0.0),
            d1: Complex64::new(1.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        }
    }

    /// g(self) given g, g', g'' evaluated at self.v.
    fn chain(self, g: Complex64, g1: Complex64, g2: Complex64) -> Jet {
        Jet {
            v: g,
            d1: g1 * self.d1,
            d2: g2 * self.d1 * self.d1 + g1 * self.d2,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

/// Scalar types an expression can be evaluated over.
trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn lift(c: Complex64) -> Self;
    fn value(&self) -> Complex64;
    fn divide(self, other: Self) -> Self;
    fn apply(self, f: Func) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Scalar for Complex64 {
    fn lift(c: Complex64) -> Self {
        c
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn divide(self, other: Self) -> Self {
        self / other
    }
    fn apply(self, f: Func) -> Self {
        match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
            Func::Sqrt => self.sqrt(),
            Func::Abs => Complex64::new(self.norm(), 0.0),
            Func::Tanh => self.tanh(),
            Func::Step => Complex64::new(if self.re >= 0.0 { 1.0 } else { 0.0 }, 0.0),
        }
    }
    fn powi(self, n: i32) -> Self {
        if n >= 0 {
            self.powu(n as u32)
        } else {
            Complex64::new(1.0, 0.0) / self.powu((-n) as u32)
        }
    }
}

impl Scalar for Jet {
    fn lift(c: Complex64) -> Self {
        Jet::constant(c)
    }
    fn value(&self) -> Complex64 {
        self.v
    }
    fn divide(self, o: Self) -> Self {
        let q = self.v / o.v;
        let q1 = (self.d1 - q * o.d1) / o.v;
        let q2 = (self.d2 - 2.0 * q1 * o.d1 - q * o.d2) / o.v;
        Jet { v: q, d1: q1, d2: q2 }
    }
    fn apply(self, f: Func) -> Self {
        let a = self.v;
        let zero = Complex64::new(0.0, 0.0);
        match f {
            Func::Sin => self.chain(a.sin(), a.cos(), -a.sin()),
            Func::Cos => self.chain(a.cos(), -a.sin(), -a.cos()),
            Func::Exp => {
                let e = a.exp();
                self.chain(e, e, e)
            }
            Func::Sqrt => {
                let s = a.sqrt();
                if s.norm() == 0.0 {
                    return Jet::constant(zero);
                }
                self.chain(s, 0.5 / s, -0.25 / (s * s * s))
            }
            Func::Tanh => {
                let t = a.tanh();
                let sech2 = 1.0 - t * t;
                self.chain(t, sech2, -2.0 * t * sech2)
            }
            Func::Abs => {
                // |a| for complex a(x): r' = Re(conj(a) a') / r
                let r = a.norm();
                if r == 0.0 {
                    return Jet::constant(zero);
                }
                let r1 = (a.conj() * self.d1).re / r;
                let r2 = (self.d1.norm_sqr() + (a.conj() * self.d2).re - r1 * r1) / r;
                Jet {
                    v: Complex64::new(r, 0.0),
                    d1: Complex64::new(r1, 0.0),
                    d2: Complex64::new(r2, 0.0),
                }
            }
            Func::Step => Jet::constant(a.apply(Func::Step)),
        }
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Jet::constant(Complex64::new(1.0, 0.0));
        }
        let a = self.v;
        let nf = n as f64;
        let g = a.powi(n);
        let g1 = nf * a.powi(n - 1);
        let g2 = if n == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            nf * (nf - 1.0) * a.powi(n - 2)
        };
        self.chain(g, g1, g2)
    }
}

fn eval_node<S: Scalar>(node: &Node, x: f64, var: S) -> Result<S> {
    Ok(match node {
        Node::Num(v) => S::lift(Complex64::new(*v, 0.0)),
        Node::ImagUnit => S::lift(Complex64::new(0.0, 1.0)),
        Node::X => var,
        Node::Neg(a) => -eval_node(a, x, var)?,
        Node::Binary(op, a, b) => {
            let l = eval_node(a, x, var)?;
            let r = eval_node(b, x, var)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r.value().norm() == 0.0 {
                        return Err(Error::DivisionByZero { x });
                    }
                    l.divide(r)
                }
            }
        }
        Node::Pow(a, n) => {
            let base = eval_node(a, x, var)?;
            if *n < 0 && base.value().norm() == 0.0 {
                return Err(Error::DivisionByZero { x });
            }
            base.powi(*n)
        }
        Node::Call(f, a) => {
            let arg = eval_node(a, x, var)?;
            if *f == Func::Step && arg.value().im.abs() > STEP_IMAG_TOL {
                return Err(Error::ComplexStepArgument {
                    x,
                    imag: arg.value().im,
                });
            }
            arg.apply(*f)
        }
    })
}

// ---------------------------------------------------------------------------
// Tokenizer and parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
    /// Raw text, kept for exponent validation.
    text: String,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            out.push(Token {
                kind,
                offset: start,
                text: (c as char).to_string(),
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
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
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                expected: "number".into(),
            })?;
            if !value.is_finite() {
                return Err(Error::Syntax {
                    offset: start,
                    expected: "finite number".into(),
                });
            }
            out.push(Token {
                kind: Tok::Number(value),
                offset: start,
                text: text.to_string(),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let text = &src[start..i];
            out.push(Token {
                kind: Tok::Ident(text.to_string()),
                offset: start,
                text: text.to_string(),
            });
            continue;
        }
        return Err(Error::Syntax {
            offset: start,
            expected: "number, identifier, operator or parenthesis".into(),
        });
    }
    out.push(Token {
        kind: Tok::End,
        offset: src.len(),
        text: String::new(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const EXPECT_OPERAND: &str = "number, 'i', 'x', function, '(' or '-'";

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: Tok, what: &str) -> Result<()> {
        let t = self.bump();
        if t.kind == kind {
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: t.offset,
                expected: what.into(),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek().kind == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if self.peek().kind != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if self.peek().kind == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        match t.kind {
            Tok::Number(v) => {
                let is_int = t.text.bytes().all(|b| b.is_ascii_digit());
                if !is_int || v > 9.0 {
                    return Err(Error::InvalidExponent { offset: t.offset });
                }
                let n = v as i32;
                Ok(Node::Pow(Box::new(base), if negative { -n } else { n }))
            }
            _ => Err(Error::Syntax {
                offset: t.offset,
                expected: "integer exponent".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<Node> {
        let t = self.bump();
        match t.kind {
            Tok::Number(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Node::X),
                "i" => Ok(Node::ImagUnit),
                _ => match Func::from_name(&name) {
                    Some(f) => {
                        self.expect(Tok::LParen, "'('")?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Node::Call(f, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier { name, offset: t.offset }),
                },
            },
            _ => Err(Error::Syntax {
                offset: t.offset,
                expected: EXPECT_OPERAND.into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, x: f64) -> Complex64 {
        CoefficientExpr::parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn polynomial_and_constants() {
        assert_eq!(ev("x^2", 2.0), Complex64::new(4.0, 0.0));
        assert_eq!(ev("2+3*i", 0.7), Complex64::new(2.0, 3.0));
        assert_eq!(ev("x*(1-x)", 0.5), Complex64::new(0.25, 0.0));
        assert_eq!(ev("exp(0)", 0.3), Complex64::new(1.0, 0.0));
        assert_eq!(ev(" 1.5e1 /  3 ", 0.0), Complex64::new(5.0, 0.0));
    }

    #[test]
    fn step_function() {
        assert_eq!(ev("step(x-0.5)", 0.25).re, 0.0);
        assert_eq!(ev("step(x-0.5)", 0.75).re, 1.0);
        assert_eq!(ev("step(x-0.5)", 0.5).re, 1.0);
        let e = CoefficientExpr::parse("step(x-0.5)").unwrap();
        assert_eq!(e.jump_points(), &[0.5]);
        let err = CoefficientExpr::parse("step(x+i)").unwrap().eval(0.1);
        assert!(matches!(err, Err(Error::ComplexStepArgument { .. })));
    }

    #[test]
    fn jump_points_of_composite() {
        let e = CoefficientExpr::parse("1 - step(x-0.4) + step(x-0.6)").unwrap();
        assert_eq!(e.jump_points(), &[0.4, 0.6]);
        let e = CoefficientExpr::parse("step(x-0.3)").unwrap();
        let j = e.jump_points()[0];
        assert!((j - 0.3).abs() < 1e-15);
        assert_eq!(e.eval(j).unwrap().re, 1.0);
        assert!(CoefficientExpr::parse("sin(x)").unwrap().jump_points().is_empty());
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-x^2", 3.0).re, -9.0);
        assert_eq!(ev("2*3^2", 0.0).re, 18.0);
        assert_eq!(ev("1-2-3", 0.0).re, -4.0);
        assert_eq!(ev("8/2/2", 0.0).re, 2.0);
        assert_eq!(ev("x^-2", 2.0).re, 0.25);
        assert_eq!(ev("--x", 2.0).re, 2.0);
    }

    #[test]
    fn syntax_errors() {
        match CoefficientExpr::parse("sin(") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            CoefficientExpr::parse("foo(x)"),
            Err(Error::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            CoefficientExpr::parse("x^2.5"),
            Err(Error::InvalidExponent { offset: 2 })
        ));
        assert!(matches!(
            CoefficientExpr::parse("x^12"),
            Err(Error::InvalidExponent { .. })
        ));
        assert!(matches!(
            CoefficientExpr::parse("x y"),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            CoefficientExpr::parse(""),
            Err(Error::Syntax { offset: 0, .. })
        ));
        assert!(matches!(
            CoefficientExpr::parse("(x"),
            Err(Error::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn division_by_zero() {
        let e = CoefficientExpr::parse("1/(x-0.5)").unwrap();
        assert!(matches!(e.eval(0.5), Err(Error::DivisionByZero { .. })));
        assert!(e.eval(0.25).is_ok());
        let e = CoefficientExpr::parse("x^-1").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn jets_match_closed_form_derivatives() {
        let e = CoefficientExpr::parse("sin(2*x)*exp(x) + x^3/(1+x) + sqrt(1+x) + tanh(x)").unwrap();
        let x = 0.37f64;
        let j = e.eval_jet(x).unwrap();
        let f = |x: f64| (2.0 * x).sin() * x.exp() + x.powi(3) / (1.0 + x) + (1.0 + x).sqrt() + x.tanh();
        // derivatives from a 5-point stencil on the closed form
        let h = 1e-3;
        let d1 = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
        let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
        assert!((j.v.re - f(x)).abs() < 1e-14);
        assert!((j.d1.re - d1).abs() < 1e-9);
        assert!((j.d2.re - d2).abs() < 1e-6);
    }

    #[test]
    fn abs_jet_of_complex_argument() {
        let e = CoefficientExpr::parse("abs(x + 2*i*x)").unwrap();
        let j = e.eval_jet(0.4).unwrap();
        let s5 = 5f64.sqrt();
        assert!((j.v.re - 0.4 * s5).abs() < 1e-15);
        assert!((j.d1.re - s5).abs() < 1e-14);
        assert!(j.d2.re.abs() < 1e-14);
    }

    fn horner(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn expr_strategy() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("x".to_string()),
            Just("i".to_string()),
            (0.0f64..10.0).prop_map(|v| format!("{v}")),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})+({b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
                inner.clone().prop_map(|a| format!("-({a})")),
                (inner.clone(), 0i32..4).prop_map(|(a, n)| format!("({a})^{n}")),
                inner.clone().prop_map(|a| format!("sin({a})")),
                inner.clone().prop_map(|a| format!("exp(0.1*({a}))")),
                inner.prop_map(|a| format!("step(x-0.5)*({a})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(src in expr_strategy(), xs in proptest::collection::vec(0.0f64..=1.0, 100)) {
            let e = CoefficientExpr::parse(&src).unwrap();
            let printed = e.to_string();
            let e2 = CoefficientExpr::parse(&printed).unwrap();
            prop_assert_eq!(e.root(), e2.root());
            for x in xs {
                let (a, b) = (e.eval(x).unwrap(), e2.eval(x).unwrap());
                prop_assert!((a - b).norm() < 1e-15 || (a - b).norm() <= 1e-15 * a.norm());
            }
        }

        #[test]
        fn polynomial_matches_horner(coeffs in proptest::collection::vec(-5.0f64..5.0, 1..8), x in 0.0f64..=1.0) {
            let src = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| format!("({c})*x^{k}"))
                .collect::<Vec<_>>()
                .join("+");
            let v = CoefficientExpr::parse(&src).unwrap().eval(x).unwrap();
            let h = horner(&coeffs, x);
            let scale = coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1e-300);
            prop_assert!((v.re - h).abs() <= 1e-14 * scale);
            prop_assert_eq!(v.im, 0.0);
        }
    }
}
