//! Coefficient expressions in the variable `t`.
//!
//! Grammar:
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 't' | 'pi' | name '(' sum (',' sum)* ')' | '(' sum ')'
//! ```
//! `^` is right-associative and binds tighter than unary minus, so `-t^2 = -(t^2)`.

use confprop::ScalarField;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    Unknown { offset: usize, name: String },
}

impl ExprError {
    pub fn offset(&self) -> usize {
        match self {
            ExprError::Syntax { offset, .. } | ExprError::Unknown { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Pow,
    /// derivative of abs; not reachable from the parser
    Sign,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Pow => "pow",
            Func::Sign => "sign",
        }
    }

    fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::T => write!(f, "t"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
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
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| ExprError::Syntax { offset: start, msg: format!("malformed number `{text}`") })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if b"+-*/^(),".contains(&c) {
            out.push((Tok::Op(c as char), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ExprError::Syntax { offset: i, msg: format!("unexpected character `{ch}`") });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax { offset: self.offset(), msg: msg.into() })
    }
    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::T),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                _ => {
                    let func = Func::lookup(&name).ok_or(ExprError::Unknown { offset: at, name: name.clone() })?;
                    self.expect('(')?;
                    let mut args = vec![self.sum()?];
                    while *self.peek() == Tok::Op(',') {
                        self.bump();
                        args.push(self.sum()?);
                    }
                    self.expect(')')?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Syntax {
                            offset: at,
                            msg: format!("{name} takes {} argument(s), got {}", func.arity(), args.len()),
                        });
                    }
                    Ok(Expr::Call(func, args))
                }
            },
            Tok::End => Err(ExprError::Syntax { offset: at, msg: "unexpected end of input".into() }),
            Tok::Op(c) => Err(ExprError::Syntax { offset: at, msg: format!("unexpected `{c}`") }),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Syntax { offset: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

// constructors with light constant folding, so derivative trees stay small

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&a, 0.0) => b,
        _ if is_num(&b, 0.0) => a,
        (Expr::Num(x), Expr::Num(y)) => num(x + y),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&b, 0.0) => a,
        _ if is_num(&a, 0.0) => neg(b),
        (Expr::Num(x), Expr::Num(y)) => num(x - y),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&a, 0.0) || is_num(&b, 0.0) => num(0.0),
        _ if is_num(&a, 1.0) => b,
        _ if is_num(&b, 1.0) => a,
        (Expr::Num(x), Expr::Num(y)) => num(x * y),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&a, 0.0) => num(0.0),
        _ if is_num(&b, 1.0) => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => num(-x),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, vec![a])
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        return a;
    }
    if is_num(&b, 0.0) {
        return num(1.0);
    }
    Expr::Pow(Box::new(a), Box::new(b))
}

impl Expr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Neg(a) => -a.eval(t),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => a.eval(t).powf(b.eval(t)),
            Expr::Call(f, args) => {
                let x = args[0].eval(t);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Pow => x.powf(args[1].eval(t)),
                    Func::Sign => {
                        if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::T => false,
            Expr::Neg(a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Call(_, args) => args.iter().all(Expr::is_constant),
        }
    }

    /// d/dt by the chain, product and quotient rules.
    pub fn derivative(&self) -> Expr {
        if self.is_constant() {
            return num(0.0);
        }
        match self {
            Expr::Num(_) => num(0.0),
            Expr::T => num(1.0),
            Expr::Neg(a) => neg(a.derivative()),
            Expr::Add(a, b) => add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => add(mul(a.derivative(), (**b).clone()), mul((**a).clone(), b.derivative())),
            Expr::Div(a, b) => {
                let (a, b) = ((**a).clone(), (**b).clone());
                div(sub(mul(a.derivative(), b.clone()), mul(a, b.derivative())), pow(b, num(2.0)))
            }
            Expr::Pow(a, b) => power_rule((**a).clone(), (**b).clone()),
            Expr::Call(f, args) => {
                let a = args[0].clone();
                let da = a.derivative();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Tan => div(num(1.0), pow(call(Func::Cos, a), num(2.0))),
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(num(1.0), a),
                    Func::Sqrt => div(num(0.5), call(Func::Sqrt, a)),
                    Func::Abs => call(Func::Sign, a),
                    Func::Sinh => call(Func::Cosh, a),
                    Func::Cosh => call(Func::Sinh, a),
                    Func::Sign => num(0.0),
                    Func::Pow => return power_rule(a, args[1].clone()),
                };
                mul(outer, da)
            }
        }
    }
}

fn power_rule(a: Expr, b: Expr) -> Expr {
    if b.is_constant() {
        // b a^(b−1) a′
        let bm1 = match &b {
            Expr::Num(v) => num(v - 1.0),
            _ => sub(b.clone(), num(1.0)),
        };
        return mul(mul(b, pow(a.clone(), bm1)), a.derivative());
    }
    // a^b (b′ ln a + b a′/a)
    let inner = add(mul(b.derivative(), call(Func::Log, a.clone())), div(mul(b.clone(), a.derivative()), a.clone()));
    mul(pow(a, b), inner)
}

/// A field whose derivative chain is produced symbolically on demand.
pub fn to_field(e: &Expr, label: &str) -> ScalarField {
    let shared = Arc::new(e.clone());
    let ev = shared.clone();
    let field = ScalarField::new(label.to_string(), move |t| ev.eval(t));
    let label = format!("d/dt[{label}]");
    field.with_lazy_deriv(move || to_field(&shared.derivative(), &label))
}

/// Parse and wrap in one step.
pub fn parse_field(text: &str) -> Result<ScalarField, ExprError> {
    Ok(to_field(&parse_expression(text)?, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one() {
        let f = parse_field("1").unwrap();
        assert_eq!(f.eval(0.3), 1.0);
        assert_eq!(f.deriv_at(0.3), 0.0);
    }

    #[test]
    fn pythagoras() {
        let f = parse_field("sin(t)^2 + cos(t)^2").unwrap();
        for t in [-2.0, 0.1, 3.7] {
            assert!((f.eval(t) - 1.0).abs() < 1e-15);
            assert!(f.deriv_at(t).abs() < 1e-15);
        }
    }

    #[test]
    fn rational() {
        let f = parse_field("t^2/(1+t)").unwrap();
        assert_eq!(f.eval(1.0), 0.5);
        assert!((f.deriv_at(1.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(parse_expression("-t^2").unwrap().eval(3.0), -9.0);
        assert_eq!(parse_expression("2^3^2").unwrap().eval(0.0), 512.0);
        assert_eq!(parse_expression("2^-1").unwrap().eval(0.0), 0.5);
        assert_eq!(parse_expression("8/2/2").unwrap().eval(0.0), 2.0);
        assert_eq!(parse_expression("1-2-3").unwrap().eval(0.0), -4.0);
        assert_eq!(parse_expression("1.5e2 + 2E-1").unwrap().eval(0.0), 150.2);
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse_expression("1 + * t").unwrap_err().offset(), 4);
        assert_eq!(
            parse_expression("2*foo(t)").unwrap_err(),
            ExprError::Unknown { offset: 2, name: "foo".into() }
        );
        assert_eq!(parse_expression("(t + 1").unwrap_err().offset(), 6);
        assert_eq!(parse_expression("t $ 2").unwrap_err().offset(), 2);
        assert!(parse_expression("  ").is_err());
        assert!(parse_expression("pow(t)").is_err());
    }

    #[test]
    fn second_derivative_is_symbolic() {
        let f = parse_field("t^3").unwrap();
        let d2 = f.derivative().derivative();
        assert!(d2.has_deriv());
        assert!((d2.eval(2.0) - 12.0).abs() < 1e-12);
    }
}
