//! A small expression language for kernel densities and coefficients.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary ("*" unary)*
//! unary   := "-" unary | primary
//! primary := number | "s" | "t" | "pi" | "sin" "(" expr ")" | "cos" "(" expr ")" | "(" expr ")"
//! ```
//!
//! There is no division or exponential, so every expression is total on
//! `[0, 1]²`. Expressions without `pi`, `sin` or `cos` also evaluate exactly
//! over the rationals.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    S,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Nonnegative literal; negation is always an explicit [`Expr::Neg`].
    Num(f64),
    Var(Var),
    Pi,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn eval<S: Scalar>(&self, s: &S, t: &S) -> Result<S> {
        Ok(match self {
            Expr::Num(v) => S::from_decimal(*v),
            Expr::Var(Var::S) => s.clone(),
            Expr::Var(Var::T) => t.clone(),
            Expr::Pi => S::pi().ok_or(Error::NotExact("pi"))?,
            Expr::Add(a, b) => a.eval(s, t)? + b.eval(s, t)?,
            Expr::Sub(a, b) => a.eval(s, t)? - b.eval(s, t)?,
            Expr::Mul(a, b) => a.eval(s, t)? * b.eval(s, t)?,
            Expr::Neg(a) => -a.eval(s, t)?,
            Expr::Sin(a) => a.eval(s, t)?.sin().ok_or(Error::NotExact("sin"))?,
            Expr::Cos(a) => a.eval(s, t)?.cos().ok_or(Error::NotExact("cos"))?,
        })
    }

    pub fn eval_f64(&self, s: f64, t: f64) -> f64 {
        self.eval(&s, &t).expect("float evaluation is total")
    }

    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.uses(var) || b.uses(var),
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) => a.uses(var),
        }
    }

    /// True if evaluation needs no transcendental functions.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => true,
            Expr::Pi | Expr::Sin(_) | Expr::Cos(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Expr::Neg(a) => a.is_polynomial(),
        }
    }

    /// Upper bound on `|self|` over `[0, 1]²` by interval-free term bounds.
    pub fn abs_bound(&self) -> f64 {
        match self {
            Expr::Num(v) => v.abs(),
            Expr::Var(_) => 1.0,
            Expr::Pi => std::f64::consts::PI,
            Expr::Add(a, b) | Expr::Sub(a, b) => a.abs_bound() + b.abs_bound(),
            Expr::Mul(a, b) => a.abs_bound() * b.abs_bound(),
            Expr::Neg(a) => a.abs_bound(),
            Expr::Sin(a) => a.abs_bound().min(1.0),
            Expr::Cos(_) => 1.0,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::S) => write!(f, "s"),
            Expr::Var(Var::T) => write!(f, "t"),
            Expr::Pi => write!(f, "pi"),
            Expr::Add(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " + ")?;
                write_at(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " - ")?;
                write_at(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_at(f, a, 2)?;
                write!(f, "*")?;
                write_at(f, b, 3)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_at(f, a, 3)
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
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
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| Error::Syntax {
                    position: start,
                    message: format!("malformed number `{lit}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Syntax {
                        position: start,
                        message: format!("number `{lit}` out of range"),
                    });
                }
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    position: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a [Var],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "s" | "t" => {
                        let var = if name == "s" { Var::S } else { Var::T };
                        if self.vars.contains(&var) {
                            Ok(Expr::Var(var))
                        } else {
                            Err(Error::UnknownIdentifier { position: at, name })
                        }
                    }
                    "pi" => Ok(Expr::Pi),
                    "sin" | "cos" => {
                        self.expect(Tok::LParen, "`(` after function name")?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(if name == "sin" {
                            Expr::Sin(Box::new(arg))
                        } else {
                            Expr::Cos(Box::new(arg))
                        })
                    }
                    _ => Err(Error::UnknownIdentifier { position: at, name }),
                }
            }
            Some(_) => self.error("expected a number, variable, function or `(`"),
            None => self.error("unexpected end of expression"),
        }
    }
}

/// Parses an expression in the variables `s` and `t`.
pub fn parse_expression(text: &str) -> Result<Expr> {
    parse_expression_in(text, &[Var::S, Var::T])
}

/// Parses an expression that may only mention the given variables.
pub fn parse_expression_in(text: &str, vars: &[Var]) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
        vars,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
