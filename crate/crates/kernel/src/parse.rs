//! Expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' exponent)?        right-associative
//! exponent := '-'? integer | '(' '-'? integer ')' | power
//! atom   := number | symbol | '(' expr ')'
//! number := digits ('.' digits)?
//! ```
//!
//! Exponents must reduce to integers. `a^b^c` is `a^(b^c)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::expr::{ArithError, Expr};
use crate::workspace::Workspace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected `{0}`")]
    Expected(char),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent must be an integer")]
    NonIntegerExponent,
    #[error("exponent out of range")]
    ExponentRange,
    #[error("trailing input")]
    Trailing,
}

/// Parse failure with a byte offset into the input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: usize,
}

/// Syntax tree; positions point at the start of each node.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(BigRational),
    Sym(String, usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, i32),
}

impl Ast {
    /// Value of a symbol-free subtree.
    fn constant(&self) -> Option<BigRational> {
        Some(match self {
            Ast::Num(r) => r.clone(),
            Ast::Sym(..) => return None,
            Ast::Neg(a) => -a.constant()?,
            Ast::Add(a, b) => a.constant()? + b.constant()?,
            Ast::Sub(a, b) => a.constant()? - b.constant()?,
            Ast::Mul(a, b) => a.constant()? * b.constant()?,
            Ast::Div(a, b, _) => {
                let d = b.constant()?;
                if d.is_zero() {
                    return None;
                }
                a.constant()? / d
            }
            Ast::Pow(a, e) => {
                let v = a.constant()?;
                if v.is_zero() && *e < 0 {
                    return None;
                }
                num_traits::pow::Pow::pow(v, *e)
            }
        })
    }

    /// Symbol names in order of first occurrence.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Ast::Num(_) => {}
            Ast::Sym(s, _) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Ast::Neg(a) | Ast::Pow(a, _) => a.collect_symbols(out),
            Ast::Add(a, b) | Ast::Sub(a, b) | Ast::Mul(a, b) | Ast::Div(a, b, _) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Evaluates into any target algebra. `sym` resolves symbol names.
    pub fn eval<T: Algebra>(
        &self,
        sym: &mut dyn FnMut(&str) -> Option<T>,
    ) -> Result<T, ParseError> {
        Ok(match self {
            Ast::Num(r) => T::from_rational(r),
            Ast::Sym(s, pos) => sym(s).ok_or(ParseError {
                kind: ParseErrorKind::UnknownSymbol(s.clone()),
                pos: *pos,
            })?,
            Ast::Neg(a) => a.eval(sym)?.neg(),
            Ast::Add(a, b) => a.eval(sym)?.add(&b.eval(sym)?),
            Ast::Sub(a, b) => a.eval(sym)?.sub(&b.eval(sym)?),
            Ast::Mul(a, b) => a.eval(sym)?.mul(&b.eval(sym)?),
            Ast::Div(a, b, pos) => {
                let err = ParseError {
                    kind: ParseErrorKind::DivisionByZero,
                    pos: *pos,
                };
                let d = b.eval(sym)?;
                a.eval(sym)?.div(&d).map_err(|_| err)?
            }
            Ast::Pow(a, e) => a.eval(sym)?.pow(*e).map_err(|_| ParseError {
                kind: ParseErrorKind::DivisionByZero,
                pos: 0,
            })?,
        })
    }
}

/// Target of [`Ast::eval`].
pub trait Algebra: Sized {
    fn from_rational(r: &BigRational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self, ArithError>;
    fn pow(&self, e: i32) -> Result<Self, ArithError>;
}

impl Algebra for Expr {
    fn from_rational(r: &BigRational) -> Expr {
        Expr::from_rational(r)
    }
    fn add(&self, o: &Expr) -> Expr {
        self + o
    }
    fn sub(&self, o: &Expr) -> Expr {
        self - o
    }
    fn mul(&self, o: &Expr) -> Expr {
        self * o
    }
    fn neg(&self) -> Expr {
        -self
    }
    fn div(&self, o: &Expr) -> Result<Expr, ArithError> {
        self.checked_div(o)
    }
    fn pow(&self, e: i32) -> Result<Expr, ArithError> {
        Expr::pow(self, e)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            pos: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> ParseError {
        match self.src.get(self.pos) {
            Some(&c) => self.err(ParseErrorKind::UnexpectedChar(c as char)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    let at = self.pos;
                    self.pos += 1;
                    let rhs = self.unary()?;
                    if rhs.constant().is_some_and(|c| c.is_zero()) {
                        return Err(ParseError {
                            kind: ParseErrorKind::DivisionByZero,
                            pos: at,
                        });
                    }
                    lhs = Ast::Div(Box::new(lhs), Box::new(rhs), at);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let at = {
            self.skip_ws();
            self.pos
        };
        // Right-associative: the exponent is itself a (signed) power.
        let exp = if self.peek() == Some(b'-') {
            self.pos += 1;
            Ast::Neg(Box::new(self.power()?))
        } else {
            self.power()?
        };
        let value = exp.constant().ok_or(ParseError {
            kind: ParseErrorKind::NonIntegerExponent,
            pos: at,
        })?;
        if !value.is_integer() {
            return Err(ParseError {
                kind: ParseErrorKind::NonIntegerExponent,
                pos: at,
            });
        }
        let e = value.to_integer().to_i32().ok_or(ParseError {
            kind: ParseErrorKind::ExponentRange,
            pos: at,
        })?;
        if e < 0 && base.constant().is_some_and(|c| c.is_zero()) {
            return Err(ParseError {
                kind: ParseErrorKind::DivisionByZero,
                pos: at,
            });
        }
        Ok(Ast::Pow(Box::new(base), e))
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err(ParseErrorKind::Expected(')')));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Ast::Num(self.number())),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Ok(Ast::Sym(name.to_string(), start))
            }
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> BigRational {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int: BigInt = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .unwrap();
        let mut value = BigRational::from_integer(int);
        if self.pos + 1 < self.src.len()
            && self.src[self.pos] == b'.'
            && self.src[self.pos + 1].is_ascii_digit()
        {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[fs..self.pos]).unwrap();
            let frac: BigInt = digits.parse().unwrap();
            let scale = num_traits::pow(BigInt::from(10), digits.len());
            value += BigRational::new(frac, scale);
        }
        value
    }
}

/// Parses text into a syntax tree.
pub fn parse_ast(text: &str) -> Result<Ast, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return Err(p.err(ParseErrorKind::UnexpectedEnd));
    }
    let ast = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err(ParseErrorKind::Trailing));
    }
    Ok(ast)
}

/// Parses text into a canonical [`Expr`] over the workspace symbols.
pub fn parse(text: &str, ws: &Workspace) -> Result<Expr, ParseError> {
    let ast = parse_ast(text)?;
    ast.eval(&mut |s: &str| ws.lookup(s).map(Expr::var))
}

/// Parses a rational literal such as `-3/4` or `2`.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseError> {
    let ast = parse_ast(text)?;
    ast.constant().ok_or(ParseError {
        kind: ParseErrorKind::UnexpectedChar(text.chars().find(|c| c.is_alphabetic()).unwrap_or('?')),
        pos: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> Workspace {
        Workspace::with_symbols(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn precedence_and_power() {
        let w = ws();
        let a = parse("2^3^2", &w).unwrap();
        assert_eq!(a, Expr::from_int(512));
        let b = parse("-x^2", &w).unwrap();
        assert_eq!(b, -(&w.sym("x") * &w.sym("x")));
        let c = parse("x^-1 * x", &w).unwrap();
        assert!(c.is_one());
        assert_eq!(parse("1.5", &w).unwrap(), parse("3/2", &w).unwrap());
        assert!(parse("0", &w).unwrap().is_zero());
        assert!(parse("(x)", &w).unwrap() == w.sym("x"));
    }

    #[test]
    fn errors_carry_positions() {
        let w = ws();
        let e = parse("x + w", &w).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownSymbol("w".into()));
        assert_eq!(e.pos, 4);
        let e = parse("x / (1 - 1)", &w).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DivisionByZero);
        assert_eq!(e.pos, 2);
        let e = parse("x + * y", &w).unwrap_err();
        assert_eq!(e.pos, 4);
        assert_eq!(parse("x^(1/2)", &w).unwrap_err().kind, ParseErrorKind::NonIntegerExponent);
        assert_eq!(parse("(x", &w).unwrap_err().kind, ParseErrorKind::Expected(')'));
        assert_eq!(parse("x y", &w).unwrap_err().kind, ParseErrorKind::Trailing);
        assert_eq!(parse("x/(y-y)", &w).unwrap_err().kind, ParseErrorKind::DivisionByZero);
    }
}
