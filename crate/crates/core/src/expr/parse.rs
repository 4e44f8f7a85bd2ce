//! Recursive-descent parser for the integrand DSL.
//!
//! Grammar (precedence: power > unary minus > mul/div > add/sub, all
//! left-associative):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ['^' ['-'] integer]
//! atom   := number | identifier | '(' expr ')'
//! ```
//!
//! Identifiers are `[a-zA-Z][a-zA-Z0-9]*`; `p` and `q` are reserved.
//! Exponents are integer literals; a negative exponent `x^-n` is rewritten
//! as `1/x^n` while parsing.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::Expr;

const MAX_EXPONENT: u32 = 999;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // optional exponent part; only consumed when well formed
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
                let v: f64 = lit.parse().map_err(|_| Error::SyntaxError {
                    position: start,
                    message: format!("invalid number literal `{lit}`"),
                })?;
                toks.push((Tok::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_owned()), start));
            }
            other => {
                return Err(Error::SyntaxError {
                    position: i,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<F> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    _marker: std::marker::PhantomData<F>,
}

impl<F: Real> Parser<F> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr<F>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = Expr::add(acc, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr<F>> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = Expr::mul(acc, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    acc = Expr::div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr<F>> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::neg(self.factor()?));
        }
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let (negative, n) = self.integer_exponent()?;
            return Ok(if negative {
                Expr::div(Expr::num(F::one()), Expr::pow(base, n))
            } else {
                Expr::pow(base, n)
            });
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<(bool, u32)> {
        let negative = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let position = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 0.0 && v <= MAX_EXPONENT as f64 => {
                Ok((negative, v as u32))
            }
            Some(Tok::Num(v)) if v.fract() == 0.0 && v > MAX_EXPONENT as f64 => {
                Err(Error::SyntaxError {
                    position,
                    message: format!("exponent exceeds the supported maximum {MAX_EXPONENT}"),
                })
            }
            _ => Err(Error::NonIntegerExponent { position }),
        }
    }

    fn atom(&mut self) -> Result<Expr<F>> {
        let position = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::num(F::of(v))),
            Some(Tok::Ident(name)) => Ok(Expr::sym(name)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let close = self.offset();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::SyntaxError {
                        position: close,
                        message: "expected `)`".to_owned(),
                    }),
                }
            }
            Some(_) => Err(Error::SyntaxError {
                position,
                message: "expected a number, identifier or `(`".to_owned(),
            }),
            None => Err(Error::SyntaxError {
                position,
                message: "unexpected end of input".to_owned(),
            }),
        }
    }
}

/// Parses the integrand DSL into an expression tree.
pub fn parse<F: Real>(text: &str) -> Result<Expr<F>> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        _marker: std::marker::PhantomData,
    };
    let e = parser.expr()?;
    if parser.pos < parser.toks.len() {
        return Err(Error::SyntaxError {
            position: parser.offset(),
            message: "unexpected trailing input".to_owned(),
        });
    }
    Ok(e)
}
