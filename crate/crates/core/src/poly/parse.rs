//! Parser for polynomial expressions over named variables.
//!
//! Grammar (no implicit multiplication):
//!
//! ```text
//! expr    := [ '+' | '-' ] term { ('+' | '-') term }
//! term    := factor { '*' factor }
//! factor  := primary [ '^' integer ]
//! primary := integer [ '/' integer ] | identifier | '(' expr ')'
//! ```

use super::{Poly, Rational};
use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt;

/// Syntax or semantic error with a byte position into the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at position {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                out.push((start, Tok::Num(n)));
            }
            _ if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                // '-' may arrive as a multi-byte minus sign
                if text[i..].starts_with('\u{2212}') {
                    out.push((i, Tok::Minus));
                    i += '\u{2212}'.len_utf8();
                } else {
                    return Err(ParseError {
                        pos: i,
                        msg: format!("unexpected character '{}'", c),
                    });
                }
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [String],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let nv = self.vars.len();
        let mut negate = false;
        if matches!(self.peek(), Some(Tok::Plus) | Some(Tok::Minus)) {
            negate = matches!(self.bump(), Some(Tok::Minus));
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        debug_assert_eq!(acc.nvars(), nv);
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let mut negate = false;
        while matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            negate = !negate;
        }
        let base = self.primary()?;
        let p = if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            if matches!(self.peek(), Some(Tok::Minus)) {
                return self.err("negative exponent");
            }
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n
                        .try_into()
                        .map_err(|_| ParseError {
                            pos: self.here(),
                            msg: "exponent too large".into(),
                        })?;
                    base.pow(e)
                }
                _ => return self.err("expected integer exponent after '^'"),
            }
        } else {
            base
        };
        Ok(if negate { p.neg() } else { p })
    }

    fn primary(&mut self) -> Result<Poly, ParseError> {
        let nv = self.vars.len();
        let start = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => {
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Num(d)) => {
                            if d.is_zero() {
                                return self.err("zero denominator");
                            }
                            Ok(Poly::constant(nv, Rational::new(n, d)))
                        }
                        _ => self.err("expected integer denominator after '/'"),
                    }
                } else {
                    Ok(Poly::constant(nv, Rational::from_integer(n)))
                }
            }
            Some(Tok::Ident(name)) => match self.vars.iter().position(|v| *v == name) {
                Some(idx) => Ok(Poly::variable(nv, idx)),
                None => Err(ParseError {
                    pos: self.toks[self.pos - 1].0,
                    msg: format!("unknown identifier '{}'", name),
                }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => self.err("expected ')'"),
                }
            }
            Some(t) => Err(ParseError {
                pos: start,
                msg: format!("unexpected token {:?}", t),
            }),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse an expression into an expanded sparse polynomial over the named
/// variables. `/` is only accepted between integer literals; implicit
/// multiplication is a syntax error.
pub fn parse_poly(text: &str, variable_names: &[String]) -> Result<Poly, ParseError> {
    for (i, v) in variable_names.iter().enumerate() {
        if variable_names[..i].contains(v) {
            return Err(ParseError {
                pos: 0,
                msg: format!("duplicate variable name '{}'", v),
            });
        }
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars: variable_names,
        end: text.len(),
    };
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(poly)
}
