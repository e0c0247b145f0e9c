//! Integer sequence expressions in `n`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := power ('*' power)*
//! power  := atom ('^' uint)*
//! atom   := uint | 'n' | '(' expr ')'
//! ```
//!
//! Exponents are nonnegative integer literals; whitespace is ignored.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqExpr {
    Lit(i128),
    N,
    Add(Box<SeqExpr>, Box<SeqExpr>),
    Sub(Box<SeqExpr>, Box<SeqExpr>),
    Mul(Box<SeqExpr>, Box<SeqExpr>),
    Pow(Box<SeqExpr>, u32),
}

impl SeqExpr {
    /// Value at `n`, failing on `i128` overflow.
    pub fn eval(&self, n: i128) -> Result<i128> {
        let overflow = || Error::Overflow(format!("`{self}` at n = {n}"));
        Ok(match self {
            SeqExpr::Lit(v) => *v,
            SeqExpr::N => n,
            SeqExpr::Add(a, b) => a.eval(n)?.checked_add(b.eval(n)?).ok_or_else(overflow)?,
            SeqExpr::Sub(a, b) => a.eval(n)?.checked_sub(b.eval(n)?).ok_or_else(overflow)?,
            SeqExpr::Mul(a, b) => a.eval(n)?.checked_mul(b.eval(n)?).ok_or_else(overflow)?,
            SeqExpr::Pow(a, e) => a.eval(n)?.checked_pow(*e).ok_or_else(overflow)?,
        })
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Lit(v) => write!(f, "{v}"),
            SeqExpr::N => write!(f, "n"),
            SeqExpr::Add(a, b) => write!(f, "({a}+{b})"),
            SeqExpr::Sub(a, b) => write!(f, "({a}-{b})"),
            SeqExpr::Mul(a, b) => write!(f, "({a}*{b})"),
            SeqExpr::Pow(a, e) => write!(f, "({a}^{e})"),
        }
    }
}

impl FromStr for SeqExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_seq(s)
    }
}

pub fn parse_seq(text: &str) -> Result<SeqExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["'+'", "'-'", "'*'", "'^'", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, expected: &[&str]) -> Error {
        Error::Parse {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
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

    fn expr(&mut self) -> Result<SeqExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = SeqExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = SeqExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<SeqExpr> {
        let mut lhs = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = SeqExpr::Mul(Box::new(lhs), Box::new(self.power()?));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<SeqExpr> {
        let mut base = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            let start = self.pos;
            let e = self
                .uint()
                .ok_or_else(|| self.error(&["nonnegative integer exponent"]))?;
            let e = u32::try_from(e).map_err(|_| Error::Parse {
                position: start,
                expected: vec!["exponent below 2^32".into()],
            })?;
            base = SeqExpr::Pow(Box::new(base), e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SeqExpr> {
        match self.peek() {
            Some(b'n') => {
                self.pos += 1;
                Ok(SeqExpr::N)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error(&["')'"]));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let v = self.uint().ok_or_else(|| Error::Parse {
                    position: start,
                    expected: vec!["integer literal below 2^127".into()],
                })?;
                Ok(SeqExpr::Lit(v))
            }
            _ => Err(self.error(&["integer literal", "'n'", "'('"])),
        }
    }

    fn uint(&mut self) -> Option<i128> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }
}
