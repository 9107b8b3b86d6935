//! Parameter rules: small arithmetic expressions in the measurement count `m`,
//! e.g. `0.011*m`, `floor(0.04*m)`, `0.014+0.002*(m-64)/m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Expr {
    Num(f64),
    M,
    Neg(Box<Expr>),
    Bin(Box<Expr>, Op, Box<Expr>),
    Floor(Box<Expr>),
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

/// `floor` with a relative guard so that `0.29*100` gives 29, not 28.
pub fn guarded_floor(x: f64) -> f64 {
    (x + 1e-9 * x.abs().max(1.0)).floor()
}

impl Expr {
    fn eval(&self, m: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::M => m,
            Expr::Neg(e) => -e.eval(m),
            Expr::Floor(e) => guarded_floor(e.eval(m)),
            Expr::Bin(a, op, b) => {
                let (a, b) = (a.eval(m), b.eval(m));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                }
            }
        }
    }
}

/// A parsed rule; compares and serializes by its source text.
#[derive(Debug, Clone)]
pub struct Rule {
    source: String,
    expr: Expr,
}

impl Rule {
    pub fn parse(text: &str) -> Result<Self> {
        let source: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser {
            s: source.as_bytes(),
            pos: 0,
        };
        let expr = p.expr()?;
        if p.pos != p.s.len() {
            return Err(p.err("trailing characters"));
        }
        Ok(Rule { source, expr })
    }

    pub fn constant(v: f64) -> Self {
        Rule {
            source: format!("{v}"),
            expr: Expr::Num(v),
        }
    }

    pub fn eval(&self, m: usize) -> f64 {
        self.expr.eval(m as f64)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Rule::parse(s)
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Rule::constant(v)),
            Raw::Text(t) => Rule::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Config(format!(
            "bad rule `{}` at column {}: {what}",
            String::from_utf8_lossy(self.s),
            self.pos + 1
        ))
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                Op::Add
            } else if self.eat(b'-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = if self.eat(b'*') {
                Op::Mul
            } else if self.eat(b'/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor()?;
            lhs = Expr::Bin(Box::new(lhs), op, Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        if self.eat(b'(') {
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        if self.s[self.pos..].starts_with(b"floor(") {
            self.pos += "floor(".len();
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(Expr::Floor(Box::new(e)));
        }
        if self.eat(b'm') {
            return Ok(Expr::M);
        }
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9' | b'.' | b'e' | b'E')) {
            // allow a sign directly after an exponent marker
            if matches!(self.peek(), Some(b'e' | b'E'))
                && matches!(self.s.get(self.pos + 1), Some(b'-' | b'+'))
            {
                self.pos += 1;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number, `m`, `floor(` or `(`"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err("malformed number"))
    }
}
