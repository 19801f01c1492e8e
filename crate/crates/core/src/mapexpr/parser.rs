//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' exponent)?
//! base   := number | 'i' | 'pi' | ident | ident '(' expr ')' | '(' expr ')'
//! exponent := ('+' | '-')? number
//! ```
//!
//! Unary minus binds looser than `^`, so `-z^2` is `-(z^2)`. An integral
//! exponent gives an integer power; any other number gives a principal-branch
//! real power.

use std::collections::BTreeSet;

use num_complex::Complex64 as C;

use super::{Func, Node};
use crate::error::ParseError;

pub(super) struct Parser<'a> {
    src: &'a str,
    pos: usize,
    pub(super) names: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str) -> Self {
        Self {
            src,
            pos: 0,
            names: BTreeSet::new(),
        }
    }

    pub(super) fn parse(&mut self) -> Result<Node, ParseError> {
        let node = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error("operator or end of input"));
        }
        Ok(node)
    }

    fn bytes(&self) -> &[u8] {
        self.src.as_bytes()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes().get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&mut self, expected: &str) -> ParseError {
        self.skip_ws();
        let found = match self.src[self.pos..].chars().next() {
            None => "end of input".to_string(),
            Some(c) => format!("'{c}'"),
        };
        ParseError {
            offset: self.pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let negative = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        self.skip_ws();
        let start = self.pos;
        let value = self
            .number()
            .ok_or_else(|| self.error("numeric exponent"))?;
        let text = &self.src[start..self.pos];
        let value = if negative { -value } else { value };
        let integral = !text.contains(['.', 'e', 'E']);
        if integral && value.abs() <= i32::MAX as f64 {
            Ok(Node::PowInt(Box::new(base), value as i32))
        } else {
            Ok(Node::PowReal(Box::new(base), value))
        }
    }

    fn base(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self
                .number()
                .map(|v| Node::Const(C::new(v, 0.0)))
                .ok_or_else(|| self.error("number")),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident_or_call(),
            _ => Err(self.error("number, identifier or '('")),
        }
    }

    fn ident_or_call(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.bytes()[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = &self.src[start..self.pos];
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or(ParseError {
                offset: start,
                expected: "function name (tan, sin, cos, exp, log, sqrt)".into(),
                found: format!("'{name}'"),
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("')'"));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        match name {
            "z" => Ok(Node::Var),
            "i" => Ok(Node::Const(C::new(0.0, 1.0))),
            "pi" => Ok(Node::Const(C::new(std::f64::consts::PI, 0.0))),
            _ if Func::from_name(name).is_some() => Err(self.error("'(' after function name")),
            _ => {
                self.names.insert(name.to_string());
                Ok(Node::Param(name.to_string()))
            }
        }
    }

    /// Decimal number with optional fraction and exponent.
    fn number(&mut self) -> Option<f64> {
        let b = self.bytes();
        let start = self.pos;
        let mut p = self.pos;
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < b.len() && b[*p].is_ascii_digit() {
                *p += 1;
            }
            *p > s
        };
        let mut any = digits(&mut p);
        if p < b.len() && b[p] == b'.' {
            p += 1;
            any |= digits(&mut p);
        }
        if !any {
            return None;
        }
        if p < b.len() && (b[p] == b'e' || b[p] == b'E') {
            let mut q = p + 1;
            if q < b.len() && (b[q] == b'+' || b[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) {
                p = q;
            }
        }
        let value = self.src[start..p].parse::<f64>().ok()?;
        self.pos = p;
        Some(value)
    }
}
