//! Analytic map expressions: parsing, evaluation and Taylor expansion.
//!
//! Expressions use infix arithmetic, `^` powers and the elementary functions
//! `tan, sin, cos, exp, log, sqrt`. The names `z`, `i` and `pi` are reserved;
//! every other identifier is a complex parameter that must be bound at parse
//! time. Multiplication is always explicit.

mod parser;
mod tape;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::series::UniSeries;
use tape::Tape;

/// Elementary functions accepted in call position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Tan,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "tan" => Func::Tan,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Tan => "tan",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var,
    Const(C),
    Param(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    PowInt(Box<Node>, i32),
    /// Principal branch, argument in `(-pi, pi]`.
    PowReal(Box<Node>, f64),
    Call(Func, Box<Node>),
}

/// A parsed map with all parameters bound. Immutable and `Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapExpr {
    root: Node,
    params: BTreeMap<String, C>,
    tape: Tape,
}

impl MapExpr {
    /// Parses `text`; every free identifier must appear in `params`.
    pub fn parse<I, K>(text: &str, params: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, C)>,
        K: Into<String>,
    {
        let mut p = parser::Parser::new(text);
        let root = p.parse()?;
        let params: BTreeMap<String, C> = params.into_iter().map(|(k, v)| (k.into(), v)).collect();
        let missing: Vec<String> = p
            .names
            .iter()
            .filter(|n| !params.contains_key(*n))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::UnboundParams(missing));
        }
        Ok(Self::from_node(root, params))
    }

    /// Builds an expression from a tree whose parameters are all in `params`.
    pub fn from_node(root: Node, params: BTreeMap<String, C>) -> Self {
        let tape = Tape::compile(&root, &|name| params[name]);
        Self { root, params, tape }
    }

    /// The identity map `z`.
    pub fn identity() -> Self {
        Self::from_node(Node::Var, BTreeMap::new())
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn params(&self) -> &BTreeMap<String, C> {
        &self.params
    }

    pub fn eval(&self, z: C) -> Result<C> {
        self.tape.eval(z)
    }

    /// Taylor coefficients about `z` of orders `0..out.len()`.
    pub fn jet(&self, z: C, out: &mut [C]) -> Result<()> {
        self.tape.jet(z, out)
    }

    /// Taylor series about `center` through `order`, propagated through the
    /// tree as truncated series.
    pub fn taylor(&self, center: C, order: usize) -> Result<UniSeries> {
        let mut out = vec![C::new(0.0, 0.0); order + 1];
        self.tape.jet(center, &mut out)?;
        Ok(UniSeries::from_vec_unchecked(out))
    }
}

impl fmt::Display for MapExpr {
    /// Fully parenthesized text that parses back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var => write!(f, "z"),
            Node::Const(c) => write_const(f, *c),
            Node::Param(name) => write!(f, "{name}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::PowInt(a, n) => write!(f, "({a}^{n})"),
            Node::PowReal(a, x) => write!(f, "({a}^{x:?})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C) -> fmt::Result {
    let positive = |x: f64| x.is_sign_positive() && x.is_finite();
    if c.im == 0.0 && c.im.is_sign_positive() && positive(c.re) {
        write!(f, "{:?}", c.re)
    } else if c == C::new(0.0, 1.0) && c.re.is_sign_positive() {
        write!(f, "i")
    } else {
        let re = if positive(c.re) {
            format!("{:?}", c.re)
        } else {
            format!("(-{:?})", -c.re)
        };
        if positive(c.im) {
            write!(f, "({re} + {:?}*i)", c.im)
        } else {
            write!(f, "({re} - {:?}*i)", -c.im)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MapExpr> {
        MapExpr::parse(text, std::iter::empty::<(String, C)>())
    }

    #[test]
    fn identity_evaluates_to_its_argument() {
        let e = parse("z").unwrap();
        let z = C::new(0.3, 0.1);
        assert_eq!(e.eval(z).unwrap(), z);
    }

    #[test]
    fn implicit_multiplication_is_rejected() {
        let err = parse("2z").unwrap_err();
        match err {
            Error::Parse(p) => assert_eq!(p.offset, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbound_names_are_listed() {
        let err = parse("a*z + b").unwrap_err();
        assert_eq!(err, Error::UnboundParams(vec!["a".into(), "b".into()]));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-z^2").unwrap();
        assert_eq!(e.eval(C::new(2.0, 0.0)).unwrap(), C::new(-4.0, 0.0));
    }

    #[test]
    fn tan_pole_is_a_domain_error() {
        let e = parse("tan(z)").unwrap();
        let err = e
            .eval(C::new(std::f64::consts::FRAC_PI_2, 0.0))
            .unwrap_err();
        assert!(matches!(err, Error::Singular { func: "tan", .. }));
    }

    #[test]
    fn display_round_trips_tree() {
        let e = MapExpr::parse(
            "a*(tan(i*z) + tan(i*z/2))^-2 - sqrt(1 + z)^0.5 + 1e-3",
            [("a", C::new(0.6, 0.0))],
        )
        .unwrap();
        let again = MapExpr::parse(&e.to_string(), e.params().clone()).unwrap();
        assert_eq!(again.root(), e.root());
    }
}
