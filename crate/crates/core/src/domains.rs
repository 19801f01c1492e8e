//! Named example domains: `disc`, `strip`, `tan:A` and `hex:DELTA`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::greens::{estimate_inradius, ConformalMap, Domain};
use crate::mapexpr::MapExpr;
use crate::series::UniSeries;

/// Expression of the strip map onto the disc; the strip is `|Im z| < 1`.
pub const STRIP_MAP: &str = "tan(i*pi*z/4)";
/// Expression of the two-parameter tan family, parameter `a`.
pub const TAN_FAMILY_MAP: &str = "a*(tan(i*z)+tan(i*z/2))";
/// Series order used for the hexagonal family's reverted map.
pub const HEX_ORDER: usize = 24;

/// A named domain with a known conformal map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Disc,
    Strip,
    /// `a (tan(iz) + tan(iz/2))`; the origin is stable for `a > 1/sqrt(3)`.
    Tan(f64),
    /// Biconvex hexagons whose inverse map has derivative
    /// `(1 - w^2)^(2 delta - 1) (1 + w^2 + w^4)^(-delta)`.
    Hex(f64),
}

impl Builtin {
    pub fn domain(&self) -> Result<Domain> {
        match *self {
            Builtin::Disc => Domain::new(ConformalMap::Expr(MapExpr::identity()), 1.0),
            Builtin::Strip => Domain::new(
                ConformalMap::Expr(MapExpr::parse(STRIP_MAP, no_params())?),
                1.0,
            ),
            Builtin::Tan(a) => {
                let map =
                    ConformalMap::Expr(MapExpr::parse(TAN_FAMILY_MAP, [("a", C::new(a, 0.0))])?);
                let r = estimate_inradius(&map)?;
                Domain::new(map, r)
            }
            // Koebe's quarter theorem: the image of the unit disc under the
            // normalized inverse map contains the disc of radius 1/4.
            Builtin::Hex(delta) => {
                Domain::new(ConformalMap::Series(hex_map(delta, HEX_ORDER)?), 0.25)
            }
        }
    }
}

fn no_params() -> [(&'static str, C); 0] {
    []
}

/// Taylor series of the hexagonal map, by reverting the integrated inverse
/// derivative. The unimodular factor `(-1)^(2 delta - 1)` is dropped: it is
/// a rotation of the disc and leaves the classification unchanged.
pub fn hex_map(delta: f64, order: usize) -> Result<UniSeries> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDomain(format!(
            "hexagon parameter must lie in (0, 1), got {delta}"
        )));
    }
    let w = UniSeries::identity(order);
    let w2 = &w * &w;
    let one = UniSeries::constant(C::new(1.0, 0.0), order);
    let edge = (&one - &w2).pow_real(2.0 * delta - 1.0)?;
    let corners = (&(&one + &w2) + &(&w2 * &w2)).pow_real(-delta)?;
    let inverse = (&edge * &corners).truncate(order - 1).antiderivative();
    inverse.revert()
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| {
                Error::InvalidArgument(format!("{name} needs a parameter, e.g. {name}:1"))
            })?;
            a.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad parameter {a:?} for {name}")))
        };
        match (name, arg) {
            ("disc", None) => Ok(Builtin::Disc),
            ("strip", None) => Ok(Builtin::Strip),
            ("tan", a) => Ok(Builtin::Tan(number(a)?)),
            ("hex", a) => Ok(Builtin::Hex(number(a)?)),
            _ => Err(Error::InvalidArgument(format!(
                "unknown domain {s:?}; expected disc, strip, tan:A or hex:DELTA"
            ))),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Disc => write!(f, "disc"),
            Builtin::Strip => write!(f, "strip"),
            Builtin::Tan(a) => write!(f, "tan:{a}"),
            Builtin::Hex(d) => write!(f, "hex:{d}"),
        }
    }
}
