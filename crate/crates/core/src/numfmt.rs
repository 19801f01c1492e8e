//! Float formatting for machine-readable output: every `f64` is written with
//! 17 significant digits so values round-trip exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::Result;

/// `x` in scientific notation with 17 significant digits; non-finite values
/// use Rust's spelling (`NaN`, `inf`, `-inf`).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-significant-digit floats, no trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let x = 0.1f64 + 0.2;
        let s = to_json(&[x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], x);
        assert_eq!(s, "[3.0000000000000004e-1]");
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_json(&[f64::INFINITY]).unwrap(), "[null]");
    }
}
