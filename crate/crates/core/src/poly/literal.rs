//! Textual polynomial literals for the CLI and config files.
//!
//! A literal is a comma-separated list of complex coefficients in ascending
//! degree order. Each coefficient is `a`, `bi`, `a+bi`, or `a-bi`, with the
//! usual float syntax for `a` and `b` (scientific notation allowed); a bare
//! `i` means `1i`. The Unicode minus sign U+2212 is accepted as `-`.

use num_complex::Complex64;

use super::Polynomial;
use crate::error::{Error, Result};

pub(super) fn parse_polynomial(s: &str) -> Result<Polynomial> {
    let tokens: Vec<&str> = s.split(',').collect();
    let coeffs = tokens
        .iter()
        .map(|t| parse_complex(t))
        .collect::<Result<Vec<Complex64>>>()
        .map_err(|e| Error::Parse(format!("polynomial literal {s:?}: {e}")))?;
    Polynomial::new(coeffs)
}

/// Parse one complex-number token (see the module docs for the grammar).
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let trimmed = token.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty coefficient".into()));
    }
    if trimmed.chars().any(char::is_whitespace) {
        return Err(Error::Parse(format!("whitespace inside coefficient {token:?}")));
    }
    let cleaned: String = trimmed
        .chars()
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    // Locate a '+'/'-' separating real and imaginary parts: not at the start
    // and not an exponent sign.
    let bytes = cleaned.as_bytes();
    let mut split = None;
    for idx in 1..bytes.len() {
        let b = bytes[idx];
        if (b == b'+' || b == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
            split = Some(idx);
            break;
        }
    }
    match split {
        Some(idx) => {
            let (re_str, im_str) = cleaned.split_at(idx);
            let im_core = im_str
                .strip_suffix('i')
                .ok_or_else(|| Error::Parse(format!("expected imaginary part in {token:?}")))?;
            Ok(Complex64::new(parse_real(re_str)?, parse_signed_unit(im_core)?))
        }
        None => match cleaned.strip_suffix('i') {
            Some(core) => Ok(Complex64::new(0.0, parse_signed_unit(core)?)),
            None => Ok(Complex64::new(parse_real(&cleaned)?, 0.0)),
        },
    }
}

/// An imaginary-part body: empty or a bare sign means a unit coefficient.
fn parse_signed_unit(core: &str) -> Result<f64> {
    match core {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => parse_real(core),
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite number {s:?}")));
    }
    Ok(v)
}

/// Format a complex number in the literal grammar so that it re-parses to
/// the same bits (f64 `Display` round-trips).
pub fn format_complex(c: Complex64) -> String {
    // Normalize negative zeros so formatting is canonical.
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}
