//! The curve descriptor mini-grammar.
//!
//! ```text
//! poly: 1*t^2 + 0.5*t^3      integer exponents >= 2, no constant or linear term
//! pow: 1.5                   |t|^a
//! pow: 0.5 odd               sign(t)|t|^a
//! powlog: a=2 b=1            |t|^a |log|t||^b
//! ```
//!
//! A bare polynomial such as `t^2 + t^3` is read as `poly:`.

use std::fmt;
use std::str::FromStr;

use crate::error::{LabError, Result};

/// Help text for the descriptor grammar.
pub const GRAMMAR: &str = "\
curve descriptors:
  poly: 1*t^2 + 0.5*t^3    integer exponents >= 2, no constant or linear term
  pow: 1.5                 |t|^a
  pow: 0.5 odd             sign(t)|t|^a
  powlog: a=2 b=1          |t|^a |log|t||^b
  t^2 + t^3                a bare polynomial is read as poly:";

#[derive(Debug, Clone, PartialEq)]
pub enum CurveDescriptor {
    /// `Σ c_k t^k` with `(c_k, k)` sorted by exponent, `k >= 2`.
    Poly(Vec<(f64, u32)>),
    /// `|t|^alpha`, or `sign(t)|t|^alpha` when `odd`.
    Pow { alpha: f64, odd: bool },
    /// `|t|^alpha |log|t||^beta`.
    PowLog { alpha: f64, beta: f64 },
}

fn syntax(input: &str, reason: impl Into<String>) -> LabError {
    LabError::CurveSyntax {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn parse_number(input: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| syntax(input, format!("`{}` is not a number", text.trim())))?;
    if !v.is_finite() {
        return Err(syntax(input, "non-finite number"));
    }
    Ok(v)
}

fn parse_poly(input: &str, body: &str) -> Result<CurveDescriptor> {
    let compact: String = body.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(syntax(input, "empty polynomial"));
    }
    // Split into signed terms.
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = compact.as_bytes();
    for i in 1..bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^' && bytes[i - 1] != b'e' && bytes[i - 1] != b'E' {
            terms.push(&compact[start..i]);
            start = i;
        }
    }
    terms.push(&compact[start..]);

    let mut coeffs: Vec<(f64, u32)> = Vec::new();
    for term in terms {
        let (sign, rest) = match term.as_bytes().first() {
            Some(b'-') => (-1.0, &term[1..]),
            Some(b'+') => (1.0, &term[1..]),
            _ => (1.0, term),
        };
        let Some(tpos) = rest.find('t') else {
            return Err(syntax(input, format!("constant term `{term}` is not allowed")));
        };
        let coef_text = rest[..tpos].trim_end_matches('*');
        let coef = if coef_text.is_empty() { 1.0 } else { parse_number(input, coef_text)? };
        let tail = &rest[tpos + 1..];
        let exponent: u32 = if tail.is_empty() {
            1
        } else if let Some(e) = tail.strip_prefix('^') {
            let e = e.trim_start_matches('{').trim_end_matches('}');
            e.parse().map_err(|_| syntax(input, format!("exponent `{e}` must be a non-negative integer")))?
        } else {
            return Err(syntax(input, format!("unexpected `{tail}` after t")));
        };
        match exponent {
            0 => return Err(syntax(input, "constant term is not allowed")),
            1 => return Err(LabError::NotNonFlat(format!("`{input}` has a linear term"))),
            _ => {}
        }
        match coeffs.iter_mut().find(|(_, k)| *k == exponent) {
            Some(entry) => entry.0 += sign * coef,
            None => coeffs.push((sign * coef, exponent)),
        }
    }
    coeffs.retain(|(c, _)| *c != 0.0);
    if coeffs.is_empty() {
        return Err(LabError::NotNonFlat(format!("`{input}` is identically zero")));
    }
    coeffs.sort_by_key(|(_, k)| *k);
    Ok(CurveDescriptor::Poly(coeffs))
}

fn check_exponent(alpha: f64) -> Result<()> {
    if alpha == -1.0 || alpha == 0.0 || alpha == 1.0 {
        return Err(LabError::InvalidExponent(alpha));
    }
    Ok(())
}

fn parse_pow(input: &str, body: &str) -> Result<CurveDescriptor> {
    let mut words = body.split_whitespace();
    let alpha = parse_number(input, words.next().ok_or_else(|| syntax(input, "missing exponent"))?)?;
    let odd = match words.next() {
        None | Some("even") => false,
        Some("odd") | Some("sign") => true,
        Some(other) => return Err(syntax(input, format!("unknown variant `{other}`"))),
    };
    if words.next().is_some() {
        return Err(syntax(input, "trailing input"));
    }
    check_exponent(alpha)?;
    if alpha <= 0.0 {
        return Err(LabError::InvalidExponent(alpha));
    }
    Ok(CurveDescriptor::Pow { alpha, odd })
}

fn parse_powlog(input: &str, body: &str) -> Result<CurveDescriptor> {
    let mut alpha = None;
    let mut beta = None;
    for word in body.split_whitespace() {
        let (key, value) = word
            .split_once('=')
            .ok_or_else(|| syntax(input, format!("expected key=value, got `{word}`")))?;
        let v = parse_number(input, value)?;
        match key {
            "a" | "alpha" => alpha = Some(v),
            "b" | "beta" => beta = Some(v),
            _ => return Err(syntax(input, format!("unknown key `{key}`"))),
        }
    }
    let alpha = alpha.ok_or_else(|| syntax(input, "missing a="))?;
    let beta = beta.unwrap_or(0.0);
    check_exponent(alpha)?;
    Ok(CurveDescriptor::PowLog { alpha, beta })
}

impl FromStr for CurveDescriptor {
    type Err = LabError;

    fn from_str(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        match trimmed.split_once(':') {
            Some((kind, body)) => match kind.trim() {
                "poly" => parse_poly(input, body),
                "pow" => parse_pow(input, body),
                "powlog" => parse_powlog(input, body),
                other => Err(syntax(input, format!("unknown curve family `{other}`"))),
            },
            None => parse_poly(input, trimmed),
        }
    }
}

impl fmt::Display for CurveDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveDescriptor::Poly(terms) => {
                write!(f, "poly: ")?;
                for (i, (c, k)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{c}*t^{k}")?;
                }
                Ok(())
            }
            CurveDescriptor::Pow { alpha, odd } => {
                write!(f, "pow: {alpha}")?;
                if *odd {
                    write!(f, " odd")?;
                }
                Ok(())
            }
            CurveDescriptor::PowLog { alpha, beta } => write!(f, "powlog: a={alpha} b={beta}"),
        }
    }
}
