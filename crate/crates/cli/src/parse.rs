//! Value grammars for list flags: exponents (`2`, `4/3`, `inf`) and integer
//! ranges (`2..8` inclusive, or comma lists).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("cannot read {0:?} as a number")]
    Number(String),
    #[error("empty list")]
    Empty,
    #[error("range {0:?} is decreasing")]
    Decreasing(String),
}

/// `2`, `1.5`, `4/3`, `inf`.
pub fn exponent(s: &str) -> Result<f64, ParseError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s == "∞" {
        return Ok(f64::INFINITY);
    }
    let bad = || ParseError::Number(s.to_string());
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(bad());
            }
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

pub fn exponent_list(s: &str) -> Result<Vec<f64>, ParseError> {
    let v: Vec<f64> = s.split(',').filter(|p| !p.trim().is_empty()).map(exponent).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(v)
}

/// `a..b` (both ends included) or `a,b,c`.
pub fn int_list<T>(s: &str) -> Result<Vec<T>, ParseError>
where
    T: std::str::FromStr + Copy + Into<i64> + TryFrom<i64>,
{
    let one = |p: &str| p.trim().parse::<T>().map_err(|_| ParseError::Number(p.trim().to_string()));
    let v: Vec<T> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (one(a)?.into(), one(b.trim_start_matches('='))?.into());
        if b < a {
            return Err(ParseError::Decreasing(s.to_string()));
        }
        (a..=b).filter_map(|k| T::try_from(k).ok()).collect()
    } else {
        s.split(',').filter(|p| !p.trim().is_empty()).map(one).collect::<Result<_, _>>()?
    };
    if v.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(exponent("4/3").unwrap(), 4.0 / 3.0);
        assert_eq!(exponent(" inf ").unwrap(), f64::INFINITY);
        assert_eq!(exponent_list("2,4/3").unwrap(), vec![2.0, 4.0 / 3.0]);
        assert!(exponent("1/0").is_err());
        assert!(exponent_list("").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(int_list::<u32>("2..8").unwrap(), vec![2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(int_list::<u32>("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(int_list::<i64>("1,4,16").unwrap(), vec![1, 4, 16]);
        assert_eq!(int_list::<i64>("-2..1").unwrap(), vec![-2, -1, 0, 1]);
        assert!(int_list::<u32>("8..2").is_err());
        assert!(int_list::<u32>("x").is_err());
    }
}
