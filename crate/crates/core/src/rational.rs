//! Exact rational scalars and their parsing/formatting conventions.
//!
//! Every quantity the lattice core touches is a [`Rat`]; floats only appear
//! in sampling probes and the adaptive quadrature fallback.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `n/d`, reduced. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `"p"`, `"p/q"`, with optional sign and surrounding whitespace.
pub fn parse_rat(s: &str) -> Result<Rat, RationalParseError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let mut parts = t.splitn(2, '/');
    let num_part = parts.next().unwrap().trim();
    let num: BigInt = num_part
        .parse()
        .map_err(|_| RationalParseError::Invalid(s.to_string()))?;
    match parts.next() {
        None => Ok(Rat::from_integer(num)),
        Some(den_part) => {
            let den: BigInt = den_part
                .trim()
                .parse()
                .map_err(|_| RationalParseError::Invalid(s.to_string()))?;
            if den.is_zero() {
                return Err(RationalParseError::ZeroDenominator(s.to_string()));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Canonical `"p"` / `"p/q"` form.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion for report decimals and quadrature fallback.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with 12 significant digits, computed from the exact value.
pub fn decimal_12(r: &Rat) -> String {
    const SIG: i64 = 12;
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // decimal exponent e with 10^e <= a < 10^(e+1)
    let approx = rat_to_f64(&a);
    let mut e = approx.log10().floor() as i64;
    let ten = BigInt::from(10);
    let pow = |k: i64| -> Rat {
        if k >= 0 {
            Rat::from_integer(ten.pow(k as u32))
        } else {
            Rat::new(BigInt::from(1), ten.pow((-k) as u32))
        }
    };
    while a < pow(e) {
        e -= 1;
    }
    while a >= pow(e + 1) {
        e += 1;
    }
    // round a / 10^(e+1-SIG) to nearest integer: SIG digits
    let scaled = &a / pow(e + 1 - SIG);
    let mut digits = scaled.round().to_integer();
    // rounding may carry over to SIG+1 digits
    if digits >= ten.pow(SIG as u32) {
        digits /= &ten;
        e += 1;
    }
    let ds = digits.to_string();
    debug_assert_eq!(ds.len() as i64, SIG);
    let mantissa = format!("{}.{}", &ds[..1], &ds[1..]);
    let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
    let sign = if neg { "-" } else { "" };
    if (-4..=14).contains(&e) {
        // plain notation
        let mut out = String::new();
        if e >= 0 {
            let e = e as usize;
            if ds.len() > e + 1 {
                out.push_str(&ds[..=e]);
                let frac = ds[e + 1..].trim_end_matches('0');
                if !frac.is_empty() {
                    out.push('.');
                    out.push_str(frac);
                }
            } else {
                out.push_str(&ds);
                out.push_str(&"0".repeat(e + 1 - ds.len()));
            }
        } else {
            out.push_str("0.");
            out.push_str(&"0".repeat((-e - 1) as usize));
            out.push_str(ds.trim_end_matches('0'));
        }
        format!("{sign}{out}")
    } else {
        format!("{sign}{mantissa}e{e}")
    }
}

/// Exact rational equal to the IEEE value of `x`. Panics on non-finite input.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

/// `true` when `r` is a square of a rational; returns the nonnegative root.
pub fn rat_sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(Rat::zero());
    }
    let (n, d) = (r.numer(), r.denom());
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Rat::new(sn, sd))
    } else {
        None
    }
}

/// Sign as -1, 0, 1.
pub fn sign(r: &Rat) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3", "-3", "3/2", "-7/4", "0"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(fmt_rat(&r), s);
        }
        assert_eq!(parse_rat(" 6/4 ").unwrap(), rat(3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_12(&rat_int(0)), "0");
        assert_eq!(decimal_12(&rat_int(4)), "4");
        assert_eq!(decimal_12(&rat(3, 2)), "1.5");
        assert_eq!(decimal_12(&rat(-1, 3)), "-0.333333333333");
        assert_eq!(decimal_12(&rat(1, 8)), "0.125");
        assert_eq!(decimal_12(&rat(999_999_999_999, 1)), "999999999999");
    }

    #[test]
    fn exact_sqrt_detection() {
        assert_eq!(rat_sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rat_sqrt_exact(&rat(2, 1)), None);
        assert_eq!(rat_sqrt_exact(&rat(-1, 1)), None);
        assert_eq!(rat_sqrt_exact(&Rat::zero()), Some(Rat::zero()));
    }
}
