//! Class expression parsing: signed rational combinations of basis labels,
//! e.g. `2H-E`, `3/2H+E1-2E2`, `1/2C0+3F`. Whitespace is ignored.

use num_traits::Zero;
use std::fmt;
use volcone_core::{parse_rat, DivisorClass, Rat, SurfaceGeometry};

#[derive(Debug, PartialEq, Eq)]
pub struct ClassParseError {
    /// Byte position in the whitespace-stripped expression.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ClassParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at position {})", self.message, self.position)
    }
}

impl std::error::Error for ClassParseError {}

/// Parse a signed combination of the geometry's basis labels.
pub fn parse_class(expr: &str, geom: &SurfaceGeometry) -> Result<DivisorClass, ClassParseError> {
    let stripped: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if stripped.is_empty() {
        return Err(ClassParseError {
            position: 0,
            message: "empty class expression".into(),
        });
    }
    if stripped == "0" {
        return Ok(geom.zero_class());
    }
    let bytes: Vec<char> = stripped.chars().collect();
    let mut coords = vec![Rat::zero(); geom.rank()];
    let mut pos = 0usize;
    while pos < bytes.len() {
        // sign
        let mut negative = false;
        if bytes[pos] == '+' || bytes[pos] == '-' {
            negative = bytes[pos] == '-';
            pos += 1;
        } else if pos > 0 {
            return Err(ClassParseError {
                position: pos,
                message: format!("expected `+` or `-` before `{}`", bytes[pos]),
            });
        }
        if pos >= bytes.len() {
            return Err(ClassParseError {
                position: pos,
                message: "dangling sign".into(),
            });
        }
        // optional rational coefficient: digits, optionally /digits
        let coeff_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == '/' && pos > coeff_start {
            pos += 1;
            let denom_start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos == denom_start {
                return Err(ClassParseError {
                    position: pos,
                    message: "expected denominator digits after `/`".into(),
                });
            }
        }
        let coeff_text: String = bytes[coeff_start..pos].iter().collect();
        let mut coeff = if coeff_text.is_empty() {
            Rat::from_integer(1.into())
        } else {
            parse_rat(&coeff_text).map_err(|e| ClassParseError {
                position: coeff_start,
                message: e.to_string(),
            })?
        };
        if negative {
            coeff = -coeff;
        }
        // label: letter followed by alphanumerics
        let label_start = pos;
        if pos >= bytes.len() || !bytes[pos].is_ascii_alphabetic() {
            return Err(ClassParseError {
                position: pos,
                message: "expected a basis label".into(),
            });
        }
        pos += 1;
        while pos < bytes.len() && bytes[pos].is_ascii_alphanumeric() {
            pos += 1;
        }
        let label: String = bytes[label_start..pos].iter().collect();
        let index = geom
            .basis_labels()
            .iter()
            .position(|l| *l == label)
            .ok_or_else(|| ClassParseError {
                position: label_start,
                message: format!(
                    "unknown label `{label}`; geometry {} has basis {}",
                    geom.name(),
                    geom.basis_labels().join(", ")
                ),
            })?;
        coords[index] += coeff;
    }
    Ok(geom.class(coords).expect("rank matches"))
}
