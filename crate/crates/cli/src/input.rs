//! Parsing of coefficient lists and matrix files.

use std::path::Path;

use tlsub_core::{c, CMatrix, C64};

use crate::UsageError;

/// Parses `re`, `imi`, or `re+imi` / `re-imi`; `i` alone means `1i`.
pub fn parse_complex(token: &str) -> Option<C64> {
    let s: String = token.chars().filter(|ch| !ch.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| c(re, 0.0));
    };
    // the split is the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse().ok()?,
    };
    Some(c(re, im))
}

pub fn parse_coefficients(list: &str) -> Result<Vec<C64>, UsageError> {
    let coeffs = list
        .split(',')
        .map(|tok| {
            parse_complex(tok).ok_or_else(|| UsageError::new("--coeffs", format!("cannot parse {tok:?} as a complex number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() < 2 {
        return Err(UsageError::new("--coeffs", "need at least 2 coefficients"));
    }
    if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(UsageError::new("--coeffs", "coefficients must be finite"));
    }
    Ok(coeffs)
}

/// Reads a square matrix stored as a JSON array of rows of `[re, im]` pairs.
pub fn read_matrix(path: &Path) -> Result<CMatrix, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new("--matrix", format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<CMatrix, UsageError> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)
        .map_err(|e| UsageError::new("--matrix", format!("expected a JSON array of rows of [re, im] pairs: {e}")))?;
    let n = rows.len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(UsageError::new(
            "--matrix",
            format!("matrix is not square: {n} rows but row {i} has {} entries", row.len()),
        ));
    }
    if n < 2 {
        return Err(UsageError::new("--matrix", "matrix must be at least 2x2"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_tokens() {
        let cases = [
            ("1", c(1.0, 0.0)),
            ("-1", c(-1.0, 0.0)),
            ("0.5+2i", c(0.5, 2.0)),
            ("1-1i", c(1.0, -1.0)),
            ("2i", c(0.0, 2.0)),
            ("-i", c(0.0, -1.0)),
            ("i", c(0.0, 1.0)),
            ("1.5-i", c(1.5, -1.0)),
            ("1e-3+2e-2i", c(1e-3, 2e-2)),
            ("-2.5e+1-3E-1i", c(-25.0, -0.3)),
            (" 0.25 ", c(0.25, 0.0)),
        ];
        for (tok, want) in cases {
            assert_eq!(parse_complex(tok), Some(want), "{tok}");
        }
        for bad in ["", "x", "1+", "1+2", "ii", "1+2ii"] {
            assert_eq!(parse_complex(bad), None, "{bad}");
        }
    }

    #[test]
    fn coefficient_lists() {
        assert_eq!(parse_coefficients("1,-1").unwrap(), vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(parse_coefficients("1, 1, 1").unwrap().len(), 3);
        assert!(parse_coefficients("1").is_err());
        assert!(parse_coefficients("1,,2").is_err());
        assert!(parse_coefficients("1,inf").is_err());
    }

    #[test]
    fn matrix_files() {
        let m = parse_matrix("[[[0,0],[-1,0]],[[1,0],[0,0]]]").unwrap();
        assert_eq!(m[(0, 1)], c(-1.0, 0.0));
        let err = parse_matrix("[[[0,0],[1,0],[2,0]],[[1,0],[0,0],[0,0]]]").unwrap_err();
        assert!(err.to_string().contains("--matrix") && err.to_string().contains("not square"));
        assert!(parse_matrix("[[[1,0]]]").is_err());
        assert!(parse_matrix("{}").is_err());
    }
}
