//! Parsing of complex numbers, coefficient lists and point files.

use std::path::Path;

use holojet::Complex64;

/// `"re"` or `"re:im"`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    let (re, im) = match s.split_once(':') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{s}` is not a complex number (expected re or re:im)"))
    };
    Ok(Complex64::new(num(re)?, num(im)?))
}

/// Comma-separated complex coefficients, lowest degree first.
pub fn parse_coeffs(s: &str) -> Result<Vec<Complex64>, String> {
    if s.trim().is_empty() {
        return Err("coefficient list is empty".into());
    }
    s.split(',')
        .enumerate()
        .map(|(i, t)| parse_complex(t).map_err(|e| format!("coeffs[{i}]: {e}")))
        .collect()
}

/// Rows of `width` comma-separated reals. Blank lines and `#` comments are skipped.
pub fn parse_rows(text: &str, width: usize) -> Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if vals.len() != width {
            return Err(format!(
                "line {}: expected {width} values, found {}",
                lineno + 1,
                vals.len()
            ));
        }
        rows.push(vals);
    }
    Ok(rows)
}

pub fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}
