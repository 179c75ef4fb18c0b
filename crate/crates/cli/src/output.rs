//! JSON and CSV emission with shortest round-trip floats.

use holojet::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub fn float(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        format!("{x}")
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("output types serialize")
}

/// CSV table: header line plus rows of preformatted cells.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn cells(zs: &[Complex64]) -> Vec<String> {
    zs.iter().flat_map(|z| [float(z.re), float(z.im)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0625] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.0625), "0.0625");
        assert_eq!(float(f64::NAN), "NaN");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(vec!["a_re", "a_im"]);
        t.push(cells(&[Complex64::new(1.0, -0.5)]));
        assert_eq!(t.render(), "a_re,a_im\n1.0,-0.5\n");
    }
}
