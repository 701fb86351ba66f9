//! CSV tables and key = value report blocks.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

/// Shortest decimal string that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Num(x) => num(*x),
            Value::Text(s) => s.clone(),
            Value::Flag(b) => b.to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Ordered key = value pairs.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn num(&mut self, k: impl Into<String>, v: f64) {
        self.entries.push((k.into(), Value::Num(v)));
    }

    pub fn text(&mut self, k: impl Into<String>, v: impl Into<String>) {
        self.entries.push((k.into(), Value::Text(v.into())));
    }

    pub fn flag(&mut self, k: impl Into<String>, v: bool) {
        self.entries.push((k.into(), Value::Flag(v)));
    }

    pub fn opt(&mut self, k: impl Into<String>, v: Option<f64>) {
        match v {
            Some(x) => self.num(k, x),
            None => self.text(k, "none"),
        }
    }

    pub fn get(&self, k: &str) -> Option<&Value> {
        self.entries.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v)
    }

    pub fn get_num(&self, k: &str) -> Option<f64> {
        match self.get(k)? {
            Value::Num(x) => Some(*x),
            Value::Flag(b) => Some(if *b { 1.0 } else { 0.0 }),
            Value::Text(_) => None,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {}", v.render());
        }
        s
    }
}

pub struct Header<'a> {
    pub version: &'a str,
    pub scenario: &'a str,
    pub kind: &'a str,
    pub sha256: &'a str,
    pub seed: u64,
    pub units: &'a str,
}

pub fn render_csv(h: &Header<'_>, t: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# lorentz-lab {}", h.version);
    let _ = writeln!(s, "# scenario: {}", h.scenario);
    let _ = writeln!(s, "# run: {}", h.kind);
    let _ = writeln!(s, "# scenario-sha256: {}", h.sha256);
    let _ = writeln!(s, "# seed: {}", h.seed);
    let _ = writeln!(s, "# units: {}", h.units);
    let _ = writeln!(s, "# columns: {}", t.columns.join(","));
    let _ = writeln!(s, "{}", t.columns.join(","));
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|x| num(*x)).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 1e-20, 3.141592653589793, 6.02e23, 1e-5, 123456.789, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
