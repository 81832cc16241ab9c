use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{Expectation, ExperimentConfig, ExperimentKind};
use crate::{Error, Result};

pub const REPORT_VERSION: &str = concat!("maxlab ", env!("CARGO_PKG_VERSION"));

/// JSON has no infinities or NaN; they are written as strings.
mod lossless_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("bad float `{s}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

impl Comparison {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Comparison::Le => value <= tolerance,
            Comparison::Ge => value >= tolerance,
            Comparison::Lt => value < tolerance,
            Comparison::Gt => value > tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
            Comparison::Lt => "<",
            Comparison::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    /// `module::operation` that produced the value.
    pub source: String,
    #[serde(with = "lossless_f64")]
    pub value: f64,
    #[serde(with = "lossless_f64")]
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(
        name: impl Into<String>,
        source: &str,
        value: f64,
        comparison: Comparison,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            source: source.into(),
            value,
            tolerance,
            comparison,
            pass: comparison.holds(value, tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub name: String,
    pub h: Vec<f64>,
    pub err: Vec<f64>,
    #[serde(with = "lossless_f64")]
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub expect: Expectation,
    pub config: ExperimentConfig,
    pub rows: Vec<CheckRow>,
    pub orders: Vec<OrderRow>,
    pub details: serde_json::Value,
    /// Conjunction of the row verdicts.
    pub checks_pass: bool,
    /// `checks_pass` when the config expects success, its negation otherwise.
    pub pass: bool,
    pub wall_time_s: f64,
    pub timestamp_unix: u64,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig, rows: Vec<CheckRow>) -> Self {
        let checks_pass = rows.iter().all(|r| r.pass);
        Self {
            version: REPORT_VERSION.into(),
            kind: config.kind,
            seed: config.seed,
            expect: config.expect,
            config: config.clone(),
            rows,
            orders: Vec::new(),
            details: serde_json::Value::Null,
            checks_pass,
            pass: checks_pass == (config.expect == Expectation::Pass),
            wall_time_s: 0.0,
            timestamp_unix: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(text)?;
        let checks = r.rows.iter().all(|row| row.pass);
        if checks != r.checks_pass || r.pass != (checks == (r.expect == Expectation::Pass)) {
            return Err(Error::Config(
                "report verdict does not match its check rows".into(),
            ));
        }
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Columns `name,source,value,comparison,tolerance,pass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["name", "source", "value", "comparison", "tolerance", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.name.as_str(),
                r.source.as_str(),
                &format!("{:e}", r.value),
                r.comparison.symbol(),
                &format!("{:e}", r.tolerance),
                if r.pass { "true" } else { "false" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "# {} experiment: {verdict}\n", self.kind);
        let _ = writeln!(
            s,
            "seed {}, expected outcome `{}`, checks {}, {:.2} s, {}\n",
            self.seed,
            serde_json::to_value(self.expect)
                .unwrap_or_default()
                .as_str()
                .unwrap_or(""),
            if self.checks_pass { "hold" } else { "fail" },
            self.wall_time_s,
            self.version,
        );
        s.push_str("| check | source | value | bound | pass |\n|---|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | `{}` | {:.6e} | {} {:.3e} | {} |",
                r.name,
                r.source,
                r.value,
                r.comparison.symbol(),
                r.tolerance,
                if r.pass { "yes" } else { "no" }
            );
        }
        if !self.orders.is_empty() {
            s.push_str("\n| refinement | order |\n|---|---|\n");
            for o in &self.orders {
                let _ = writeln!(s, "| {} | {:.3} |", o.name, o.order);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> RunReport {
        let cfg = ExperimentConfig::parse("kind = \"lemma31\"").unwrap();
        let rows = vec![
            CheckRow::new("a", "matalg::lemma31_sweep", 1.0, Comparison::Ge, 0.0),
            CheckRow::new("b", "matalg::x", f64::INFINITY, Comparison::Le, 1.0),
        ];
        RunReport::new(&cfg, rows)
    }

    #[test]
    fn verdict_is_conjunction() {
        let r = report();
        assert!(r.rows[0].pass && !r.rows[1].pass);
        assert!(!r.checks_pass && !r.pass);
        let mut cfg = r.config.clone();
        cfg.expect = Expectation::Fail;
        let r = RunReport::new(&cfg, r.rows.clone());
        assert!(!r.checks_pass && r.pass);
    }

    #[test]
    fn json_roundtrip_with_infinities() {
        let r = report();
        let text = r.to_json().unwrap();
        assert!(text.contains("\"inf\""));
        let back = RunReport::from_json(&text).unwrap();
        assert_eq!(back.rows[1].value, f64::INFINITY);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn tampered_verdict_rejected() {
        let text = report()
            .to_json()
            .unwrap()
            .replace("\"pass\": false", "\"pass\": true");
        assert!(RunReport::from_json(&text).is_err());
        assert_eq!(RunReport::from_json("{").unwrap_err().code(), "json");
    }

    #[test]
    fn csv_and_markdown() {
        let r = report();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("name,source,value,comparison,tolerance,pass\n"));
        assert_eq!(text.lines().count(), 3);
        let md = r.to_markdown();
        assert!(md.contains("| b | `matalg::x` | inf |"), "{md}");
    }
}
