//! JSON rendering helpers. `serde_json::Map` keeps keys sorted, and floats
//! are written in shortest round-trip form, so equal inputs give equal bytes.

use qkd_audit_core::bounds::{LogCount, LogProb};
use serde_json::{json, Map, Value};

/// A float, with non-finite values spelled out since JSON has no literal for them.
pub fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// A nonnegative quantity in linear and log2 form.
pub fn quantity(x: f64) -> Value {
    json!({ "linear": real(x), "log2": real(x.log2()) })
}

pub fn log_prob(p: LogProb) -> Value {
    json!({ "linear": real(p.value()), "log2": real(p.log2()), "log10": real(p.log10()), "rendered": p.render() })
}

pub fn log_count(c: LogCount) -> Value {
    json!({ "linear": real(c.value()), "log2": real(c.log2()), "log10": real(c.log10()), "rendered": c.render() })
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| real(x)).collect())
}

pub struct Report {
    pub scenario: &'static str,
    pub config: Map<String, Value>,
    pub results: Map<String, Value>,
    pub notes: Vec<&'static str>,
    pub csv: Option<String>,
}

impl Report {
    pub fn new(scenario: &'static str) -> Self {
        Report { scenario, config: Map::new(), results: Map::new(), notes: Vec::new(), csv: None }
    }

    pub fn config(&mut self, key: &str, value: impl Into<Value>) {
        self.config.insert(key.into(), value.into());
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.into(), value.into());
    }

    pub fn to_json(&self) -> String {
        let doc = json!({
            "config": self.config,
            "notes": self.notes,
            "results": self.results,
            "scenario": self.scenario,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report values are serialisable");
        text.push('\n');
        text
    }
}
