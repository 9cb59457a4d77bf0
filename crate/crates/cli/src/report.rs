//! Command output: human-readable lines plus a fixed JSON envelope
//! `{command, inputs, values, witnesses, warnings}`.

use birnbaum_core::rational::{fmt_exact, fmt_with_decimal, to_f64};
use birnbaum_core::Rational;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub values: Map<String, Value>,
    pub witnesses: Vec<Value>,
    pub warnings: Vec<String>,
    pub lines: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn value(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.values.insert(key.to_string(), value.into());
        self
    }

    pub fn witness(&mut self, value: Value) -> &mut Self {
        self.witnesses.push(value);
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(text.into());
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": Value::Object(self.inputs.clone()),
            "values": Value::Object(self.values.clone()),
            "witnesses": self.witnesses,
            "warnings": self.warnings,
        })
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut text = serde_json::to_string_pretty(&self.to_json()).expect("JSON values serialize");
            text.push('\n');
            return text;
        }
        let mut text = String::new();
        for line in &self.lines {
            text.push_str(line);
            text.push('\n');
        }
        for warning in &self.warnings {
            text.push_str("warning: ");
            text.push_str(warning);
            text.push('\n');
        }
        text
    }
}

/// `{"exact": "433/8192", "decimal": 0.0528564453125}`
pub fn rational(r: &Rational) -> Value {
    json!({ "exact": fmt_exact(r), "decimal": to_f64(r) })
}

pub fn optional_rational(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, rational)
}

/// Human rendering `a/b (0.1234)`.
pub fn show(r: &Rational) -> String {
    fmt_with_decimal(r)
}

pub fn show_optional(r: &Option<Rational>) -> String {
    r.as_ref().map_or_else(|| "undefined (probability-zero event)".to_string(), show)
}

pub fn show_f64(x: f64) -> String {
    format!("{x:.6}")
}
