use std::fmt::Write as _;

use observables::linalg::{matrix_to_pairs, CMatrix};
use serde::Serialize;
use serde_json::{Map, Value};

/// Accumulates a command's findings for text or JSON output.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
    fields: Map<String, Value>,
    pub passed: bool,
    pub dot: Option<String>,
}

impl Report {
    pub fn new() -> Self {
        Report {
            passed: true,
            ..Default::default()
        }
    }

    /// A `key:value` line that is also a JSON field.
    pub fn field<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.lines.push(format!("{key}:{}", compact(&value)));
        self.fields.insert(key.to_string(), value);
        self
    }

    /// A JSON field with a separate human-readable rendering.
    pub fn block<T: Serialize>(&mut self, key: &str, value: T, text: Vec<String>) -> &mut Self {
        self.fields
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self.lines.push(format!("{key}:"));
        self.lines.extend(text.into_iter().map(|l| format!("  {l}")));
        self
    }

    /// Records a failed check; the witness goes to both outputs.
    pub fn fail<T: Serialize>(&mut self, key: &str, witness: T) -> &mut Self {
        self.passed = false;
        self.field(key, witness)
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut fields = self.fields.clone();
            fields.insert("passed".into(), Value::Bool(self.passed));
            serde_json::to_string_pretty(&Value::Object(fields)).unwrap_or_default()
        } else {
            self.lines.join("\n")
        }
    }
}

fn compact(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn matrix_json(m: &CMatrix) -> Value {
    serde_json::to_value(matrix_to_pairs(m)).unwrap_or(Value::Null)
}

pub fn matrix_text(m: &CMatrix) -> Vec<String> {
    m.rows()
        .iter()
        .map(|row| {
            let mut line = String::new();
            for z in row {
                let re = clean(z.re);
                let im = clean(z.im);
                if im == 0.0 {
                    let _ = write!(line, "{re:>12.6} ");
                } else {
                    let _ = write!(line, "{:>12} ", format!("{re:.4}{im:+.4}i"));
                }
            }
            line.trim_end().to_string()
        })
        .collect()
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_agree_on_fields() {
        let mut r = Report::new();
        r.field("distributive", false).field("name", "mo2");
        assert_eq!(r.render(false), "distributive:false\nname:mo2");
        let v: Value = serde_json::from_str(&r.render(true)).unwrap();
        assert_eq!(v["distributive"], Value::Bool(false));
        assert_eq!(v["passed"], Value::Bool(true));
    }

    #[test]
    fn failures_flip_the_verdict() {
        let mut r = Report::new();
        r.fail("witness", ["a", "b"]);
        assert!(!r.passed);
        assert!(r.render(false).contains(r#"witness:["a","b"]"#));
    }
}
