//! Line-oriented reports with a JSON mirror.
//!
//! Text form: the headline on the first line, then one `key: value` line
//! per field. Arrays of scalars are joined by spaces; nested arrays print
//! as parenthesised groups. Fields holding a table (an array of arrays)
//! print `key:` followed by one indented line per row. The JSON form is an
//! object with `headline` first and then the fields in the same order.

use serde_json::{Map, Value};

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub headline: String,
    fields: Vec<(String, Value, bool)>,
}

impl Report {
    pub fn new(headline: impl Into<String>) -> Report {
        Report { headline: headline.into(), fields: Vec::new() }
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Report {
        self.push(key, value.into(), false)
    }

    /// Rows print one per line in the text form.
    pub fn table(&mut self, key: &str, rows: Vec<Value>) -> &mut Report {
        self.push(key, Value::Array(rows), true)
    }

    fn push(&mut self, key: &str, value: Value, table: bool) -> &mut Report {
        assert!(key != "headline" && self.fields.iter().all(|f| f.0 != key), "duplicate field {}", key);
        self.fields.push((key.to_string(), value, table));
        self
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.headline);
        for (key, value, table) in &self.fields {
            match (table, value) {
                (true, Value::Array(rows)) => {
                    out.push_str(&format!("{}:\n", key));
                    for row in rows {
                        out.push_str(&format!("  {}\n", inline(row, false)));
                    }
                }
                _ => {
                    let v = inline(value, false);
                    let sep = if v.is_empty() { "" } else { " " };
                    out.push_str(&format!("{}:{}{}\n", key, sep, v));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut map = Map::new();
        map.insert("headline".into(), Value::String(self.headline.clone()));
        for (key, value, _) in &self.fields {
            map.insert(key.clone(), value.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("serializable");
        s.push('\n');
        s
    }
}

fn inline(v: &Value, nested: bool) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let body = items.iter().map(|x| inline(x, true)).collect::<Vec<_>>().join(" ");
            if nested {
                format!("({})", body)
            } else {
                body
            }
        }
        Value::Object(m) => m.iter().map(|(k, x)| format!("{}={}", k, inline(x, true))).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}
