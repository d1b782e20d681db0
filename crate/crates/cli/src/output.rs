//! Serialization of command results: JSON with fixed-width floats, flat
//! key/value CSV and aligned text.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::config::Format;

pub const SCHEMA: u32 = 1;

/// Pretty printer writing every float with 17 significant digits.
struct FixedDigits(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(float(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        w.write_all(float(v as f64).as_bytes())
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// `d.dddddddddddddddde±x`, or `null` when not finite.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

pub fn to_json<S: Serialize>(value: &S) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// Leaves of a JSON tree as `(path, value)` pairs, in document order.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    go(&p, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    go(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::Number(n) => {
                let s = match (n.as_u64(), n.as_i64()) {
                    (Some(u), _) => u.to_string(),
                    (_, Some(i)) => i.to_string(),
                    _ => float(n.as_f64().unwrap_or(f64::NAN)),
                };
                out.push((prefix.into(), s));
            }
            Value::Null => out.push((prefix.into(), "null".into())),
            Value::Bool(b) => out.push((prefix.into(), b.to_string())),
            Value::String(s) => out.push((prefix.into(), s.clone())),
        }
    }
    let mut out = Vec::new();
    go("", v, &mut out);
    out
}

pub fn to_text(v: &Value) -> String {
    let rows = flatten(v);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    for (k, x) in rows {
        s.push_str(&format!("{k:<width$}  {x}\n"));
    }
    s
}

pub fn to_csv(v: &Value) -> String {
    let mut s = String::from("key,value\n");
    for (k, x) in flatten(v) {
        s.push_str(&format!("{},{}\n", quote(&k), quote(&x)));
    }
    s
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.into()
    }
}

/// Renders a command result with the envelope `{schema, command, result}`.
pub fn render<S: Serialize>(command: &str, result: &S, format: Format) -> anyhow::Result<String> {
    let env = serde_json::json!({
        "schema": SCHEMA,
        "command": command,
        "result": serde_json::to_value(result)?,
    });
    Ok(match format {
        Format::Json => to_json(&env)?,
        Format::Csv => to_csv(&env),
        Format::Text => to_text(&env),
    })
}

pub fn emit(text: &str, out: Option<&std::path::Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
