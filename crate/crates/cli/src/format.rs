//! Table, CSV and JSON rendering of records.
//!
//! Every float is first rounded to 12 significant digits; the CSV text and
//! the JSON numbers are both produced from that rounded value, so the two
//! formats always carry identical numbers.

use serde_json::{Map, Number, Value};

use crate::args::Format;

pub const SIG_DIGITS: usize = 12;

/// `printf("%.{digits}g")`.
pub fn fmt_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        fmt_g(x, SIG_DIGITS).parse().unwrap_or(x)
    } else {
        x
    }
}

/// Rounds every float in `v`. Non-finite floats become `null`.
pub fn round_value(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(round_value).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), round_value(v))).collect()),
        other => other.clone(),
    }
}

/// Flattens nested objects and arrays into `a.b.1` style keys (array
/// positions are 1-based).
pub fn flatten(v: &Value) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    flatten_into(String::new(), v, &mut out);
    out
}

fn flatten_into(prefix: String, v: &Value, out: &mut Vec<(String, Value)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten_into(join(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten_into(join(&(i + 1).to_string()), x, out);
            }
        }
        leaf => out.push((prefix, leaf.clone())),
    }
}

/// Scalar as text; floats use `%.12g`.
pub fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => u.to_string(),
            (_, Some(i)) if !n.is_f64() => i.to_string(),
            _ => fmt_g(n.as_f64().unwrap_or(f64::NAN), SIG_DIGITS),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row per record. Columns follow the widest row, then any keys
/// it lacks in first-seen order; shorter rows get blanks.
pub fn to_csv(records: &[Value]) -> String {
    let rows: Vec<Vec<(String, Value)>> = records.iter().map(|r| flatten(&round_value(r))).collect();
    let widest = rows.iter().max_by_key(|r| r.len()).map(Vec::as_slice).unwrap_or_default();
    let mut header: Vec<String> = widest.iter().map(|(k, _)| k.clone()).collect();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut out = header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in &rows {
        let line: Vec<String> = header
            .iter()
            .map(|h| {
                row.iter()
                    .find(|(k, _)| k == h)
                    .map(|(_, v)| csv_field(&scalar_text(v)))
                    .unwrap_or_default()
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON: a single object for one record, an array otherwise.
pub fn to_json(records: &[Value], single: bool) -> String {
    let rounded: Vec<Value> = records.iter().map(round_value).collect();
    let v = if single && rounded.len() == 1 {
        rounded.into_iter().next().unwrap_or(Value::Null)
    } else {
        Value::Array(rounded)
    };
    let mut s = serde_json::to_string_pretty(&v).unwrap_or_default();
    s.push('\n');
    s
}

/// Aligned `key  value` blocks, one per record.
pub fn to_table(records: &[Value]) -> String {
    let mut out = String::new();
    for (i, rec) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let rows = flatten(&round_value(rec));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {}\n", scalar_text(&v)));
        }
    }
    out
}

pub fn render(records: &[Value], format: Format, single: bool) -> String {
    match format {
        Format::Table => to_table(records),
        Format::Csv => to_csv(records),
        Format::Json => to_json(records, single),
    }
}

/// Parses CSV produced by [`to_csv`] back into flattened rows. Only used to
/// cross-check formats.
pub fn parse_csv(text: &str) -> Vec<Map<String, Value>> {
    fn split(line: &str) -> Vec<String> {
        let mut fields = Vec::new();
        let mut cur = String::new();
        let mut quoted = false;
        let mut chars = line.chars().peekable();
        while let Some(ch) = chars.next() {
            match (ch, quoted) {
                ('"', true) if chars.peek() == Some(&'"') => {
                    cur.push('"');
                    chars.next();
                }
                ('"', _) => quoted = !quoted,
                (',', false) => fields.push(std::mem::take(&mut cur)),
                (c, _) => cur.push(c),
            }
        }
        fields.push(cur);
        fields
    }
    let mut lines = text.lines();
    let header = lines.next().map(split).unwrap_or_default();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(split(l))
                .map(|(k, v)| (k, Value::String(v)))
                .collect()
        })
        .collect()
}
