//! Number formatting shared by every file the CLI writes.
//!
//! Floats are printed with 12 significant digits, `%g` style: plain decimal
//! for exponents in `[-5, 12)`, scientific otherwise, trailing zeros
//! dropped. Rounding is that of Rust's exact decimal conversion, i.e. to
//! nearest with ties to even.

use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format_sig(x).parse().expect("formatted float parses")
}

/// Rounds every float inside a JSON document to 12 significant digits.
pub fn round_json_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json_floats),
        Value::Object(map) => map.values_mut().for_each(round_json_floats),
        _ => {}
    }
}

/// Flattens a JSON document into `key,value` lines, nested keys joined by
/// dots and array elements by index.
pub fn json_to_key_value_csv(value: &Value) -> String {
    let mut out = String::from("key,value\n");
    flatten(value, String::new(), &mut out);
    out
}

fn flatten(value: &Value, prefix: String, out: &mut String) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(v, join(k), out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, join(&i.to_string()), out);
            }
        }
        Value::Number(n) => {
            let text = match n.as_f64() {
                Some(x) if n.is_f64() => format_sig(x),
                _ => n.to_string(),
            };
            out.push_str(&format!("{prefix},{text}\n"));
        }
        Value::String(s) => out.push_str(&format!("{prefix},{s}\n")),
        Value::Bool(b) => out.push_str(&format!("{prefix},{b}\n")),
        Value::Null => out.push_str(&format!("{prefix},\n")),
    }
}
