//! Formatting helpers for byte-reproducible artifacts.

/// Render a float with 17 significant digits in scientific notation, enough
/// to round-trip any f64 exactly through text.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Append a JSON string literal, escaping quotes, backslashes, and controls.
pub fn push_json_string(buf: &mut String, s: &str) {
    buf.push('"');
    for ch in s.chars() {
        match ch {
            '"' => buf.push_str("\\\""),
            '\\' => buf.push_str("\\\\"),
            '\n' => buf.push_str("\\n"),
            '\r' => buf.push_str("\\r"),
            '\t' => buf.push_str("\\t"),
            c if (c as u32) < 0x20 => buf.push_str(&format!("\\u{:04x}", c as u32)),
            c => buf.push(c),
        }
    }
    buf.push('"');
}

/// Append a JSON array of floats in 17-significant-digit form.
pub fn push_f64_array(buf: &mut String, values: impl IntoIterator<Item = f64>) {
    buf.push('[');
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            buf.push(',');
        }
        buf.push_str(&sig17(v));
    }
    buf.push(']');
}

/// Append a JSON array of integers.
pub fn push_int_array(buf: &mut String, values: impl IntoIterator<Item = u64>) {
    buf.push('[');
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            buf.push(',');
        }
        buf.push_str(&v.to_string());
    }
    buf.push(']');
}

/// Append a JSON array of string literals.
pub fn push_string_array<S: AsRef<str>>(buf: &mut String, values: impl IntoIterator<Item = S>) {
    buf.push('[');
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            buf.push(',');
        }
        push_json_string(buf, v.as_ref());
    }
    buf.push(']');
}
