use qtradeoff::format::fmt_sig;
use qtradeoff::{ComplexMatrix, C64};
use serde_json::{Number, Value};

/// Digits for human-readable output.
pub const TEXT_DIGITS: usize = 6;
/// Digits for machine-readable output.
pub const DATA_DIGITS: usize = 12;

pub fn text(x: f64) -> String {
    fmt_sig(x, TEXT_DIGITS)
}

/// `x` rounded to 12 significant digits as a JSON number, `null` when not
/// finite.
pub fn num(x: f64) -> Value {
    fmt_sig(x, DATA_DIGITS)
        .parse::<f64>()
        .ok()
        .and_then(Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

pub fn complex_text(z: C64) -> String {
    let tiny = 1e-12;
    match (z.re.abs() < tiny, z.im.abs() < tiny) {
        (_, true) => text(z.re),
        (true, false) => format!("{}i", text(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{sign}{}i", text(z.re), text(z.im.abs()))
        }
    }
}

pub fn complex_json(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn vector_text(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|&z| complex_text(z)).collect();
    format!("({})", parts.join(", "))
}

pub fn vector_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn matrix_text(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let row: Vec<String> = (0..m.cols()).map(|j| complex_text(m[(i, j)])).collect();
            format!("[{}]", row.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}
