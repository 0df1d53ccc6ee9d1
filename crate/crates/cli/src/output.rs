//! Output format selection and number rendering shared by the subcommands.

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

/// Renders with 13 significant digits; NaN prints as `nan`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.12e}")
    }
}

/// JSON has no NaN; the mean-photon sentinel becomes `null`.
pub fn json_number(x: f64) -> Value {
    if x.is_nan() {
        Value::Null
    } else {
        serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    }
}
