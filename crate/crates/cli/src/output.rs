//! Long-format `series,tau,value` records and their CSV/JSON encodings.

use serde::Serialize;

/// One sample of a named curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRecord {
    pub series: String,
    pub tau: f64,
    pub value: f64,
}

impl CurveRecord {
    pub fn new(series: impl Into<String>, tau: f64, value: f64) -> Self {
        CurveRecord {
            series: series.into(),
            tau,
            value,
        }
    }
}

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
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

/// Value rounded to 12 significant digits, as printed in CSV output.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

pub fn to_csv(records: &[CurveRecord]) -> String {
    let mut out = String::from("series,tau,value\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{}\n",
            r.series,
            fmt_sig(r.tau),
            fmt_sig(r.value)
        ));
    }
    out
}

pub fn to_json(records: &[CurveRecord]) -> serde_json::Result<String> {
    let rounded: Vec<CurveRecord> = records
        .iter()
        .map(|r| CurveRecord::new(r.series.clone(), round_sig(r.tau), round_sig(r.value)))
        .collect();
    let mut s = serde_json::to_string_pretty(&rounded)?;
    s.push('\n');
    Ok(s)
}
