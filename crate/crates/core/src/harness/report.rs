//! CSV output of aggregated results.

use std::io::Write;
use std::path::Path;

use crate::error::{CmabError, Result};

use super::run::{timing_report, AggregatedResult};

/// `x` with 10 significant digits, in the shortest of fixed or
/// exponent notation (like C's `%.10g`).
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn csv_error(e: csv::Error) -> CmabError {
    CmabError::Io {
        path: Default::default(),
        source: std::io::Error::other(e),
    }
}

/// Header `t,policy,mean_cum_regret,std_cum_regret[,mean_select_ms]`, one
/// row per round and policy, ordered by policy then `t`.
pub fn write_csv<W: Write>(result: &AggregatedResult, out: W) -> Result<()> {
    let timing = result.curves.iter().any(|c| c.mean_select_ms.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t", "policy", "mean_cum_regret", "std_cum_regret"];
    if timing {
        header.push("mean_select_ms");
    }
    w.write_record(&header).map_err(csv_error)?;
    for c in &result.curves {
        let label = c.label();
        for t in 0..c.mean.len() {
            let mut row = vec![
                (t + 1).to_string(),
                label.clone(),
                format_sig10(c.mean[t]),
                format_sig10(c.std[t]),
            ];
            if timing {
                row.push(
                    c.mean_select_ms
                        .as_ref()
                        .map_or(String::new(), |m| format_sig10(m[t])),
                );
            }
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    w.flush().map_err(|source| CmabError::Io {
        path: Default::default(),
        source,
    })
}

pub fn csv_string(result: &AggregatedResult) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CmabError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(result: &AggregatedResult, path: &Path) -> Result<()> {
    write_file(path, &csv_string(result)?)
}

/// `variant,policy,mean_select_ms`, one row per curve.
pub fn emit_timing_csv(result: &AggregatedResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["variant", "policy", "mean_select_ms"])
        .map_err(csv_error)?;
    for (variant, policy, ms) in timing_report(result) {
        w.write_record([variant, policy, format_sig10(ms)])
            .map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv_error(e.into_error().into()))?;
    write_file(
        path,
        &String::from_utf8(bytes).expect("CSV output is UTF-8"),
    )
}
