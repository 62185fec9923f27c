//! Per-cell summaries and their CSV/JSON files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: &str = "policy,T,runs,error_rate,ci_low,ci_high,mean_ms";
pub const RUNS_HEADER: &str = "policy,T,run,seed,recommended,correct";

/// Normal quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub policy: String,
    #[serde(rename = "T")]
    pub budget: usize,
    pub runs: usize,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean wall time per run; `None` when timing is suppressed.
    pub mean_ms: Option<f64>,
}

/// Wilson score interval for `errors` failures out of `n` trials.
pub fn wilson_interval(errors: usize, n: usize, z: f64) -> (f64, f64) {
    assert!(n > 0 && errors <= n);
    let n_f = n as f64;
    let p = errors as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Error rate, Wilson interval and mean wall time of one cell's runs.
pub fn summarize(records: &[RunRecord]) -> Result<CellSummary> {
    let first = records
        .first()
        .ok_or_else(|| Error::config("cannot summarize an empty cell"))?;
    if records.iter().any(|r| r.policy != first.policy || r.budget != first.budget) {
        return Err(Error::config("records from different cells cannot be summarized together"));
    }
    let n = records.len();
    let errors = records.iter().filter(|r| !r.correct).count();
    let (ci_low, ci_high) = wilson_interval(errors, n, Z_95);
    let total_ms: f64 = records.iter().map(|r| r.elapsed.as_secs_f64() * 1e3).sum();
    Ok(CellSummary {
        policy: first.policy.clone(),
        budget: first.budget,
        runs: n,
        error_rate: errors as f64 / n as f64,
        ci_low,
        ci_high,
        mean_ms: Some(total_ms / n as f64),
    })
}

/// `printf("%.10g")`: ten significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e10)`.
pub fn fmt_sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..10).contains(&exp) {
        let fixed = format!("{x:.*}", (9 - exp) as usize);
        trim_zeros(&fixed).to_owned()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn summary_csv(summaries: &[CellSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summaries {
        let ms = s.mean_ms.map(fmt_sig10).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.policy,
            s.budget,
            s.runs,
            fmt_sig10(s.error_rate),
            fmt_sig10(s.ci_low),
            fmt_sig10(s.ci_high),
            ms
        );
    }
    out
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.policy, r.budget, r.run, r.seed, r.recommended, r.correct);
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn emit_csv(summaries: &[CellSummary], path: &Path) -> Result<()> {
    write(path, &summary_csv(summaries))
}

/// JSON keeps full precision so that loading reproduces the summaries exactly.
pub fn emit_json(summaries: &[CellSummary], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(summaries).expect("summaries serialize");
    write(path, &(text + "\n"))
}

pub fn load_json(path: &Path) -> Result<Vec<CellSummary>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })
}

pub fn emit_runs_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    write(path, &runs_csv(records))
}
