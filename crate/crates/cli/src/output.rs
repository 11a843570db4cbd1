//! Human-readable rendering and the CLI error type.

use std::fmt::Write as _;

use bayescloud_client::ClientError;
use bayescloud_core::api::{ApiError, ErrorBody, ErrorClass};
use bayescloud_core::corpus::RegionRisk;
use bayescloud_core::inference::{InferenceMethod, Marginal, Marginals};
use bayescloud_core::integration::MergeReport;
use serde::Serialize;

/// A failure with its exit status and structured payload.
#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub body: ErrorBody,
}

impl<E: ApiError> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError { class: e.class(), body: e.body() }
    }
}

impl CliError {
    pub fn input(code: &str, message: impl Into<String>) -> Self {
        CliError { class: ErrorClass::Input, body: ErrorBody::new(code, message, serde_json::Value::Null) }
    }

    pub fn io(path: &str, e: std::io::Error) -> Self {
        CliError::input("io_error", format!("{path}: {e}"))
    }

    pub fn client(e: ClientError) -> Self {
        match e {
            ClientError::Service { status, body } => CliError { class: ErrorClass::from_http_status(status), body },
            ClientError::Transport(e) => CliError {
                class: ErrorClass::Internal,
                body: ErrorBody::new("transport_error", e.to_string(), serde_json::Value::Null),
            },
        }
    }
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

pub fn marginals(m: &Marginals, method: Option<InferenceMethod>) -> String {
    let mut out = String::new();
    if let Some(method) = method {
        let name = serde_json::to_value(method).expect("method serializes");
        let _ = writeln!(out, "method: {}", name.as_str().unwrap_or_default());
    }
    for vm in m.iter() {
        match &vm.marginal {
            Marginal::Categorical { states, probabilities } => {
                let _ = writeln!(out, "{}", vm.variable);
                for (s, p) in states.iter().zip(probabilities) {
                    let _ = writeln!(out, "  {s}: {}", sig6(*p));
                }
            }
            Marginal::GaussianMixture { components } => {
                let mean = vm.marginal.mean().unwrap_or(f64::NAN);
                let _ = writeln!(out, "{} (mean {})", vm.variable, sig6(mean));
                for c in components {
                    let _ = writeln!(
                        out,
                        "  weight {}: Normal(mean {}, variance {})",
                        sig6(c.weight),
                        sig6(c.mean),
                        sig6(c.variance)
                    );
                }
            }
        }
    }
    out
}

pub fn merge_report(report: &MergeReport) -> String {
    let mut out = String::new();
    let method = serde_json::to_value(report.method).expect("method serializes");
    let _ = writeln!(out, "method: {}", method.as_str().unwrap_or_default());
    let shared = if report.shared.is_empty() { "(none)".to_string() } else { report.shared.join(", ") };
    let _ = writeln!(out, "shared: {shared}");
    if let Some(v) = report.objective {
        let _ = writeln!(out, "objective: {}", sig6(v));
    }
    if let Some(v) = report.iterations {
        let _ = writeln!(out, "iterations: {v}");
    }
    if let Some(v) = report.sample_count {
        let _ = writeln!(out, "samples: {v}");
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn risk_table(rows: &[RegionRisk]) -> String {
    let width = rows.iter().map(|r| r.region.len()).max().unwrap_or(6).max(6);
    let mut out = format!("{:<width$}  P(hot_zone)\n", "region");
    for r in rows {
        let _ = writeln!(out, "{:<width$}  {}", r.region, sig6(r.hot_probability));
    }
    out
}

/// Prints `value` as one JSON document, or `human` otherwise.
pub fn emit<T: Serialize>(json: bool, value: &T, human: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
    } else {
        print!("{}", human());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.9090909090909091), "0.909091");
        assert_eq!(sig6(0.09090909090909091), "0.0909091");
        assert_eq!(sig6(99.04), "99.0400");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(3.2e-7), "3.20000e-7");
        assert_eq!(sig6(1234567.0), "1.23457e6");
    }
}
