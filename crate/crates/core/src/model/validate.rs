use serde::{Deserialize, Serialize};

use super::compile::NORMALIZATION_TOLERANCE;
use super::network::{BayesianNetwork, Cpd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    RowNotNormalized { variable: String, configuration: String, sum: f64 },
    ProbabilityOutOfRange { variable: String, configuration: String, value: f64 },
    VarianceNotPositive { variable: String, configuration: String, variance: f64 },
    NonFinite { variable: String, configuration: String },
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Finding::RowNotNormalized { variable, configuration, sum } => {
                write!(f, "{variable}: row at {configuration} sums to {sum}")
            }
            Finding::ProbabilityOutOfRange { variable, configuration, value } => {
                write!(f, "{variable}: probability {value} at {configuration} is outside [0, 1]")
            }
            Finding::VarianceNotPositive { variable, configuration, variance } => {
                write!(f, "{variable}: variance {variance} at {configuration} is not positive")
            }
            Finding::NonFinite { variable, configuration } => {
                write!(f, "{variable}: non-finite parameter at {configuration}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Lists every numeric violation in the network's distributions.
pub fn validate(net: &BayesianNetwork) -> ValidationReport {
    let mut findings = Vec::new();
    for (i, v) in net.variables().iter().enumerate() {
        let variable = || v.name.clone();
        match net.cpd(i) {
            Cpd::Table(t) => {
                for (cfg, row) in t.rows.iter().enumerate() {
                    let configuration = || net.describe_config(i, cfg);
                    if row.iter().any(|p| !p.is_finite()) {
                        findings.push(Finding::NonFinite { variable: variable(), configuration: configuration() });
                        continue;
                    }
                    if let Some(&value) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                        findings.push(Finding::ProbabilityOutOfRange {
                            variable: variable(),
                            configuration: configuration(),
                            value,
                        });
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                        findings.push(Finding::RowNotNormalized { variable: variable(), configuration: configuration(), sum });
                    }
                }
            }
            Cpd::Clg(c) => {
                for (cfg, row) in c.rows.iter().enumerate() {
                    let configuration = || net.describe_config(i, cfg);
                    if !row.intercept.is_finite()
                        || !row.variance.is_finite()
                        || row.coefficients.iter().any(|b| !b.is_finite())
                    {
                        findings.push(Finding::NonFinite { variable: variable(), configuration: configuration() });
                    } else if row.variance <= 0.0 {
                        findings.push(Finding::VarianceNotPositive {
                            variable: variable(),
                            configuration: configuration(),
                            variance: row.variance,
                        });
                    }
                }
            }
        }
    }
    ValidationReport { findings }
}
