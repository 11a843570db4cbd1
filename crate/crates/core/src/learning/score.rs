use super::parameters::align;
use super::LearnError;
use crate::inference::Dataset;
use crate::model::{BayesianNetwork, Cpd};

/// Bayesian information criterion: log-likelihood of `data` under `net`
/// minus half the free-parameter count times ln(rows). Higher is better.
pub fn bic_score(net: &BayesianNetwork, data: &Dataset) -> Result<f64, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let rows = align(net.variables(), data)?;
    let loglik = compensated_sum(rows.iter().map(|r| net.log_joint_cells(r)));
    let params: usize = (0..net.len()).map(|i| parameter_count(net, i)).sum();
    Ok(loglik - params as f64 / 2.0 * (rows.len() as f64).ln())
}

/// Per-variable BIC terms; they sum to [`bic_score`].
pub fn family_scores(net: &BayesianNetwork, data: &Dataset) -> Result<Vec<f64>, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let rows = align(net.variables(), data)?;
    let ln_n = (rows.len() as f64).ln();
    Ok((0..net.len())
        .map(|i| {
            let loglik = compensated_sum(rows.iter().map(|r| net.local_log_prob(i, r)));
            loglik - parameter_count(net, i) as f64 / 2.0 * ln_n
        })
        .collect())
}

/// Free parameters of one local distribution.
pub(crate) fn parameter_count(net: &BayesianNetwork, i: usize) -> usize {
    match net.cpd(i) {
        Cpd::Table(_) => net.config_count(i) * (net.cardinality(i) - 1),
        Cpd::Clg(c) => net.config_count(i) * (c.continuous_parents.len() + 2),
    }
}

/// Neumaier summation; keeps long log-likelihood sums order-independent to
/// within a few ulps.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}
