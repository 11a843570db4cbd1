//! Exact inference for discrete networks with continuous (CLG) leaves.

use super::elimination::{categorical, posterior_table, resolve_evidence, resolve_query};
use super::{Component, InferenceError, Marginal, Marginals};
use crate::model::{BayesianNetwork, Cell, Cpd};
use crate::script::Evidence;

/// Exact posteriors when every continuous variable is a leaf.
///
/// Observed leaves enter as soft factors on their discrete parents; an
/// unobserved continuous query comes back as a Gaussian mixture weighted by
/// the posterior of its discrete parents. An observed continuous query is a
/// single zero-variance component at the observed value.
pub fn infer_clg_leaf(net: &BayesianNetwork, evidence: &Evidence, query: &[String]) -> Result<Marginals, InferenceError> {
    let observed = resolve_evidence(net, evidence)?;
    check_leaves(net, &observed)?;
    let query = resolve_query(net, query)?;
    let mut out = Marginals::default();
    for q in query {
        let name = &net.variable(q).name;
        if net.variable(q).domain.is_discrete() {
            let (probabilities, _) = posterior_table(net, &observed, &[q], &[])?;
            out.push(name, categorical(net, q, probabilities));
            continue;
        }
        if let Some(Cell::Real(x)) = observed[q] {
            posterior_table(net, &observed, &[], &[])?;
            out.push(name, Marginal::GaussianMixture { components: vec![Component { weight: 1.0, mean: x, variance: 0.0 }] });
            continue;
        }
        let Cpd::Clg(c) = net.cpd(q) else { unreachable!() };
        let (weights, _) = posterior_table(net, &observed, net.discrete_parents(q), &[])?;
        let components = weights
            .iter()
            .zip(&c.rows)
            .filter(|(w, _)| **w > 0.0)
            .map(|(&weight, row)| Component { weight, mean: row.intercept, variance: row.variance })
            .collect();
        out.push(name, Marginal::GaussianMixture { components });
    }
    Ok(out)
}

/// Whether exact inference applies: no continuous variable has children.
pub fn is_clg_leaf_network(net: &BayesianNetwork) -> bool {
    (0..net.len()).all(|i| net.variable(i).domain.is_discrete() || net.children(i).is_empty())
}

pub(crate) fn check_leaves(net: &BayesianNetwork, observed: &[Option<Cell>]) -> Result<(), InferenceError> {
    let non_leaf = |i: &usize| !net.variable(*i).domain.is_discrete() && !net.children(*i).is_empty();
    if let Some(i) = (0..net.len()).filter(non_leaf).find(|&i| observed[i].is_some()) {
        return Err(InferenceError::NonLeafContinuousEvidence(net.variable(i).name.clone()));
    }
    match (0..net.len()).find(non_leaf) {
        Some(i) => Err(InferenceError::ContinuousNonLeaf(net.variable(i).name.clone())),
        None => Ok(()),
    }
}
