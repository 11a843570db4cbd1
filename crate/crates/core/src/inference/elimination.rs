//! Variable elimination over discrete factors.

use std::collections::BTreeSet;

use super::factor::Factor;
use super::{InferenceError, Marginal, Marginals};
use crate::model::{BayesianNetwork, Cell, Cpd};
use crate::script::Evidence;

/// Evidence mass below this (in log space) counts as impossible.
pub const ZERO_EVIDENCE_THRESHOLD: f64 = 1e-300;

/// Exact posteriors for an all-discrete network. An empty `query` asks for
/// every variable.
///
/// Elimination order is min-degree with ties broken by variable name;
/// variables that are not ancestors of the query or evidence are pruned first.
pub fn eliminate(net: &BayesianNetwork, evidence: &Evidence, query: &[String]) -> Result<Marginals, InferenceError> {
    eliminate_in_order(net, evidence, query, &[])
}

/// Like [`eliminate`], but variables named in `order` are eliminated first,
/// in that order; the rest follow the min-degree heuristic.
pub fn eliminate_in_order(
    net: &BayesianNetwork,
    evidence: &Evidence,
    query: &[String],
    order: &[String],
) -> Result<Marginals, InferenceError> {
    if let Some(v) = net.variables().iter().find(|v| !v.domain.is_discrete()) {
        return Err(InferenceError::ContinuousVariable(v.name.clone()));
    }
    let observed = resolve_evidence(net, evidence)?;
    let query = resolve_query(net, query)?;
    let order = order.iter().map(|n| net.require(n)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Marginals::default();
    for q in query {
        let (probabilities, _) = posterior_table(net, &observed, &[q], &order)?;
        out.push(&net.variable(q).name, categorical(net, q, probabilities));
    }
    Ok(out)
}

/// Natural log of the probability (or density) of `evidence`, for networks
/// where exact inference applies (all-discrete or continuous leaves only).
pub fn evidence_log_probability(net: &BayesianNetwork, evidence: &Evidence) -> Result<f64, InferenceError> {
    let observed = resolve_evidence(net, evidence)?;
    super::clg::check_leaves(net, &observed)?;
    match posterior_table(net, &observed, &[], &[]) {
        Ok((_, log_z)) => Ok(log_z),
        Err(InferenceError::ZeroProbabilityEvidence) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

pub(crate) fn categorical(net: &BayesianNetwork, i: usize, probabilities: Vec<f64>) -> Marginal {
    Marginal::Categorical { states: net.variable(i).domain.states().unwrap().to_vec(), probabilities }
}

/// Evidence as one optional cell per variable.
pub(crate) fn resolve_evidence(net: &BayesianNetwork, evidence: &Evidence) -> Result<Vec<Option<Cell>>, InferenceError> {
    let mut observed = vec![None; net.len()];
    for (name, value) in evidence.iter() {
        let i = net.index_of(name).ok_or_else(|| InferenceError::UnknownVariable(name.clone()))?;
        observed[i] = Some(net.resolve(i, value)?);
    }
    Ok(observed)
}

/// Query names to indices; empty means every variable.
pub(crate) fn resolve_query(net: &BayesianNetwork, query: &[String]) -> Result<Vec<usize>, InferenceError> {
    if query.is_empty() {
        return Ok((0..net.len()).collect());
    }
    query
        .iter()
        .map(|q| net.index_of(q).ok_or_else(|| InferenceError::UnknownVariable(q.clone())))
        .collect()
}

fn cpd_factor(net: &BayesianNetwork, i: usize) -> Factor {
    let Cpd::Table(t) = net.cpd(i) else { unreachable!("discrete variable with a CLG") };
    let mut vars = net.discrete_parents(i).to_vec();
    vars.push(i);
    let cards = vars.iter().map(|&v| net.cardinality(v)).collect();
    Factor::new(vars, cards, t.rows.concat())
}

/// Density of an observed continuous leaf as a factor on its discrete parents.
fn soft_factor(net: &BayesianNetwork, i: usize, x: f64) -> Factor {
    let Cpd::Clg(c) = net.cpd(i) else { unreachable!("continuous variable with a table") };
    let logs: Vec<f64> = c
        .rows
        .iter()
        .map(|row| crate::model::normal_log_density(x, row.intercept, row.variance))
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vars = net.discrete_parents(i).to_vec();
    let cards = vars.iter().map(|&v| net.cardinality(v)).collect();
    let mut f = Factor::new(vars, cards, logs.iter().map(|l| (l - max).exp()).collect());
    f.log_scale = max;
    f
}

/// Normalized posterior table over `keep` (mixed radix, first variable most
/// significant) and the log evidence mass. Observed members of `keep` come
/// out as point masses. Continuous variables may only appear as observed
/// leaves.
pub(crate) fn posterior_table(
    net: &BayesianNetwork,
    observed: &[Option<Cell>],
    keep: &[usize],
    order: &[usize],
) -> Result<(Vec<f64>, f64), InferenceError> {
    let targets = keep.iter().copied().chain((0..net.len()).filter(|&i| observed[i].is_some()));
    let relevant = net.ancestral_set(targets);

    let mut factors = Vec::new();
    let mut to_eliminate = BTreeSet::new();
    for i in (0..net.len()).filter(|&i| relevant[i]) {
        let mut f = match (net.variable(i).domain.is_discrete(), observed[i]) {
            (true, _) => cpd_factor(net, i),
            (false, Some(Cell::Real(x))) => soft_factor(net, i, x),
            (false, _) => unreachable!("unobserved continuous variable in a discrete problem"),
        };
        for &v in f.vars.clone().iter() {
            if let Some(Cell::State(s)) = observed[v] {
                f = f.reduce(v, s);
            }
        }
        factors.push(f);
        if net.variable(i).domain.is_discrete() && observed[i].is_none() && !keep.contains(&i) {
            to_eliminate.insert(i);
        }
    }

    for v in order {
        if to_eliminate.remove(v) {
            eliminate_var(&mut factors, *v);
        }
    }
    while !to_eliminate.is_empty() {
        let v = *to_eliminate
            .iter()
            .min_by(|&&a, &&b| {
                degree(&factors, a).cmp(&degree(&factors, b)).then_with(|| net.variable(a).name.cmp(&net.variable(b).name))
            })
            .unwrap();
        to_eliminate.remove(&v);
        eliminate_var(&mut factors, v);
    }

    let joint = factors.iter().fold(Factor::unit(), |acc, f| acc.product(f));
    let free: Vec<usize> = keep.iter().copied().filter(|&k| observed[k].is_none()).collect();
    let joint = joint.permuted(&free);
    let mass: f64 = joint.values.iter().sum();
    let log_z = mass.ln() + joint.log_scale;
    if !(mass > 0.0 && log_z >= ZERO_EVIDENCE_THRESHOLD.ln()) {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }

    // Expand over all of `keep`, placing observed members at their state.
    let cards: Vec<usize> = keep.iter().map(|&k| net.cardinality(k)).collect();
    let total: usize = cards.iter().product();
    let mut table = vec![0.0; total];
    for (idx, slot) in table.iter_mut().enumerate() {
        let mut rest = idx;
        let mut digits = vec![0usize; keep.len()];
        for k in (0..keep.len()).rev() {
            digits[k] = rest % cards[k];
            rest /= cards[k];
        }
        let mut free_idx = 0;
        let mut consistent = true;
        for (k, &v) in keep.iter().enumerate() {
            match observed[v] {
                Some(Cell::State(s)) => consistent &= s == digits[k],
                _ => free_idx = free_idx * cards[k] + digits[k],
            }
        }
        if consistent {
            *slot = joint.values[free_idx] / mass;
        }
    }
    Ok((table, log_z))
}

fn degree(factors: &[Factor], v: usize) -> usize {
    let mut neighbours = BTreeSet::new();
    for f in factors.iter().filter(|f| f.contains(v)) {
        neighbours.extend(f.vars.iter().copied());
    }
    neighbours.len().saturating_sub(1)
}

fn eliminate_var(factors: &mut Vec<Factor>, v: usize) {
    let (with, without): (Vec<Factor>, Vec<Factor>) = factors.drain(..).partition(|f| f.contains(v));
    *factors = without;
    let product = with.iter().fold(Factor::unit(), |acc, f| acc.product(f));
    factors.push(product.sum_out(v));
}
