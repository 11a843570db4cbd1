//! Integrating two networks into one joint model: disjoint union, KL
//! optimization over the joint, and simulation followed by re-learning.

mod optimize;
mod rebuild;
mod simulate;

pub use optimize::merge_optimize;
pub use rebuild::rebuild_cpds;
pub use simulate::merge_simulate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learning::{LearnError, Structure};
use crate::model::{BayesianNetwork, Domain, ModelError, Variable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MergeError {
    #[error("`{0}` has different domains in the two networks")]
    DomainMismatch(String),
    #[error("disjoint merge needs no shared variables, found {}", .0.join(", "))]
    SharedVariablesPresent(Vec<String>),
    #[error("optimization merge needs discrete networks; `{0}` is continuous (use the simulation merge)")]
    ContinuousVariablesPresent(String),
    #[error("joint space has {states} states, above the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u128 },
    #[error("the union of arcs has a directed cycle: {}", cycle.join(" -> "))]
    CycleInUnion { cycle: Vec<String> },
    #[error("no convergence after {iterations} iterations (optimality gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("the two networks give no joint state positive probability in both")]
    InfeasibleSupport,
    #[error("{rejected} of {attempts} sampled shared configurations had zero probability in the other network")]
    ZeroProbabilityEvidence { rejected: usize, attempts: usize },
    #[error("joint vector: {0}")]
    InvalidJoint(String),
    #[error(transparent)]
    Learning(#[from] LearnError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl MergeError {
    pub fn code(&self) -> &'static str {
        match self {
            MergeError::DomainMismatch(_) => "domain_mismatch",
            MergeError::SharedVariablesPresent(_) => "shared_variables_present",
            MergeError::ContinuousVariablesPresent(_) => "continuous_variables_present",
            MergeError::StateSpaceTooLarge { .. } => "state_space_too_large",
            MergeError::CycleInUnion { .. } => "cycle_in_union",
            MergeError::NotConverged { .. } => "not_converged",
            MergeError::InfeasibleSupport => "infeasible_support",
            MergeError::ZeroProbabilityEvidence { .. } => "zero_probability_evidence",
            MergeError::InvalidJoint(_) => "invalid_joint",
            MergeError::Learning(e) => e.code(),
            MergeError::Model(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMethod {
    Disjoint,
    Optimize,
    Simulate,
}

impl std::str::FromStr for MergeMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disjoint" => Ok(MergeMethod::Disjoint),
            "optimize" => Ok(MergeMethod::Optimize),
            "simulate" => Ok(MergeMethod::Simulate),
            other => Err(format!("unknown merge method `{other}` (expected disjoint, optimize or simulate)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergeOptions {
    /// Optimization stops once the optimality gap is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub sample_count: usize,
    pub seed: u64,
    /// Largest joint space the optimizer will allocate.
    pub max_states: u128,
    /// Gibbs sweeps per conditioned draw when forward sampling cannot clamp.
    pub gibbs_sweeps: usize,
}

impl Default for MergeOptions {
    fn default() -> Self {
        MergeOptions {
            tolerance: 1e-6,
            max_iterations: 10_000,
            sample_count: 50_000,
            seed: 0,
            max_states: 1 << 22,
            gibbs_sweeps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeReport {
    pub shared: Vec<String>,
    pub method: MergeMethod,
    /// Final summed KL divergence (optimization only).
    pub objective: Option<f64>,
    pub iterations: Option<usize>,
    pub sample_count: Option<usize>,
    pub warnings: Vec<String>,
}

impl MergeReport {
    fn new(shared: Vec<String>, method: MergeMethod) -> Self {
        MergeReport { shared, method, objective: None, iterations: None, sample_count: None, warnings: Vec::new() }
    }
}

pub struct MergeRequest<'a> {
    pub bn1: &'a BayesianNetwork,
    pub bn2: &'a BayesianNetwork,
    pub method: MergeMethod,
    pub options: MergeOptions,
}

/// Runs the requested merge method.
pub fn merge(req: &MergeRequest<'_>) -> Result<(BayesianNetwork, MergeReport), MergeError> {
    match req.method {
        MergeMethod::Disjoint => merge_disjoint(req.bn1, req.bn2),
        MergeMethod::Optimize => merge_optimize(req.bn1, req.bn2, &req.options),
        MergeMethod::Simulate => merge_simulate(req.bn1, req.bn2, &req.options),
    }
}

/// Names present in both networks, in `bn1` order. Shared variables must
/// agree in kind and state set (state order may differ).
pub fn shared_variables(bn1: &BayesianNetwork, bn2: &BayesianNetwork) -> Result<Vec<String>, MergeError> {
    let mut shared = Vec::new();
    for v in bn1.variables() {
        let Some(j) = bn2.index_of(&v.name) else { continue };
        let same = match (&v.domain, &bn2.variable(j).domain) {
            (Domain::Continuous, Domain::Continuous) => true,
            (Domain::Discrete(a), Domain::Discrete(b)) => {
                a.iter().collect::<BTreeSet<_>>() == b.iter().collect::<BTreeSet<_>>()
            }
            _ => false,
        };
        if !same {
            return Err(MergeError::DomainMismatch(v.name.clone()));
        }
        shared.push(v.name.clone());
    }
    Ok(shared)
}

/// Places two networks side by side; they must share no variables.
pub fn merge_disjoint(bn1: &BayesianNetwork, bn2: &BayesianNetwork) -> Result<(BayesianNetwork, MergeReport), MergeError> {
    let shared = shared_variables(bn1, bn2)?;
    if !shared.is_empty() {
        return Err(MergeError::SharedVariablesPresent(shared));
    }
    let variables = bn1.variables().iter().chain(bn2.variables()).cloned().collect();
    let cpds = bn1.cpds().iter().chain(bn2.cpds()).cloned().collect();
    Ok((BayesianNetwork::new(variables, cpds)?, MergeReport::new(shared, MergeMethod::Disjoint)))
}

/// Disjoint union reported under `method`, for merges with nothing shared.
fn disjoint_fallback(
    bn1: &BayesianNetwork,
    bn2: &BayesianNetwork,
    method: MergeMethod,
) -> Result<(BayesianNetwork, MergeReport), MergeError> {
    let (net, mut report) = merge_disjoint(bn1, bn2)?;
    report.method = method;
    report.warnings.push("no shared variables; returned the disjoint union".into());
    Ok((net, report))
}

/// `bn2` with each shared discrete variable's states in `bn1`'s order.
fn align_states(bn1: &BayesianNetwork, bn2: &BayesianNetwork, shared: &[String]) -> Result<BayesianNetwork, MergeError> {
    let mut out = bn2.clone();
    for name in shared {
        let want = bn1.variable(bn1.require(name)?).domain.states();
        let have = out.variable(out.require(name)?).domain.states();
        if let (Some(want), Some(have)) = (want, have) {
            if want != have {
                out = out.reorder_states(name, &want.to_vec())?;
            }
        }
    }
    Ok(out)
}

/// Variables of `bn1`, then those only in `bn2`; each variable's parents are
/// the union of its parents in both.
pub fn union_structure(bn1: &BayesianNetwork, bn2: &BayesianNetwork) -> Result<Structure, MergeError> {
    let mut variables: Vec<Variable> = bn1.variables().to_vec();
    variables.extend(bn2.variables().iter().filter(|v| bn1.index_of(&v.name).is_none()).cloned());
    let parents_in = |net: &BayesianNetwork, name: &str| -> Vec<String> {
        net.index_of(name)
            .map(|i| net.parents(i).into_iter().map(|p| net.variable(p).name.clone()).collect())
            .unwrap_or_default()
    };
    let parents = variables
        .iter()
        .map(|v| {
            let mut ps = parents_in(bn1, &v.name);
            for p in parents_in(bn2, &v.name) {
                if !ps.contains(&p) {
                    ps.push(p);
                }
            }
            ps
        })
        .collect();
    Structure::new(variables, parents).map_err(|e| match e {
        ModelError::Cycle { cycle } => MergeError::CycleInUnion { cycle },
        other => MergeError::Model(other),
    })
}
