use crate::script::{
    Branch, DistExpr, DomainDecl, GaussianLiteral, GuardTest, LeafDist, LinearTerm, ModelAst, NodeDef,
    TableLiteral,
};

use super::error::ModelError;
use super::network::{BayesianNetwork, ClgRow, ClgSpec, Cpd, DiscreteTable, Domain, Variable};
use super::validate::{validate, Finding};

/// Row sums within this distance of 1 are renormalized; others are rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Deviations this small are float rounding and are left untouched, so
/// decompiling and recompiling is exact.
const ROUNDING_NOISE: f64 = 1e-14;

/// Compiles a parsed script into a validated network.
///
/// Arcs come from the identifiers used in guards and linear terms. Guards
/// are matched first-match against every discrete-parent configuration.
pub fn compile(ast: &ModelAst) -> Result<BayesianNetwork, ModelError> {
    let variables: Vec<Variable> = ast
        .nodes
        .iter()
        .map(|n| Variable {
            name: n.name.clone(),
            domain: match &n.domain {
                DomainDecl::Discrete(s) => Domain::Discrete(s.clone()),
                DomainDecl::Continuous => Domain::Continuous,
            },
        })
        .collect();
    let domain_of = |name: &str| variables.iter().find(|v| v.name == name).map(|v| &v.domain);

    let mut cpds = Vec::with_capacity(ast.nodes.len());
    for node in &ast.nodes {
        if node.domain.states().is_some_and(|s| s.len() < 2) {
            return Err(ModelError::DegenerateDomain(node.name.clone()));
        }
        let referenced = node.referenced_parents();
        for p in &node.parents {
            if !referenced.contains(p) {
                return Err(ModelError::UnreferencedParent { variable: node.name.clone(), parent: p.clone() });
            }
        }
        let mut ordered: Vec<String> = node.parents.clone();
        ordered.extend(referenced.into_iter().filter(|r| !node.parents.contains(r)));

        let mut discrete = Vec::new();
        let mut continuous = Vec::new();
        for p in ordered {
            match domain_of(&p) {
                None => return Err(ModelError::UnknownParent { variable: node.name.clone(), parent: p }),
                Some(Domain::Discrete(_)) => discrete.push(p),
                Some(Domain::Continuous) => continuous.push(p),
            }
        }
        let in_guard = |name: &str| match &node.distribution {
            DistExpr::Conditional(bs) => bs.iter().any(|b| b.guard.iter().any(|t| t.variable == name)),
            _ => false,
        };
        for p in &continuous {
            if in_guard(p) || node.domain.states().is_some() {
                return Err(if node.domain.states().is_some() {
                    ModelError::DiscreteChildOfContinuous { child: node.name.clone(), parent: p.clone() }
                } else {
                    ModelError::KindMismatch {
                        variable: node.name.clone(),
                        detail: format!("guard tests continuous variable `{p}`"),
                    }
                });
            }
        }
        for p in &discrete {
            if !in_guard(p) {
                return Err(ModelError::KindMismatch {
                    variable: node.name.clone(),
                    detail: format!("linear term uses discrete variable `{p}`"),
                });
            }
        }

        let parent_states: Vec<&[String]> =
            discrete.iter().map(|p| domain_of(p).and_then(Domain::states).unwrap()).collect();
        let leaves = select_branches(node, &discrete, &parent_states)?;
        let cpd = match &node.domain {
            DomainDecl::Discrete(_) => {
                let mut rows = Vec::with_capacity(leaves.len());
                for (cfg, leaf) in leaves.iter().enumerate() {
                    let LeafDist::Table(t) = leaf else {
                        return Err(ModelError::KindMismatch {
                            variable: node.name.clone(),
                            detail: "discrete node given a NormalDist".into(),
                        });
                    };
                    let sum: f64 = t.probabilities.iter().sum();
                    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                        return Err(ModelError::RowNotNormalized {
                            variable: node.name.clone(),
                            configuration: describe(&discrete, &parent_states, cfg),
                            sum,
                        });
                    }
                    if (sum - 1.0).abs() <= ROUNDING_NOISE {
                        rows.push(t.probabilities.clone());
                    } else {
                        rows.push(t.probabilities.iter().map(|p| p / sum).collect());
                    }
                }
                Cpd::Table(DiscreteTable { parents: discrete, rows })
            }
            DomainDecl::Continuous => {
                let mut rows = Vec::with_capacity(leaves.len());
                for leaf in &leaves {
                    let LeafDist::Gaussian(g) = leaf else {
                        return Err(ModelError::KindMismatch {
                            variable: node.name.clone(),
                            detail: "continuous node given a probability table".into(),
                        });
                    };
                    let coefficients = continuous
                        .iter()
                        .map(|p| g.terms.iter().filter(|t| &t.parent == p).map(|t| t.coefficient).sum())
                        .collect();
                    rows.push(ClgRow { intercept: g.mean, coefficients, variance: g.variance });
                }
                Cpd::Clg(ClgSpec { discrete_parents: discrete, continuous_parents: continuous, rows })
            }
        };
        cpds.push(cpd);
    }

    let net = BayesianNetwork::new(variables, cpds)?;
    if let Some(f) = validate(&net).findings.into_iter().next() {
        return Err(match f {
            Finding::RowNotNormalized { variable, configuration, sum } => {
                ModelError::RowNotNormalized { variable, configuration, sum }
            }
            Finding::VarianceNotPositive { variable, configuration, variance } => {
                ModelError::VarianceNotPositive { variable, configuration, variance }
            }
            Finding::NonFinite { variable, configuration } => ModelError::InvalidValue {
                variable,
                detail: format!("non-finite parameter at {configuration}"),
            },
            Finding::ProbabilityOutOfRange { variable, configuration, value } => ModelError::InvalidValue {
                variable,
                detail: format!("probability {value} at {configuration}"),
            },
        });
    }
    Ok(net)
}

/// Picks the leaf distribution for every discrete-parent configuration.
fn select_branches(
    node: &NodeDef,
    parents: &[String],
    parent_states: &[&[String]],
) -> Result<Vec<LeafDist>, ModelError> {
    let configs: usize = parent_states.iter().map(|s| s.len()).product();
    let branches: &[Branch] = match &node.distribution {
        DistExpr::Table(t) => return Ok(vec![LeafDist::Table(t.clone()); configs]),
        DistExpr::Gaussian(g) => return Ok(vec![LeafDist::Gaussian(g.clone()); configs]),
        DistExpr::Conditional(bs) => bs,
    };

    let slot = |t: &GuardTest| parents.iter().position(|p| *p == t.variable).expect("guard parent classified");
    for t in branches.iter().flat_map(|b| &b.guard) {
        if !parent_states[slot(t)].contains(&t.state) {
            return Err(ModelError::UnknownParentState {
                variable: node.name.clone(),
                parent: t.variable.clone(),
                state: t.state.clone(),
            });
        }
    }

    let mut out = Vec::with_capacity(configs);
    for cfg in 0..configs {
        let states = decode(parent_states, cfg);
        let matched = branches
            .iter()
            .find(|b| b.guard.iter().all(|t| parent_states[slot(t)][states[slot(t)]] == t.state));
        match matched {
            Some(b) => out.push(b.body.clone()),
            None => {
                return Err(ModelError::IncompleteTable {
                    variable: node.name.clone(),
                    configuration: describe(parents, parent_states, cfg),
                })
            }
        }
    }
    Ok(out)
}

fn decode(parent_states: &[&[String]], mut cfg: usize) -> Vec<usize> {
    let mut states = vec![0; parent_states.len()];
    for k in (0..parent_states.len()).rev() {
        states[k] = cfg % parent_states[k].len();
        cfg /= parent_states[k].len();
    }
    states
}

fn describe(parents: &[String], parent_states: &[&[String]], cfg: usize) -> String {
    if parents.is_empty() {
        return "(none)".into();
    }
    let states = decode(parent_states, cfg);
    parents
        .iter()
        .enumerate()
        .map(|(k, p)| format!("{p}={}", parent_states[k][states[k]]))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders a network back to script form. Every configuration becomes an
/// explicit guarded branch, so `compile(&decompile(net)) == net`.
pub fn decompile(net: &BayesianNetwork) -> ModelAst {
    let mut nodes = Vec::with_capacity(net.len());
    for (i, v) in net.variables().iter().enumerate() {
        let domain = match &v.domain {
            Domain::Discrete(s) => DomainDecl::Discrete(s.clone()),
            Domain::Continuous => DomainDecl::Continuous,
        };
        let parents: Vec<String> = net.cpd(i).parents().into_iter().map(String::from).collect();
        let leaf = |cfg: usize| -> LeafDist {
            match net.cpd(i) {
                Cpd::Table(t) => LeafDist::Table(TableLiteral { probabilities: t.rows[cfg].clone() }),
                Cpd::Clg(c) => {
                    let row = &c.rows[cfg];
                    LeafDist::Gaussian(GaussianLiteral {
                        mean: row.intercept,
                        terms: c
                            .continuous_parents
                            .iter()
                            .zip(&row.coefficients)
                            .map(|(p, b)| LinearTerm { coefficient: *b, parent: p.clone() })
                            .collect(),
                        variance: row.variance,
                    })
                }
            }
        };
        let distribution = if net.discrete_parents(i).is_empty() {
            match leaf(0) {
                LeafDist::Table(t) => DistExpr::Table(t),
                LeafDist::Gaussian(g) => DistExpr::Gaussian(g),
            }
        } else {
            let dps = net.discrete_parents(i);
            let branches = (0..net.config_count(i))
                .map(|cfg| {
                    let states = net.decode_config(i, cfg);
                    let guard = dps
                        .iter()
                        .zip(states)
                        .map(|(&p, s)| GuardTest {
                            variable: net.variable(p).name.clone(),
                            state: net.variable(p).domain.states().unwrap()[s].clone(),
                        })
                        .collect();
                    Branch { guard, body: leaf(cfg) }
                })
                .collect();
            DistExpr::Conditional(branches)
        };
        nodes.push(NodeDef { name: v.name.clone(), description: String::new(), domain, parents, distribution });
    }
    ModelAst { nodes }
}
