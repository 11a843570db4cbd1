use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::error::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Discrete(Vec<String>),
    Continuous,
}

impl Domain {
    pub fn is_discrete(&self) -> bool {
        matches!(self, Domain::Discrete(_))
    }

    pub fn states(&self) -> Option<&[String]> {
        match self {
            Domain::Discrete(s) => Some(s),
            Domain::Continuous => None,
        }
    }

    /// Number of states; 0 for continuous.
    pub fn cardinality(&self) -> usize {
        self.states().map_or(0, |s| s.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub domain: Domain,
}

impl Variable {
    pub fn discrete(name: &str, states: &[&str]) -> Self {
        Variable { name: name.into(), domain: Domain::Discrete(states.iter().map(|s| s.to_string()).collect()) }
    }

    pub fn continuous(name: &str) -> Self {
        Variable { name: name.into(), domain: Domain::Continuous }
    }
}

/// Conditional probability table. Rows are indexed by parent configuration
/// in mixed radix, first parent most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTable {
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClgRow {
    pub intercept: f64,
    /// Aligned with [`ClgSpec::continuous_parents`].
    pub coefficients: Vec<f64>,
    pub variance: f64,
}

/// Conditional linear Gaussian: one regression row per discrete-parent
/// configuration (same indexing as [`DiscreteTable`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClgSpec {
    pub discrete_parents: Vec<String>,
    pub continuous_parents: Vec<String>,
    pub rows: Vec<ClgRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cpd {
    Table(DiscreteTable),
    Clg(ClgSpec),
}

impl Cpd {
    /// All parents: discrete first, then continuous.
    pub fn parents(&self) -> Vec<&str> {
        match self {
            Cpd::Table(t) => t.parents.iter().map(String::as_str).collect(),
            Cpd::Clg(c) => c
                .discrete_parents
                .iter()
                .chain(&c.continuous_parents)
                .map(String::as_str)
                .collect(),
        }
    }

    pub fn discrete_parents(&self) -> &[String] {
        match self {
            Cpd::Table(t) => &t.parents,
            Cpd::Clg(c) => &c.discrete_parents,
        }
    }
}

/// A value cell in a full network state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    State(usize),
    Real(f64),
}

impl Cell {
    pub fn state(self) -> usize {
        match self {
            Cell::State(s) => s,
            Cell::Real(_) => panic!("continuous cell read as a state"),
        }
    }

    pub fn real(self) -> f64 {
        match self {
            Cell::Real(x) => x,
            Cell::State(_) => panic!("discrete cell read as a real"),
        }
    }
}

/// A directed acyclic graph of variables with one local distribution each.
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    cpds: Vec<Cpd>,
    index: HashMap<String, usize>,
    discrete_parents: Vec<Vec<usize>>,
    continuous_parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl PartialEq for BayesianNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.cpds == other.cpds
    }
}

impl BayesianNetwork {
    /// Builds a network after structural checks. Numeric checks (row sums,
    /// variances) are left to [`super::validate`].
    pub fn new(variables: Vec<Variable>, cpds: Vec<Cpd>) -> Result<Self, ModelError> {
        if variables.len() != cpds.len() {
            return Err(ModelError::Shape {
                variable: String::new(),
                detail: format!("{} variables but {} distributions", variables.len(), cpds.len()),
            });
        }
        let mut index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
            if let Domain::Discrete(states) = &v.domain {
                let distinct: BTreeSet<&String> = states.iter().collect();
                if states.len() < 2 || distinct.len() != states.len() {
                    return Err(ModelError::DegenerateDomain(v.name.clone()));
                }
            }
        }
        let lookup = |child: &str, parent: &str| -> Result<usize, ModelError> {
            index.get(parent).copied().ok_or_else(|| ModelError::UnknownParent {
                variable: child.into(),
                parent: parent.into(),
            })
        };

        let mut discrete_parents = Vec::with_capacity(cpds.len());
        let mut continuous_parents = Vec::with_capacity(cpds.len());
        for (v, cpd) in variables.iter().zip(&cpds) {
            let (dp, cp) = match cpd {
                Cpd::Table(t) => {
                    if !v.domain.is_discrete() {
                        return Err(ModelError::KindMismatch {
                            variable: v.name.clone(),
                            detail: "continuous variable given a probability table".into(),
                        });
                    }
                    (t.parents.clone(), Vec::new())
                }
                Cpd::Clg(c) => {
                    if v.domain.is_discrete() {
                        return Err(ModelError::KindMismatch {
                            variable: v.name.clone(),
                            detail: "discrete variable given a Gaussian".into(),
                        });
                    }
                    (c.discrete_parents.clone(), c.continuous_parents.clone())
                }
            };
            let mut dpi = Vec::new();
            for p in &dp {
                let pi = lookup(&v.name, p)?;
                if !variables[pi].domain.is_discrete() {
                    return Err(if v.domain.is_discrete() {
                        ModelError::DiscreteChildOfContinuous { child: v.name.clone(), parent: p.clone() }
                    } else {
                        ModelError::KindMismatch {
                            variable: v.name.clone(),
                            detail: format!("`{p}` listed as a discrete parent but is continuous"),
                        }
                    });
                }
                dpi.push(pi);
            }
            let mut cpi = Vec::new();
            for p in &cp {
                let pi = lookup(&v.name, p)?;
                if variables[pi].domain.is_discrete() {
                    return Err(ModelError::KindMismatch {
                        variable: v.name.clone(),
                        detail: format!("`{p}` listed as a continuous parent but is discrete"),
                    });
                }
                cpi.push(pi);
            }
            let all: BTreeSet<usize> = dpi.iter().chain(&cpi).copied().collect();
            if all.len() != dpi.len() + cpi.len() || all.contains(&index[&v.name]) {
                return Err(ModelError::Shape {
                    variable: v.name.clone(),
                    detail: "repeated or self parent".into(),
                });
            }
            let configs: usize = dpi.iter().map(|&p| variables[p].domain.cardinality()).product();
            match cpd {
                Cpd::Table(t) => {
                    let card = v.domain.cardinality();
                    if t.rows.len() != configs || t.rows.iter().any(|r| r.len() != card) {
                        return Err(ModelError::Shape {
                            variable: v.name.clone(),
                            detail: format!("expected {configs} rows of {card} entries"),
                        });
                    }
                }
                Cpd::Clg(c) => {
                    if c.rows.len() != configs || c.rows.iter().any(|r| r.coefficients.len() != cpi.len()) {
                        return Err(ModelError::Shape {
                            variable: v.name.clone(),
                            detail: format!("expected {configs} rows with {} coefficients", cpi.len()),
                        });
                    }
                }
            }
            discrete_parents.push(dpi);
            continuous_parents.push(cpi);
        }

        let n = variables.len();
        let mut children = vec![Vec::new(); n];
        for i in 0..n {
            for &p in discrete_parents[i].iter().chain(&continuous_parents[i]) {
                children[p].push(i);
            }
        }
        let parent_lists: Vec<Vec<usize>> = (0..n)
            .map(|i| discrete_parents[i].iter().chain(&continuous_parents[i]).copied().collect())
            .collect();
        let topo = topological_order(&parent_lists).map_err(|cycle| ModelError::Cycle {
            cycle: cycle.into_iter().map(|i| variables[i].name.clone()).collect(),
        })?;

        Ok(BayesianNetwork { variables, cpds, index, discrete_parents, continuous_parents, children, topo })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty network is valid")
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    pub fn cpds(&self) -> &[Cpd] {
        &self.cpds
    }

    pub fn cpd(&self, i: usize) -> &Cpd {
        &self.cpds[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, ModelError> {
        self.index_of(name).ok_or_else(|| ModelError::UnknownVariable(name.into()))
    }

    pub fn discrete_parents(&self, i: usize) -> &[usize] {
        &self.discrete_parents[i]
    }

    pub fn continuous_parents(&self, i: usize) -> &[usize] {
        &self.continuous_parents[i]
    }

    /// Discrete then continuous parents.
    pub fn parents(&self, i: usize) -> Vec<usize> {
        self.discrete_parents[i].iter().chain(&self.continuous_parents[i]).copied().collect()
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.variables[i].domain.cardinality()
    }

    pub fn is_all_discrete(&self) -> bool {
        self.variables.iter().all(|v| v.domain.is_discrete())
    }

    /// Arc set as (parent, child) names.
    pub fn arcs(&self) -> BTreeSet<(String, String)> {
        let mut arcs = BTreeSet::new();
        for i in 0..self.len() {
            for p in self.parents(i) {
                arcs.insert((self.variables[p].name.clone(), self.variables[i].name.clone()));
            }
        }
        arcs
    }

    /// Index of the discrete-parent configuration of `i` under `cells`.
    pub fn config_index(&self, i: usize, cells: &[Cell]) -> usize {
        let mut idx = 0;
        for &p in &self.discrete_parents[i] {
            idx = idx * self.cardinality(p) + cells[p].state();
        }
        idx
    }

    /// Human-readable rendering of a configuration index, e.g. `A=a1, B=b2`.
    pub fn describe_config(&self, i: usize, config: usize) -> String {
        let parents = &self.discrete_parents[i];
        if parents.is_empty() {
            return "(none)".into();
        }
        let states = self.decode_config(i, config);
        parents
            .iter()
            .zip(states)
            .map(|(&p, s)| format!("{}={}", self.variables[p].name, self.variables[p].domain.states().unwrap()[s]))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Parent state indices for a configuration index.
    pub fn decode_config(&self, i: usize, mut config: usize) -> Vec<usize> {
        let parents = &self.discrete_parents[i];
        let mut states = vec![0; parents.len()];
        for (k, &p) in parents.iter().enumerate().rev() {
            let card = self.cardinality(p);
            states[k] = config % card;
            config /= card;
        }
        states
    }

    pub fn config_count(&self, i: usize) -> usize {
        self.discrete_parents[i].iter().map(|&p| self.cardinality(p)).product()
    }

    /// Log of the local factor P(X_i | Pa(X_i)) at `cells` (a density for
    /// continuous variables).
    pub fn local_log_prob(&self, i: usize, cells: &[Cell]) -> f64 {
        let cfg = self.config_index(i, cells);
        match &self.cpds[i] {
            Cpd::Table(t) => t.rows[cfg][cells[i].state()].ln(),
            Cpd::Clg(c) => {
                let row = &c.rows[cfg];
                let mean = self.clg_mean(i, row, cells);
                normal_log_density(cells[i].real(), mean, row.variance)
            }
        }
    }

    pub(crate) fn clg_mean(&self, i: usize, row: &ClgRow, cells: &[Cell]) -> f64 {
        row.intercept
            + self.continuous_parents[i]
                .iter()
                .zip(&row.coefficients)
                .map(|(&p, b)| b * cells[p].real())
                .sum::<f64>()
    }

    /// Set of variables that are `targets` or ancestors of them.
    pub fn ancestral_set(&self, targets: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<usize> = targets.into_iter().collect();
        while let Some(v) = stack.pop() {
            if keep[v] {
                continue;
            }
            keep[v] = true;
            stack.extend(self.parents(v));
        }
        keep
    }

    /// Copy with one variable renamed (references in other CPDs follow).
    pub fn rename_variable(&self, from: &str, to: &str) -> Result<Self, ModelError> {
        self.require(from)?;
        let rename = |s: &String| if s == from { to.to_string() } else { s.clone() };
        let variables = self
            .variables
            .iter()
            .map(|v| Variable { name: rename(&v.name), domain: v.domain.clone() })
            .collect();
        let cpds = self
            .cpds
            .iter()
            .map(|c| match c {
                Cpd::Table(t) => Cpd::Table(DiscreteTable { parents: t.parents.iter().map(rename).collect(), rows: t.rows.clone() }),
                Cpd::Clg(c) => Cpd::Clg(ClgSpec {
                    discrete_parents: c.discrete_parents.iter().map(rename).collect(),
                    continuous_parents: c.continuous_parents.iter().map(rename).collect(),
                    rows: c.rows.clone(),
                }),
            })
            .collect();
        Self::new(variables, cpds)
    }

    /// Copy in which discrete variable `name` lists its states in `order`
    /// (a permutation of the current states). Tables are permuted to match,
    /// so the represented distribution is unchanged.
    pub fn reorder_states(&self, name: &str, order: &[String]) -> Result<Self, ModelError> {
        let v = self.require(name)?;
        let current = self.variables[v].domain.states().ok_or_else(|| ModelError::KindMismatch {
            variable: name.into(),
            detail: "cannot reorder states of a continuous variable".into(),
        })?;
        // new_of_old[old] = position in the new order
        let mut new_of_old = Vec::with_capacity(current.len());
        for s in current {
            let pos = order.iter().position(|o| o == s).ok_or_else(|| ModelError::UnknownParentState {
                variable: name.into(),
                parent: name.into(),
                state: s.clone(),
            })?;
            new_of_old.push(pos);
        }
        if order.len() != current.len() {
            return Err(ModelError::DegenerateDomain(name.into()));
        }
        let mut variables = self.variables.clone();
        variables[v].domain = Domain::Discrete(order.to_vec());

        let mut cpds = self.cpds.clone();
        if let Cpd::Table(t) = &mut cpds[v] {
            for row in &mut t.rows {
                let mut new_row = vec![0.0; row.len()];
                for (old, &new) in new_of_old.iter().enumerate() {
                    new_row[new] = row[old];
                }
                *row = new_row;
            }
        }
        for &child in &self.children[v] {
            let Some(k) = self.discrete_parents[child].iter().position(|&p| p == v) else { continue };
            let remap = |old_cfg: usize| -> usize {
                let mut states = self.decode_config(child, old_cfg);
                states[k] = new_of_old[states[k]];
                let mut idx = 0;
                for (j, &p) in self.discrete_parents[child].iter().enumerate() {
                    idx = idx * self.cardinality(p) + states[j];
                }
                idx
            };
            match &mut cpds[child] {
                Cpd::Table(t) => {
                    let mut rows = t.rows.clone();
                    for (old, row) in t.rows.iter().enumerate() {
                        rows[remap(old)] = row.clone();
                    }
                    t.rows = rows;
                }
                Cpd::Clg(c) => {
                    let mut rows = c.rows.clone();
                    for (old, row) in c.rows.iter().enumerate() {
                        rows[remap(old)] = row.clone();
                    }
                    c.rows = rows;
                }
            }
        }
        Self::new(variables, cpds)
    }
}

pub fn normal_log_density(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (d * d / variance + (2.0 * std::f64::consts::PI * variance).ln())
}

/// Kahn's algorithm over parent lists; on failure returns one directed cycle.
pub(crate) fn topological_order(parents: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk parent links among the remaining nodes until one repeats.
    let remaining: Vec<bool> = (0..n).map(|i| indegree[i] > 0).collect();
    let start = (0..n).find(|&i| remaining[i]).unwrap();
    let mut seen = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut v = start;
    while seen[v] == usize::MAX {
        seen[v] = path.len();
        path.push(v);
        v = *parents[v].iter().find(|&&p| remaining[p]).unwrap();
    }
    let mut cycle: Vec<usize> = path[seen[v]..].to_vec();
    cycle.reverse();
    Err(cycle)
}
