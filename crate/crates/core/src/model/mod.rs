//! Compiled Bayesian networks and the joint factorization
//! P(X1..Xn) = prod_i P(Xi | Pa(Xi)).

mod compile;
mod error;
mod network;
mod validate;

use std::collections::BTreeMap;

pub use compile::{compile, decompile, NORMALIZATION_TOLERANCE};
pub use error::ModelError;
pub(crate) use network::topological_order;
pub use network::{normal_log_density, BayesianNetwork, Cell, ClgRow, ClgSpec, Cpd, DiscreteTable, Domain, Variable};
pub use validate::{validate, Finding, ValidationReport};

use crate::script::{parse_model, Evidence, Observation, ScriptError};

/// A value for every variable of a network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment(pub BTreeMap<String, Observation>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(mut self, variable: &str, state: &str) -> Self {
        self.0.insert(variable.into(), Observation::State(state.into()));
        self
    }

    pub fn real(mut self, variable: &str, value: f64) -> Self {
        self.0.insert(variable.into(), Observation::Real(value));
        self
    }
}

impl From<Evidence> for Assignment {
    fn from(e: Evidence) -> Self {
        Assignment(e.assignments)
    }
}

/// Error from going straight from script text to a network.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl LoadError {
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Script(e) => e.code(),
            LoadError::Model(e) => e.code(),
        }
    }
}

/// Parses and compiles script text.
pub fn load_network(text: &str) -> Result<BayesianNetwork, LoadError> {
    Ok(compile(&parse_model(text)?)?)
}

impl BayesianNetwork {
    /// Resolves one observation against variable `i`'s domain.
    pub fn resolve(&self, i: usize, value: &Observation) -> Result<Cell, ModelError> {
        let v = self.variable(i);
        match (&v.domain, value) {
            (Domain::Discrete(states), Observation::State(s)) => states
                .iter()
                .position(|x| x == s)
                .map(Cell::State)
                .ok_or_else(|| ModelError::InvalidValue { variable: v.name.clone(), detail: format!("no state `{s}`") }),
            (Domain::Continuous, Observation::Real(x)) if x.is_finite() => Ok(Cell::Real(*x)),
            (Domain::Continuous, Observation::Real(x)) => {
                Err(ModelError::InvalidValue { variable: v.name.clone(), detail: format!("{x} is not finite") })
            }
            (Domain::Discrete(_), Observation::Real(x)) => Err(ModelError::InvalidValue {
                variable: v.name.clone(),
                detail: format!("discrete variable given number {x}"),
            }),
            (Domain::Continuous, Observation::State(s)) => Err(ModelError::InvalidValue {
                variable: v.name.clone(),
                detail: format!("continuous variable given state `{s}`"),
            }),
        }
    }

    fn cells(&self, a: &Assignment) -> Result<Vec<Cell>, ModelError> {
        for name in a.0.keys() {
            self.require(name)?;
        }
        (0..self.len())
            .map(|i| {
                let name = &self.variable(i).name;
                let value = a.0.get(name).ok_or_else(|| ModelError::IncompleteAssignment(name.clone()))?;
                self.resolve(i, value)
            })
            .collect()
    }

    /// Sum of local log factors; `-inf` for impossible assignments.
    pub fn log_joint_probability(&self, a: &Assignment) -> Result<f64, ModelError> {
        let cells = self.cells(a)?;
        Ok(self.log_joint_cells(&cells))
    }

    /// Product of local factors (mass times density for hybrid networks).
    pub fn joint_probability(&self, a: &Assignment) -> Result<f64, ModelError> {
        self.log_joint_probability(a).map(f64::exp)
    }

    pub fn log_joint_cells(&self, cells: &[Cell]) -> f64 {
        (0..self.len()).map(|i| self.local_log_prob(i, cells)).sum()
    }

    /// Dense joint over all configurations of an all-discrete network, in
    /// mixed radix with the first variable most significant.
    pub fn dense_joint(&self) -> Vec<f64> {
        assert!(self.is_all_discrete(), "dense_joint needs an all-discrete network");
        let cards: Vec<usize> = (0..self.len()).map(|i| self.cardinality(i)).collect();
        let total: usize = cards.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut cells = vec![Cell::State(0); self.len()];
        for _ in 0..total {
            let p: f64 = (0..self.len())
                .map(|i| match self.cpd(i) {
                    Cpd::Table(t) => t.rows[self.config_index(i, &cells)][cells[i].state()],
                    Cpd::Clg(_) => unreachable!(),
                })
                .product();
            out.push(p);
            for k in (0..cells.len()).rev() {
                let s = cells[k].state() + 1;
                if s < cards[k] {
                    cells[k] = Cell::State(s);
                    break;
                }
                cells[k] = Cell::State(0);
            }
        }
        out
    }
}
