use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("directed cycle: {}", cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },
    #[error("`{variable}` has no distribution for configuration {configuration}")]
    IncompleteTable { variable: String, configuration: String },
    #[error("row of `{variable}` at {configuration} sums to {sum}")]
    RowNotNormalized { variable: String, configuration: String, sum: f64 },
    #[error("`{variable}` variance at {configuration} is {variance}, must be positive")]
    VarianceNotPositive { variable: String, configuration: String, variance: f64 },
    #[error("`{variable}` tests `{parent} == {state}` but `{parent}` has no such state")]
    UnknownParentState { variable: String, parent: String, state: String },
    #[error("`{0}` needs at least two distinct states")]
    DegenerateDomain(String),
    #[error("variable `{0}` is defined more than once")]
    DuplicateVariable(String),
    #[error("`{variable}` refers to unknown parent `{parent}`")]
    UnknownParent { variable: String, parent: String },
    #[error("`{variable}` lists parent `{parent}` but its distribution never uses it")]
    UnreferencedParent { variable: String, parent: String },
    #[error("discrete `{child}` cannot depend on continuous `{parent}`")]
    DiscreteChildOfContinuous { child: String, parent: String },
    #[error("`{variable}`: {detail}")]
    KindMismatch { variable: String, detail: String },
    #[error("`{variable}`: {detail}")]
    Shape { variable: String, detail: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("assignment has no value for `{0}`")]
    IncompleteAssignment(String),
    #[error("invalid value for `{variable}`: {detail}")]
    InvalidValue { variable: String, detail: String },
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::Cycle { .. } => "cycle",
            ModelError::IncompleteTable { .. } => "incomplete_table",
            ModelError::RowNotNormalized { .. } => "row_not_normalized",
            ModelError::VarianceNotPositive { .. } => "variance_not_positive",
            ModelError::UnknownParentState { .. } => "unknown_parent_state",
            ModelError::DegenerateDomain(_) => "degenerate_domain",
            ModelError::DuplicateVariable(_) => "duplicate_variable",
            ModelError::UnknownParent { .. } => "unknown_parent",
            ModelError::UnreferencedParent { .. } => "unreferenced_parent",
            ModelError::DiscreteChildOfContinuous { .. } => "discrete_child_of_continuous",
            ModelError::KindMismatch { .. } => "kind_mismatch",
            ModelError::Shape { .. } => "shape",
            ModelError::UnknownVariable(_) => "unknown_variable",
            ModelError::IncompleteAssignment(_) => "incomplete_assignment",
            ModelError::InvalidValue { .. } => "invalid_value",
        }
    }
}
