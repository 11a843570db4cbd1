use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScriptError {
    #[error("{pos}: syntax error: expected {expected}")]
    Syntax { pos: Pos, expected: String },
    #[error("{pos}: node `{name}` is defined more than once")]
    DuplicateNode { pos: Pos, name: String },
    #[error("{pos}: `{variable}` has no state named `{state}`")]
    UnknownStateReference { pos: Pos, variable: String, state: String },
    #[error("{pos}: probability {value} is outside [0, 1]")]
    ProbabilityOutOfRange { pos: Pos, value: f64 },
    #[error("{pos}: `{variable}` needs at least two distinct states")]
    TooFewStates { pos: Pos, variable: String },
    #[error("{pos}: state `{state}` of `{variable}` is declared twice")]
    DuplicateState { pos: Pos, variable: String, state: String },
    #[error("{pos}: table for `{variable}` has no entry for state `{state}`")]
    MissingState { pos: Pos, variable: String, state: String },
    #[error("{pos}: variance must be positive, got {value}")]
    NonPositiveVariance { pos: Pos, value: f64 },
    #[error("{pos}: `{name}` is neither declared earlier nor listed as a parent")]
    UndeclaredReference { pos: Pos, name: String },
    #[error("{pos}: {message}")]
    KindMismatch { pos: Pos, message: String },
    #[error("{pos}: `{variable}` is assigned more than once")]
    DuplicateAssignment { pos: Pos, variable: String },
}

impl ScriptError {
    pub fn pos(&self) -> Pos {
        match self {
            ScriptError::Syntax { pos, .. }
            | ScriptError::DuplicateNode { pos, .. }
            | ScriptError::UnknownStateReference { pos, .. }
            | ScriptError::ProbabilityOutOfRange { pos, .. }
            | ScriptError::TooFewStates { pos, .. }
            | ScriptError::DuplicateState { pos, .. }
            | ScriptError::MissingState { pos, .. }
            | ScriptError::NonPositiveVariance { pos, .. }
            | ScriptError::UndeclaredReference { pos, .. }
            | ScriptError::KindMismatch { pos, .. }
            | ScriptError::DuplicateAssignment { pos, .. } => *pos,
        }
    }

    /// Stable machine token for the error family.
    pub fn code(&self) -> &'static str {
        match self {
            ScriptError::Syntax { .. } => "syntax_error",
            ScriptError::DuplicateNode { .. } => "duplicate_node",
            ScriptError::UnknownStateReference { .. } => "unknown_state_reference",
            ScriptError::ProbabilityOutOfRange { .. } => "probability_out_of_range",
            ScriptError::TooFewStates { .. } => "too_few_states",
            ScriptError::DuplicateState { .. } => "duplicate_state",
            ScriptError::MissingState { .. } => "missing_state",
            ScriptError::NonPositiveVariance { .. } => "non_positive_variance",
            ScriptError::UndeclaredReference { .. } => "undeclared_reference",
            ScriptError::KindMismatch { .. } => "kind_mismatch",
            ScriptError::DuplicateAssignment { .. } => "duplicate_assignment",
        }
    }
}
