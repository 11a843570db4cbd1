use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("evidence has probability zero under the model")]
    ZeroProbabilityEvidence,
    #[error("continuous evidence on `{0}`, which has children")]
    NonLeafContinuousEvidence(String),
    #[error("continuous `{0}` has children; exact hybrid inference needs continuous leaves")]
    ContinuousNonLeaf(String),
    #[error("variable elimination needs an all-discrete network; `{0}` is continuous")]
    ContinuousVariable(String),
    #[error(transparent)]
    InvalidEvidence(ModelError),
    #[error("invalid sampler settings: {0}")]
    InvalidSettings(String),
}

impl InferenceError {
    pub fn code(&self) -> &'static str {
        match self {
            InferenceError::UnknownVariable(_) => "unknown_variable",
            InferenceError::ZeroProbabilityEvidence => "zero_probability_evidence",
            InferenceError::NonLeafContinuousEvidence(_) => "non_leaf_continuous_evidence",
            InferenceError::ContinuousNonLeaf(_) => "continuous_non_leaf",
            InferenceError::ContinuousVariable(_) => "continuous_variable",
            InferenceError::InvalidEvidence(e) => e.code(),
            InferenceError::InvalidSettings(_) => "invalid_settings",
        }
    }
}

impl From<ModelError> for InferenceError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownVariable(v) => InferenceError::UnknownVariable(v),
            other => InferenceError::InvalidEvidence(other),
        }
    }
}
