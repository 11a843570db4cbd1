//! Wire types shared by the registry service, its client and the CLI, plus
//! the mapping from library errors to structured error bodies.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::CorpusError;
use crate::inference::{DatasetError, GibbsOptions, InferenceError, InferenceMethod, Marginals};
use crate::integration::{MergeError, MergeMethod, MergeOptions, MergeReport};
use crate::learning::LearnError;
use crate::model::{LoadError, ModelError, ValidationReport};
use crate::script::ScriptError;

/// Metadata and script supplied when registering a model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NewModel {
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub author: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    pub script: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub id: String,
    pub title: String,
    pub description: String,
    pub author: String,
    pub keywords: Vec<String>,
    pub script: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// A search hit: the record without its script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub id: String,
    pub title: String,
    pub description: String,
    pub author: String,
    pub keywords: Vec<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl From<&ModelRecord> for RecordSummary {
    fn from(r: &ModelRecord) -> Self {
        RecordSummary {
            id: r.id.clone(),
            title: r.title.clone(),
            description: r.description.clone(),
            author: r.author.clone(),
            keywords: r.keywords.clone(),
            created_at: r.created_at,
            updated_at: r.updated_at,
        }
    }
}

/// Partial update; absent fields keep their stored value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keywords: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InferRequest {
    /// Evidence script (`Variable = value` lines).
    #[serde(default)]
    pub evidence: String,
    /// Variables to report; empty means all.
    #[serde(default)]
    pub query: Vec<String>,
    /// Forces Gibbs sampling with these settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gibbs: Option<GibbsOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferResponse {
    pub method: InferenceMethod,
    pub marginals: Marginals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeBody {
    pub id1: String,
    pub id2: String,
    pub method: MergeMethod,
    #[serde(default)]
    pub options: MergeOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeResponse {
    pub id: String,
    pub report: MergeReport,
}

/// One problem found in a script, positioned when the parser knows where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl From<&ScriptError> for Diagnostic {
    fn from(e: &ScriptError) -> Self {
        let pos = e.pos();
        Diagnostic { code: e.code().into(), message: e.to_string(), line: Some(pos.line), column: Some(pos.column) }
    }
}

impl From<&ModelError> for Diagnostic {
    fn from(e: &ModelError) -> Self {
        Diagnostic { code: e.code().into(), message: e.to_string(), line: None, column: None }
    }
}

impl From<&LoadError> for Diagnostic {
    fn from(e: &LoadError) -> Self {
        match e {
            LoadError::Script(e) => e.into(),
            LoadError::Model(e) => e.into(),
        }
    }
}

/// Diagnostics for every validation finding.
pub fn validation_diagnostics(report: &ValidationReport) -> Vec<Diagnostic> {
    report
        .findings
        .iter()
        .map(|f| Diagnostic { code: "validation".into(), message: f.to_string(), line: None, column: None })
        .collect()
}

/// How a failure should be reported: HTTP status on the service, exit
/// status in the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Malformed or invalid input (400, exit 2).
    Input,
    /// Missing record (404, exit 2).
    NotFound,
    /// Inputs are individually fine but cannot be combined (409, exit 3).
    Conflict,
    /// The computation itself failed (422, exit 3).
    Computation,
    /// Storage or transport failure (500, exit 2).
    Internal,
}

impl ErrorClass {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorClass::Input => 400,
            ErrorClass::NotFound => 404,
            ErrorClass::Conflict => 409,
            ErrorClass::Computation => 422,
            ErrorClass::Internal => 500,
        }
    }

    pub fn from_http_status(status: u16) -> Self {
        match status {
            404 => ErrorClass::NotFound,
            409 => ErrorClass::Conflict,
            422 => ErrorClass::Computation,
            400..=499 => ErrorClass::Input,
            _ => ErrorClass::Internal,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input | ErrorClass::NotFound | ErrorClass::Internal => 2,
            ErrorClass::Conflict | ErrorClass::Computation => 3,
        }
    }
}

/// `{code, message, details}` error payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub details: Value,
}

impl ErrorBody {
    pub fn new(code: &str, message: impl Into<String>, details: Value) -> Self {
        ErrorBody { code: code.into(), message: message.into(), details }
    }

    pub fn invalid_script(diagnostics: Vec<Diagnostic>) -> Self {
        let message = diagnostics.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; ");
        ErrorBody::new("invalid_script", message, json!({ "diagnostics": diagnostics }))
    }

    pub fn not_found(id: &str) -> Self {
        ErrorBody::new("not_found", format!("no model with id `{id}`"), json!({ "id": id }))
    }
}

impl std::fmt::Display for ErrorBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.message, self.code)
    }
}

/// Library errors that can be reported over the wire.
pub trait ApiError: std::fmt::Display {
    fn class(&self) -> ErrorClass;
    fn body(&self) -> ErrorBody;
}

impl ApiError for ScriptError {
    fn class(&self) -> ErrorClass {
        ErrorClass::Input
    }

    fn body(&self) -> ErrorBody {
        let pos = self.pos();
        ErrorBody::new(self.code(), self.to_string(), json!({ "line": pos.line, "column": pos.column }))
    }
}

fn model_details(e: &ModelError) -> Value {
    match e {
        ModelError::Cycle { cycle } => json!({ "cycle": cycle }),
        ModelError::UnknownVariable(v) | ModelError::IncompleteAssignment(v) => json!({ "variable": v }),
        ModelError::InvalidValue { variable, .. } => json!({ "variable": variable }),
        _ => Value::Null,
    }
}

impl ApiError for ModelError {
    fn class(&self) -> ErrorClass {
        ErrorClass::Input
    }

    fn body(&self) -> ErrorBody {
        ErrorBody::new(self.code(), self.to_string(), model_details(self))
    }
}

impl ApiError for LoadError {
    fn class(&self) -> ErrorClass {
        ErrorClass::Input
    }

    fn body(&self) -> ErrorBody {
        ErrorBody::invalid_script(vec![self.into()])
    }
}

impl ApiError for InferenceError {
    fn class(&self) -> ErrorClass {
        match self {
            InferenceError::ZeroProbabilityEvidence => ErrorClass::Computation,
            _ => ErrorClass::Input,
        }
    }

    fn body(&self) -> ErrorBody {
        let details = match self {
            InferenceError::UnknownVariable(v)
            | InferenceError::NonLeafContinuousEvidence(v)
            | InferenceError::ContinuousNonLeaf(v)
            | InferenceError::ContinuousVariable(v) => json!({ "variable": v }),
            InferenceError::InvalidEvidence(e) => model_details(e),
            _ => Value::Null,
        };
        ErrorBody::new(self.code(), self.to_string(), details)
    }
}

impl ApiError for MergeError {
    fn class(&self) -> ErrorClass {
        match self {
            MergeError::CycleInUnion { .. } => ErrorClass::Conflict,
            MergeError::NotConverged { .. }
            | MergeError::InfeasibleSupport
            | MergeError::ZeroProbabilityEvidence { .. } => ErrorClass::Computation,
            _ => ErrorClass::Input,
        }
    }

    fn body(&self) -> ErrorBody {
        let details = match self {
            MergeError::DomainMismatch(v) | MergeError::ContinuousVariablesPresent(v) => json!({ "variable": v }),
            MergeError::SharedVariablesPresent(v) => json!({ "shared": v }),
            MergeError::StateSpaceTooLarge { states, cap } => {
                json!({ "states": states.to_string(), "cap": cap.to_string() })
            }
            MergeError::CycleInUnion { cycle } => json!({ "cycle": cycle }),
            MergeError::NotConverged { iterations, gap } => json!({ "iterations": iterations, "gap": gap }),
            MergeError::ZeroProbabilityEvidence { rejected, attempts } => {
                json!({ "rejected": rejected, "attempts": attempts })
            }
            MergeError::Model(e) => model_details(e),
            _ => Value::Null,
        };
        ErrorBody::new(self.code(), self.to_string(), details)
    }
}

impl ApiError for LearnError {
    fn class(&self) -> ErrorClass {
        ErrorClass::Input
    }

    fn body(&self) -> ErrorBody {
        ErrorBody::new(self.code(), self.to_string(), Value::Null)
    }
}

impl ApiError for DatasetError {
    fn class(&self) -> ErrorClass {
        ErrorClass::Input
    }

    fn body(&self) -> ErrorBody {
        ErrorBody::new(self.code(), self.to_string(), Value::Null)
    }
}

impl ApiError for CorpusError {
    fn class(&self) -> ErrorClass {
        match self {
            CorpusError::Io { .. } => ErrorClass::Internal,
            CorpusError::Inference(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }

    fn body(&self) -> ErrorBody {
        match self {
            CorpusError::UnknownRegion(r) => ErrorBody::new(self.code(), self.to_string(), json!({ "region": r })),
            CorpusError::Inference(e) => e.body(),
            CorpusError::Model(e) => e.body(),
            _ => ErrorBody::new(self.code(), self.to_string(), Value::Null),
        }
    }
}
