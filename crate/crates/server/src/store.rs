//! File-backed model registry: one JSON document per record plus an
//! in-memory snapshot that readers share without blocking writers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use bayescloud_core::api::{
    validation_diagnostics, ApiError, Diagnostic, ErrorBody, ErrorClass, InferRequest, InferResponse, MergeBody,
    MergeResponse, ModelRecord, ModelUpdate, NewModel, RecordSummary,
};
use bayescloud_core::inference::{infer, InferenceError};
use bayescloud_core::integration::{merge, MergeError, MergeRequest};
use bayescloud_core::model::{decompile, load_network, validate, BayesianNetwork};
use bayescloud_core::script::{parse_evidence, serialize_model, ScriptError};
use chrono::{DateTime, TimeDelta, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("no model with id `{0}`")]
    NotFound(String),
    #[error("a title is required")]
    MissingTitle,
    #[error("script is invalid: {}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidScript(Vec<Diagnostic>),
    #[error("{path}: {message}")]
    Storage { path: PathBuf, message: String },
    #[error(transparent)]
    Evidence(#[from] ScriptError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Merge(#[from] MergeError),
}

impl ApiError for RegistryError {
    fn class(&self) -> ErrorClass {
        match self {
            RegistryError::NotFound(_) => ErrorClass::NotFound,
            RegistryError::MissingTitle | RegistryError::InvalidScript(_) => ErrorClass::Input,
            RegistryError::Storage { .. } => ErrorClass::Internal,
            RegistryError::Evidence(e) => e.class(),
            RegistryError::Inference(e) => e.class(),
            RegistryError::Merge(e) => e.class(),
        }
    }

    fn body(&self) -> ErrorBody {
        match self {
            RegistryError::NotFound(id) => ErrorBody::not_found(id),
            RegistryError::MissingTitle => {
                ErrorBody::new("missing_title", self.to_string(), serde_json::json!({ "field": "title" }))
            }
            RegistryError::InvalidScript(d) => ErrorBody::invalid_script(d.clone()),
            RegistryError::Storage { .. } => ErrorBody::new("storage_error", self.to_string(), serde_json::Value::Null),
            RegistryError::Evidence(e) => e.body(),
            RegistryError::Inference(e) => e.body(),
            RegistryError::Merge(e) => e.body(),
        }
    }
}

type Snapshot = Arc<BTreeMap<String, Arc<ModelRecord>>>;

pub struct Registry {
    dir: PathBuf,
    snapshot: RwLock<Snapshot>,
    writer: Mutex<()>,
}

/// Compiles and validates a script, collecting every problem.
pub fn check_script(script: &str) -> Result<BayesianNetwork, RegistryError> {
    let net = load_network(script).map_err(|e| RegistryError::InvalidScript(vec![(&e).into()]))?;
    let report = validate(&net);
    if !report.is_valid() {
        return Err(RegistryError::InvalidScript(validation_diagnostics(&report)));
    }
    Ok(net)
}

/// Lower-cased alphanumeric tokens.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

fn record_tokens(r: &ModelRecord) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = tokens(&r.title).chain(tokens(&r.description)).collect();
    for k in &r.keywords {
        out.extend(tokens(k));
    }
    out
}

impl Registry {
    /// Opens (creating if needed) the registry stored under `dir`.
    pub fn open(dir: &Path) -> Result<Self, RegistryError> {
        let records_dir = dir.join("models");
        std::fs::create_dir_all(&records_dir).map_err(|e| storage(&records_dir, e))?;
        let mut records = BTreeMap::new();
        let entries = std::fs::read_dir(&records_dir).map_err(|e| storage(&records_dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| storage(&records_dir, e))?.path();
            if path.extension().is_some_and(|x| x == "json") {
                let text = std::fs::read_to_string(&path).map_err(|e| storage(&path, e))?;
                let record: ModelRecord = serde_json::from_str(&text).map_err(|e| storage(&path, e))?;
                records.insert(record.id.clone(), Arc::new(record));
            }
        }
        Ok(Registry { dir: records_dir, snapshot: RwLock::new(Arc::new(records)), writer: Mutex::new(()) })
    }

    fn current(&self) -> Snapshot {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn persist(&self, record: &ModelRecord) -> Result<(), RegistryError> {
        let path = self.path(&record.id);
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(record).expect("records serialize");
        std::fs::write(&tmp, text).map_err(|e| storage(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| storage(&path, e))
    }

    fn publish(&self, edit: impl FnOnce(&mut BTreeMap<String, Arc<ModelRecord>>)) {
        let mut guard = self.snapshot.write().expect("snapshot lock");
        let mut next = (**guard).clone();
        edit(&mut next);
        *guard = Arc::new(next);
    }

    pub fn len(&self) -> usize {
        self.current().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn register(&self, model: NewModel) -> Result<ModelRecord, RegistryError> {
        if model.title.trim().is_empty() {
            return Err(RegistryError::MissingTitle);
        }
        check_script(&model.script)?;
        let _writer = self.writer.lock().expect("writer lock");
        let now = Utc::now();
        let record = ModelRecord {
            id: uuid::Uuid::new_v4().simple().to_string(),
            title: model.title,
            description: model.description,
            author: model.author,
            keywords: model.keywords,
            script: model.script,
            created_at: now,
            updated_at: now,
        };
        self.persist(&record)?;
        let stored = Arc::new(record.clone());
        self.publish(|m| {
            m.insert(record.id.clone(), stored);
        });
        Ok(record)
    }

    pub fn get(&self, id: &str) -> Result<Arc<ModelRecord>, RegistryError> {
        self.current().get(id).cloned().ok_or_else(|| RegistryError::NotFound(id.into()))
    }

    /// Applies the present fields; nothing is stored unless every check passes.
    pub fn update(&self, id: &str, update: ModelUpdate) -> Result<ModelRecord, RegistryError> {
        if update.title.as_deref().is_some_and(|t| t.trim().is_empty()) {
            return Err(RegistryError::MissingTitle);
        }
        if let Some(script) = &update.script {
            check_script(script)?;
        }
        let _writer = self.writer.lock().expect("writer lock");
        let mut record = (*self.get(id)?).clone();
        if let Some(v) = update.title {
            record.title = v;
        }
        if let Some(v) = update.description {
            record.description = v;
        }
        if let Some(v) = update.author {
            record.author = v;
        }
        if let Some(v) = update.keywords {
            record.keywords = v;
        }
        if let Some(v) = update.script {
            record.script = v;
        }
        record.updated_at = advance(record.updated_at);
        self.persist(&record)?;
        let stored = Arc::new(record.clone());
        self.publish(|m| {
            m.insert(record.id.clone(), stored);
        });
        Ok(record)
    }

    pub fn delete(&self, id: &str) -> Result<(), RegistryError> {
        let _writer = self.writer.lock().expect("writer lock");
        self.get(id)?;
        let path = self.path(id);
        std::fs::remove_file(&path).map_err(|e| storage(&path, e))?;
        self.publish(|m| {
            m.remove(id);
        });
        Ok(())
    }

    /// Records matching at least one query token, most matched tokens first,
    /// then most recently updated. An empty query lists everything, newest
    /// first.
    pub fn search(&self, query: &str) -> Vec<RecordSummary> {
        let wanted: BTreeSet<String> = tokens(query).collect();
        let snapshot = self.current();
        let mut hits: Vec<(usize, &ModelRecord)> = snapshot
            .values()
            .map(|r| {
                let have = record_tokens(r);
                (wanted.iter().filter(|t| have.contains(*t)).count(), r.as_ref())
            })
            .filter(|(score, _)| wanted.is_empty() || *score > 0)
            .collect();
        hits.sort_by(|(sa, a), (sb, b)| {
            sb.cmp(sa).then_with(|| b.updated_at.cmp(&a.updated_at)).then_with(|| a.id.cmp(&b.id))
        });
        hits.into_iter().map(|(_, r)| r.into()).collect()
    }

    /// Runs inference on the stored model; nothing is cached between calls.
    pub fn infer(&self, id: &str, request: &InferRequest) -> Result<InferResponse, RegistryError> {
        let record = self.get(id)?;
        let net = check_script(&record.script)?;
        let evidence = parse_evidence(&request.evidence)?;
        let (marginals, method) = infer(&net, &evidence, &request.query, request.gibbs.as_ref())?;
        Ok(InferResponse { method, marginals })
    }

    /// Merges two stored models and registers the result.
    pub fn merge(&self, body: &MergeBody) -> Result<MergeResponse, RegistryError> {
        let (r1, r2) = (self.get(&body.id1)?, self.get(&body.id2)?);
        let (bn1, bn2) = (check_script(&r1.script)?, check_script(&r2.script)?);
        let (net, report) = merge(&MergeRequest { bn1: &bn1, bn2: &bn2, method: body.method, options: body.options })?;
        let mut keywords = r1.keywords.clone();
        for k in &r2.keywords {
            if !keywords.contains(k) {
                keywords.push(k.clone());
            }
        }
        let author = if r1.author == r2.author || r2.author.is_empty() {
            r1.author.clone()
        } else if r1.author.is_empty() {
            r2.author.clone()
        } else {
            format!("{}, {}", r1.author, r2.author)
        };
        let method = serde_json::to_value(body.method).expect("method serializes");
        let record = self.register(NewModel {
            title: format!("{} + {}", r1.title, r2.title),
            description: format!("Merged from {} and {} ({} method)", r1.id, r2.id, method.as_str().unwrap_or("")),
            author,
            keywords,
            script: serialize_model(&decompile(&net)),
        })?;
        Ok(MergeResponse { id: record.id, report })
    }
}

/// `now`, but strictly after `previous`.
fn advance(previous: DateTime<Utc>) -> DateTime<Utc> {
    let now = Utc::now();
    if now > previous {
        now
    } else {
        previous + TimeDelta::nanoseconds(1)
    }
}

fn storage(path: &Path, e: impl std::fmt::Display) -> RegistryError {
    RegistryError::Storage { path: path.to_path_buf(), message: e.to_string() }
}
