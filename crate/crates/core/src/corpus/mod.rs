//! The Ebola virus disease model corpus: the geospatial dangerousness
//! pyramid, regional spread, virus mutation and patient models, their
//! integrated composition, and the regional risk scenario.

mod geo;
mod models;

pub use geo::{generate_geospatial, parent_region, parse_region, region_name, GeoParams, COLD, HOT};
pub use models::{
    integrated, patient, regional_spread, regional_spread_for, virus_mutation, DANGEROUSNESS, HUMAN_POPULATION,
    IS_MUTATED, PATIENT_COUNTS,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{eliminate, InferenceError};
use crate::model::{decompile, BayesianNetwork, ModelError};
use crate::script::{serialize_model, Evidence};

pub const MANIFEST_FILE: &str = "corpus-manifest.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("`{0}` is not a region of the model")]
    UnknownRegion(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::InvalidParams(_) => "invalid_params",
            CorpusError::UnknownRegion(_) => "unknown_region",
            CorpusError::Io { .. } => "io_error",
            CorpusError::Model(e) => e.code(),
            CorpusError::Inference(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub nodes: usize,
    pub arcs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub geospatial: GeoParams,
    pub files: Vec<ManifestEntry>,
}

/// Renders a network as a script. Nodes outside the geospatial pyramid are
/// described as illustrative since their numbers are not from data.
pub fn corpus_script(net: &BayesianNetwork) -> String {
    let mut ast = decompile(net);
    for node in &mut ast.nodes {
        if node.name == region_name(1, 1, 1) && !node.parents.is_empty() {
            node.description = format!("{DANGEROUSNESS} of the whole region, illustrative");
        } else if parse_region(&node.name).is_none() {
            node.description = "illustrative".into();
        }
    }
    serialize_model(&ast)
}

/// The five corpus models, named by file.
pub fn corpus_models(params: &GeoParams) -> Result<Vec<(&'static str, BayesianNetwork)>, CorpusError> {
    Ok(vec![
        ("geospatial.bns", generate_geospatial(params)?),
        ("regional-spread.bns", regional_spread()),
        ("virus-mutation.bns", virus_mutation()),
        ("patient.bns", patient()),
        ("integrated.bns", integrated(params)?),
    ])
}

/// Writes the default corpus into `dir`.
pub fn build_corpus(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    build_corpus_with(dir, &GeoParams::default())
}

/// Writes the five model scripts and the manifest; returns the script paths.
pub fn build_corpus_with(dir: &Path, params: &GeoParams) -> Result<Vec<PathBuf>, CorpusError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (file, net) in corpus_models(params)? {
        let path = dir.join(file);
        std::fs::write(&path, corpus_script(&net)).map_err(io(&path))?;
        files.push(ManifestEntry { file: file.into(), nodes: net.len(), arcs: net.arcs().len() });
        written.push(path);
    }
    let manifest = CorpusManifest { geospatial: *params, files };
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(io(&path))?;
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRisk {
    pub region: String,
    pub hot_probability: f64,
}

/// Posterior hot-zone probability of every region given the reports, highest
/// first (ties by name).
pub fn run_scenario(net: &BayesianNetwork, reports: &Evidence) -> Result<Vec<RegionRisk>, CorpusError> {
    if let Some((name, _)) = reports.iter().find(|(name, _)| net.index_of(name).is_none()) {
        return Err(CorpusError::UnknownRegion(name.clone()));
    }
    let regions: Vec<String> =
        net.variables().iter().filter(|v| parse_region(&v.name).is_some()).map(|v| v.name.clone()).collect();
    if regions.is_empty() {
        return Ok(Vec::new());
    }
    let marginals = eliminate(net, reports, &regions)?;
    let mut risks: Vec<RegionRisk> = regions
        .into_iter()
        .map(|region| {
            let hot_probability = marginals.probability(&region, HOT).unwrap_or(0.0);
            RegionRisk { region, hot_probability }
        })
        .collect();
    risks.sort_by(|a, b| b.hot_probability.total_cmp(&a.hot_probability).then_with(|| a.region.cmp(&b.region)));
    Ok(risks)
}
