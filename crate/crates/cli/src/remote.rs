//! `bayescloud remote ...`: the registry service through its HTTP client.

use std::path::PathBuf;

use bayescloud_client::Client;
use bayescloud_core::api::{InferRequest, MergeBody, ModelUpdate, NewModel, RecordSummary};
use bayescloud_core::inference::GibbsOptions;
use bayescloud_core::integration::{MergeMethod, MergeOptions};
use clap::{Args, Subcommand};
use serde_json::json;

use crate::output::{self, emit, CliError};
use crate::{read_input, runtime};

#[derive(Args)]
pub struct RemoteArgs {
    /// Service root URL.
    #[arg(long, env = "BAYESCLOUD_URL", default_value = "http://localhost:8080")]
    url: String,
    #[command(subcommand)]
    command: RemoteCommand,
}

#[derive(Args)]
struct Metadata {
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    description: Option<String>,
    #[arg(long)]
    author: Option<String>,
    /// Search keyword; repeat for several.
    #[arg(long = "keyword")]
    keywords: Vec<String>,
}

#[derive(Subcommand)]
enum RemoteCommand {
    /// Register a model script.
    Register {
        model: String,
        #[command(flatten)]
        meta: Metadata,
    },
    /// Search by keywords; an empty query lists everything.
    Search {
        #[arg(default_value = "")]
        query: String,
    },
    /// Show a record; `--script-out` saves its script.
    Get {
        id: String,
        #[arg(long)]
        script_out: Option<PathBuf>,
    },
    /// Change the given fields of a record.
    Update {
        id: String,
        #[command(flatten)]
        meta: Metadata,
        /// Replacement script file.
        #[arg(long)]
        script: Option<String>,
    },
    Delete { id: String },
    /// Inference on a stored model.
    Infer {
        id: String,
        #[arg(long)]
        evidence: Option<String>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        query: Vec<String>,
        #[arg(long)]
        gibbs: bool,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 5_000)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Merge two stored models into a new record.
    Merge {
        id1: String,
        id2: String,
        #[arg(long, default_value = "optimize")]
        method: MergeMethod,
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn summaries(rows: &[RecordSummary]) -> String {
    rows.iter().map(|r| format!("{}  {}  [{}]\n", r.id, r.title, r.keywords.join(", "))).collect()
}

pub fn run(json: bool, args: RemoteArgs) -> Result<(), CliError> {
    let client = Client::new(&args.url);
    let rt = runtime()?;
    match args.command {
        RemoteCommand::Register { model, meta } => {
            let new = NewModel {
                title: meta.title.unwrap_or_default(),
                description: meta.description.unwrap_or_default(),
                author: meta.author.unwrap_or_default(),
                keywords: meta.keywords,
                script: read_input(&model)?,
            };
            let id = rt.block_on(client.register(&new)).map_err(CliError::client)?;
            emit(json, &json!({ "id": id }), || format!("{id}\n"));
        }
        RemoteCommand::Search { query } => {
            let rows = rt.block_on(client.search(&query)).map_err(CliError::client)?;
            emit(json, &rows, || summaries(&rows));
        }
        RemoteCommand::Get { id, script_out } => {
            let record = rt.block_on(client.get(&id)).map_err(CliError::client)?;
            if let Some(path) = &script_out {
                std::fs::write(path, &record.script).map_err(|e| CliError::io(&path.display().to_string(), e))?;
            }
            emit(json, &record, || {
                format!(
                    "{}  {}\nauthor: {}\nkeywords: {}\nupdated: {}\n\n{}",
                    record.id,
                    record.title,
                    record.author,
                    record.keywords.join(", "),
                    record.updated_at.to_rfc3339(),
                    record.script
                )
            });
        }
        RemoteCommand::Update { id, meta, script } => {
            let update = ModelUpdate {
                title: meta.title,
                description: meta.description,
                author: meta.author,
                keywords: (!meta.keywords.is_empty()).then_some(meta.keywords),
                script: script.as_deref().map(read_input).transpose()?,
            };
            let record = rt.block_on(client.update(&id, &update)).map_err(CliError::client)?;
            emit(json, &record, || format!("updated {}\n", record.id));
        }
        RemoteCommand::Delete { id } => {
            rt.block_on(client.delete(&id)).map_err(CliError::client)?;
            emit(json, &json!({ "deleted": id }), || format!("deleted {id}\n"));
        }
        RemoteCommand::Infer { id, evidence, query, gibbs, samples, burn_in, seed } => {
            let request = InferRequest {
                evidence: evidence.as_deref().map(read_input).transpose()?.unwrap_or_default(),
                query,
                gibbs: gibbs.then_some(GibbsOptions { samples, burn_in, seed }),
            };
            let response = rt.block_on(client.infer(&id, &request)).map_err(CliError::client)?;
            emit(json, &response, || output::marginals(&response.marginals, Some(response.method)));
        }
        RemoteCommand::Merge { id1, id2, method, samples, seed } => {
            let body = MergeBody { id1, id2, method, options: MergeOptions { sample_count: samples, seed, ..Default::default() } };
            let response = rt.block_on(client.merge(&body)).map_err(CliError::client)?;
            emit(json, &response, || format!("new model {}\n{}", response.id, output::merge_report(&response.report)));
        }
    }
    Ok(())
}
