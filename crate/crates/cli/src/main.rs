//! `bayescloud`: validate, reason over, merge, sample and learn Bayesian
//! network scripts, build the EVD corpus, and run or talk to the registry.

mod output;
mod remote;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use bayescloud_core::api::{validation_diagnostics, ErrorClass, InferResponse};
use bayescloud_core::corpus::{build_corpus_with, corpus_script, generate_geospatial, run_scenario, GeoParams};
use bayescloud_core::inference::{infer, sample_forward, Dataset, GibbsOptions};
use bayescloud_core::integration::{merge, MergeMethod, MergeOptions, MergeRequest};
use bayescloud_core::learning::{learn_parameters, learn_structure, LearnOptions, Structure};
use bayescloud_core::model::{decompile, load_network, validate, BayesianNetwork};
use bayescloud_core::script::{parse_evidence, serialize_model, Evidence};
use clap::{Args, Parser, Subcommand};
use output::{emit, CliError};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bayescloud", version, about = "Bayesian network modeling, reasoning and model sharing")]
struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a model script compiles and its distributions are valid.
    Validate { model: String },
    /// Posterior marginals given evidence.
    Infer {
        model: String,
        /// Evidence script file, or `-` for standard input.
        #[arg(long)]
        evidence: Option<String>,
        /// Variables to report (comma separated); all when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        query: Vec<String>,
        #[command(flatten)]
        gibbs: GibbsArgs,
    },
    /// Integrate two models into one.
    Merge {
        a: String,
        b: String,
        #[arg(long, default_value = "optimize")]
        method: MergeMethod,
        /// Samples drawn by the simulation method.
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Forward-sample a model into a CSV file.
    Sample {
        model: String,
        #[arg(short = 'n', long = "count")]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the distributions of a structure (given as a script) to data.
    LearnParams {
        structure: String,
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Write the learned script here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a structure by BIC hill climbing, then fit it.
    LearnStructure {
        #[arg(long)]
        data: String,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_parents: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a geospatial dangerousness pyramid.
    GenGeo {
        #[command(flatten)]
        geo: GeoArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the EVD model corpus and its manifest.
    Corpus {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        geo: GeoArgs,
    },
    /// Regional hot-zone risk given region reports.
    Scenario {
        model: String,
        /// Evidence script of reports, or `-` for standard input.
        #[arg(long)]
        reports: Option<String>,
    },
    /// Run the registry service.
    Serve {
        #[arg(long, env = bayescloud_server::PORT_ENV, default_value_t = bayescloud_server::DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = bayescloud_server::DATA_DIR_ENV, default_value = "bayescloud-data")]
        data_dir: PathBuf,
        /// Built workbench assets to serve under /ui.
        #[arg(long, env = "BAYESCLOUD_UI_DIR")]
        ui_dir: Option<PathBuf>,
    },
    /// Talk to a running registry service.
    Remote(remote::RemoteArgs),
}

#[derive(Args)]
struct GibbsArgs {
    /// Use Gibbs sampling even when exact inference applies.
    #[arg(long)]
    gibbs: bool,
    /// Gibbs sweeps, including burn-in.
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long, default_value_t = 5_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GibbsArgs {
    fn options(&self) -> Option<GibbsOptions> {
        self.gibbs.then_some(GibbsOptions { samples: self.samples, burn_in: self.burn_in, seed: self.seed })
    }
}

#[derive(Args)]
struct GeoArgs {
    #[arg(long, default_value_t = 3)]
    depth: u32,
    #[arg(long, default_value_t = 0.9)]
    k: f64,
    #[arg(long, default_value_t = 0.05)]
    p0: f64,
}

impl GeoArgs {
    fn params(&self) -> Result<GeoParams, CliError> {
        Ok(GeoParams::new(self.depth, self.k, self.p0)?)
    }
}

/// Reads a file, or standard input for `-`.
pub(crate) fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| CliError::io(path, e))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
    }
}

fn write_output(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(&path.display().to_string(), e))
}

fn load(path: &str) -> Result<BayesianNetwork, CliError> {
    Ok(load_network(&read_input(path)?)?)
}

fn load_evidence(path: Option<&str>) -> Result<Evidence, CliError> {
    match path {
        Some(p) => Ok(parse_evidence(&read_input(p)?)?),
        None => Ok(Evidence::new()),
    }
}

fn script_of(net: &BayesianNetwork) -> String {
    serialize_model(&decompile(net))
}

fn read_data(path: &str, schema: Option<&[bayescloud_core::model::Variable]>) -> Result<Dataset, CliError> {
    Ok(Dataset::read_csv(read_input(path)?.as_bytes(), schema)?)
}

fn emit_learned(json: bool, out: Option<&PathBuf>, net: &BayesianNetwork, warnings: &[String]) -> Result<(), CliError> {
    let script = script_of(net);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = out {
        write_output(path, &script)?;
    }
    let arcs: Vec<_> = net.arcs().into_iter().collect();
    emit(json, &json!({ "script": script, "arcs": arcs, "warnings": warnings }), || {
        if out.is_some() {
            arcs.iter().map(|(a, b)| format!("{a} -> {b}\n")).collect()
        } else {
            script.clone()
        }
    });
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let json = cli.json;
    match cli.command {
        Command::Validate { model } => {
            let net = load(&model)?;
            let report = validate(&net);
            if !report.is_valid() {
                return Err(CliError {
                    class: ErrorClass::Input,
                    body: bayescloud_core::api::ErrorBody::invalid_script(validation_diagnostics(&report)),
                });
            }
            emit(json, &json!({ "valid": true, "variables": net.len(), "arcs": net.arcs().len() }), || "OK\n".into());
        }
        Command::Infer { model, evidence, query, gibbs } => {
            let net = load(&model)?;
            let evidence = load_evidence(evidence.as_deref())?;
            let (marginals, method) = infer(&net, &evidence, &query, gibbs.options().as_ref())?;
            let response = InferResponse { method, marginals };
            emit(json, &response, || output::marginals(&response.marginals, Some(response.method)));
        }
        Command::Merge { a, b, method, samples, seed, tolerance, out } => {
            let (bn1, bn2) = (load(&a)?, load(&b)?);
            let options = MergeOptions { sample_count: samples, seed, tolerance, ..Default::default() };
            let (net, report) = merge(&MergeRequest { bn1: &bn1, bn2: &bn2, method, options })?;
            write_output(&out, &script_of(&net))?;
            emit(json, &report, || output::merge_report(&report));
        }
        Command::Sample { model, n, seed, out } => {
            let data = sample_forward(&load(&model)?, n, seed);
            let file = std::fs::File::create(&out).map_err(|e| CliError::io(&out.display().to_string(), e))?;
            data.write_csv(file)?;
            emit(json, &json!({ "rows": data.len(), "out": out }), || format!("wrote {} rows to {}\n", data.len(), out.display()));
        }
        Command::LearnParams { structure, data, alpha, out } => {
            let structure = Structure::from_network(&load(&structure)?);
            let data = read_data(&data, Some(&structure.variables))?;
            let opts = LearnOptions { dirichlet_alpha: alpha, ..Default::default() };
            let (net, warnings) = learn_parameters(&structure, &data, &opts)?;
            emit_learned(json, out.as_ref(), &net, &warnings)?;
        }
        Command::LearnStructure { data, restarts, seed, max_parents, alpha, out } => {
            let data = read_data(&data, None)?;
            let opts = LearnOptions { dirichlet_alpha: alpha, max_parents, restarts, seed };
            let (net, warnings) = learn_structure(&data, &opts)?;
            emit_learned(json, out.as_ref(), &net, &warnings)?;
        }
        Command::GenGeo { geo, out } => {
            let params = geo.params()?;
            let net = generate_geospatial(&params)?;
            write_output(&out, &corpus_script(&net))?;
            emit(json, &json!({ "nodes": net.len(), "arcs": net.arcs().len(), "params": params, "out": out }), || {
                format!("wrote {} regions to {}\n", net.len(), out.display())
            });
        }
        Command::Corpus { out, geo } => {
            let written = build_corpus_with(&out, &geo.params()?)?;
            emit(json, &json!({ "files": written }), || {
                written.iter().map(|p| format!("{}\n", p.display())).collect()
            });
        }
        Command::Scenario { model, reports } => {
            let net = load(&model)?;
            let risks = run_scenario(&net, &load_evidence(reports.as_deref())?)?;
            emit(json, &risks, || output::risk_table(&risks));
        }
        Command::Serve { port, data_dir, ui_dir } => {
            let config = bayescloud_server::ServerConfig { port, data_dir, ui_dir };
            eprintln!("serving on port {port}, data in {}", config.data_dir.display());
            runtime()?.block_on(bayescloud_server::serve(config))?;
        }
        Command::Remote(args) => remote::run(json, args)?,
    }
    Ok(())
}

pub(crate) fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Runtime::new().map_err(|e| CliError::io("runtime", e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.body);
            if let Some(diagnostics) = e.body.details.get("diagnostics").and_then(|d| d.as_array()) {
                for d in diagnostics {
                    eprintln!("  {}", d["message"].as_str().unwrap_or_default());
                }
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&json!({ "error": e.body })).expect("error serializes"));
            }
            ExitCode::from(e.class.exit_code() as u8)
        }
    }
}
