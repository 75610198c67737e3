//! Command-line entry points: build an index, annotate tables, query the
//! lookup services, and score annotations.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! data errors (unreadable or malformed inputs).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use tabmatch::harness::io::write_annotations;
use tabmatch::harness::{evaluate, run_pipeline, Annotator, RunConfig, TargetSet, Task};
use tabmatch::kg::index_dir::{load_index, write_index, KgIndex};
use tabmatch::lookup::{fuse_and_normalize, query_services};
use tabmatch::numeric::{build_numeric_profiles, KsLabeler, PROFILE_CAP};
use tabmatch::{Error, KnowledgeGraph};

#[derive(Parser)]
#[command(
    name = "tabmatch",
    version,
    about = "Annotate tables with knowledge graph entities, classes, and relations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load N-Triples and write a prebuilt index directory.
    BuildKg {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seed for numeric profile sampling.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Annotate every table referenced by the target files.
    Annotate {
        /// Index directory, or an N-Triples file.
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        targets_cea: Option<PathBuf>,
        #[arg(long)]
        targets_cta: Option<PathBuf>,
        #[arg(long)]
        targets_cpa: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `workers` from the config file.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Show the fused entity ranking for one query.
    Lookup {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 100)]
        limit: usize,
        #[arg(long, default_value = "en")]
        language: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score predictions against gold answers and print a JSON report.
    Evaluate {
        #[arg(long)]
        task: Task,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Needed for CTA.
        #[arg(long)]
        kg: Option<PathBuf>,
    },
}

fn load_kg(path: &Path, seed: u64) -> Result<KgIndex, Error> {
    if path.is_dir() {
        return load_index(path);
    }
    let graph = KnowledgeGraph::load(path)?;
    let profiles = build_numeric_profiles(&graph, seed, PROFILE_CAP);
    let manifest = tabmatch::kg::index_dir::Manifest {
        format_version: tabmatch::kg::index_dir::FORMAT_VERSION,
        seed,
        similarity_method: "ks-two-sample".into(),
        profile_cap: PROFILE_CAP,
        counts: graph.stats().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    };
    Ok(KgIndex {
        manifest,
        graph,
        profiles,
    })
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Error> {
    let body = serde_json::to_string_pretty(value)?;
    std::fs::write(path, body + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::BuildKg { triples, out, seed } => {
            let graph = KnowledgeGraph::load(&triples)?;
            let manifest = write_index(&out, &graph, seed, &KsLabeler)?;
            println!("{}", serde_json::to_string_pretty(&manifest)?);
        }
        Command::Annotate {
            kg,
            tables,
            targets_cea,
            targets_cta,
            targets_cpa,
            out,
            config,
            workers,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            let targets = TargetSet::read(targets_cea.as_deref(), targets_cta.as_deref(), targets_cpa.as_deref())?;
            let index = load_kg(&kg, cfg.seed)?;
            let annotator = Annotator::new(Arc::new(index.graph), index.profiles, cfg)?;
            let output = run_pipeline(&tables, &targets, &annotator)?;
            write_annotations(&out, &output.annotations)?;
            write_json(&out.join("report.json"), &output.report)?;
            eprintln!(
                "annotated {} tables ({} failed) in {} ms",
                output.report.tables.len(),
                output.report.errors,
                output.report.millis
            );
        }
        Command::Lookup {
            kg,
            query,
            limit,
            language,
            config,
        } => {
            if limit == 0 {
                return Err(Error::Config("--limit must be at least 1".into()));
            }
            let cfg = load_config(config.as_deref())?;
            let index = load_kg(&kg, cfg.seed)?;
            let services = cfg.build_services(Arc::new(index.graph))?;
            let rankings = query_services(&query, &language, &services, limit);
            let dist = fuse_and_normalize(&rankings, limit);
            for (rank, (e, p)) in dist.ranked().into_iter().enumerate() {
                println!("{rank}\t{p:.6}\t{e}");
            }
        }
        Command::Evaluate { task, gold, pred, kg } => {
            let graph = kg.map(|p| load_kg(&p, 42)).transpose()?.map(|i| i.graph);
            let report = evaluate(task, &gold, &pred, graph.as_ref())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
