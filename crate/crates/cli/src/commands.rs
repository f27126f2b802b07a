//! Subcommand definitions and dispatch.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use actortrace_core::actorgraph::GraphKind;
use actortrace_core::chainstore::write_chain;
use actortrace_core::features::{summarize_by_class, write_summary_csv};
use actortrace_core::synth::{generate_chain, SynthConfig};
use actortrace_core::txgraph::is_coinjoin;
use actortrace_learn::{EvalReport, ModelBundle, TrainingReport};
use anyhow::Context as _;
use clap::{Parser, Subcommand};
use log::info;

use crate::config::{ConfigFlags, PipelineConfig};
use crate::error::{CliError, Result};
use crate::pipeline::{
    address_dir, build_features, extract, load_labels, predict_address, read_features, train, write_file,
    write_prediction_header, write_prediction_row, Chain,
};
use crate::report::render;

#[derive(Debug, Parser)]
#[command(name = "actortrace", version, about = "Actor-graph extraction and classification for Bitcoin addresses")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigFlags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate the chain and tag files and print a summary.
    Ingest,
    /// Build the block-bounded transaction subgraph around an address.
    Subgraph {
        #[arg(long)]
        address: String,
    },
    /// Cluster the addresses of an address's subgraph into actors.
    Cluster {
        #[arg(long)]
        address: String,
    },
    /// Build the actor graph of an address and export one view.
    ActorGraph {
        #[arg(long)]
        address: String,
        #[arg(long, default_value = "whole")]
        kind: String,
    },
    /// Extract feature matrices for every labelled address.
    Features {
        /// Comma-separated views, or `ego` / `all`.
        #[arg(long, default_value = "ego")]
        kinds: String,
    },
    /// Per-class distribution of every feature.
    Summarize {
        #[arg(long, default_value = "ego")]
        kinds: String,
    },
    /// Split, freeze schemas, train the ensemble and score the held-out set.
    Train,
    /// Features, summaries, training and report in one go.
    Run,
    /// Classify addresses with a trained model bundle.
    Predict {
        #[arg(long, required = true)]
        address: Vec<String>,
        /// Write the schema-ordered feature rows fed to the model here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Generate a labelled synthetic chain into the output directory.
    Synth {
        /// JSON generator settings; defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the default generator settings and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// Render the tables of the last training run.
    Report,
    /// Print the effective pipeline configuration.
    Config,
}

pub fn parse_kinds(s: &str) -> Result<Vec<GraphKind>> {
    match s.trim() {
        "ego" => Ok(GraphKind::EGO.to_vec()),
        "all" => Ok(GraphKind::ALL.to_vec()),
        list => {
            let mut kinds = Vec::new();
            for k in list.split(',').filter(|k| !k.trim().is_empty()) {
                let k: GraphKind = k.parse()?;
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
            }
            if kinds.is_empty() {
                return Err(CliError::Usage("no views selected".into()));
            }
            Ok(kinds)
        }
    }
}

fn out<W: Write>(mut w: W, s: impl std::fmt::Display) -> Result<()> {
    writeln!(w, "{s}").map_err(CliError::internal)
}

/// Run a parsed command, writing user-facing output to `stdout`.
pub fn execute<W: Write>(cli: Cli, mut stdout: W) -> Result<()> {
    let cfg = PipelineConfig::resolve(&cli.config)?;
    if cfg.threads > 0 {
        // a second initialization (tests calling in-process) is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match cli.command {
        Command::Config => out(&mut stdout, cfg.to_text().trim_end()),
        Command::Synth { config, print_default } => {
            if print_default {
                let text = serde_json::to_string_pretty(&SynthConfig::default()).map_err(CliError::internal)?;
                return out(&mut stdout, text);
            }
            let sc = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                    serde_json::from_str::<SynthConfig>(&text)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
                }
                None => SynthConfig::default(),
            };
            synth(&cfg, &sc, &mut stdout)
        }
        Command::Ingest => {
            let chain = Chain::from_config(&cfg)?;
            ingest(&cfg, &chain, &mut stdout)
        }
        Command::Subgraph { address } => {
            let chain = Chain::from_config(&cfg)?;
            let ex = extract_one(&chain, &cfg, &address, &[])?;
            let path = cfg.out.join("addresses").join(address_dir(&address)).join("subgraph.csv");
            write_file(&path, |w| Ok(ex.subgraph.write_edge_list(w)?))?;
            out(&mut stdout, format_args!("{}\nwritten to {}", ex.subgraph, path.display()))
        }
        Command::Cluster { address } => {
            let chain = Chain::from_config(&cfg)?;
            let ex = extract_one(&chain, &cfg, &address, &[])?;
            let path = cfg.out.join("addresses").join(address_dir(&address)).join("clusters.csv");
            write_file(&path, |w| Ok(ex.clusters.write_csv(w)?))?;
            out(
                &mut stdout,
                format_args!(
                    "{} addresses in {} actors; seed actor {}\nwritten to {}",
                    ex.clusters.address_count(),
                    ex.clusters.actor_count(),
                    ex.clusters.actor_of(&address)?,
                    path.display()
                ),
            )
        }
        Command::ActorGraph { address, kind } => {
            let kind: GraphKind = kind.parse()?;
            let chain = Chain::from_config(&cfg)?;
            let ex = extract_one(&chain, &cfg, &address, &[])?;
            let view = ex.graph.view(kind)?;
            let path = cfg.out.join("addresses").join(address_dir(&address)).join(format!("actor_graph_{kind}.csv"));
            write_file(&path, |w| Ok(view.write_csv(kind, w)?))?;
            let tiny = if ex.tiny { " (below small-graph threshold)" } else { "" };
            out(
                &mut stdout,
                format_args!(
                    "{kind}: {} vertices, {} edges{tiny}\nwritten to {}",
                    view.vertex_count(),
                    view.edge_count(),
                    path.display()
                ),
            )
        }
        Command::Features { kinds } => {
            let kinds = parse_kinds(&kinds)?;
            let chain = Chain::from_config(&cfg)?;
            features(&cfg, &chain, &kinds, &mut stdout)
        }
        Command::Summarize { kinds } => summarize(&cfg, &parse_kinds(&kinds)?, &mut stdout),
        Command::Train => train_cmd(&cfg, &mut stdout),
        Command::Run => {
            let chain = Chain::from_config(&cfg)?;
            features(&cfg, &chain, &GraphKind::EGO, &mut stdout)?;
            summarize(&cfg, &GraphKind::EGO, &mut stdout)?;
            train_cmd(&cfg, &mut stdout)
        }
        Command::Report => {
            let dir = cfg.report_dir();
            let training: TrainingReport = read_json(&dir.join("training.json"))?;
            let test_path = dir.join("test_eval.json");
            let test: Option<EvalReport> = if test_path.exists() { Some(read_json(&test_path)?) } else { None };
            let text = render(&training, test.as_ref());
            write_file(&dir.join("report.txt"), |w| w.write_all(text.as_bytes()).map_err(CliError::internal))?;
            out(&mut stdout, text.trim_end())
        }
        Command::Predict { address, dump } => {
            let chain = Chain::from_config(&cfg)?;
            let bundle = ModelBundle::<f64>::load(&cfg.model_path())?;
            let preds = address
                .iter()
                .map(|a| predict_address(&chain, &cfg, &bundle, a))
                .collect::<Result<Vec<_>>>()?;
            write_prediction_header(&mut stdout)?;
            let mut dumps = Vec::new();
            for (a, p) in address.iter().zip(preds) {
                write_prediction_row(&mut stdout, a, None, &p.prediction, &p.flags)?;
                dumps.push((a.clone(), p.rows));
            }
            if let Some(path) = dump {
                write_dump(&path, &bundle, &dumps)?;
            }
            Ok(())
        }
    }
}

fn extract_one(chain: &Chain, cfg: &PipelineConfig, address: &str, kinds: &[GraphKind]) -> Result<crate::pipeline::Extraction> {
    extract(chain, cfg, address, kinds)
        .map_err(|s| CliError::Data(anyhow::anyhow!("{address}: {} stage: {}", s.stage, s.reason)))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}; run `train` first", path.display()))
        .map_err(CliError::Data)?;
    serde_json::from_str(&text).with_context(|| format!("{}", path.display())).map_err(CliError::Data)
}

fn write_dump(path: &std::path::Path, bundle: &ModelBundle<f64>, dumps: &[(String, BTreeMap<GraphKind, Vec<f64>>)]) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "address,kind,feature,value").map_err(CliError::internal)?;
        for (a, rows) in dumps {
            for (kind, values) in rows {
                let schema = bundle.schemas.get(*kind).unwrap_or_default();
                for (name, v) in schema.iter().zip(values) {
                    writeln!(w, "{a},{kind},\"{name}\",{v}").map_err(CliError::internal)?;
                }
            }
        }
        Ok(())
    })
}

pub fn synth<W: Write>(cfg: &PipelineConfig, sc: &SynthConfig, mut stdout: W) -> Result<()> {
    let data = generate_chain(sc)?;
    write_file(&cfg.chain_path(), |w| Ok(write_chain(&data.chain, w)?))?;
    write_file(&cfg.tags_path(), |w| Ok(data.tags.write_csv(w)?))?;
    write_file(&cfg.labels_path(), |w| Ok(data.write_labels_csv(w)?))?;
    write_file(&cfg.out.join("wallets.csv"), |w| Ok(data.write_wallets_csv(w)?))?;
    out(
        &mut stdout,
        format_args!(
            "{} transactions, {} tagged addresses, {} labelled actors written under {}",
            data.chain.len(),
            data.tags.len(),
            data.labels.len(),
            cfg.out.display()
        ),
    )
}

pub fn ingest<W: Write>(cfg: &PipelineConfig, chain: &Chain, mut stdout: W) -> Result<()> {
    let txs = chain.index.transactions();
    let heights = (txs.first().map_or(0, |t| t.height), txs.last().map_or(0, |t| t.height));
    let coinbase = txs.iter().filter(|t| t.is_coinbase).count();
    let coinjoin = txs.iter().filter(|t| is_coinjoin(t)).count();
    let rows = [
        ("transactions", txs.len().to_string()),
        ("first_height", heights.0.to_string()),
        ("last_height", heights.1.to_string()),
        ("addresses", chain.index.address_count().to_string()),
        ("coinbase_transactions", coinbase.to_string()),
        ("coinjoin_transactions", coinjoin.to_string()),
        ("tagged_addresses", chain.tags.len().to_string()),
    ];
    write_file(&cfg.out.join("ingest_summary.csv"), |w| {
        writeln!(w, "metric,value").map_err(CliError::internal)?;
        for (k, v) in &rows {
            writeln!(w, "{k},{v}").map_err(CliError::internal)?;
        }
        Ok(())
    })?;
    for (k, v) in rows {
        out(&mut stdout, format_args!("{k:<22} {v}"))?;
    }
    Ok(())
}

pub fn features<W: Write>(cfg: &PipelineConfig, chain: &Chain, kinds: &[GraphKind], mut stdout: W) -> Result<()> {
    let labels = load_labels(&cfg.labels_path())?;
    let tables = build_features(chain, cfg, &labels, kinds)?;
    tables.write(cfg)?;
    let mut by_stage: BTreeMap<String, usize> = BTreeMap::new();
    for s in &tables.skipped {
        *by_stage.entry(format!("{}: {}", s.stage, if s.reason == "size limit" { "size limit" } else { "other" })).or_default() += 1;
    }
    out(
        &mut stdout,
        format_args!("{} of {} labelled addresses kept; feature tables in {}", tables.kept, labels.len(), cfg.features_dir().display()),
    )?;
    for (k, n) in by_stage {
        out(&mut stdout, format_args!("  skipped ({k}): {n}"))?;
    }
    Ok(())
}

pub fn summarize<W: Write>(cfg: &PipelineConfig, kinds: &[GraphKind], mut stdout: W) -> Result<()> {
    let matrices = read_features(cfg, kinds)?;
    for (kind, m) in &matrices {
        let rows = summarize_by_class(m)?;
        let path = cfg.out.join("summary").join(format!("{kind}.csv"));
        write_file(&path, |w| Ok(write_summary_csv(kind, &rows, w)?))?;
        info!("{kind}: summary of {} rows written to {}", m.len(), path.display());
    }
    out(&mut stdout, format_args!("per-class summaries in {}", cfg.out.join("summary").display()))
}

pub fn train_cmd<W: Write>(cfg: &PipelineConfig, mut stdout: W) -> Result<()> {
    let matrices = read_features(cfg, &GraphKind::EGO)?;
    let outcome = train(cfg, &matrices)?;
    outcome.write(cfg)?;
    let text = render(&outcome.report, Some(&outcome.test));
    write_file(&cfg.report_dir().join("report.txt"), |w| w.write_all(text.as_bytes()).map_err(CliError::internal))?;
    out(&mut stdout, text.trim_end())?;
    out(&mut stdout, format_args!("model bundle written to {}", cfg.model_path().display()))
}
