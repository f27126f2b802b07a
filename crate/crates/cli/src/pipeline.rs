//! Address-level extraction and the train/evaluate flow.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use actortrace_core::actorgraph::{build_actor_graph, GraphKind};
use actortrace_core::chainstore::{load_service_tags, parse_chain};
use actortrace_core::clustering::local_cluster;
use actortrace_core::features::{compute_features, derive_schema, SchemaSet};
use actortrace_core::synth::read_labels;
use actortrace_core::txgraph::build_tx_subgraph;
use actortrace_core::{
    ActorGraph, Address, ChainIndex, Class, ClusterMap, FeatureMatrix, FeatureVector, ServiceTagRegistry, TxSubgraph,
};
use actortrace_learn::{train_ensemble, EvalReport, LabeledDataset, GroupPrediction, ModelBundle, Prediction, TrainConfig, TrainingReport};
use anyhow::Context as _;
use log::{info, warn};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

/// Loaded chain and service tags.
pub struct Chain {
    pub index: ChainIndex,
    pub tags: ServiceTagRegistry,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(CliError::Data)
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(CliError::Internal)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(CliError::Internal)
}

/// Write through `f` into `path`, creating parent directories.
pub(crate) fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().with_context(|| format!("cannot write {}", path.display())).map_err(CliError::Internal)
}

impl Chain {
    /// Chain file plus an optional tag file; a missing tag file means no tags.
    pub fn load(chain: &Path, tags: &Path) -> Result<Self> {
        let index = parse_chain(open(chain)?).with_context(|| format!("{}", chain.display())).map_err(CliError::Data)?;
        let tags = if tags.exists() {
            load_service_tags(open(tags)?).with_context(|| format!("{}", tags.display())).map_err(CliError::Data)?
        } else {
            warn!("no tag file at {}; continuing without service tags", tags.display());
            ServiceTagRegistry::new()
        };
        Ok(Chain { index, tags })
    }

    pub fn from_config(cfg: &PipelineConfig) -> Result<Self> {
        Self::load(&cfg.chain_path(), &cfg.tags_path())
    }
}

pub fn load_labels(path: &Path) -> Result<Vec<(Address, Class)>> {
    read_labels(open(path)?).with_context(|| format!("{}", path.display())).map_err(CliError::Data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Subgraph,
    Cluster,
    ActorGraph,
    SmallGraph,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Subgraph => "subgraph",
            Stage::Cluster => "cluster",
            Stage::ActorGraph => "actor-graph",
            Stage::SmallGraph => "small-graph",
        })
    }
}

/// Why an address contributed no row.
#[derive(Debug, Clone, PartialEq)]
pub struct Skip {
    pub address: String,
    pub stage: Stage,
    pub reason: String,
}

fn stage_error(address: &str, stage: Stage, e: actortrace_core::Error) -> Skip {
    let reason = match e {
        actortrace_core::Error::SizeLimit { .. } => "size limit".to_string(),
        other => other.to_string(),
    };
    Skip { address: address.to_string(), stage, reason }
}

/// Everything derived from one seed address.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub address: String,
    pub subgraph: TxSubgraph,
    pub clusters: ClusterMap,
    pub graph: ActorGraph,
    /// Whole graph below the small-graph threshold.
    pub tiny: bool,
    pub features: BTreeMap<GraphKind, FeatureVector>,
    /// Views whose feature computation failed, with the reason.
    pub missing: Vec<(GraphKind, String)>,
}

pub fn extract(chain: &Chain, cfg: &PipelineConfig, address: &str, kinds: &[GraphKind]) -> Result<Extraction, Skip> {
    let subgraph = build_tx_subgraph(&chain.index, address, cfg.window, &chain.tags, cfg.limits)
        .map_err(|e| stage_error(address, Stage::Subgraph, e))?;
    let clusters = local_cluster(&subgraph, &chain.index).map_err(|e| stage_error(address, Stage::Cluster, e))?;
    let graph: ActorGraph = build_actor_graph(&subgraph, &clusters, &chain.index)
        .map_err(|e| stage_error(address, Stage::ActorGraph, e))?;
    let tiny = graph.is_too_small(cfg.min_actors);
    let mut features = BTreeMap::new();
    let mut missing = Vec::new();
    for &kind in kinds {
        match graph.view(kind).and_then(|v| compute_features(&v, kind)) {
            Ok(fv) => {
                features.insert(kind, fv);
            }
            Err(e) => missing.push((kind, e.to_string())),
        }
    }
    Ok(Extraction { address: address.to_string(), subgraph, clusters, graph, tiny, features, missing })
}

impl Extraction {
    /// Per-address CSVs under `dir`.
    pub fn write_intermediate(&self, dir: &Path) -> Result<()> {
        write_file(&dir.join("subgraph.csv"), |w| Ok(self.subgraph.write_edge_list(w)?))?;
        write_file(&dir.join("clusters.csv"), |w| Ok(self.clusters.write_csv(w)?))?;
        write_file(&dir.join("actor_graph.csv"), |w| Ok(self.graph.write_csv(GraphKind::Whole, w)?))
    }
}

/// File-system friendly directory name for an address.
pub fn address_dir(address: &str) -> String {
    address.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Full-width feature matrices of the labelled addresses.
#[derive(Debug, Clone)]
pub struct FeatureTables {
    pub matrices: BTreeMap<GraphKind, FeatureMatrix>,
    pub skipped: Vec<Skip>,
    pub kept: usize,
}

pub fn build_features(
    chain: &Chain,
    cfg: &PipelineConfig,
    labels: &[(Address, Class)],
    kinds: &[GraphKind],
) -> Result<FeatureTables> {
    let results: Vec<Result<Extraction, Skip>> = labels
        .par_iter()
        .map(|(a, _)| {
            let ex = extract(chain, cfg, a.as_str(), kinds)?;
            if cfg.keep_intermediate {
                let dir = cfg.out.join("addresses").join(address_dir(a.as_str()));
                if let Err(e) = ex.write_intermediate(&dir) {
                    warn!("{a}: could not persist intermediate files: {e}");
                }
            }
            if ex.tiny {
                return Err(Skip {
                    address: a.to_string(),
                    stage: Stage::SmallGraph,
                    reason: format!("{} actors, threshold {}", ex.graph.actor_count(), cfg.min_actors),
                });
            }
            Ok(ex)
        })
        .collect();

    let mut matrices: BTreeMap<GraphKind, FeatureMatrix> =
        kinds.iter().map(|&k| (k, FeatureMatrix::full(k))).collect();
    let mut skipped = Vec::new();
    let mut kept = 0;
    for ((address, class), r) in labels.iter().zip(results) {
        match r {
            Ok(ex) => {
                kept += 1;
                for (kind, reason) in &ex.missing {
                    warn!("{address}: view {kind} dropped: {reason}");
                }
                for (kind, mut fv) in ex.features {
                    fv.label = Some(*class);
                    matrices.get_mut(&kind).expect("requested kind").push(address.as_str(), &fv)?;
                }
            }
            Err(s) => {
                warn!("{}: skipped: {} ({} stage)", s.address, s.reason, s.stage);
                skipped.push(s);
            }
        }
    }
    info!("feature rows for {kept} of {} labelled addresses", labels.len());
    Ok(FeatureTables { matrices, skipped, kept })
}

impl FeatureTables {
    pub fn write(&self, cfg: &PipelineConfig) -> Result<()> {
        let dir = cfg.features_dir();
        for (kind, m) in &self.matrices {
            write_file(&dir.join(format!("{kind}.csv")), |w| Ok(m.write_csv(w)?))?;
        }
        write_skipped(&cfg.out.join("skipped.csv"), &self.skipped)
    }
}

pub fn write_skipped(path: &Path, skipped: &[Skip]) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "address,stage,reason").map_err(CliError::internal)?;
        for s in skipped {
            writeln!(w, "{},{},\"{}\"", s.address, s.stage, s.reason.replace('"', "'")).map_err(CliError::internal)?;
        }
        Ok(())
    })
}

/// Read the matrices of `kinds` written by [`FeatureTables::write`].
pub fn read_features(cfg: &PipelineConfig, kinds: &[GraphKind]) -> Result<BTreeMap<GraphKind, FeatureMatrix>> {
    kinds
        .iter()
        .map(|&k| {
            let path = cfg.features_dir().join(format!("{k}.csv"));
            let m = FeatureMatrix::read_csv(k, open(&path)?)
                .with_context(|| format!("{}", path.display()))
                .map_err(CliError::Data)?;
            Ok((k, m))
        })
        .collect()
}

/// Output of a training run.
pub struct TrainOutcome {
    pub bundle: ModelBundle<f64>,
    pub report: TrainingReport,
    pub test: EvalReport,
    pub test_predictions: Vec<GroupPrediction<f64>>,
    /// `(group, class, is_test)` for every labelled group.
    pub split: Vec<(String, Class, bool)>,
}

/// Split by group, freeze schemas on the training side, train the
/// ensemble and score the held-out side.
pub fn train(cfg: &PipelineConfig, matrices: &BTreeMap<GraphKind, FeatureMatrix>) -> Result<TrainOutcome> {
    let views = GraphKind::EGO
        .iter()
        .map(|k| {
            matrices
                .get(k)
                .cloned()
                .ok_or_else(|| CliError::Data(anyhow::anyhow!("no feature matrix for view {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let data = LabeledDataset::new(views)?;
    let groups = data.groups()?;
    let (train, test) = data.split(cfg.test_fraction, cfg.seed)?;
    let test_groups: std::collections::BTreeSet<String> =
        test.views.values().flat_map(|m| m.rows.iter().map(|r| r.group.clone())).collect();
    let split = groups.iter().map(|(g, c)| (g.clone(), *c, test_groups.contains(g))).collect();

    let schemas = match &cfg.schemas {
        Some(p) if p.exists() => {
            info!("using frozen schemas from {}", p.display());
            SchemaSet::read(open(p)?)?
        }
        _ => {
            let mut s = SchemaSet::new();
            for k in GraphKind::EGO {
                s.insert(k, derive_schema(&train.views[&k], cfg.prune_threshold)?)?;
            }
            s
        }
    };
    let project = |d: &LabeledDataset<f64>| -> Result<LabeledDataset<f64>> {
        let views = GraphKind::EGO
            .iter()
            .map(|&k| {
                let schema = schemas
                    .get(k)
                    .ok_or_else(|| CliError::Data(anyhow::anyhow!("schema file lacks view {k}")))?;
                Ok(d.views[&k].project(schema)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset::new(views)?)
    };
    let (train, test) = (project(&train)?, project(&test)?);

    let tc = TrainConfig { folds: cfg.folds, seed: cfg.seed, bases: cfg.bases.clone(), kinds: GraphKind::EGO.to_vec() };
    info!("training on {} groups, holding out {}", groups.len() - test_groups.len(), test_groups.len());
    let (ensemble, report) = train_ensemble(&train, &tc)?;
    let test_predictions = ensemble.predict_dataset(&test)?;
    let test_eval = ensemble.evaluate(&test)?;
    let bundle = ModelBundle::new(schemas, ensemble)?;
    Ok(TrainOutcome { bundle, report, test: test_eval, test_predictions, split })
}

impl TrainOutcome {
    /// Persist the bundle, the split and the report files.
    pub fn write(&self, cfg: &PipelineConfig) -> Result<()> {
        let model = cfg.model_path();
        self.bundle.save(&model).map_err(|e| CliError::Internal(e.into()))?;
        write_file(&cfg.out.join("schemas.tsv"), |w| Ok(self.bundle.schemas.write(w)?))?;
        write_file(&cfg.out.join("split.csv"), |w| {
            writeln!(w, "group,class,side").map_err(CliError::internal)?;
            for (g, c, test) in &self.split {
                writeln!(w, "{g},{c},{}", if *test { "test" } else { "train" }).map_err(CliError::internal)?;
            }
            Ok(())
        })?;
        let dir = cfg.report_dir();
        write_file(&dir.join("training.json"), |w| {
            serde_json::to_writer_pretty(w, &self.report).map_err(CliError::internal)
        })?;
        write_file(&dir.join("test_eval.json"), |w| serde_json::to_writer_pretty(w, &self.test).map_err(CliError::internal))?;
        write_file(&dir.join("test_eval.csv"), |w| Ok(self.test.write_csv(w)?))?;
        write_file(&dir.join("final_cv.csv"), |w| Ok(self.report.final_cv.write_csv(w)?))?;
        write_file(&dir.join("base_cv.csv"), |w| {
            writeln!(w, "kind,classifier,balanced_accuracy").map_err(CliError::internal)?;
            for (kind, scores) in &self.report.base_scores {
                for (b, s) in scores {
                    writeln!(w, "{kind},{b},{s}").map_err(CliError::internal)?;
                }
            }
            Ok(())
        })?;
        write_file(&dir.join("stacked_cv.csv"), |w| {
            writeln!(w, "kind,balanced_accuracy").map_err(CliError::internal)?;
            for (kind, s) in &self.report.stacked_scores {
                writeln!(w, "{kind},{s}").map_err(CliError::internal)?;
            }
            Ok(())
        })?;
        write_file(&dir.join("test_predictions.csv"), |w| {
            write_prediction_header(w)?;
            for (g, label, p) in &self.test_predictions {
                write_prediction_row(w, g, *label, p, &[])?;
            }
            Ok(())
        })
    }
}

pub(crate) fn write_prediction_header<W: Write>(w: &mut W) -> Result<()> {
    writeln!(w, "address,label,class,p_gambling,p_random,p_ransom,flags").map_err(CliError::internal)
}

pub(crate) fn write_prediction_row<W: Write>(
    w: &mut W,
    address: &str,
    label: Option<Class>,
    p: &Prediction<f64>,
    extra_flags: &[String],
) -> Result<()> {
    let mut flags: Vec<String> = extra_flags.to_vec();
    if !p.imputed.is_empty() {
        let kinds: Vec<&str> = p.imputed.iter().map(|k| k.name()).collect();
        flags.push(format!("imputed: {}", kinds.join(" ")));
    }
    writeln!(
        w,
        "{address},{},{},{},{},{},\"{}\"",
        label.map_or(String::new(), |c| c.to_string()),
        p.class,
        p.probs[0],
        p.probs[1],
        p.probs[2],
        flags.join("; ")
    )
    .map_err(CliError::internal)
}

/// Prediction for one address with its per-view feature rows.
pub struct AddressPrediction {
    pub prediction: Prediction<f64>,
    pub flags: Vec<String>,
    /// Per view, the schema-ordered values fed to the model.
    pub rows: BTreeMap<GraphKind, Vec<f64>>,
}

pub const TINY_FLAG: &str = "low-confidence: tiny graph";

pub fn predict_address(chain: &Chain, cfg: &PipelineConfig, bundle: &ModelBundle<f64>, address: &str) -> Result<AddressPrediction> {
    if !chain.index.contains_address(address) {
        return Err(CliError::Data(actortrace_core::Error::UnknownAddress(address.to_string()).into()));
    }
    let kinds = bundle.ensemble.kinds();
    let ex = extract(chain, cfg, address, &kinds)
        .map_err(|s| CliError::Data(anyhow::anyhow!("{address}: {} stage failed: {}", s.stage, s.reason)))?;
    let mut rows = BTreeMap::new();
    for (kind, fv) in &ex.features {
        let schema = bundle
            .schemas
            .get(*kind)
            .ok_or_else(|| CliError::Data(anyhow::anyhow!("bundle has no schema for view {kind}")))?;
        let mut m = FeatureMatrix::new(*kind, schema.to_vec());
        m.push(address, fv)?;
        rows.insert(*kind, m.rows.remove(0).values);
    }
    let prediction = bundle.ensemble.predict(&rows)?;
    let mut flags = Vec::new();
    if ex.tiny {
        flags.push(TINY_FLAG.to_string());
    }
    Ok(AddressPrediction { prediction, flags, rows })
}
