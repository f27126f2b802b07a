//! Pipeline settings: built-in defaults, then a versioned `key = value`
//! file, then command-line flags of the same names.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use actortrace_core::SubgraphLimits;
use actortrace_learn::BaseKind;
use clap::Args;

use crate::error::{CliError, Result};

pub const CONFIG_HEADER: &str = "actortrace-config v1";
pub const CONFIG_ENV: &str = "ACTORTRACE_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Half-width of the block window around a seed transaction.
    pub window: u64,
    pub limits: SubgraphLimits,
    /// Whole graphs with fewer actors are dropped from training and
    /// flagged at prediction time.
    pub min_actors: usize,
    pub prune_threshold: f64,
    pub seed: u64,
    pub folds: usize,
    pub test_fraction: f64,
    pub bases: Vec<BaseKind>,
    /// Worker threads; 0 picks the number of cores.
    pub threads: usize,
    /// Keep per-address subgraph, cluster and actor-graph CSVs.
    pub keep_intermediate: bool,
    pub out: PathBuf,
    pub chain: Option<PathBuf>,
    pub tags: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub schemas: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 144,
            limits: SubgraphLimits::default(),
            min_actors: 5,
            prune_threshold: 0.95,
            seed: 0,
            folds: 5,
            test_fraction: 0.2,
            bases: BaseKind::ALL.to_vec(),
            threads: 0,
            keep_intermediate: true,
            out: PathBuf::from("actortrace-out"),
            chain: None,
            tags: None,
            labels: None,
            schemas: None,
            model: None,
        }
    }
}

/// Flags mirroring every config key.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigFlags {
    /// Pipeline config file (defaults to $ACTORTRACE_CONFIG when set).
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    pub pipeline_config: Option<PathBuf>,
    /// Half-width of the block window.
    #[arg(long, visible_alias = "n", global = true)]
    pub window: Option<u64>,
    #[arg(long, global = true)]
    pub max_addresses: Option<usize>,
    #[arg(long, global = true)]
    pub max_transactions: Option<usize>,
    /// Small-graph threshold in actors.
    #[arg(long, global = true)]
    pub min_actors: Option<usize>,
    /// Absolute correlation above which features are pruned.
    #[arg(long, global = true)]
    pub prune_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub test_fraction: Option<f64>,
    /// Comma-separated base classifiers.
    #[arg(long, global = true)]
    pub bases: Option<String>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub keep_intermediate: Option<bool>,
    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub chain: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tags: Option<PathBuf>,
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,
    #[arg(long, global = true)]
    pub schemas: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| CliError::Usage(format!("bad value {v:?} for {key}")))
}

pub fn parse_bases(v: &str) -> Result<Vec<BaseKind>> {
    let bases = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<BaseKind>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if bases.is_empty() {
        return Err(CliError::Usage("empty base classifier list".into()));
    }
    Ok(bases)
}

impl PipelineConfig {
    /// Set one key; `-` and `_` are interchangeable in key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "window" | "n" => self.window = parse_value(key, v)?,
            "max-addresses" => self.limits.max_addresses = parse_value(key, v)?,
            "max-transactions" => self.limits.max_transactions = parse_value(key, v)?,
            "min-actors" => self.min_actors = parse_value(key, v)?,
            "prune-threshold" => self.prune_threshold = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "folds" => self.folds = parse_value(key, v)?,
            "test-fraction" => self.test_fraction = parse_value(key, v)?,
            "bases" => self.bases = parse_bases(v)?,
            "threads" => self.threads = parse_value(key, v)?,
            "keep-intermediate" => self.keep_intermediate = parse_value(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "chain" => self.chain = Some(PathBuf::from(v)),
            "tags" => self.tags = Some(PathBuf::from(v)),
            "labels" => self.labels = Some(PathBuf::from(v)),
            "schemas" => self.schemas = Some(PathBuf::from(v)),
            "model" => self.model = Some(PathBuf::from(v)),
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse config file text. The first non-blank, non-comment line must
    /// be the version header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, CONFIG_HEADER)) => {}
            Some((n, l)) => return Err(CliError::Usage(format!("config line {n}: expected {CONFIG_HEADER:?}, found {l:?}"))),
            None => return Err(CliError::Usage(format!("empty config; expected {CONFIG_HEADER:?}"))),
        }
        for (n, line) in lines {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {n}: expected key = value")))?;
            cfg.set(k, v).map_err(|e| CliError::Usage(format!("config line {n}: {e}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(flags: &ConfigFlags) -> Result<Self> {
        let mut cfg = match &flags.pipeline_config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let set = |cfg: &mut Self, key: &str, v: Option<String>| v.map_or(Ok(()), |v| cfg.set(key, &v));
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        set(&mut cfg, "window", flags.window.map(|v| v.to_string()))?;
        set(&mut cfg, "max-addresses", flags.max_addresses.map(|v| v.to_string()))?;
        set(&mut cfg, "max-transactions", flags.max_transactions.map(|v| v.to_string()))?;
        set(&mut cfg, "min-actors", flags.min_actors.map(|v| v.to_string()))?;
        set(&mut cfg, "prune-threshold", flags.prune_threshold.map(|v| v.to_string()))?;
        set(&mut cfg, "seed", flags.seed.map(|v| v.to_string()))?;
        set(&mut cfg, "folds", flags.folds.map(|v| v.to_string()))?;
        set(&mut cfg, "test-fraction", flags.test_fraction.map(|v| v.to_string()))?;
        set(&mut cfg, "bases", flags.bases.clone())?;
        set(&mut cfg, "threads", flags.threads.map(|v| v.to_string()))?;
        set(&mut cfg, "keep-intermediate", flags.keep_intermediate.map(|v| v.to_string()))?;
        set(&mut cfg, "out", path(&flags.out))?;
        set(&mut cfg, "chain", path(&flags.chain))?;
        set(&mut cfg, "tags", path(&flags.tags))?;
        set(&mut cfg, "labels", path(&flags.labels))?;
        set(&mut cfg, "schemas", path(&flags.schemas))?;
        set(&mut cfg, "model", path(&flags.model))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Usage(m.into()));
        if self.window < 1 {
            return bad("window must be at least 1");
        }
        if !(self.prune_threshold > 0.0 && self.prune_threshold <= 1.0) {
            return bad("prune-threshold must lie in (0, 1]");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad("test-fraction must lie in (0, 1)");
        }
        if let Some(m) = BaseKind::MANDATORY.iter().find(|m| !self.bases.contains(m)) {
            return Err(CliError::Usage(format!("bases must include {m}")));
        }
        Ok(())
    }

    /// Config file text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CONFIG_HEADER}");
        let _ = writeln!(s, "window = {}", self.window);
        let _ = writeln!(s, "max-addresses = {}", self.limits.max_addresses);
        let _ = writeln!(s, "max-transactions = {}", self.limits.max_transactions);
        let _ = writeln!(s, "min-actors = {}", self.min_actors);
        let _ = writeln!(s, "prune-threshold = {}", self.prune_threshold);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "folds = {}", self.folds);
        let _ = writeln!(s, "test-fraction = {}", self.test_fraction);
        let bases: Vec<&str> = self.bases.iter().map(|b| b.name()).collect();
        let _ = writeln!(s, "bases = {}", bases.join(","));
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "keep-intermediate = {}", self.keep_intermediate);
        let _ = writeln!(s, "out = {}", self.out.display());
        for (k, v) in [
            ("chain", &self.chain),
            ("tags", &self.tags),
            ("labels", &self.labels),
            ("schemas", &self.schemas),
            ("model", &self.model),
        ] {
            if let Some(p) = v {
                let _ = writeln!(s, "{k} = {}", p.display());
            }
        }
        s
    }

    pub fn chain_path(&self) -> PathBuf {
        self.chain.clone().unwrap_or_else(|| self.out.join("chain.jsonl"))
    }

    pub fn tags_path(&self) -> PathBuf {
        self.tags.clone().unwrap_or_else(|| self.out.join("tags.csv"))
    }

    pub fn labels_path(&self) -> PathBuf {
        self.labels.clone().unwrap_or_else(|| self.out.join("labels.csv"))
    }

    pub fn model_path(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.out.join("model"))
    }

    pub fn features_dir(&self) -> PathBuf {
        self.out.join("features")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("report")
    }
}
