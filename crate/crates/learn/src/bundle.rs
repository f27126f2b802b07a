//! On-disk model bundle: a directory holding a manifest, the frozen
//! feature schemas, one file per view model and the fusion model.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use actortrace_core::actorgraph::GraphKind;
use actortrace_core::features::SchemaSet;
use actortrace_core::Class;
use serde::{Deserialize, Serialize};

use crate::classifiers::LogisticRegression;
use crate::ensemble::Ensemble;
use crate::error::{LearnError, Result};
use crate::stacking::{StackedModel, KEPT_COLUMNS};
use crate::Real;

pub const BUNDLE_FORMAT: &str = "actortrace-model";
pub const BUNDLE_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";
const SCHEMAS: &str = "schemas.tsv";
const FUSION: &str = "fusion.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    /// Probability column order.
    pub classes: Vec<String>,
    /// Fusion column order.
    pub kinds: Vec<String>,
    pub bases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle<F> {
    pub schemas: SchemaSet,
    pub ensemble: Ensemble<F>,
}

fn kind_file(kind: GraphKind) -> String {
    format!("kind_{}.json", kind.name())
}

fn class_names() -> Vec<String> {
    Class::ALL.iter().map(|c| c.name().to_string()).collect()
}

impl<F: Real> ModelBundle<F> {
    /// Pair a trained ensemble with the schemas its views were trained on.
    pub fn new(schemas: SchemaSet, ensemble: Ensemble<F>) -> Result<Self> {
        for s in &ensemble.stacked {
            match schemas.get(s.kind) {
                Some(frozen) if frozen == s.schema.as_slice() => {}
                Some(_) => return Err(LearnError::Bundle(format!("view {} schema differs from frozen schema", s.kind))),
                None => return Err(LearnError::Bundle(format!("no frozen schema for view {}", s.kind))),
            }
        }
        let want = ensemble.stacked.len() * KEPT_COLUMNS;
        if ensemble.fusion.width() != want {
            return Err(LearnError::Bundle(format!("fusion model width {}, expected {want}", ensemble.fusion.width())));
        }
        Ok(ModelBundle { schemas, ensemble })
    }

    pub fn manifest(&self) -> Manifest {
        let bases = self
            .ensemble
            .stacked
            .first()
            .map(|s| s.bases.iter().map(|b| b.kind().name().to_string()).collect())
            .unwrap_or_default();
        Manifest {
            format: BUNDLE_FORMAT.into(),
            version: BUNDLE_VERSION,
            scalar: std::any::type_name::<F>().into(),
            classes: class_names(),
            kinds: self.ensemble.kinds().iter().map(|k| k.name().to_string()).collect(),
            bases,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let write_json = |name: &str, v: &dyn erased::Json| -> Result<()> {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            v.write(&mut w)?;
            w.flush()?;
            Ok(())
        };
        write_json(MANIFEST, &self.manifest())?;
        let mut w = BufWriter::new(File::create(dir.join(SCHEMAS))?);
        self.schemas.write(&mut w)?;
        w.flush()?;
        for s in &self.ensemble.stacked {
            write_json(&kind_file(s.kind), s)?;
        }
        write_json(FUSION, &self.ensemble.fusion)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
        if manifest.format != BUNDLE_FORMAT {
            return Err(LearnError::Bundle(format!("{} is not a model bundle", dir.display())));
        }
        if manifest.version != BUNDLE_VERSION {
            return Err(LearnError::Bundle(format!(
                "bundle version {}, this build reads {BUNDLE_VERSION}",
                manifest.version
            )));
        }
        if manifest.classes != class_names() {
            return Err(LearnError::Bundle(format!("unexpected class order {:?}", manifest.classes)));
        }
        if manifest.scalar != std::any::type_name::<F>() {
            return Err(LearnError::Bundle(format!("bundle stores {} values", manifest.scalar)));
        }
        let schemas = SchemaSet::read(BufReader::new(File::open(dir.join(SCHEMAS))?))?;
        let mut stacked = Vec::with_capacity(manifest.kinds.len());
        for name in &manifest.kinds {
            let kind: GraphKind = name.parse()?;
            let s: StackedModel<F> = read_json(&dir.join(kind_file(kind)))?;
            if s.kind != kind {
                return Err(LearnError::Bundle(format!("{} holds view {}", kind_file(kind), s.kind)));
            }
            stacked.push(s);
        }
        let fusion: LogisticRegression<F> = read_json(&dir.join(FUSION))?;
        Self::new(schemas, Ensemble { stacked, fusion })
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| LearnError::Bundle(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

mod erased {
    use std::io::Write;

    pub trait Json {
        fn write(&self, w: &mut dyn Write) -> serde_json::Result<()>;
    }

    impl<T: serde::Serialize> Json for T {
        fn write(&self, w: &mut dyn Write) -> serde_json::Result<()> {
            serde_json::to_writer(w, self)
        }
    }
}
