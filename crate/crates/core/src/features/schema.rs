use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{prune_correlated, FeatureMatrix, FEATURE_NAMES};
use crate::actorgraph::GraphKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;
const SCHEMA_MAGIC: &str = "actortrace-schema";

/// Fixed feature list for the simple order-1 ego view.
pub const EGO1_SIMPLE_SCHEMA: [&str; 11] = [
    "Closeness(wtd/out)",
    "sum of weights",
    "Closeness(uwtd/out)",
    "# of vertices",
    "Closeness(wtd/in)",
    "cluster coefficient",
    "Closeness(wtd/all)",
    "Closeness(uwtd/in)",
    "Coreness(all)",
    "Authority",
    "Coreness(IN)",
];

/// Number of features each view's frozen schema carries.
pub fn table_feature_count(kind: GraphKind) -> Option<usize> {
    Some(match kind {
        GraphKind::Ego3 => 11,
        GraphKind::Ego3Simple => 16,
        GraphKind::Ego2 => 13,
        GraphKind::Ego2Simple => 16,
        GraphKind::Ego1 => 12,
        GraphKind::Ego1Simple => 11,
        _ => return None,
    })
}

/// Freeze the schema for `kind` from a full-width training matrix.
///
/// The simple order-1 view always gets [`EGO1_SIMPLE_SCHEMA`]. Other views
/// run correlation pruning and then fill to the fixed count with the kept
/// varying features, then the dropped ones, then constant ones, each in
/// superset order.
pub fn derive_schema<F: Scalar>(m: &FeatureMatrix<F>, threshold: f64) -> Result<Vec<String>> {
    let kind = m.kind;
    let count = table_feature_count(kind)
        .ok_or_else(|| Error::InvalidArgument(format!("no frozen schema for view {kind}")))?;
    if kind == GraphKind::Ego1Simple {
        return Ok(EGO1_SIMPLE_SCHEMA.iter().map(|s| s.to_string()).collect());
    }
    let out = prune_correlated(m, threshold)?;
    let mut schema: Vec<String> = out.kept.iter().filter(|f| !out.constant.contains(f)).cloned().collect();
    schema.extend(out.dropped);
    schema.extend(out.constant);
    schema.truncate(count);
    if schema.len() < count {
        return Err(Error::InvalidArgument(format!(
            "matrix has {} features, view {kind} needs {count}",
            schema.len()
        )));
    }
    Ok(schema)
}

/// Frozen schemas for every ego view.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemaSet {
    schemas: BTreeMap<GraphKind, Vec<String>>,
}

impl SchemaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, kind: GraphKind, schema: Vec<String>) -> Result<()> {
        validate(kind, &schema)?;
        self.schemas.insert(kind, schema);
        Ok(())
    }

    pub fn get(&self, kind: GraphKind) -> Option<&[String]> {
        self.schemas.get(&kind).map(Vec::as_slice)
    }

    pub fn kinds(&self) -> impl Iterator<Item = GraphKind> + '_ {
        self.schemas.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{SCHEMA_MAGIC}\t{SCHEMA_VERSION}")?;
        for (kind, schema) in &self.schemas {
            writeln!(w, "{kind}\t{}", schema.join("\t"))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        match header.split_once('\t') {
            Some((SCHEMA_MAGIC, v)) if v.trim() == SCHEMA_VERSION.to_string() => {}
            Some((SCHEMA_MAGIC, v)) => {
                return Err(Error::Format(format!("schema file version {v}, expected {SCHEMA_VERSION}")))
            }
            _ => return Err(Error::Format("not a schema file".into())),
        }
        let mut set = SchemaSet::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let kind: GraphKind = parts.next().unwrap_or_default().parse()?;
            let schema: Vec<String> = parts.map(str::to_string).collect();
            set.insert(kind, schema).map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() })?;
        }
        Ok(set)
    }
}

fn validate(kind: GraphKind, schema: &[String]) -> Result<()> {
    if let Some(n) = table_feature_count(kind) {
        if schema.len() != n {
            return Err(Error::InvalidArgument(format!("view {kind} needs {n} features, got {}", schema.len())));
        }
    }
    if kind == GraphKind::Ego1Simple && schema.iter().map(String::as_str).ne(EGO1_SIMPLE_SCHEMA) {
        return Err(Error::InvalidArgument("ego1_simple schema is fixed".into()));
    }
    for (i, f) in schema.iter().enumerate() {
        if !FEATURE_NAMES.contains(&f.as_str()) {
            return Err(Error::InvalidArgument(format!("unknown feature {f:?}")));
        }
        if schema[..i].contains(f) {
            return Err(Error::InvalidArgument(format!("feature {f:?} listed twice")));
        }
    }
    Ok(())
}
