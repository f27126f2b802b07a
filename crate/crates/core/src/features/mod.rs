//! Center-local feature vectors for actor-graph views, correlation pruning,
//! per-class summaries and frozen per-view schemas.

pub mod centrality;
mod prune;
mod schema;
mod summary;

pub use prune::{prune_correlated, pearson, PruneOutcome};
pub use schema::{derive_schema, table_feature_count, SchemaSet, EGO1_SIMPLE_SCHEMA, SCHEMA_VERSION};
pub use summary::{summarize_by_class, write_summary_csv, ClassSummary};

use std::io::{Read, Write};

use centrality::{CompactGraph, Mode, PageRankParams};

use crate::actorgraph::{ActorGraph, GraphKind};
use crate::class::Class;
use crate::clustering::ActorId;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Every feature [`compute_features`] emits, in output order.
pub const FEATURE_NAMES: [&str; 26] = [
    "# of vertices",
    "# of edges",
    "sum of weights",
    "Loops",
    "Degree(in)",
    "Degree(out)",
    "Degree(all)",
    "Neighborhood(1)",
    "Neighborhood(2)",
    "Closeness(wtd/in)",
    "Closeness(wtd/out)",
    "Closeness(wtd/all)",
    "Closeness(uwtd/in)",
    "Closeness(uwtd/out)",
    "Closeness(uwtd/all)",
    "Betweenness",
    "PageRank",
    "cluster coefficient",
    "Coreness(IN)",
    "Coreness(OUT)",
    "Coreness(all)",
    "Coreness(IN)/n",
    "Coreness(OUT)/n",
    "Coreness(all)/n",
    "Hub",
    "Authority",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<F> {
    pub kind: GraphKind,
    pub actor: ActorId,
    pub label: Option<Class>,
    pub values: Vec<(&'static str, F)>,
}

impl<F: Scalar> FeatureVector<F> {
    pub fn get(&self, name: &str) -> Option<F> {
        self.values.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }
}

/// The full feature set for the center of `g`.
pub fn compute_features<F: Scalar>(g: &ActorGraph<F>, kind: GraphKind) -> Result<FeatureVector<F>> {
    if g.vertex_count() == 0 || !g.vertices().contains(&g.center()) {
        return Err(Error::EmptyGraph);
    }
    let (cg, _, c) = CompactGraph::from_actor_graph(g);
    let n = cg.n;

    let (mut d_in, mut d_out, mut loops) = (0usize, 0usize, 0usize);
    for &(s, d, _) in &cg.edges {
        if s == c {
            d_out += 1;
        }
        if d == c {
            d_in += 1;
        }
        if s == c && d == c {
            loops += 1;
        }
    }

    let pr = centrality::pagerank(&cg, PageRankParams::default());
    let bt = centrality::betweenness(&cg);
    let cc = centrality::local_clustering(&cg);
    let core_in = centrality::coreness(&cg, Mode::In)[c];
    let core_out = centrality::coreness(&cg, Mode::Out)[c];
    let core_all = centrality::coreness(&cg, Mode::All)[c];
    let (hub, auth) = centrality::hits(&cg);
    let nf = F::of_usize(n);
    let closeness = |mode, weighted| centrality::closeness_at(&cg, c, mode, weighted);

    let values = [
        F::of_usize(n),
        F::of_usize(cg.edges.len()),
        g.total_weight(),
        F::of_usize(loops),
        F::of_usize(d_in),
        F::of_usize(d_out),
        F::of_usize(d_in + d_out),
        F::of_usize(centrality::neighborhood_size(&cg, c, 1)),
        F::of_usize(centrality::neighborhood_size(&cg, c, 2)),
        closeness(Mode::In, true),
        closeness(Mode::Out, true),
        closeness(Mode::All, true),
        closeness(Mode::In, false),
        closeness(Mode::Out, false),
        closeness(Mode::All, false),
        bt[c],
        pr[c],
        cc[c],
        F::of_usize(core_in),
        F::of_usize(core_out),
        F::of_usize(core_all),
        F::of_usize(core_in) / nf,
        F::of_usize(core_out) / nf,
        F::of_usize(core_all) / nf,
        hub[c],
        auth[c],
    ];
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(FeatureVector {
        kind,
        actor: g.center(),
        label: None,
        values: FEATURE_NAMES.iter().copied().zip(values).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow<F> {
    /// Whole-graph identifier (the seed address); one group per actor
    /// across all views.
    pub group: String,
    pub actor: ActorId,
    pub label: Option<Class>,
    pub values: Vec<F>,
}

/// Rectangular feature table for a single view.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<F> {
    pub kind: GraphKind,
    pub schema: Vec<String>,
    pub rows: Vec<FeatureRow<F>>,
}

impl<F: Scalar> FeatureMatrix<F> {
    pub fn new(kind: GraphKind, schema: Vec<String>) -> Self {
        FeatureMatrix { kind, schema, rows: Vec::new() }
    }

    /// Matrix over the full [`FEATURE_NAMES`] schema.
    pub fn full(kind: GraphKind) -> Self {
        Self::new(kind, FEATURE_NAMES.iter().map(|s| s.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.schema.len()
    }

    /// Append a vector, picking the schema's features by name.
    pub fn push(&mut self, group: impl Into<String>, fv: &FeatureVector<F>) -> Result<()> {
        if fv.kind != self.kind {
            return Err(Error::InvalidArgument(format!(
                "feature vector of kind {} pushed into {} matrix",
                fv.kind, self.kind
            )));
        }
        let values = self
            .schema
            .iter()
            .map(|name| {
                fv.get(name)
                    .ok_or_else(|| Error::InvalidArgument(format!("feature {name:?} missing")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.rows.push(FeatureRow {
            group: group.into(),
            actor: fv.actor,
            label: fv.label,
            values,
        });
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s == name)
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        self.rows.iter().map(|r| r.values[j]).collect()
    }

    /// Restrict to `schema` (a subset of the current columns, any order).
    pub fn project(&self, schema: &[String]) -> Result<Self> {
        let idx = schema
            .iter()
            .map(|name| {
                self.column_index(name)
                    .ok_or_else(|| Error::InvalidArgument(format!("feature {name:?} not in matrix")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix {
            kind: self.kind,
            schema: schema.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    values: idx.iter().map(|&j| r.values[j]).collect(),
                    ..r.clone()
                })
                .collect(),
        })
    }

    /// CSV with columns `group,actor,kind,label` followed by the schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["group", "actor", "kind", "label"];
        header.extend(self.schema.iter().map(String::as_str));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.group.clone(),
                r.actor.to_string(),
                self.kind.to_string(),
                r.label.map(|c| c.to_string()).unwrap_or_default(),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(kind: GraphKind, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 4 || &header[0] != "group" || &header[1] != "actor" || &header[2] != "kind" || &header[3] != "label" {
            return Err(Error::Format("feature CSV must start with group,actor,kind,label".into()));
        }
        let schema: Vec<String> = header.iter().skip(4).map(str::to_string).collect();
        let mut m = FeatureMatrix::new(kind, schema);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |msg: String| Error::Parse { line, msg };
            if rec[2].parse::<GraphKind>()? != kind {
                return Err(bad(format!("row of kind {} in {} file", &rec[2], kind)));
            }
            let label = match &rec[3] {
                "" => None,
                s => Some(s.parse::<Class>()?),
            };
            let values = rec
                .iter()
                .skip(4)
                .map(|v| v.parse::<f64>().map(F::of).map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            m.rows.push(FeatureRow {
                group: rec[0].to_string(),
                actor: rec[1].parse().map_err(bad)?,
                label,
                values,
            });
        }
        Ok(m)
    }
}
