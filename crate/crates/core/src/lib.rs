//! Transaction-graph analytics for attributing Bitcoin actors.
//!
//! The pipeline runs chain ingestion ([`chainstore`]), temporally-bounded
//! subgraph reconstruction ([`txgraph`]), local address clustering
//! ([`clustering`]), actor-graph construction and ego views
//! ([`actorgraph`]) and centrality feature extraction ([`features`]).
//! [`synth`] generates labelled synthetic chains for end-to-end runs.
//!
//! Real-valued code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the pipeline uses.

pub mod actorgraph;
pub mod chainstore;
pub mod class;
pub mod clustering;
pub mod error;
pub mod features;
pub mod scalar;
pub mod synth;
pub mod txgraph;
pub mod union_find;

pub use chainstore::{Address, ChainIndex, ServiceTagRegistry, Transaction, Txid};
pub use class::Class;
pub use clustering::{ActorId, ClusterMap};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use txgraph::{SubgraphLimits, TxSubgraph};

pub type ActorGraph = actorgraph::ActorGraph<f64>;
pub type ActorEdge = actorgraph::ActorEdge<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;
