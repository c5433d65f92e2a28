//! Compositional vector-space models for answering path queries over an
//! incomplete knowledge graph.
//!
//! A path query `s/r1/.../rk` asks for every entity reachable from `s` by
//! following `r1`, then `r2`, and so on. The [`graph`] module answers such
//! queries exactly on a symbolic graph. The [`models`] module answers them
//! approximately by folding per-relation traversal operators over an entity
//! vector, so a model can generalize past missing edges. [`training`] fits
//! those operators with a max-margin ranking objective on single edges and
//! on random-walk paths from [`pathgen`]. [`eval`] and [`analysis`] measure
//! the result.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod models;
pub mod pathgen;
pub mod rng;
pub mod synthetic;
pub mod training;

pub use error::{Error, Result};
pub use eval::{evaluate, EvalConfig, EvalGraphPolicy, EvalReport, Subset};
pub use graph::{
    load_triples, EntityId, GraphSplit, Inference, KnowledgeGraph, PathQuery, QueryExample, RelationId, Triple, Vocab,
};
pub use models::{ModelKind, ModelParams, SetVector};
pub use pathgen::{generate_datasets, Datasets, PathGenConfig};
pub use training::{train, Curriculum, TrainConfig, TrainLog};
