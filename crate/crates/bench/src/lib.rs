//! Shared fixtures for the benchmarks.

use pathquery_core::rng;
use pathquery_core::synthetic::RingGraph;
use pathquery_core::{generate_datasets, KnowledgeGraph, ModelKind, ModelParams, PathGenConfig, QueryExample};

pub struct Fixture {
    pub graph: KnowledgeGraph,
    pub examples: Vec<QueryExample>,
}

/// A ring graph of `entities` nodes, inverse-closed, with `walks` sampled
/// multi-hop training queries of length up to 5.
pub fn ring_fixture(entities: usize, walks: usize) -> Fixture {
    let graph = RingGraph { entities, skip: 5 }.graph().close_inverses().expect("fresh graph");
    let cfg = PathGenConfig { max_length: 5, train_count: walks, test_count: 0, seed: 0 };
    let examples = generate_datasets(&graph, &graph, &cfg).expect("ring has no dead ends").train;
    Fixture { graph, examples }
}

pub fn random_params(fixture: &Fixture, kind: ModelKind, dim: usize) -> ModelParams {
    ModelParams::random(kind, dim, fixture.graph.vocab(), 0.1f64.sqrt(), &mut rng::seeded(0))
}
