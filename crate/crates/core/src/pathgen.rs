//! Random-walk generation of path-query datasets.

use std::collections::HashSet;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, PathQuery, QueryExample, RelationId};
use crate::rng::{self, Rng};

/// Attempts per walk before giving up on a length the graph cannot support.
const MAX_WALK_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathGenConfig {
    pub max_length: usize,
    /// Number of sampled multi-hop training walks, on top of the edges.
    pub train_count: usize,
    /// Number of test walks sampled before overlap removal.
    pub test_count: usize,
    pub seed: u64,
}

impl Default for PathGenConfig {
    fn default() -> Self {
        Self { max_length: 5, train_count: 10_000, test_count: 1_000, seed: 0 }
    }
}

/// Samples a walk whose length is uniform on `1..=max_length`.
pub fn sample_walk(graph: &KnowledgeGraph, max_length: usize, rng: &mut Rng) -> Result<QueryExample> {
    assert!(max_length >= 1);
    let len = rng.random_range(1..=max_length);
    sample_walk_of_length(graph, len, rng)
}

/// Samples a walk of exactly `len` steps. The start entity is uniform over
/// all entities; each step picks a relation uniformly among those leaving
/// the current entity, then a target uniformly among that relation's
/// targets. Walks that dead-end are discarded and restarted from scratch.
pub fn sample_walk_of_length(graph: &KnowledgeGraph, len: usize, rng: &mut Rng) -> Result<QueryExample> {
    assert!(len >= 1);
    if graph.triple_count() == 0 {
        return Err(Error::NoEdges);
    }
    let n = graph.entity_count();
    let mut path = Vec::with_capacity(len);
    'attempt: for _ in 0..MAX_WALK_ATTEMPTS {
        path.clear();
        let source = EntityId(rng.random_range(0..n) as u32);
        let mut current = source;
        for _ in 0..len {
            let rels = graph.incident(current);
            if rels.is_empty() {
                continue 'attempt;
            }
            let r: RelationId = rels[rng.random_range(0..rels.len())];
            let targets = graph.targets(current, r);
            current = targets[rng.random_range(0..targets.len())];
            path.push(r);
        }
        return Ok(QueryExample::new(PathQuery::new(source, path), current));
    }
    Err(Error::WalkExhausted(len, MAX_WALK_ATTEMPTS))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Datasets {
    pub train: Vec<QueryExample>,
    pub test: Vec<QueryExample>,
    /// Test examples dropped because their query also occurs in training.
    pub removed_overlap: usize,
}

/// Builds training and test path-query sets.
///
/// The training set holds every edge of `train_graph` as a length-1 query
/// plus `train_count` walks with length uniform on `2..=max_length`. The
/// test set holds `test_count` walks on `full_graph` with length uniform on
/// `1..=max_length`, minus every example whose query (anchor plus relation
/// sequence) also appears in training. Both sets come back in canonical
/// order: sorted by rendered query, then by answer name.
pub fn generate_datasets(
    train_graph: &KnowledgeGraph,
    full_graph: &KnowledgeGraph,
    config: &PathGenConfig,
) -> Result<Datasets> {
    if config.max_length < 1 {
        return Err(Error::Config("max_length must be at least 1".into()));
    }
    if !train_graph.shares_vocab(full_graph) {
        return Err(Error::TableMismatch);
    }
    if let Some(t) = train_graph.triples().find(|t| !full_graph.contains(t)) {
        let v = train_graph.vocab();
        return Err(Error::NotSubset(format!(
            "({}, {}, {}) missing from full graph",
            v.entity_name(t.source),
            v.relation_name(t.relation),
            v.entity_name(t.target)
        )));
    }

    let mut train: Vec<QueryExample> = train_graph
        .triples()
        .map(|t| QueryExample::new(PathQuery::single(t.source, t.relation), t.target))
        .collect();
    if config.max_length >= 2 && config.train_count > 0 {
        let mut rng = rng::substream(config.seed, 1);
        for _ in 0..config.train_count {
            let len = rng.random_range(2..=config.max_length);
            train.push(sample_walk_of_length(train_graph, len, &mut rng)?);
        }
    }

    let mut test = Vec::with_capacity(config.test_count);
    if config.test_count > 0 {
        let mut rng = rng::substream(config.seed, 2);
        for _ in 0..config.test_count {
            test.push(sample_walk(full_graph, config.max_length, &mut rng)?);
        }
    }
    let seen: HashSet<&PathQuery> = train.iter().map(|e| &e.query).collect();
    let before = test.len();
    test.retain(|e| !seen.contains(&e.query));
    let removed_overlap = before - test.len();

    canonical_sort(train_graph, &mut train);
    canonical_sort(train_graph, &mut test);
    Ok(Datasets { train, test, removed_overlap })
}

/// Sorts examples by rendered query string, then by answer name.
pub fn canonical_sort(graph: &KnowledgeGraph, examples: &mut [QueryExample]) {
    let v = graph.vocab();
    examples.sort_by_cached_key(|e| {
        let mut key = v.entity_name(e.query.source).to_owned();
        key.push('\t');
        for (i, &r) in e.query.path().iter().enumerate() {
            if i > 0 {
                key.push(',');
            }
            key.push_str(v.relation_name(r));
        }
        (key, v.entity_name(e.answer).to_owned())
    });
}
