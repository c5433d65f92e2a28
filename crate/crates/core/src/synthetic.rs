//! Small structured graphs with known regularities, for tests, benchmarks
//! and the demo pipeline.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::Result;
use crate::graph::{GraphSplit, KnowledgeGraph, Triple, Vocab};
use crate::rng;

/// Entities `e0..e{n-1}` on a ring, linked by relations that each shift
/// the ring position by a fixed offset, plus a reflection relation.
///
/// Relations: `succ` (+1), `skip` (+`skip`), `mirror` (i ↦ n-1-i),
/// and `two` (+2). `two` is exactly `succ/succ`, so it is a planted
/// length-2 Horn clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingGraph {
    pub entities: usize,
    pub skip: usize,
}

impl Default for RingGraph {
    fn default() -> Self {
        Self { entities: 30, skip: 5 }
    }
}

impl RingGraph {
    pub const RELATIONS: [&'static str; 4] = ["succ", "skip", "mirror", "two"];

    /// Every edge as `(source, relation, target)` name triples.
    pub fn edges(&self) -> Vec<(String, &'static str, String)> {
        let n = self.entities;
        let name = |i: usize| format!("e{}", i % n);
        let mut out = Vec::with_capacity(4 * n);
        for i in 0..n {
            out.push((name(i), "succ", name(i + 1)));
            out.push((name(i), "skip", name(i + self.skip)));
            out.push((name(i), "mirror", name(n - 1 - i)));
            out.push((name(i), "two", name(i + 2)));
        }
        out
    }

    /// The whole graph, before inverse closure.
    pub fn graph(&self) -> KnowledgeGraph {
        let mut vocab = Vocab::new();
        for i in 0..self.entities {
            vocab.intern_entity(&format!("e{i}"));
        }
        for r in Self::RELATIONS {
            vocab.intern_relation(r).expect("open vocabulary");
        }
        let triples: Vec<Triple> = self
            .edges()
            .iter()
            .map(|(s, r, t)| {
                Triple::new(
                    vocab.entity_id(s).unwrap(),
                    vocab.relation_id(r).unwrap(),
                    vocab.entity_id(t).unwrap(),
                )
            })
            .collect();
        KnowledgeGraph::from_triples(Arc::new(vocab), triples).expect("valid ids")
    }

    /// Holds out `fraction` of the edges (seeded) and closes both graphs
    /// under inverses.
    pub fn split(&self, fraction: f64, seed: u64) -> Result<GraphSplit> {
        let full = self.graph();
        let mut triples: Vec<Triple> = full.triples().copied().collect();
        triples.shuffle(&mut rng::seeded(seed));
        let n_test = (triples.len() as f64 * fraction).round() as usize;
        let held_out: BTreeSet<Triple> = triples[..n_test].iter().copied().collect();
        let train = KnowledgeGraph::from_triples(
            full.vocab().clone(),
            triples[n_test..].iter().copied(),
        )?;
        GraphSplit::from_parts(train, held_out)?.close_inverses()
    }
}
