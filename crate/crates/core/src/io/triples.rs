use std::io::Write;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::graph::KnowledgeGraph;

/// Writes `source\trelation\ttarget` lines in triple id order.
pub fn write_triples<W: Write>(graph: &KnowledgeGraph, mut out: W) -> Result<()> {
    let v = graph.vocab();
    for t in graph.triples() {
        writeln!(out, "{}\t{}\t{}", v.entity_name(t.source), v.relation_name(t.relation), v.entity_name(t.target))?;
    }
    Ok(())
}

/// SHA-256 (hex) of the graph's canonical triple serialization.
pub fn graph_hash(graph: &KnowledgeGraph) -> String {
    let mut buf = Vec::new();
    write_triples(graph, &mut buf).expect("writing to memory");
    hex::encode(Sha256::digest(&buf))
}
