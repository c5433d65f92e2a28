//! Writes the synthetic ring graph as a train/held-out TSV pair.
//!
//! cargo run -p pathquery-core --example ring_fixture -- <out-dir> [held-out fraction] [seed]

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use pathquery_core::synthetic::RingGraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: ring_fixture <out-dir> [fraction] [seed]")?);
    let fraction: f64 = args.next().map_or(Ok(0.2), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;

    let split = RingGraph::default().split(fraction, seed)?;
    fs::create_dir_all(&dir)?;
    let v = split.train.vocab();
    let mut train = BufWriter::new(File::create(dir.join("train.tsv"))?);
    for t in split.train.triples().filter(|t| !v.is_inverse_relation(t.relation)) {
        writeln!(train, "{}\t{}\t{}", v.entity_name(t.source), v.relation_name(t.relation), v.entity_name(t.target))?;
    }
    let mut held = BufWriter::new(File::create(dir.join("heldout.tsv"))?);
    for t in &split.held_out {
        writeln!(held, "{}\t{}\t{}", v.entity_name(t.source), v.relation_name(t.relation), v.entity_name(t.target))?;
    }
    train.flush()?;
    held.flush()?;
    Ok(())
}
