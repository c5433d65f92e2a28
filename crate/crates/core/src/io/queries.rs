use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, PathQuery, QueryExample};

const MAGIC: &str = "pathquery-dataset v1";

/// `# key=value` comment lines at the top of a path-query file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetHeader {
    pub fields: Vec<(String, String)>,
}

impl DatasetHeader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// `source\tr1,r2,...,rk\ttarget`
pub fn format_example(graph: &KnowledgeGraph, example: &QueryExample) -> String {
    let v = graph.vocab();
    let rels: Vec<&str> = example.query.path().iter().map(|&r| v.relation_name(r)).collect();
    format!("{}\t{}\t{}", v.entity_name(example.query.source), rels.join(","), v.entity_name(example.answer))
}

pub fn write_path_queries<W: Write>(
    graph: &KnowledgeGraph,
    header: &DatasetHeader,
    examples: &[QueryExample],
    mut out: W,
) -> Result<()> {
    writeln!(out, "# {MAGIC}")?;
    for (k, v) in &header.fields {
        writeln!(out, "# {k}={v}")?;
    }
    for ex in examples {
        writeln!(out, "{}", format_example(graph, ex))?;
    }
    Ok(())
}

/// Reads a path-query file, resolving names against `graph`.
pub fn read_path_queries<R: BufRead>(reader: R, graph: &KnowledgeGraph) -> Result<(DatasetHeader, Vec<QueryExample>)> {
    let v = graph.vocab();
    let mut header = DatasetHeader::new();
    let mut examples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, val)) = comment.trim().split_once('=') {
                header.fields.push((k.trim().to_owned(), val.trim().to_owned()));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line: lineno,
                message: "expected `source<TAB>r1,...,rk<TAB>target`".into(),
            });
        }
        let entity = |name: &str| {
            v.entity_id(name).ok_or_else(|| Error::UnknownEntity { line: lineno, name: name.to_owned() })
        };
        let source = entity(fields[0])?;
        let path = fields[1]
            .split(',')
            .map(|r| v.relation_id(r).ok_or_else(|| Error::UnknownRelation { line: lineno, name: r.to_owned() }))
            .collect::<Result<Vec<_>>>()?;
        let answer = entity(fields[2])?;
        examples.push(QueryExample::new(PathQuery::new(source, path), answer));
    }
    Ok((header, examples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_triples;

    #[test]
    fn one_line_one_example() {
        let g = load_triples("a\tr\tb\nb\ts\tc\n".as_bytes()).unwrap();
        let (h, ex) = read_path_queries("# seed=3\na\tr,s\tc\n".as_bytes(), &g).unwrap();
        assert_eq!(h.get("seed"), Some("3"));
        assert_eq!(ex.len(), 1);
        assert_eq!(format_example(&g, &ex[0]), "a\tr,s\tc");
    }

    #[test]
    fn unknown_relation_reports_line() {
        let g = load_triples("a\tr\tb\n".as_bytes()).unwrap();
        let err = read_path_queries("a\tnope\tb\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(err, Error::UnknownRelation { line: 1, .. }));
        let err = read_path_queries("a\tr\tb\nzz\tr\tb\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(err, Error::UnknownEntity { line: 2, .. }));
        let err = read_path_queries("a\tr\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_path_queries("a\tr,\tb\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(err, Error::UnknownRelation { line: 1, .. }));
    }
}
