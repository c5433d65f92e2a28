//! Exact symbolic knowledge graph: triple storage, traversal indexes, path
//! denotations, candidate sets and the test-leakage filters built on them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Suffix appended to a base relation name to name its synthesized inverse.
pub const INVERSE_SUFFIX: &str = "^-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub source: EntityId,
    pub relation: RelationId,
    pub target: EntityId,
}

impl Triple {
    pub fn new(source: EntityId, relation: RelationId, target: EntityId) -> Self {
        Self { source, relation, target }
    }
}

/// An anchor entity followed by a nonempty sequence of relations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathQuery {
    pub source: EntityId,
    path: Vec<RelationId>,
}

impl PathQuery {
    /// Panics if `path` is empty.
    pub fn new(source: EntityId, path: Vec<RelationId>) -> Self {
        assert!(!path.is_empty(), "path query needs at least one relation");
        Self { source, path }
    }

    pub fn single(source: EntityId, relation: RelationId) -> Self {
        Self { source, path: vec![relation] }
    }

    pub fn path(&self) -> &[RelationId] {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last_relation(&self) -> RelationId {
        *self.path.last().expect("nonempty path")
    }

    /// The query truncated to its first `len` relations.
    pub fn prefix(&self, len: usize) -> PathQuery {
        assert!(len >= 1 && len <= self.path.len());
        PathQuery { source: self.source, path: self.path[..len].to_vec() }
    }
}

/// A path query paired with one correct answer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueryExample {
    pub query: PathQuery,
    pub answer: EntityId,
}

impl QueryExample {
    pub fn new(query: PathQuery, answer: EntityId) -> Self {
        Self { query, answer }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inference {
    Deduction,
    Induction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInfo {
    pub name: String,
    pub inverse_of: Option<RelationId>,
}

/// Entity and relation name tables. Shared between graphs built over the
/// same universe (e.g. a training graph and its full graph).
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    entities: Vec<String>,
    entity_index: HashMap<String, u32>,
    relations: Vec<RelationInfo>,
    relation_index: HashMap<String, u32>,
    num_base_relations: usize,
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities
            && self.relations == other.relations
            && self.num_base_relations == other.num_base_relations
    }
}

impl Eq for Vocab {}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn base_relation_count(&self) -> usize {
        self.num_base_relations
    }

    pub fn is_closed(&self) -> bool {
        self.relations.len() > self.num_base_relations
    }

    pub fn entity_name(&self, id: EntityId) -> &str {
        &self.entities[id.index()]
    }

    pub fn relation_name(&self, id: RelationId) -> &str {
        &self.relations[id.index()].name
    }

    pub fn relation(&self, id: RelationId) -> &RelationInfo {
        &self.relations[id.index()]
    }

    pub fn entity_id(&self, name: &str) -> Option<EntityId> {
        self.entity_index.get(name).copied().map(EntityId)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelationId> {
        self.relation_index.get(name).copied().map(RelationId)
    }

    pub fn inverse(&self, id: RelationId) -> Option<RelationId> {
        self.relations.get(id.index()).and_then(|r| r.inverse_of)
    }

    pub fn is_inverse_relation(&self, id: RelationId) -> bool {
        id.index() >= self.num_base_relations
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entities
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|r| r.name.as_str())
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entities.len() as u32).map(EntityId)
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> {
        (0..self.relations.len() as u32).map(RelationId)
    }

    /// Interns an entity name, assigning the next id on first appearance.
    pub fn intern_entity(&mut self, name: &str) -> EntityId {
        if let Some(&id) = self.entity_index.get(name) {
            return EntityId(id);
        }
        let id = self.entities.len() as u32;
        self.entities.push(name.to_owned());
        self.entity_index.insert(name.to_owned(), id);
        EntityId(id)
    }

    /// Interns a base relation name. Fails once inverses have been synthesized.
    pub fn intern_relation(&mut self, name: &str) -> Result<RelationId> {
        if let Some(&id) = self.relation_index.get(name) {
            return Ok(RelationId(id));
        }
        if self.is_closed() {
            return Err(Error::AlreadyClosed);
        }
        let id = self.relations.len() as u32;
        self.relations.push(RelationInfo { name: name.to_owned(), inverse_of: None });
        self.relation_index.insert(name.to_owned(), id);
        self.num_base_relations += 1;
        Ok(RelationId(id))
    }

    /// Appends `r^-` for every base relation `r`; inverse of base id `i` is `n + i`.
    pub fn with_inverses(&self) -> Result<Vocab> {
        if self.is_closed() {
            return Err(Error::AlreadyClosed);
        }
        if let Some(r) = self.relations.iter().find(|r| r.name.ends_with(INVERSE_SUFFIX)) {
            return Err(Error::AmbiguousInverseName(r.name.clone()));
        }
        let n = self.relations.len() as u32;
        let mut out = self.clone();
        for i in 0..n {
            let name = format!("{}{}", self.relations[i as usize].name, INVERSE_SUFFIX);
            if out.relation_index.contains_key(&name) {
                return Err(Error::AmbiguousInverseName(name));
            }
            out.relations[i as usize].inverse_of = Some(RelationId(n + i));
            out.relation_index.insert(name.clone(), n + i);
            out.relations.push(RelationInfo { name, inverse_of: Some(RelationId(i)) });
        }
        Ok(out)
    }
}

/// Immutable, fully indexed triple store.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    vocab: Arc<Vocab>,
    triples: BTreeSet<Triple>,
    out_index: BTreeMap<(EntityId, RelationId), Vec<EntityId>>,
    rel_pairs: Vec<BTreeSet<(EntityId, EntityId)>>,
    rel_targets: Vec<BTreeSet<EntityId>>,
    incident: Vec<Vec<RelationId>>,
}

static EMPTY_SET: BTreeSet<EntityId> = BTreeSet::new();

impl KnowledgeGraph {
    /// Builds a graph over `vocab` from a triple set, validating every id.
    pub fn from_triples(
        vocab: Arc<Vocab>,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Result<Self> {
        let ne = vocab.entity_count() as u32;
        let nr = vocab.relation_count() as u32;
        let mut set = BTreeSet::new();
        for t in triples {
            for e in [t.source, t.target] {
                if e.0 >= ne {
                    return Err(Error::EntityOutOfRange(e.0));
                }
            }
            if t.relation.0 >= nr {
                return Err(Error::RelationOutOfRange(t.relation.0));
            }
            set.insert(t);
        }
        Ok(Self::index(vocab, set))
    }

    fn index(vocab: Arc<Vocab>, triples: BTreeSet<Triple>) -> Self {
        let mut out_index: BTreeMap<(EntityId, RelationId), Vec<EntityId>> = BTreeMap::new();
        let mut rel_pairs = vec![BTreeSet::new(); vocab.relation_count()];
        let mut rel_targets = vec![BTreeSet::new(); vocab.relation_count()];
        let mut incident = vec![Vec::new(); vocab.entity_count()];
        // BTreeSet iteration is sorted by (source, relation, target), so every
        // adjacency list and incidence list comes out sorted and deduplicated.
        for t in &triples {
            out_index.entry((t.source, t.relation)).or_default().push(t.target);
            rel_pairs[t.relation.index()].insert((t.source, t.target));
            rel_targets[t.relation.index()].insert(t.target);
            let inc: &mut Vec<RelationId> = &mut incident[t.source.index()];
            if inc.last() != Some(&t.relation) {
                inc.push(t.relation);
            }
        }
        Self { vocab, triples, out_index, rel_pairs, rel_targets, incident }
    }

    pub fn vocab(&self) -> &Arc<Vocab> {
        &self.vocab
    }

    pub fn entity_count(&self) -> usize {
        self.vocab.entity_count()
    }

    pub fn relation_count(&self) -> usize {
        self.vocab.relation_count()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn is_closed(&self) -> bool {
        self.vocab.is_closed()
    }

    /// Sorted targets of `(source, relation)` edges.
    pub fn targets(&self, source: EntityId, relation: RelationId) -> &[EntityId] {
        self.out_index.get(&(source, relation)).map_or(&[], Vec::as_slice)
    }

    /// Relations with at least one outgoing edge from `entity`, sorted.
    pub fn incident(&self, entity: EntityId) -> &[RelationId] {
        self.incident.get(entity.index()).map_or(&[], Vec::as_slice)
    }

    pub fn relation_pairs(&self, relation: RelationId) -> &BTreeSet<(EntityId, EntityId)> {
        static EMPTY: BTreeSet<(EntityId, EntityId)> = BTreeSet::new();
        self.rel_pairs.get(relation.index()).unwrap_or(&EMPTY)
    }

    /// True when both graphs index the same entity and relation tables.
    pub fn shares_vocab(&self, other: &KnowledgeGraph) -> bool {
        Arc::ptr_eq(&self.vocab, &other.vocab) || *self.vocab == *other.vocab
    }

    pub fn is_subset_of(&self, other: &KnowledgeGraph) -> bool {
        self.shares_vocab(other) && self.triples.is_subset(&other.triples)
    }

    /// New graph with an explicit inverse relation `r^-` for every base
    /// relation `r` and a reversed edge for every triple.
    pub fn close_inverses(&self) -> Result<KnowledgeGraph> {
        let vocab = Arc::new(self.vocab.with_inverses()?);
        self.close_inverses_with(vocab)
    }

    /// Like [`close_inverses`](Self::close_inverses) but reuses an already
    /// closed vocabulary, so several graphs can share one table.
    pub fn close_inverses_with(&self, closed: Arc<Vocab>) -> Result<KnowledgeGraph> {
        if self.is_closed() {
            return Err(Error::AlreadyClosed);
        }
        if !closed.is_closed() || *closed.as_ref() != self.vocab.with_inverses()? {
            return Err(Error::TableMismatch);
        }
        let mut triples = self.triples.clone();
        for t in &self.triples {
            let inv = closed.inverse(t.relation).expect("base relation has an inverse");
            triples.insert(Triple::new(t.target, inv, t.source));
        }
        Ok(Self::index(closed, triples))
    }

    /// Same graph, relabelled onto a larger-or-equal vocabulary that agrees
    /// on every existing name and id.
    pub fn with_vocab(&self, vocab: Arc<Vocab>) -> Result<KnowledgeGraph> {
        let ok = self.vocab.entities.len() <= vocab.entities.len()
            && self.vocab.relations.len() <= vocab.relations.len()
            && vocab.entities[..self.vocab.entities.len()] == self.vocab.entities[..]
            && vocab.relations[..self.vocab.relations.len()]
                .iter()
                .zip(&self.vocab.relations)
                .all(|(a, b)| a.name == b.name);
        if !ok {
            return Err(Error::TableMismatch);
        }
        Ok(Self::index(vocab, self.triples.clone()))
    }

    /// Exact denotation of a path query: the entities reached by following
    /// every relation of the path in turn. Empty when the traversal dead-ends.
    pub fn denotation(&self, query: &PathQuery) -> BTreeSet<EntityId> {
        let mut frontier = BTreeSet::from([query.source]);
        for &r in query.path() {
            frontier = self.step(&frontier, r);
            if frontier.is_empty() {
                break;
            }
        }
        frontier
    }

    /// One traversal step from a set of entities.
    pub fn step(&self, from: &BTreeSet<EntityId>, relation: RelationId) -> BTreeSet<EntityId> {
        from.iter()
            .flat_map(|&e| self.targets(e, relation).iter().copied())
            .collect()
    }

    /// Entities appearing as the target of the query's final relation.
    pub fn candidates(&self, query: &PathQuery) -> &BTreeSet<EntityId> {
        self.rel_targets.get(query.last_relation().index()).unwrap_or(&EMPTY_SET)
    }

    /// Candidates that are not correct answers.
    pub fn incorrect_answers(&self, query: &PathQuery) -> BTreeSet<EntityId> {
        let den = self.denotation(query);
        self.candidates(query).difference(&den).copied().collect()
    }

    /// True when the reversed edge `(t, r^-, s)` is already in this
    /// (inverse-closed) training graph, which makes the test edge trivial.
    pub fn is_trivial_inverse_edge(&self, triple: &Triple) -> bool {
        match self.vocab.inverse(triple.relation) {
            Some(inv) => self.contains(&Triple::new(triple.target, inv, triple.source)),
            None => false,
        }
    }

    /// Deduction when the answer is reachable in this graph by exact traversal.
    pub fn classify(&self, example: &QueryExample) -> Inference {
        if self.denotation(&example.query).contains(&example.answer) {
            Inference::Deduction
        } else {
            Inference::Induction
        }
    }

    pub fn query_display<'a>(&'a self, query: &'a PathQuery) -> QueryDisplay<'a> {
        QueryDisplay { vocab: &self.vocab, query }
    }

    /// Resolves a slash-separated `source/r1/.../rk` query string.
    pub fn parse_query(&self, text: &str) -> Result<PathQuery> {
        let mut parts = text.split('/');
        let source = parts.next().unwrap_or_default();
        let source = self.vocab.entity_id(source).ok_or_else(|| Error::UnknownEntity {
            line: 1,
            name: source.to_owned(),
        })?;
        let path = parts
            .map(|r| {
                self.vocab
                    .relation_id(r)
                    .ok_or_else(|| Error::UnknownRelation { line: 1, name: r.to_owned() })
            })
            .collect::<Result<Vec<_>>>()?;
        if path.is_empty() {
            return Err(Error::Parse { line: 1, message: "query has no relations".into() });
        }
        Ok(PathQuery::new(source, path))
    }
}

/// Renders a query as `source/r1/.../rk`.
pub struct QueryDisplay<'a> {
    vocab: &'a Vocab,
    query: &'a PathQuery,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.vocab.entity_name(self.query.source))?;
        for &r in self.query.path() {
            write!(f, "/{}", self.vocab.relation_name(r))?;
        }
        Ok(())
    }
}

/// Counts reported after reading a triple file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub lines: usize,
    pub duplicates: usize,
}

/// Accumulates triples from one or more files into a shared vocabulary.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vocab: Vocab,
    triples: BTreeSet<Triple>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, source: &str, relation: &str, target: &str) -> Result<bool> {
        let s = self.vocab.intern_entity(source);
        let r = self.vocab.intern_relation(relation)?;
        let t = self.vocab.intern_entity(target);
        Ok(self.triples.insert(Triple::new(s, r, t)))
    }

    /// Reads `source\trelation\ttarget` lines. Returns the triples read from
    /// this stream (deduplicated) along with line counts.
    pub fn read<R: BufRead>(&mut self, reader: R) -> Result<(BTreeSet<Triple>, IngestSummary)> {
        let mut summary = IngestSummary::default();
        let mut seen = BTreeSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            if let Some(k) = fields.iter().position(|f| f.is_empty()) {
                return Err(Error::Parse { line: lineno, message: format!("field {} is empty", k + 1) });
            }
            if fields[1].contains(',') || fields[1].contains('/') {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("relation name `{}` contains `,` or `/`", fields[1]),
                });
            }
            summary.lines += 1;
            self.add(fields[0], fields[1], fields[2]).map_err(|e| match e {
                Error::AlreadyClosed => Error::Parse { line: lineno, message: e.to_string() },
                e => e,
            })?;
            let s = self.vocab.entity_id(fields[0]).unwrap();
            let r = self.vocab.relation_id(fields[1]).unwrap();
            let t = self.vocab.entity_id(fields[2]).unwrap();
            if !seen.insert(Triple::new(s, r, t)) {
                summary.duplicates += 1;
            }
        }
        Ok((seen, summary))
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn finish(self) -> KnowledgeGraph {
        KnowledgeGraph::index(Arc::new(self.vocab), self.triples)
    }
}

/// Loads a triple file. Ids are assigned in first-appearance order and
/// duplicate lines collapse to one triple.
pub fn load_triples<R: BufRead>(reader: R) -> Result<KnowledgeGraph> {
    load_triples_with_summary(reader).map(|(g, _)| g)
}

pub fn load_triples_with_summary<R: BufRead>(reader: R) -> Result<(KnowledgeGraph, IngestSummary)> {
    let mut builder = GraphBuilder::new();
    let (_, summary) = builder.read(reader)?;
    Ok((builder.finish(), summary))
}

/// A training graph and the full graph (training edges plus held-out edges)
/// over one shared vocabulary.
#[derive(Debug, Clone)]
pub struct GraphSplit {
    pub train: KnowledgeGraph,
    pub full: KnowledgeGraph,
    /// Edges of the second stream that are not training edges.
    pub held_out: BTreeSet<Triple>,
    pub train_summary: IngestSummary,
    pub full_summary: IngestSummary,
}

impl GraphSplit {
    /// Reads the training stream, then a second stream whose edges are
    /// unioned with the training edges to form the full graph. The second
    /// stream may hold either just the held-out edges or the whole graph.
    pub fn load<R1: BufRead, R2: BufRead>(train: R1, full: R2) -> Result<Self> {
        let mut builder = GraphBuilder::new();
        let (train_triples, train_summary) = builder.read(train)?;
        let (more, full_summary) = builder.read(full)?;
        let held_out: BTreeSet<Triple> = more.difference(&train_triples).copied().collect();
        let vocab = Arc::new(builder.vocab);
        let train = KnowledgeGraph::from_triples(vocab.clone(), train_triples)?;
        let full = KnowledgeGraph::index(vocab, builder.triples);
        Ok(Self { train, full, held_out, train_summary, full_summary })
    }

    /// Builds a split from in-memory triples over a shared vocabulary.
    pub fn from_parts(train: KnowledgeGraph, held_out: impl IntoIterator<Item = Triple>) -> Result<Self> {
        let held_out: BTreeSet<Triple> =
            held_out.into_iter().filter(|t| !train.contains(t)).collect();
        let full = KnowledgeGraph::from_triples(
            train.vocab.clone(),
            train.triples().copied().chain(held_out.iter().copied()),
        )?;
        Ok(Self {
            train,
            full,
            held_out,
            train_summary: IngestSummary::default(),
            full_summary: IngestSummary::default(),
        })
    }

    /// Closes both graphs under inverses with one shared closed vocabulary.
    /// Held-out edges stay as base-relation edges.
    pub fn close_inverses(&self) -> Result<GraphSplit> {
        let closed = Arc::new(self.train.vocab.with_inverses()?);
        Ok(GraphSplit {
            train: self.train.close_inverses_with(closed.clone())?,
            full: self.full.close_inverses_with(closed)?,
            held_out: self.held_out.clone(),
            train_summary: self.train_summary,
            full_summary: self.full_summary,
        })
    }

    /// Held-out edges that are not trivially answered by a reversed training edge.
    pub fn nontrivial_held_out(&self) -> Vec<Triple> {
        self.held_out
            .iter()
            .filter(|t| !self.train.is_trivial_inverse_edge(t))
            .copied()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(lines: &str) -> KnowledgeGraph {
        load_triples(lines.as_bytes()).unwrap()
    }

    fn q(g: &KnowledgeGraph, text: &str) -> PathQuery {
        g.parse_query(text).unwrap()
    }

    fn names(g: &KnowledgeGraph, set: &BTreeSet<EntityId>) -> Vec<String> {
        set.iter().map(|&e| g.vocab().entity_name(e).to_owned()).collect()
    }

    #[test]
    fn smallest_graph() {
        let g = graph("a\tparents\tb\n");
        assert_eq!(g.entity_count(), 2);
        assert_eq!(g.relation_count(), 1);
        assert_eq!(g.triple_count(), 1);
    }

    #[test]
    fn duplicate_lines_collapse() {
        let (g, summary) = load_triples_with_summary("a\tr\tb\na\tr\tb\n".as_bytes()).unwrap();
        assert_eq!(g.triple_count(), 1);
        assert_eq!(summary.duplicates, 1);
        assert_eq!(summary.lines, 2);
    }

    #[test]
    fn ids_follow_first_appearance() {
        let g = graph("z\tq\ty\ny\tp\tx\n");
        let v = g.vocab();
        assert_eq!(v.entity_id("z"), Some(EntityId(0)));
        assert_eq!(v.entity_id("y"), Some(EntityId(1)));
        assert_eq!(v.entity_id("x"), Some(EntityId(2)));
        assert_eq!(v.relation_id("q"), Some(RelationId(0)));
        assert_eq!(v.relation_id("p"), Some(RelationId(1)));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = load_triples("a\tr\tb\na\tr\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_triples("a\t\tb\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = load_triples("a\tr\tb\tc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn close_inverses_adds_reversed_edges() {
        let g = graph("a\tr\tb\n").close_inverses().unwrap();
        assert_eq!(g.triple_count(), 2);
        assert_eq!(g.relation_count(), 2);
        let inv = g.vocab().relation_id("r^-").unwrap();
        assert_eq!(g.vocab().inverse(RelationId(0)), Some(inv));
        assert_eq!(g.vocab().inverse(inv), Some(RelationId(0)));
        let a = g.vocab().entity_id("a").unwrap();
        let b = g.vocab().entity_id("b").unwrap();
        assert!(g.contains(&Triple::new(b, inv, a)));
    }

    #[test]
    fn close_inverses_doubles_relations() {
        let text: String = (0..11).map(|i| format!("e{i}\trel{i}\te{}\n", i + 1)).collect();
        let g = graph(&text).close_inverses().unwrap();
        assert_eq!(g.relation_count(), 22);
        assert_eq!(g.vocab().base_relation_count(), 11);
    }

    #[test]
    fn close_inverses_twice_fails() {
        let g = graph("a\tr\tb\n").close_inverses().unwrap();
        assert!(matches!(g.close_inverses(), Err(Error::AlreadyClosed)));
    }

    #[test]
    fn close_inverses_rejects_suffixed_names() {
        let g = graph("a\tr^-\tb\n");
        assert!(matches!(g.close_inverses(), Err(Error::AmbiguousInverseName(_))));
    }

    #[test]
    fn denotation_basic_and_fan_out() {
        let g = graph("a\tr\tb\n");
        assert_eq!(names(&g, &g.denotation(&q(&g, "a/r"))), ["b"]);
        let g = graph("a\tr\tb\nb\ts\tc\nb\ts\td\n");
        assert_eq!(names(&g, &g.denotation(&q(&g, "a/r/s"))), ["c", "d"]);
        assert!(g.denotation(&q(&g, "c/s")).is_empty());
    }

    #[test]
    fn candidates_depend_on_final_relation_only() {
        let g = graph("a\tr\tb\nc\tr\td\n");
        for src in ["a", "b", "c", "d"] {
            assert_eq!(names(&g, g.candidates(&q(&g, &format!("{src}/r")))), ["b", "d"]);
        }
        let g = graph("a\tr\tb\nx\ts\ty\n");
        assert_eq!(names(&g, g.candidates(&q(&g, "a/s/r"))), ["b"]);
    }

    #[test]
    fn incorrect_answers_examples() {
        let g = graph("a\tr\tb\nc\tr\td\n");
        assert_eq!(names(&g, &g.incorrect_answers(&q(&g, "a/r"))), ["d"]);
        let g = graph("a\tr\tb\n");
        assert!(g.incorrect_answers(&q(&g, "a/r")).is_empty());
    }

    #[test]
    fn trivial_inverse_edges() {
        let g = graph("a\tr\tb\n").close_inverses().unwrap();
        let a = g.vocab().entity_id("a").unwrap();
        let b = g.vocab().entity_id("b").unwrap();
        // train contains (b, r^-, a)
        assert!(g.is_trivial_inverse_edge(&Triple::new(a, RelationId(0), b)));
        assert!(!g.is_trivial_inverse_edge(&Triple::new(b, RelationId(0), a)));

        let empty = KnowledgeGraph::from_triples(g.vocab().clone(), []).unwrap();
        assert!(!empty.is_trivial_inverse_edge(&Triple::new(a, RelationId(0), b)));
    }

    #[test]
    fn deduction_and_induction() {
        let g = graph("a\tr\tb\nb\ts\tc\n");
        let c = g.vocab().entity_id("c").unwrap();
        let ex = QueryExample::new(q(&g, "a/r/s"), c);
        assert_eq!(g.classify(&ex), Inference::Deduction);

        let missing = KnowledgeGraph::from_triples(
            g.vocab().clone(),
            g.triples().copied().filter(|t| t.relation == RelationId(1)),
        )
        .unwrap();
        assert_eq!(missing.classify(&ex), Inference::Induction);
    }

    #[test]
    fn split_shares_vocab_and_unions() {
        let split = GraphSplit::load("a\tr\tb\n".as_bytes(), "b\tr\tc\na\tr\tb\n".as_bytes()).unwrap();
        assert!(split.train.is_subset_of(&split.full));
        assert_eq!(split.full.triple_count(), 2);
        assert_eq!(split.held_out.len(), 1);
        let closed = split.close_inverses().unwrap();
        assert!(closed.train.is_subset_of(&closed.full));
        assert!(Arc::ptr_eq(closed.train.vocab(), closed.full.vocab()));
    }

    #[test]
    fn parse_query_errors() {
        let g = graph("a\tr\tb\n");
        assert!(matches!(g.parse_query("zz/r"), Err(Error::UnknownEntity { .. })));
        assert!(matches!(g.parse_query("a/zz"), Err(Error::UnknownRelation { .. })));
        assert!(matches!(g.parse_query("a"), Err(Error::Parse { .. })));
        assert_eq!(g.query_display(&q(&g, "a/r/r")).to_string(), "a/r/r");
    }
}
