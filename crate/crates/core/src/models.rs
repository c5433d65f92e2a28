//! Composable embedding models. Each model is a traversal operator that maps
//! a set vector through one relation, and a membership operator that scores
//! an entity against a set vector. A path query is scored by folding the
//! traversal over its relations, starting from the anchor's entity vector.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, PathQuery, RelationId, Vocab};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Full `d×d` relation matrices; traversal is `vᵀW`, membership is a dot product.
    Bilinear,
    /// Diagonal relation matrices stored as vectors; traversal is `v ⊙ w`.
    BilinearDiag,
    /// Translation vectors; traversal is `v + w`, membership is `-‖v - x‖²`.
    TransE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Bilinear, ModelKind::BilinearDiag, ModelKind::TransE];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Bilinear => "bilinear",
            ModelKind::BilinearDiag => "bilinear-diag",
            ModelKind::TransE => "transe",
        }
    }

    /// Number of parameters per relation at dimension `dim`.
    pub fn relation_size(self, dim: usize) -> usize {
        match self {
            ModelKind::Bilinear => dim * dim,
            ModelKind::BilinearDiag | ModelKind::TransE => dim,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(ModelKind::Bilinear),
            "bilinear-diag" => Ok(ModelKind::BilinearDiag),
            "transe" => Ok(ModelKind::TransE),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Vector denotation of an intermediate entity set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetVector(pub Vec<f64>);

impl SetVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `out = T_r(v)` for raw parameter slices.
pub(crate) fn traverse_raw(kind: ModelKind, rel: &[f64], v: &[f64], out: &mut [f64]) {
    let d = v.len();
    match kind {
        ModelKind::Bilinear => {
            // row form: out_j = Σ_i v_i W_ij
            out.iter_mut().for_each(|o| *o = 0.0);
            for (i, &vi) in v.iter().enumerate() {
                if vi == 0.0 {
                    continue;
                }
                let row = &rel[i * d..(i + 1) * d];
                for (o, &w) in out.iter_mut().zip(row) {
                    *o += vi * w;
                }
            }
        }
        ModelKind::BilinearDiag => {
            for ((o, &vi), &w) in out.iter_mut().zip(v).zip(rel) {
                *o = vi * w;
            }
        }
        ModelKind::TransE => {
            for ((o, &vi), &w) in out.iter_mut().zip(v).zip(rel) {
                *o = vi + w;
            }
        }
    }
}

/// `M(v, x)` for raw slices.
#[inline]
pub(crate) fn member_raw(kind: ModelKind, v: &[f64], x: &[f64]) -> f64 {
    match kind {
        ModelKind::Bilinear | ModelKind::BilinearDiag => v.iter().zip(x).map(|(a, b)| a * b).sum(),
        ModelKind::TransE => -v.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
    }
}

/// Entity vectors and per-relation parameters for one model kind.
///
/// Relation matrices are stored row-major, and traversal uses the row form
/// `vᵀW`, so entry `(i, j)` maps input coordinate `i` to output coordinate `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    kind: ModelKind,
    dim: usize,
    entity_names: Vec<String>,
    relation_names: Vec<String>,
    entities: Vec<f64>,
    relations: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(kind: ModelKind, dim: usize, entity_names: Vec<String>, relation_names: Vec<String>) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let entities = vec![0.0; entity_names.len() * dim];
        let relations = vec![0.0; relation_names.len() * kind.relation_size(dim)];
        Self { kind, dim, entity_names, relation_names, entities, relations }
    }

    /// Zero parameters sized for every entity and relation of `vocab`.
    pub fn zeros_for(kind: ModelKind, dim: usize, vocab: &Vocab) -> Self {
        Self::zeros(
            kind,
            dim,
            vocab.entity_names().to_vec(),
            vocab.relation_names().map(str::to_owned).collect(),
        )
    }

    /// Every entry i.i.d. Gaussian with standard deviation `std`; entity
    /// vectors are then normalized to unit length.
    pub fn random(kind: ModelKind, dim: usize, vocab: &Vocab, std: f64, rng: &mut Rng) -> Self {
        let mut p = Self::zeros_for(kind, dim, vocab);
        let normal = Normal::new(0.0, std).expect("finite std");
        for x in p.entities.iter_mut().chain(p.relations.iter_mut()) {
            *x = normal.sample(rng);
        }
        for e in 0..p.entity_count() {
            p.normalize_entity(EntityId(e as u32));
        }
        p
    }

    /// The exact model: `d = |E|`, indicator entity vectors and adjacency
    /// matrices. Under it, a path query's score for `t` is the number of
    /// distinct relation paths from the anchor to `t`.
    pub fn adjacency_oracle(graph: &KnowledgeGraph) -> Self {
        let n = graph.entity_count();
        let mut p = Self::zeros_for(ModelKind::Bilinear, n.max(1), graph.vocab());
        for e in 0..n {
            p.entities[e * n + e] = 1.0;
        }
        for t in graph.triples() {
            let base = t.relation.index() * n * n;
            p.relations[base + t.source.index() * n + t.target.index()] = 1.0;
        }
        p
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entity_count(&self) -> usize {
        self.entity_names.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_names.len()
    }

    pub fn relation_size(&self) -> usize {
        self.kind.relation_size(self.dim)
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entity_names
    }

    pub fn relation_names(&self) -> &[String] {
        &self.relation_names
    }

    /// True when entity and relation tables match `vocab` name for name.
    pub fn matches_vocab(&self, vocab: &Vocab) -> bool {
        self.entity_names.as_slice() == vocab.entity_names()
            && self.relation_names.iter().map(String::as_str).eq(vocab.relation_names())
    }

    pub fn same_tables(&self, other: &ModelParams) -> bool {
        self.entity_names == other.entity_names && self.relation_names == other.relation_names
    }

    fn check_entity(&self, e: EntityId) -> Result<()> {
        if e.index() < self.entity_count() {
            Ok(())
        } else {
            Err(Error::EntityOutOfRange(e.0))
        }
    }

    fn check_relation(&self, r: RelationId) -> Result<()> {
        if r.index() < self.relation_count() {
            Ok(())
        } else {
            Err(Error::RelationOutOfRange(r.0))
        }
    }

    pub fn entity(&self, e: EntityId) -> &[f64] {
        &self.entities[e.index() * self.dim..(e.index() + 1) * self.dim]
    }

    pub fn entity_mut(&mut self, e: EntityId) -> &mut [f64] {
        &mut self.entities[e.index() * self.dim..(e.index() + 1) * self.dim]
    }

    pub fn relation(&self, r: RelationId) -> &[f64] {
        let n = self.relation_size();
        &self.relations[r.index() * n..(r.index() + 1) * n]
    }

    pub fn relation_mut(&mut self, r: RelationId) -> &mut [f64] {
        let n = self.relation_size();
        &mut self.relations[r.index() * n..(r.index() + 1) * n]
    }

    pub fn entity_values(&self) -> &[f64] {
        &self.entities
    }

    pub fn relation_values(&self) -> &[f64] {
        &self.relations
    }

    /// Scales an entity vector to unit length; a zero vector becomes the
    /// first unit basis vector.
    pub fn normalize_entity(&mut self, e: EntityId) {
        let x = self.entity_mut(e);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        } else {
            x.iter_mut().for_each(|v| *v = 0.0);
            x[0] = 1.0;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.entities.iter().chain(&self.relations).all(|v| v.is_finite())
    }

    /// `⟦e⟧` as a set vector.
    pub fn embed(&self, e: EntityId) -> Result<SetVector> {
        self.check_entity(e)?;
        Ok(SetVector(self.entity(e).to_vec()))
    }

    pub fn traverse(&self, v: &SetVector, r: RelationId) -> Result<SetVector> {
        self.check_relation(r)?;
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: v.dim() });
        }
        let mut out = vec![0.0; self.dim];
        traverse_raw(self.kind, self.relation(r), &v.0, &mut out);
        Ok(SetVector(out))
    }

    pub fn member(&self, v: &SetVector, t: EntityId) -> Result<f64> {
        self.check_entity(t)?;
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: v.dim() });
        }
        Ok(member_raw(self.kind, &v.0, self.entity(t)))
    }

    /// Vector denotation of the whole query.
    pub fn query_vector(&self, query: &PathQuery) -> Result<SetVector> {
        let mut v = self.embed(query.source)?;
        for &r in query.path() {
            v = self.traverse(&v, r)?;
        }
        Ok(v)
    }

    pub fn score(&self, query: &PathQuery, t: EntityId) -> Result<f64> {
        let v = self.query_vector(query)?;
        self.member(&v, t)
    }

    /// Scores against many entities with one traversal.
    pub fn score_many(&self, query: &PathQuery, targets: impl IntoIterator<Item = EntityId>) -> Result<Vec<f64>> {
        let v = self.query_vector(query)?;
        targets.into_iter().map(|t| self.member(&v, t)).collect()
    }

    /// Candidates of `query` in `graph`, best first; equal scores are
    /// ordered by ascending entity id.
    pub fn rank_candidates(&self, graph: &KnowledgeGraph, query: &PathQuery) -> Result<Vec<(EntityId, f64)>> {
        let cands = graph.candidates(query);
        if cands.is_empty() {
            return Err(Error::NoCandidates);
        }
        let v = self.query_vector(query)?;
        let mut ranked = cands
            .iter()
            .map(|&e| Ok((e, self.member(&v, e)?)))
            .collect::<Result<Vec<_>>>()?;
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(ranked)
    }

    /// Product `W_{r1} ⋯ W_{rk}` for a bilinear model, row-major.
    pub fn path_matrix(&self, path: &[RelationId]) -> Result<Vec<f64>> {
        if self.kind != ModelKind::Bilinear {
            return Err(Error::WrongModelKind(self.kind.to_string()));
        }
        let d = self.dim;
        let mut acc: Option<Vec<f64>> = None;
        for &r in path {
            self.check_relation(r)?;
            let w = self.relation(r);
            acc = Some(match acc {
                None => w.to_vec(),
                Some(a) => {
                    let mut out = vec![0.0; d * d];
                    for i in 0..d {
                        for k in 0..d {
                            let aik = a[i * d + k];
                            if aik == 0.0 {
                                continue;
                            }
                            for j in 0..d {
                                out[i * d + j] += aik * w[k * d + j];
                            }
                        }
                    }
                    out
                }
            });
        }
        acc.ok_or_else(|| Error::Config("empty path".into()))
    }
}
