//! Diagnostics for trained models: reconstruction quality of intermediate
//! set vectors, Horn-path precision, and angles between composed relation
//! matrices.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::eval::quantile_from_scores;
use crate::graph::{EntityId, KnowledgeGraph, PathQuery, RelationId};
use crate::models::{ModelKind, ModelParams};

/// Precision above which a path type counts as a high-precision body.
pub const DEFAULT_PRECISION_THRESHOLD: f64 = 0.3;

/// Average quantile of every correct answer. `None` when the query has no
/// correct answers or no incorrect candidates.
pub fn reconstruction_quality(params: &ModelParams, graph: &KnowledgeGraph, query: &PathQuery) -> Result<Option<f64>> {
    let correct = graph.denotation(query);
    if correct.is_empty() {
        return Ok(None);
    }
    let negatives: Vec<EntityId> = graph.candidates(query).difference(&correct).copied().collect();
    if negatives.is_empty() {
        return Ok(None);
    }
    let v = params.query_vector(query)?;
    let neg_scores = negatives.iter().map(|&e| params.member(&v, e)).collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for &t in &correct {
        let s = params.member(&v, t)?;
        total += quantile_from_scores(s, &neg_scores).expect("nonempty");
    }
    Ok(Some(total / correct.len() as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub prefix_len: usize,
    pub rq: Option<f64>,
    /// Up to five best-scoring candidates: (entity, score, correct).
    pub top: Vec<(EntityId, f64, bool)>,
}

/// Reconstruction quality after each traversal step of `query`.
pub fn rq_profile(params: &ModelParams, graph: &KnowledgeGraph, query: &PathQuery) -> Result<Vec<ProfilePoint>> {
    (1..=query.len())
        .map(|i| {
            let prefix = query.prefix(i);
            let rq = reconstruction_quality(params, graph, &prefix)?;
            let correct = graph.denotation(&prefix);
            let top = match params.rank_candidates(graph, &prefix) {
                Ok(ranked) => ranked.into_iter().take(5).map(|(e, s)| (e, s, correct.contains(&e))).collect(),
                Err(Error::NoCandidates) => Vec::new(),
                Err(e) => return Err(e),
            };
            Ok(ProfilePoint { prefix_len: i, rq, top })
        })
        .collect()
}

/// All ordered entity pairs `(s, t)` connected by following `path` from `s`.
pub fn path_pairs(graph: &KnowledgeGraph, path: &[RelationId]) -> BTreeSet<(EntityId, EntityId)> {
    assert!(!path.is_empty());
    let mut pairs = BTreeSet::new();
    for s in graph.vocab().entity_ids() {
        if graph.targets(s, path[0]).is_empty() {
            continue;
        }
        for t in graph.denotation(&PathQuery::new(s, path.to_vec())) {
            pairs.insert((s, t));
        }
    }
    pairs
}

/// `|⟦p⟧ ∩ ⟦r⟧| / |⟦p⟧|`; `None` when `p` connects no pairs.
pub fn path_precision(graph: &KnowledgeGraph, path: &[RelationId], relation: RelationId) -> Option<f64> {
    let body = path_pairs(graph, path);
    if body.is_empty() {
        return None;
    }
    let head = graph.relation_pairs(relation);
    let both = body.iter().filter(|p| head.contains(p)).count();
    Some(both as f64 / body.len() as f64)
}

/// Angle in `[0, π]` between two vectors; `None` if either is zero.
pub fn angle_between(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0).acos())
}

/// Angle between `W_{r1} ⋯ W_{rk}` and `W_r`, both flattened to `d²`-vectors.
pub fn matrix_angle(params: &ModelParams, path: &[RelationId], relation: RelationId) -> Result<Option<f64>> {
    if params.kind() != ModelKind::Bilinear {
        return Err(Error::WrongModelKind(params.kind().to_string()));
    }
    if relation.index() >= params.relation_count() {
        return Err(Error::RelationOutOfRange(relation.0));
    }
    let composed = params.path_matrix(path)?;
    Ok(angle_between(&composed, params.relation(relation)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrecisionGroup {
    High,
    Low,
    /// The path never connects a pair that the relation also connects.
    NotCoOccurring,
}

impl PrecisionGroup {
    pub fn classify(precision: Option<f64>, threshold: f64) -> Self {
        match precision {
            Some(p) if p > threshold => PrecisionGroup::High,
            Some(p) if p > 0.0 => PrecisionGroup::Low,
            _ => PrecisionGroup::NotCoOccurring,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionGroup::High => "high",
            PrecisionGroup::Low => "low",
            PrecisionGroup::NotCoOccurring => "none",
        }
    }
}

impl fmt::Display for PrecisionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistRow {
    pub path: [RelationId; 2],
    pub precision: Option<f64>,
    pub dist_single: Option<f64>,
    pub dist_comp: Option<f64>,
    /// `(dist_comp - dist_single) / dist_single`.
    pub delta: Option<f64>,
    pub group: PrecisionGroup,
}

/// Five-number summary of one group's defined deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group: PrecisionGroup,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistReport {
    pub relation: RelationId,
    pub rows: Vec<DeltaDistRow>,
    pub groups: Vec<GroupSummary>,
}

impl DeltaDistReport {
    pub fn group(&self, group: PrecisionGroup) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.group == group)
    }
}

/// Linear-interpolation quantile of sorted data, `p ∈ [0, 1]`.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Compares how compositional training moved every length-2 path matrix
/// towards `W_r`, grouped by the path's precision as a body for `r` on
/// `graph`.
pub fn delta_dist_report(
    comp: &ModelParams,
    single: &ModelParams,
    graph: &KnowledgeGraph,
    relation: RelationId,
    threshold: f64,
) -> Result<DeltaDistReport> {
    for p in [comp, single] {
        if p.kind() != ModelKind::Bilinear {
            return Err(Error::WrongModelKind(p.kind().to_string()));
        }
    }
    if !comp.same_tables(single) || !comp.matches_vocab(graph.vocab()) || comp.dim() != single.dim() {
        return Err(Error::TableMismatch);
    }
    let rels: Vec<RelationId> = graph.vocab().relation_ids().collect();
    let mut rows = Vec::with_capacity(rels.len() * rels.len());
    for &a in &rels {
        for &b in &rels {
            let path = [a, b];
            let precision = path_precision(graph, &path, relation);
            let dist_single = matrix_angle(single, &path, relation)?;
            let dist_comp = matrix_angle(comp, &path, relation)?;
            let delta = match (dist_single, dist_comp) {
                (Some(s), Some(c)) if s > 0.0 => Some((c - s) / s),
                _ => None,
            };
            rows.push(DeltaDistRow {
                path,
                precision,
                dist_single,
                dist_comp,
                delta,
                group: PrecisionGroup::classify(precision, threshold),
            });
        }
    }
    let mut groups = Vec::new();
    for group in [PrecisionGroup::High, PrecisionGroup::Low, PrecisionGroup::NotCoOccurring] {
        let mut deltas: Vec<f64> = rows.iter().filter(|r| r.group == group).filter_map(|r| r.delta).collect();
        if deltas.is_empty() {
            continue;
        }
        deltas.sort_by(f64::total_cmp);
        groups.push(GroupSummary {
            group,
            count: deltas.len(),
            min: deltas[0],
            q1: sorted_quantile(&deltas, 0.25),
            median: sorted_quantile(&deltas, 0.5),
            q3: sorted_quantile(&deltas, 0.75),
            max: *deltas.last().unwrap(),
        });
    }
    Ok(DeltaDistReport { relation, rows, groups })
}
