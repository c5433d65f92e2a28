//! Brute-force references shared by the integration tests. None of these
//! go through the library's indexes; they scan raw triple lists.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use pathquery_core::rng::Rng;
use pathquery_core::*;
use rand::Rng as _;

pub fn triple_list(g: &KnowledgeGraph) -> Vec<Triple> {
    g.triples().copied().collect()
}

/// Number of distinct edge sequences from `s` that follow `path`, per end entity.
pub fn walk_counts(triples: &[Triple], s: EntityId, path: &[RelationId]) -> BTreeMap<EntityId, u64> {
    fn go(triples: &[Triple], at: EntityId, path: &[RelationId], out: &mut BTreeMap<EntityId, u64>) {
        let Some((&r, rest)) = path.split_first() else {
            *out.entry(at).or_default() += 1;
            return;
        };
        for t in triples.iter().filter(|t| t.source == at && t.relation == r) {
            go(triples, t.target, rest, out);
        }
    }
    let mut out = BTreeMap::new();
    go(triples, s, path, &mut out);
    out
}

pub fn brute_denotation(triples: &[Triple], s: EntityId, path: &[RelationId]) -> BTreeSet<EntityId> {
    walk_counts(triples, s, path).into_keys().collect()
}

pub fn brute_candidates(triples: &[Triple], r: RelationId) -> BTreeSet<EntityId> {
    triples.iter().filter(|t| t.relation == r).map(|t| t.target).collect()
}

/// Random graph over `e0..`, `r0..`; `m` draws, duplicates collapse.
pub fn random_graph(rng: &mut Rng, n: usize, n_rel: usize, m: usize) -> KnowledgeGraph {
    let mut vocab = Vocab::new();
    for i in 0..n {
        vocab.intern_entity(&format!("e{i}"));
    }
    for r in 0..n_rel {
        vocab.intern_relation(&format!("r{r}")).unwrap();
    }
    let triples: Vec<Triple> = (0..m)
        .map(|_| {
            Triple::new(
                EntityId(rng.random_range(0..n as u32)),
                RelationId(rng.random_range(0..n_rel as u32)),
                EntityId(rng.random_range(0..n as u32)),
            )
        })
        .collect();
    KnowledgeGraph::from_triples(Arc::new(vocab), triples).unwrap()
}

pub fn random_path(rng: &mut Rng, n_rel: usize, len: usize) -> Vec<RelationId> {
    (0..len).map(|_| RelationId(rng.random_range(0..n_rel as u32))).collect()
}

/// Fills every parameter with an independent N(0, std²) draw (no normalisation).
pub fn gaussian_params(kind: ModelKind, dim: usize, vocab: &Vocab, std: f64, rng: &mut Rng) -> ModelParams {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, std).unwrap();
    let mut p = ModelParams::zeros_for(kind, dim, vocab);
    for e in vocab.entity_ids() {
        p.entity_mut(e).iter_mut().for_each(|x| *x = normal.sample(rng));
    }
    for r in vocab.relation_ids() {
        p.relation_mut(r).iter_mut().for_each(|x| *x = normal.sample(rng));
    }
    p
}

/// `vᵀW` by the textbook double loop.
pub fn naive_vec_mat(v: &[f64], w: &[f64], d: usize) -> Vec<f64> {
    (0..d).map(|j| (0..d).map(|i| v[i] * w[i * d + j]).sum()).collect()
}

pub fn naive_mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            c[i * d + j] = (0..d).map(|k| a[i * d + k] * b[k * d + j]).sum();
        }
    }
    c
}

/// Score of `t` for `s/path` written out per model without the library's kernels.
pub fn naive_score(p: &ModelParams, s: EntityId, path: &[RelationId], t: EntityId) -> f64 {
    let d = p.dim();
    let mut v = p.entity(s).to_vec();
    for &r in path {
        let w = p.relation(r);
        v = match p.kind() {
            ModelKind::Bilinear => naive_vec_mat(&v, w, d),
            ModelKind::BilinearDiag => v.iter().zip(w).map(|(a, b)| a * b).collect(),
            ModelKind::TransE => v.iter().zip(w).map(|(a, b)| a + b).collect(),
        };
    }
    let x = p.entity(t);
    match p.kind() {
        ModelKind::TransE => -v.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
        _ => v.iter().zip(x).map(|(a, b)| a * b).sum(),
    }
}

/// Quantile by sorting: position of the positive among ascending negatives.
pub fn sort_quantile(pos: f64, negs: &[f64]) -> Option<f64> {
    if negs.is_empty() {
        return None;
    }
    let mut sorted = negs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let below = sorted.iter().position(|&x| x >= pos).unwrap_or(sorted.len());
    Some(below as f64 / negs.len() as f64)
}

/// Rank by sorting everything descending with the positive placed after its ties.
pub fn sort_rank(pos: f64, negs: &[f64]) -> usize {
    let mut all: Vec<(f64, bool)> = negs.iter().map(|&x| (x, false)).collect();
    all.push((pos, true));
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    all.iter().position(|&(_, is_pos)| is_pos).unwrap() + 1
}
