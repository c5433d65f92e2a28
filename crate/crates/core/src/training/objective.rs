//! Max-margin ranking objective over path queries and its subgradient.

use std::collections::BTreeMap;

use rand::seq::index;

use crate::graph::{EntityId, KnowledgeGraph, PathQuery, QueryExample, RelationId};
use crate::models::{member_raw, traverse_raw, ModelKind, ModelParams};
use crate::rng::Rng;

/// How per-negative hinge terms are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    Sum,
    /// Only the most violating negative contributes.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub mode: LossMode,
    pub margin: f64,
    /// Weight of `‖T_r(x_s) - x_t‖²` on single-edge examples; 0 disables it.
    pub aux_l2: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Self { mode: LossMode::Sum, margin: 1.0, aux_l2: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleLoss {
    pub value: f64,
    /// Set when the example had no negatives and contributed nothing.
    pub skipped: bool,
}

/// Sparse gradient over the parameters one or more examples touched.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradient {
    pub entities: BTreeMap<EntityId, Vec<f64>>,
    pub relations: BTreeMap<RelationId, Vec<f64>>,
}

fn axpy(dst: &mut [f64], alpha: f64, src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

impl Gradient {
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty()
    }

    fn entity_slot(&mut self, e: EntityId, dim: usize) -> &mut Vec<f64> {
        self.entities.entry(e).or_insert_with(|| vec![0.0; dim])
    }

    fn relation_slot(&mut self, r: RelationId, size: usize) -> &mut Vec<f64> {
        self.relations.entry(r).or_insert_with(|| vec![0.0; size])
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, other: &Gradient, alpha: f64) {
        for (&e, g) in &other.entities {
            axpy(self.entity_slot(e, g.len()), alpha, g);
        }
        for (&r, g) in &other.relations {
            axpy(self.relation_slot(r, g.len()), alpha, g);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for g in self.entities.values_mut().chain(self.relations.values_mut()) {
            g.iter_mut().for_each(|x| *x *= alpha);
        }
    }

    pub fn norm(&self) -> f64 {
        self.entities
            .values()
            .chain(self.relations.values())
            .flat_map(|g| g.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.entities.values().chain(self.relations.values()).all(|g| g.iter().all(|x| x.is_finite()))
    }

    /// True when every stored entry is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.entities.values().chain(self.relations.values()).all(|g| g.iter().all(|&x| x == 0.0))
    }
}

/// Forward pass: `[x_s, T_{r1}(x_s), ..., T_{rk}(...)]`.
fn forward(params: &ModelParams, query: &PathQuery) -> Vec<Vec<f64>> {
    let d = params.dim();
    let mut states = Vec::with_capacity(query.len() + 1);
    states.push(params.entity(query.source).to_vec());
    for &r in query.path() {
        let mut next = vec![0.0; d];
        traverse_raw(params.kind(), params.relation(r), states.last().unwrap(), &mut next);
        states.push(next);
    }
    states
}

/// Adds `coef * ∂M(v, x)/∂v` to `gv` and `coef * ∂M(v, x)/∂x` to `gx`.
fn member_backward(kind: ModelKind, v: &[f64], x: &[f64], coef: f64, gv: &mut [f64], gx: &mut [f64]) {
    match kind {
        ModelKind::Bilinear | ModelKind::BilinearDiag => {
            axpy(gv, coef, x);
            axpy(gx, coef, v);
        }
        ModelKind::TransE => {
            for i in 0..v.len() {
                let diff = v[i] - x[i];
                gv[i] -= 2.0 * coef * diff;
                gx[i] += 2.0 * coef * diff;
            }
        }
    }
}

/// Backpropagates `grad_top` (gradient w.r.t. the state after the first
/// `upto` traversals) down to the anchor entity.
fn traverse_backward(
    params: &ModelParams,
    query: &PathQuery,
    states: &[Vec<f64>],
    upto: usize,
    mut grad: Vec<f64>,
    out: &mut Gradient,
) {
    let d = params.dim();
    let kind = params.kind();
    for i in (0..upto).rev() {
        let r = query.path()[i];
        let input = &states[i];
        let w = params.relation(r);
        let gw = out.relation_slot(r, kind.relation_size(d));
        match kind {
            ModelKind::Bilinear => {
                let mut prev = vec![0.0; d];
                for a in 0..d {
                    let row = &w[a * d..(a + 1) * d];
                    axpy(&mut gw[a * d..(a + 1) * d], input[a], &grad);
                    prev[a] = row.iter().zip(&grad).map(|(x, g)| x * g).sum();
                }
                grad = prev;
            }
            ModelKind::BilinearDiag => {
                for j in 0..d {
                    gw[j] += input[j] * grad[j];
                    grad[j] *= w[j];
                }
            }
            ModelKind::TransE => {
                axpy(gw, 1.0, &grad);
            }
        }
    }
    axpy(out.entity_slot(query.source, d), 1.0, &grad);
}

impl Objective {
    pub fn loss(&self, params: &ModelParams, example: &QueryExample, negatives: &[EntityId]) -> ExampleLoss {
        self.evaluate(params, example, negatives, None)
    }

    /// Loss together with its subgradient. At an exact hinge kink the
    /// zero subgradient is used.
    pub fn loss_and_gradient(
        &self,
        params: &ModelParams,
        example: &QueryExample,
        negatives: &[EntityId],
    ) -> (ExampleLoss, Gradient) {
        let mut grad = Gradient::default();
        let loss = self.evaluate(params, example, negatives, Some(&mut grad));
        (loss, grad)
    }

    fn evaluate(
        &self,
        params: &ModelParams,
        example: &QueryExample,
        negatives: &[EntityId],
        grad: Option<&mut Gradient>,
    ) -> ExampleLoss {
        if negatives.is_empty() {
            return ExampleLoss { value: 0.0, skipped: true };
        }
        let kind = params.kind();
        let d = params.dim();
        let query = &example.query;
        let states = forward(params, query);
        let top = states.last().unwrap();
        let pos = member_raw(kind, top, params.entity(example.answer));
        let hinges: Vec<f64> = negatives
            .iter()
            .map(|&n| self.margin - (pos - member_raw(kind, top, params.entity(n))))
            .collect();

        // (entity, coefficient on its score) for active hinge terms.
        let mut active: Vec<(EntityId, f64)> = Vec::new();
        let mut value = match self.mode {
            LossMode::Sum => {
                let mut total = 0.0;
                for (&n, &h) in negatives.iter().zip(&hinges) {
                    if h > 0.0 {
                        total += h;
                        active.push((n, 1.0));
                    }
                }
                total
            }
            LossMode::Max => {
                let (best, &h) = hinges
                    .iter()
                    .enumerate()
                    .fold((0, &f64::NEG_INFINITY), |acc, (i, h)| if *h > *acc.1 { (i, h) } else { acc });
                if h > 0.0 {
                    active.push((negatives[best], 1.0));
                    h
                } else {
                    0.0
                }
            }
        };
        let aux = self.aux_l2 > 0.0 && query.len() == 1;
        if aux {
            let diff: f64 = states[1]
                .iter()
                .zip(params.entity(example.answer))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            value += self.aux_l2 * diff;
        }

        if let Some(out) = grad {
            let mut g_top = vec![0.0; d];
            let pos_coef = -(active.len() as f64);
            if pos_coef != 0.0 {
                let mut gx = vec![0.0; d];
                member_backward(kind, top, params.entity(example.answer), pos_coef, &mut g_top, &mut gx);
                axpy(out.entity_slot(example.answer, d), 1.0, &gx);
                for &(n, coef) in &active {
                    let mut gx = vec![0.0; d];
                    member_backward(kind, top, params.entity(n), coef, &mut g_top, &mut gx);
                    axpy(out.entity_slot(n, d), 1.0, &gx);
                }
            }
            if aux {
                // ∂/∂v λ‖v - x_t‖² at the single traversal output.
                let xt = params.entity(example.answer);
                let gx = out.entity_slot(example.answer, d);
                for j in 0..d {
                    let diff = states[1][j] - xt[j];
                    g_top[j] += 2.0 * self.aux_l2 * diff;
                    gx[j] -= 2.0 * self.aux_l2 * diff;
                }
            }
            if !active.is_empty() || aux {
                traverse_backward(params, query, &states, query.len(), g_top, out);
            }
        }
        ExampleLoss { value, skipped: false }
    }
}

/// Draws `min(k, |N(q)|)` distinct incorrect answers uniformly without
/// replacement, where `N(q)` is computed on `graph`.
pub fn sample_negatives(graph: &KnowledgeGraph, query: &PathQuery, k: usize, rng: &mut Rng) -> Vec<EntityId> {
    let pool: Vec<EntityId> = graph.incorrect_answers(query).into_iter().collect();
    let amount = k.min(pool.len());
    if amount == 0 {
        return Vec::new();
    }
    index::sample(rng, pool.len(), amount).into_iter().map(|i| pool[i]).collect()
}
