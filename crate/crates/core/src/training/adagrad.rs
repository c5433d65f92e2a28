//! AdaGrad with a unit-norm projection on entity vectors.

use crate::error::{Error, Result};
use crate::models::ModelParams;

use super::objective::Gradient;

pub const ADAGRAD_EPSILON: f64 = 1e-8;

/// Per-entry accumulated squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaGradState {
    entities: Vec<f64>,
    relations: Vec<f64>,
}

impl AdaGradState {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            entities: vec![0.0; params.entity_values().len()],
            relations: vec![0.0; params.relation_values().len()],
        }
    }

    pub fn entity_accumulators(&self) -> &[f64] {
        &self.entities
    }

    pub fn relation_accumulators(&self) -> &[f64] {
        &self.relations
    }

    /// `G += g²; θ -= η g / √(G + ε)` for every touched entry, then every
    /// touched entity vector is rescaled to unit length.
    pub fn apply(&mut self, params: &mut ModelParams, grad: &Gradient, step_size: f64) -> Result<()> {
        if !grad.all_finite() {
            return Err(Error::NonFinite("gradient".into()));
        }
        let d = params.dim();
        for (&e, g) in &grad.entities {
            let acc = &mut self.entities[e.index() * d..(e.index() + 1) * d];
            let x = params.entity_mut(e);
            for ((x, a), &g) in x.iter_mut().zip(acc.iter_mut()).zip(g) {
                *a += g * g;
                *x -= step_size * g / (*a + ADAGRAD_EPSILON).sqrt();
            }
        }
        let n = params.relation_size();
        for (&r, g) in &grad.relations {
            let acc = &mut self.relations[r.index() * n..(r.index() + 1) * n];
            let w = params.relation_mut(r);
            for ((w, a), &g) in w.iter_mut().zip(acc.iter_mut()).zip(g) {
                *a += g * g;
                *w -= step_size * g / (*a + ADAGRAD_EPSILON).sqrt();
            }
        }
        for &e in grad.entities.keys() {
            params.normalize_entity(e);
        }
        if !params.all_finite() {
            return Err(Error::NonFinite("parameters after update".into()));
        }
        Ok(())
    }
}
