//! Single-edge and compositional max-margin training.
//!
//! Training runs in up to two phases. The first fits single-edge examples
//! over base relations. At the boundary, inverse-relation parameters are
//! derived from their base relations. The second phase, run only under the
//! compositional curriculum, fits path queries of every length. Each phase
//! stops early once held-out mean quantile has not improved for `patience`
//! epochs and keeps its best snapshot.

mod adagrad;
mod clip;
mod objective;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

pub use adagrad::{AdaGradState, ADAGRAD_EPSILON};
pub use clip::MedianClipper;
pub use objective::{sample_negatives, ExampleLoss, Gradient, LossMode, Objective};

use crate::error::{Error, Result};
use crate::eval;
use crate::graph::{KnowledgeGraph, QueryExample, RelationId};
use crate::models::{ModelKind, ModelParams};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curriculum {
    SingleEdgeOnly,
    Compositional,
}

impl Curriculum {
    pub fn as_str(self) -> &'static str {
        match self {
            Curriculum::SingleEdgeOnly => "single",
            Curriculum::Compositional => "comp",
        }
    }
}

impl fmt::Display for Curriculum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Curriculum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Curriculum::SingleEdgeOnly),
            "comp" => Ok(Curriculum::Compositional),
            other => Err(Error::Config(format!("unknown curriculum `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SingleEdge,
    Compositional,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::SingleEdge => "single",
            Phase::Compositional => "comp",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub dim: usize,
    pub step_size: f64,
    pub minibatch: usize,
    pub negatives_per_example: usize,
    pub margin: f64,
    pub init_std: f64,
    /// Epoch cap per phase.
    pub max_epochs: usize,
    pub patience: usize,
    pub clip_multiplier: f64,
    /// Number of recent minibatch update norms the clipping median covers.
    pub clip_window: usize,
    /// `None` picks the model default: max for Bilinear, sum otherwise.
    pub use_max_over_negatives: Option<bool>,
    pub aux_l2_weight: f64,
    /// Fraction of training examples held out for early stopping.
    pub heldout_fraction: f64,
    pub seed: u64,
    pub curriculum: Curriculum,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Bilinear,
            dim: 100,
            step_size: 0.1,
            minibatch: 300,
            negatives_per_example: 10,
            margin: 1.0,
            init_std: 0.1f64.sqrt(),
            max_epochs: 50,
            patience: 5,
            clip_multiplier: 3.0,
            clip_window: 1000,
            use_max_over_negatives: None,
            aux_l2_weight: 0.0,
            heldout_fraction: 0.05,
            seed: 0,
            curriculum: Curriculum::Compositional,
        }
    }
}

impl TrainConfig {
    pub fn loss_mode(&self) -> LossMode {
        let max = self.use_max_over_negatives.unwrap_or(self.model == ModelKind::Bilinear);
        if max {
            LossMode::Max
        } else {
            LossMode::Sum
        }
    }

    pub fn objective(&self) -> Objective {
        Objective { mode: self.loss_mode(), margin: self.margin, aux_l2: self.aux_l2_weight }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if !(0.001..=0.1).contains(&self.step_size) {
            return fail("step_size must lie in [0.001, 0.1]");
        }
        if self.minibatch == 0 || self.negatives_per_example == 0 {
            return fail("minibatch and negatives_per_example must be positive");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return fail("margin must be positive");
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return fail("init_std must be positive");
        }
        if self.max_epochs == 0 || self.patience == 0 || self.clip_window == 0 {
            return fail("max_epochs, patience and clip_window must be positive");
        }
        if !(self.clip_multiplier > 0.0) {
            return fail("clip_multiplier must be positive");
        }
        if !(self.aux_l2_weight >= 0.0 && self.aux_l2_weight.is_finite()) {
            return fail("aux_l2_weight must be non-negative");
        }
        if !(0.0..1.0).contains(&self.heldout_fraction) {
            return fail("heldout_fraction must lie in [0, 1)");
        }
        Ok(())
    }
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: Phase,
    /// Mean example loss over the epoch's scored examples.
    pub loss: f64,
    /// Fraction of minibatch updates that were clipped.
    pub clip_rate: f64,
    pub heldout_mq: Option<f64>,
}

pub type TrainLog = Vec<EpochRecord>;

/// Hooks into the training loop; used by tests that check invariants
/// between updates.
pub trait TrainObserver {
    fn after_update(&mut self, _params: &ModelParams) {}
    fn at_phase_boundary(&mut self, _before: &ModelParams, _after: &ModelParams) {}
}

struct NoObserver;
impl TrainObserver for NoObserver {}

pub fn train(graph: &KnowledgeGraph, examples: &[QueryExample], config: &TrainConfig) -> Result<(ModelParams, TrainLog)> {
    train_observed(graph, examples, config, &mut NoObserver)
}

/// Seeds inverse-relation parameters from their base relations: the
/// transpose for Bilinear, the negation for TransE, and fresh Gaussian
/// entries for Bilinear-Diag.
pub fn init_inverse_relations(params: &mut ModelParams, graph: &KnowledgeGraph, init_std: f64, rng: &mut Rng) {
    let vocab = graph.vocab();
    let d = params.dim();
    let normal = Normal::new(0.0, init_std).expect("finite std");
    for r in vocab.relation_ids().filter(|&r| vocab.is_inverse_relation(r)) {
        let base: RelationId = vocab.inverse(r).expect("synthesized inverse has a base");
        match params.kind() {
            ModelKind::Bilinear => {
                let src = params.relation(base).to_vec();
                let dst = params.relation_mut(r);
                for i in 0..d {
                    for j in 0..d {
                        dst[i * d + j] = src[j * d + i];
                    }
                }
            }
            ModelKind::TransE => {
                let src = params.relation(base).to_vec();
                for (dst, s) in params.relation_mut(r).iter_mut().zip(src) {
                    *dst = -s;
                }
            }
            ModelKind::BilinearDiag => {
                for dst in params.relation_mut(r) {
                    *dst = normal.sample(rng);
                }
            }
        }
    }
}

pub fn train_observed(
    graph: &KnowledgeGraph,
    examples: &[QueryExample],
    config: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<(ModelParams, TrainLog)> {
    config.validate()?;
    if examples.is_empty() {
        return Err(Error::NoExamples);
    }
    let vocab = graph.vocab();
    for ex in examples {
        let ids_ok = ex.answer.index() < graph.entity_count()
            && ex.query.source.index() < graph.entity_count()
            && ex.query.path().iter().all(|r| r.index() < graph.relation_count());
        if !ids_ok {
            return Err(Error::Config("example references ids outside the graph".into()));
        }
    }

    let mut params = ModelParams::random(config.model, config.dim, vocab, config.init_std, &mut rng::substream(config.seed, 0));

    let mut order: Vec<usize> = (0..examples.len()).collect();
    order.shuffle(&mut rng::substream(config.seed, 1));
    let n_heldout = (examples.len() as f64 * config.heldout_fraction).floor() as usize;
    let (heldout_idx, train_idx) = order.split_at(n_heldout);
    let mut heldout: Vec<&QueryExample> = heldout_idx.iter().map(|&i| &examples[i]).collect();
    let mut train_set: Vec<&QueryExample> = train_idx.iter().map(|&i| &examples[i]).collect();
    // restore file order so shuffles depend only on the seed
    heldout.sort();
    train_set.sort();

    let is_base_edge = |ex: &&QueryExample| ex.query.len() == 1 && !vocab.is_inverse_relation(ex.query.path()[0]);
    let phase1: Vec<&QueryExample> = train_set.iter().copied().filter(is_base_edge).collect();
    let heldout1: Vec<&QueryExample> = heldout.iter().copied().filter(is_base_edge).collect();

    let mut log = TrainLog::new();
    let mut runner = PhaseRunner { graph, config, objective: config.objective(), observer };

    if phase1.is_empty() {
        if config.curriculum == Curriculum::SingleEdgeOnly {
            return Err(Error::NoExamples);
        }
    } else {
        runner.run(&mut params, Phase::SingleEdge, &phase1, &heldout1, &mut rng::substream(config.seed, 2), &mut log)?;
    }

    let before = params.clone();
    init_inverse_relations(&mut params, graph, config.init_std, &mut rng::substream(config.seed, 3));
    runner.observer.at_phase_boundary(&before, &params);

    if config.curriculum == Curriculum::Compositional {
        runner.run(&mut params, Phase::Compositional, &train_set, &heldout, &mut rng::substream(config.seed, 4), &mut log)?;
    }
    Ok((params, log))
}

struct PhaseRunner<'a> {
    graph: &'a KnowledgeGraph,
    config: &'a TrainConfig,
    objective: Objective,
    observer: &'a mut dyn TrainObserver,
}

impl PhaseRunner<'_> {
    fn run(
        &mut self,
        params: &mut ModelParams,
        phase: Phase,
        pool: &[&QueryExample],
        heldout: &[&QueryExample],
        rng: &mut Rng,
        log: &mut TrainLog,
    ) -> Result<()> {
        let cfg = self.config;
        let mut adagrad = AdaGradState::new(params);
        let mut clipper = MedianClipper::new(cfg.clip_multiplier, cfg.clip_window);
        let mut order: Vec<usize> = (0..pool.len()).collect();
        let mut best: Option<(f64, ModelParams)> = None;
        let mut stale = 0;

        for epoch in 1..=cfg.max_epochs {
            order.shuffle(rng);
            let (mut loss_sum, mut scored, mut updates, mut clipped) = (0.0, 0usize, 0usize, 0usize);
            for chunk in order.chunks(cfg.minibatch) {
                let mut batch = Gradient::default();
                let mut n = 0usize;
                for &i in chunk {
                    let ex = pool[i];
                    let negs = sample_negatives(self.graph, &ex.query, cfg.negatives_per_example, rng);
                    let (loss, g) = self.objective.loss_and_gradient(params, ex, &negs);
                    if loss.skipped {
                        continue;
                    }
                    batch.add_scaled(&g, 1.0);
                    loss_sum += loss.value;
                    n += 1;
                }
                if n == 0 {
                    continue;
                }
                scored += n;
                batch.scale(1.0 / n as f64);
                let factor = clipper.observe(batch.norm());
                if factor < 1.0 {
                    batch.scale(factor);
                    clipped += 1;
                }
                adagrad.apply(params, &batch, cfg.step_size)?;
                updates += 1;
                self.observer.after_update(params);
            }

            let mq = eval::mean_quantile(params, self.graph, heldout.iter().copied())?;
            log.push(EpochRecord {
                epoch,
                phase,
                loss: if scored > 0 { loss_sum / scored as f64 } else { 0.0 },
                clip_rate: if updates > 0 { clipped as f64 / updates as f64 } else { 0.0 },
                heldout_mq: mq,
            });
            if let Some(mq) = mq {
                match &best {
                    Some((b, _)) if mq <= *b => {
                        stale += 1;
                        if stale >= cfg.patience {
                            break;
                        }
                    }
                    _ => {
                        best = Some((mq, params.clone()));
                        stale = 0;
                    }
                }
            }
        }
        if let Some((_, snapshot)) = best {
            *params = snapshot;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_triples;

    fn ring() -> KnowledgeGraph {
        let text: String = (0..8).map(|i| format!("e{i}\tnext\te{}\n", (i + 1) % 8)).collect();
        load_triples(text.as_bytes()).unwrap().close_inverses().unwrap()
    }

    fn edge_examples(g: &KnowledgeGraph) -> Vec<QueryExample> {
        g.triples()
            .map(|t| QueryExample::new(crate::graph::PathQuery::single(t.source, t.relation), t.target))
            .collect()
    }

    #[test]
    fn config_defaults_follow_model() {
        let mut c = TrainConfig::default();
        assert_eq!(c.loss_mode(), LossMode::Max);
        c.model = ModelKind::TransE;
        assert_eq!(c.loss_mode(), LossMode::Sum);
        c.use_max_over_negatives = Some(true);
        assert_eq!(c.loss_mode(), LossMode::Max);
    }

    #[test]
    fn config_validation() {
        let mut c = TrainConfig::default();
        assert!(c.validate().is_ok());
        c.step_size = 0.5;
        assert!(c.validate().is_err());
        let c = TrainConfig { margin: 0.0, ..TrainConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn empty_examples_rejected() {
        let g = ring();
        assert!(matches!(train(&g, &[], &TrainConfig::default()), Err(Error::NoExamples)));
    }

    #[test]
    fn single_edge_curriculum_runs_one_phase() {
        let g = ring();
        let cfg = TrainConfig {
            model: ModelKind::TransE,
            dim: 4,
            max_epochs: 3,
            curriculum: Curriculum::SingleEdgeOnly,
            heldout_fraction: 0.0,
            ..TrainConfig::default()
        };
        let (_, log) = train(&g, &edge_examples(&g), &cfg).unwrap();
        assert_eq!(log.len(), 3);
        assert!(log.iter().all(|r| r.phase == Phase::SingleEdge && r.heldout_mq.is_none()));
    }

    #[test]
    fn same_seed_same_params() {
        let g = ring();
        let cfg = TrainConfig { model: ModelKind::Bilinear, dim: 3, max_epochs: 4, ..TrainConfig::default() };
        let a = train(&g, &edge_examples(&g), &cfg).unwrap();
        let b = train(&g, &edge_examples(&g), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transe_inverse_init_is_negation() {
        let g = ring();
        let mut p = ModelParams::random(ModelKind::TransE, 3, g.vocab(), 0.3, &mut rng::seeded(1));
        init_inverse_relations(&mut p, &g, 0.3, &mut rng::seeded(2));
        let (r, inv) = (RelationId(0), RelationId(1));
        for (a, b) in p.relation(r).iter().zip(p.relation(inv)) {
            assert_eq!(*a, -*b);
        }
    }
}
