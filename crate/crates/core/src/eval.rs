//! Ranking metrics for path queries: mean quantile and hits@k, with
//! type-match-trivial exclusion and a deduction/induction breakdown.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EntityId, Inference, KnowledgeGraph, PathQuery, QueryExample};
use crate::models::ModelParams;

/// Fraction of negatives scored strictly below the positive. `None` when
/// there are no negatives (type-match trivial).
pub fn quantile_from_scores(positive: f64, negatives: &[f64]) -> Option<f64> {
    if negatives.is_empty() {
        return None;
    }
    let below = negatives.iter().filter(|&&s| s < positive).count();
    Some(below as f64 / negatives.len() as f64)
}

/// Rank of the positive when every tied negative is placed ahead of it.
pub fn pessimistic_rank(positive: f64, negatives: &[f64]) -> usize {
    1 + negatives.iter().filter(|&&s| s >= positive).count()
}

/// Quantile and pessimistic rank of one answer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerRank {
    pub quantile: f64,
    pub rank: usize,
}

/// Ranks `answer` against `N(q) = C(q) \ ⟦q⟧` on `graph` (the answer itself
/// is never its own negative). `None` when `N(q)` is empty.
pub fn rank_answer(
    params: &ModelParams,
    graph: &KnowledgeGraph,
    query: &PathQuery,
    answer: EntityId,
) -> Result<Option<AnswerRank>> {
    let negatives: Vec<EntityId> = graph.incorrect_answers(query).into_iter().filter(|&e| e != answer).collect();
    if negatives.is_empty() {
        return Ok(None);
    }
    let v = params.query_vector(query)?;
    let pos = params.member(&v, answer)?;
    let scores = negatives.iter().map(|&e| params.member(&v, e)).collect::<Result<Vec<_>>>()?;
    if !pos.is_finite() || scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("score".into()));
    }
    Ok(Some(AnswerRank {
        quantile: quantile_from_scores(pos, &scores).expect("nonempty"),
        rank: pessimistic_rank(pos, &scores),
    }))
}

/// Quantile of a correct answer `t` for query `q`.
pub fn quantile(params: &ModelParams, graph: &KnowledgeGraph, query: &PathQuery, t: EntityId) -> Result<Option<f64>> {
    Ok(rank_answer(params, graph, query, t)?.map(|r| r.quantile))
}

/// Mean quantile over the non-trivial examples; `None` if all are trivial.
pub fn mean_quantile<'a>(
    params: &ModelParams,
    graph: &KnowledgeGraph,
    examples: impl IntoIterator<Item = &'a QueryExample>,
) -> Result<Option<f64>> {
    let mut acc = Accumulator::default();
    for ex in examples {
        if let Some(r) = rank_answer(params, graph, &ex.query, ex.answer)? {
            acc.push(r, 1);
        }
    }
    Ok(acc.mean_quantile())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalGraphPolicy {
    /// Correct answers and candidates come from the full graph.
    #[default]
    FullGraph,
    TrainGraph,
}

impl FromStr for EvalGraphPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(EvalGraphPolicy::FullGraph),
            "train" => Ok(EvalGraphPolicy::TrainGraph),
            other => Err(Error::Config(format!("unknown eval graph `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub hits_k: usize,
    pub policy: EvalGraphPolicy,
    /// Worker threads; 0 or 1 evaluates on the calling thread.
    pub workers: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { hits_k: 10, policy: EvalGraphPolicy::FullGraph, workers: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subset {
    All,
    /// Path length at least 2.
    MultiHop,
    Deduction,
    Induction,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::MultiHop => "multi_hop",
            Subset::Deduction => "deduction",
            Subset::Induction => "induction",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Accumulator {
    n: usize,
    quantile_sum: f64,
    hits: usize,
}

impl Accumulator {
    fn push(&mut self, r: AnswerRank, k: usize) {
        self.n += 1;
        self.quantile_sum += r.quantile;
        if r.rank <= k {
            self.hits += 1;
        }
    }

    fn mean_quantile(&self) -> Option<f64> {
        (self.n > 0).then(|| self.quantile_sum / self.n as f64)
    }

    fn hits_pct(&self) -> Option<f64> {
        (self.n > 0).then(|| 100.0 * self.hits as f64 / self.n as f64)
    }
}

/// Metrics for one subset and path length (`None` = every length).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub subset: Subset,
    pub length: Option<usize>,
    pub n: usize,
    pub mean_quantile: Option<f64>,
    /// Percentage in `[0, 100]`.
    pub hits_at_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub hits_k: usize,
    pub n_evaluated: usize,
    pub n_excluded_trivial: usize,
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn row(&self, subset: Subset, length: Option<usize>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.subset == subset && r.length == length)
    }

    pub fn mean_quantile(&self) -> Option<f64> {
        self.row(Subset::All, None).and_then(|r| r.mean_quantile)
    }

    pub fn hits_at_k(&self) -> Option<f64> {
        self.row(Subset::All, None).and_then(|r| r.hits_at_k)
    }

    /// Single-edge slice, i.e. the knowledge base completion task.
    pub fn kbc(&self) -> Option<&ReportRow> {
        self.row(Subset::All, Some(1))
    }
}

/// Evaluates `examples` against `params`.
///
/// Correct answers and candidates for each query are computed on
/// `eval_graph` or `train_graph` according to `config.policy`. Examples with
/// no incorrect candidates are excluded and counted. Multi-hop examples are
/// labelled deduction when their answer is reachable in `train_graph`.
pub fn evaluate(
    params: &ModelParams,
    eval_graph: &KnowledgeGraph,
    train_graph: &KnowledgeGraph,
    examples: &[QueryExample],
    config: &EvalConfig,
) -> Result<EvalReport> {
    if config.hits_k == 0 {
        return Err(Error::Config("hits_k must be at least 1".into()));
    }
    let graph = match config.policy {
        EvalGraphPolicy::FullGraph => eval_graph,
        EvalGraphPolicy::TrainGraph => train_graph,
    };
    let one = |ex: &QueryExample| -> Result<Option<(AnswerRank, Option<Inference>)>> {
        let Some(rank) = rank_answer(params, graph, &ex.query, ex.answer)? else {
            return Ok(None);
        };
        let label = (ex.query.len() >= 2).then(|| train_graph.classify(ex));
        Ok(Some((rank, label)))
    };
    let results: Vec<Option<(AnswerRank, Option<Inference>)>> = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| examples.par_iter().map(one).collect::<Result<Vec<_>>>())?
    } else {
        examples.iter().map(one).collect::<Result<Vec<_>>>()?
    };

    let k = config.hits_k;
    let mut acc: BTreeMap<(Subset, Option<usize>), Accumulator> = BTreeMap::new();
    let mut excluded = 0;
    for (ex, res) in examples.iter().zip(&results) {
        let Some((rank, label)) = res else {
            excluded += 1;
            continue;
        };
        let len = ex.query.len();
        let mut subsets = vec![Subset::All];
        if len >= 2 {
            subsets.push(Subset::MultiHop);
            subsets.push(match label {
                Some(Inference::Deduction) => Subset::Deduction,
                _ => Subset::Induction,
            });
        }
        for s in subsets {
            acc.entry((s, None)).or_default().push(*rank, k);
            acc.entry((s, Some(len))).or_default().push(*rank, k);
        }
    }
    acc.entry((Subset::All, None)).or_default();
    let rows = acc
        .into_iter()
        .map(|((subset, length), a)| ReportRow {
            subset,
            length,
            n: a.n,
            mean_quantile: a.mean_quantile(),
            hits_at_k: a.hits_pct(),
        })
        .collect();
    Ok(EvalReport { hits_k: k, n_evaluated: examples.len() - excluded, n_excluded_trivial: excluded, rows })
}
