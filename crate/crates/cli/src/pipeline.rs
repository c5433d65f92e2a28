//! One-shot experiment: generate paths, train single-edge and compositional
//! models for each model kind, evaluate, analyze, and summarise.

use std::path::{Path, PathBuf};

use pathquery_core::analysis::{delta_dist_report, rq_profile, DEFAULT_PRECISION_THRESHOLD};
use pathquery_core::io::{format_float, write_delta_dist_csv, write_eval_csv, write_rq_profile_csv, KeyValue};
use pathquery_core::{Curriculum, EvalConfig, EvalGraphPolicy, EvalReport, ModelKind, ModelParams, PathGenConfig, TrainConfig};

use crate::commands::{self, load_graphs, write_file};
use crate::{CmdResult, Failure, PipelineArgs, TrainOverrides};

struct Settings {
    triples: Option<PathBuf>,
    full_triples: Option<PathBuf>,
    models: Vec<ModelKind>,
    paths: PathGenConfig,
    eval: EvalConfig,
    relation: Option<String>,
    rq_query: Option<String>,
}

impl Settings {
    /// Handles the pipeline's own config keys; paths resolve against `base`.
    fn apply(&mut self, kv: &KeyValue, base: &Path) -> CmdResult<bool> {
        let bad = || Failure::usage(format!("line {}: invalid value `{}` for `{}`", kv.line, kv.value, kv.key));
        let v = kv.value.as_str();
        match kv.key.as_str() {
            "triples" => self.triples = Some(base.join(v)),
            "full_triples" => self.full_triples = Some(base.join(v)),
            "models" => self.models = v.split(',').map(|m| m.trim().parse()).collect::<Result<_, _>>()?,
            "max_length" => self.paths.max_length = v.parse().map_err(|_| bad())?,
            "train_count" => self.paths.train_count = v.parse().map_err(|_| bad())?,
            "test_count" => self.paths.test_count = v.parse().map_err(|_| bad())?,
            "hits_k" => self.eval.hits_k = v.parse().map_err(|_| bad())?,
            "eval_graph" => self.eval.policy = v.parse::<EvalGraphPolicy>()?,
            "relation" => self.relation = Some(v.to_owned()),
            "rq_query" => self.rq_query = Some(v.to_owned()),
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Percentage reduction in error when going from `single` to `comp`, where
/// error is `top - metric` (1 for MQ, 100 for hits@k).
pub fn pct_reduction(single: f64, comp: f64, top: f64) -> Option<f64> {
    let err = top - single;
    (err > 0.0).then(|| 100.0 * (comp - single) / err)
}

pub fn run(a: PipelineArgs) -> CmdResult {
    let base_dir = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut s = Settings {
        triples: None,
        full_triples: None,
        models: ModelKind::ALL.to_vec(),
        paths: PathGenConfig::default(),
        eval: EvalConfig { workers: a.workers, ..EvalConfig::default() },
        relation: None,
        rq_query: None,
    };
    let overrides = TrainOverrides { config: Some(a.config.clone()), seed: a.seed, ..TrainOverrides::default() };
    let base = commands::train_config(&overrides, &mut |kv| s.apply(kv, &base_dir)).map_err(|f| f.at("config"))?;
    s.paths.seed = base.seed;
    if a.triples.is_some() {
        s.triples = a.triples.clone();
    }
    if a.full_triples.is_some() {
        s.full_triples = a.full_triples.clone();
    }
    let triples = s.triples.clone().ok_or_else(|| Failure::usage("config: no `triples` given"))?;
    if s.paths.max_length == 0 || s.eval.hits_k == 0 || s.models.is_empty() {
        return Err(Failure::usage("config: max_length, hits_k and models must be non-empty/positive"));
    }

    let out = &a.out_dir;
    let data = load_graphs(&triples, s.full_triples.as_deref()).map_err(|f| f.at("ingest"))?;
    let sets = commands::generate_into(&data, &s.paths, out).map_err(|f| f.at("gen-paths"))?;

    let mut summary = vec!["task,metric,model,single,comp,pct_red".to_owned()];
    let mut bilinear: Option<(ModelParams, ModelParams)> = None;
    for &model in &s.models {
        let mut trained: Vec<(ModelParams, EvalReport)> = Vec::new();
        for curriculum in [Curriculum::SingleEdgeOnly, Curriculum::Compositional] {
            let name = format!("{model}-{curriculum}");
            let cfg = TrainConfig { model, curriculum, ..base.clone() };
            let (params, _) = commands::train_and_save(
                &data,
                &sets.train,
                &cfg,
                &out.join(format!("{name}.ckpt")),
                Some(&out.join(format!("{name}.log.csv"))),
                Some(&out.join(format!("{name}.config.txt"))),
            )
            .map_err(|f| f.at(&format!("train {name}")))?;
            let report = commands::run_eval(&data, &params, &sets.test, &s.eval).map_err(|f| f.at(&format!("eval {name}")))?;
            write_file(&out.join(format!("{name}.eval.csv")), |w| write_eval_csv(&report, w))?;
            if let Some(text) = &s.rq_query {
                let g = data.train();
                let q = g.parse_query(text).map_err(|e| Failure::from(e).at("analyze rq_query"))?;
                let profile = rq_profile(&params, g, &q).map_err(|e| Failure::from(e).at("analyze"))?;
                write_file(&out.join(format!("{name}.rq_profile.csv")), |w| write_rq_profile_csv(g, &q, &profile, true, w))?;
            }
            trained.push((params, report));
        }
        for (task, length) in [("path", None), ("kbc", Some(1))] {
            let row = |r: &EvalReport| r.row(pathquery_core::Subset::All, length).cloned();
            let (rs, rc) = (row(&trained[0].1), row(&trained[1].1));
            let metrics: [(&str, fn(&pathquery_core::eval::ReportRow) -> Option<f64>, f64); 2] = [
                ("mq", |r| r.mean_quantile, 1.0),
                ("hits_at_k", |r| r.hits_at_k, 100.0),
            ];
            for (metric, get, top) in metrics {
                let single = rs.as_ref().and_then(get);
                let comp = rc.as_ref().and_then(get);
                let red = single.zip(comp).and_then(|(x, y)| pct_reduction(x, y, top));
                let f = |x: Option<f64>| x.map_or("NA".to_owned(), format_float);
                summary.push(format!("{task},{metric},{model},{},{},{}", f(single), f(comp), f(red)));
            }
        }
        if model == ModelKind::Bilinear {
            let mut it = trained.into_iter().map(|(p, _)| p);
            bilinear = Some((it.next().unwrap(), it.next().unwrap()));
        }
    }
    let text = summary.join("\n") + "\n";
    write_file(&out.join("summary.csv"), |w| Ok(w.write_all(text.as_bytes())?))?;

    if let (Some(rel), Some((single, comp))) = (&s.relation, &bilinear) {
        let g = data.train();
        let r = g.vocab().relation_id(rel).ok_or_else(|| Failure::data(format!("analyze: unknown relation `{rel}`")))?;
        let report = delta_dist_report(comp, single, g, r, DEFAULT_PRECISION_THRESHOLD)
            .map_err(|e| Failure::from(e).at("analyze"))?;
        write_file(&out.join("delta_dist.csv"), |w| write_delta_dist_csv(g, &report, w))?;
    }
    print!("{text}");
    Ok(())
}
