use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use pathquery_core::analysis::{delta_dist_report, rq_profile};
use pathquery_core::io::{
    graph_hash, parse_key_values, apply_train_key, format_float, read_checkpoint, read_path_queries,
    write_checkpoint, write_delta_dist_csv, write_eval_csv, write_path_queries, write_rq_profile_csv,
    write_train_config, write_train_log, DatasetHeader, KeyValue,
};
use pathquery_core::rng::GENERATOR_NAME;
use pathquery_core::{
    evaluate, generate_datasets, EvalConfig, EvalReport, GraphSplit, KnowledgeGraph, ModelParams, PathGenConfig,
    QueryExample, TrainConfig, TrainLog,
};

use crate::{
    AnalyzeArgs, CmdResult, EvalArgs, EvalOpts, Failure, GenPathsArgs, GraphArgs, GridArgs, IngestArgs, QueryArgs,
    TrainArgs, TrainOverrides,
};

/// Both graphs closed under inverses over one vocabulary, plus hashes of
/// the canonical (pre-closure) triple sets.
pub struct Data {
    pub split: GraphSplit,
    pub train_hash: String,
    pub full_hash: String,
}

impl Data {
    pub fn train(&self) -> &KnowledgeGraph {
        &self.split.train
    }

    pub fn full(&self) -> &KnowledgeGraph {
        &self.split.full
    }
}

pub fn open(path: &Path) -> CmdResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

pub fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

/// Runs `write` into a fresh file at `path`.
pub fn write_file(path: &Path, write: impl FnOnce(&mut dyn Write) -> pathquery_core::Result<()>) -> CmdResult {
    let mut out = create(path)?;
    write(&mut out).map_err(|e| Failure::from(e).at(&path.display().to_string()))?;
    out.flush().map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn tagged<T>(path: &Path, r: pathquery_core::Result<T>) -> CmdResult<T> {
    r.map_err(|e| Failure::from(e).at(&path.display().to_string()))
}

pub fn load_graphs(triples: &Path, full_triples: Option<&Path>) -> CmdResult<Data> {
    let train = open(triples)?;
    let split = match full_triples {
        Some(p) => tagged(p, GraphSplit::load(train, open(p)?))?,
        None => tagged(triples, GraphSplit::load(train, io::empty()))?,
    };
    let train_hash = graph_hash(&split.train);
    let full_hash = graph_hash(&split.full);
    let split = tagged(triples, split.close_inverses())?;
    Ok(Data { split, train_hash, full_hash })
}

fn load(args: &GraphArgs) -> CmdResult<Data> {
    load_graphs(&args.triples, args.full_triples.as_deref())
}

pub fn read_params(path: &Path, data: &Data) -> CmdResult<ModelParams> {
    let params = tagged(path, read_checkpoint(open(path)?))?;
    if !params.matches_vocab(data.train().vocab()) {
        return Err(Failure::data(format!(
            "{}: checkpoint entities/relations differ from the graph; pass the --triples/--full-triples used for training",
            path.display()
        )));
    }
    Ok(params)
}

/// Reads a path-query file and checks it was generated from this graph.
pub fn read_paths(path: &Path, data: &Data) -> CmdResult<(DatasetHeader, Vec<QueryExample>)> {
    let (header, examples) = tagged(path, read_path_queries(open(path)?, data.train()))?;
    if let Some(h) = header.get("train_graph_sha256") {
        if h != data.train_hash {
            return Err(Failure::data(format!("{}: generated from a different training graph", path.display())));
        }
    }
    Ok((header, examples))
}

/// Config file first, then per-flag overrides; validated.
pub fn train_config(o: &TrainOverrides, extra: &mut dyn FnMut(&KeyValue) -> CmdResult<bool>) -> CmdResult<TrainConfig> {
    let mut cfg = TrainConfig::default();
    if let Some(path) = &o.config {
        let usage = |e: pathquery_core::Error| Failure::usage(format!("{}: {e}", path.display()));
        for kv in parse_key_values(open(path)?).map_err(usage)? {
            if !apply_train_key(&mut cfg, &kv).map_err(usage)? && !extra(&kv)? {
                return Err(Failure::usage(format!("{}: line {}: unknown key `{}`", path.display(), kv.line, kv.key)));
            }
        }
    }
    if let Some(m) = &o.model {
        cfg.model = m.parse()?;
    }
    if let Some(d) = o.dim {
        cfg.dim = d;
    }
    if let Some(c) = &o.curriculum {
        cfg.curriculum = c.parse()?;
    }
    if let Some(l) = o.aux_l2 {
        cfg.aux_l2_weight = l;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn eval_config(o: &EvalOpts) -> CmdResult<EvalConfig> {
    if o.k == 0 {
        return Err(Failure::usage("--k must be at least 1"));
    }
    Ok(EvalConfig { hits_k: o.k, policy: o.eval_graph.parse()?, workers: o.workers })
}

pub fn ingest(a: IngestArgs) -> CmdResult {
    let data = load(&a.graph)?;
    let s = &data.split;
    let v = s.train.vocab();
    let lines = [
        ("entities", v.entity_count().to_string()),
        ("relations", v.base_relation_count().to_string()),
        ("train_triples", s.train_summary.lines.to_string()),
        ("train_duplicates", s.train_summary.duplicates.to_string()),
        ("held_out_triples", s.held_out.len().to_string()),
        ("held_out_trivial_inverse", (s.held_out.len() - s.nontrivial_held_out().len()).to_string()),
        ("train_graph_sha256", data.train_hash.clone()),
        ("full_graph_sha256", data.full_hash.clone()),
    ];
    let mut text = String::new();
    for (k, v) in lines {
        text.push_str(&format!("{k}\t{v}\n"));
    }
    print!("{text}");
    if let Some(dir) = &a.out_dir {
        write_file(&dir.join("ingest.txt"), |w| Ok(w.write_all(text.as_bytes())?))?;
        let base = |g: &KnowledgeGraph| -> CmdResult<KnowledgeGraph> {
            let triples: Vec<_> = g.triples().filter(|t| !g.vocab().is_inverse_relation(t.relation)).copied().collect();
            Ok(KnowledgeGraph::from_triples(g.vocab().clone(), triples)?)
        };
        let (train, full) = (base(&s.train)?, base(&s.full)?);
        write_file(&dir.join("train.tsv"), |w| pathquery_core::io::write_triples(&train, w))?;
        write_file(&dir.join("full.tsv"), |w| pathquery_core::io::write_triples(&full, w))?;
    }
    Ok(())
}

pub fn dataset_header(data: &Data, cfg: &PathGenConfig, removed: usize) -> DatasetHeader {
    DatasetHeader::new()
        .with("generator", GENERATOR_NAME)
        .with("seed", cfg.seed)
        .with("max_length", cfg.max_length)
        .with("train_count", cfg.train_count)
        .with("test_count", cfg.test_count)
        .with("removed_overlap", removed)
        .with("train_graph_sha256", &data.train_hash)
        .with("full_graph_sha256", &data.full_hash)
}

/// Generates both datasets and writes `train_paths.tsv` / `test_paths.tsv`.
pub fn generate_into(data: &Data, cfg: &PathGenConfig, dir: &Path) -> CmdResult<pathquery_core::Datasets> {
    let sets = generate_datasets(data.train(), data.full(), cfg)?;
    let header = dataset_header(data, cfg, sets.removed_overlap);
    write_file(&dir.join("train_paths.tsv"), |w| write_path_queries(data.train(), &header, &sets.train, w))?;
    write_file(&dir.join("test_paths.tsv"), |w| write_path_queries(data.train(), &header, &sets.test, w))?;
    Ok(sets)
}

pub fn gen_paths(a: GenPathsArgs) -> CmdResult {
    if a.max_length == 0 {
        return Err(Failure::usage("--max-length must be at least 1"));
    }
    let data = load(&a.graph)?;
    let cfg = PathGenConfig { max_length: a.max_length, train_count: a.train_count, test_count: a.test_count, seed: a.seed };
    let sets = generate_into(&data, &cfg, &a.out_dir)?;
    println!(
        "train\t{}\ntest\t{}\nremoved_overlap\t{}",
        sets.train.len(),
        sets.test.len(),
        sets.removed_overlap
    );
    Ok(())
}

/// Trains and writes checkpoint, log and effective config under `stem`.
pub fn train_and_save(
    data: &Data,
    examples: &[QueryExample],
    cfg: &TrainConfig,
    checkpoint: &Path,
    log_path: Option<&Path>,
    config_path: Option<&Path>,
) -> CmdResult<(ModelParams, TrainLog)> {
    let (params, log) = pathquery_core::train(data.train(), examples, cfg)?;
    write_file(checkpoint, |w| write_checkpoint(&params, w))?;
    if let Some(p) = log_path {
        write_file(p, |w| write_train_log(&log, w))?;
    }
    if let Some(p) = config_path {
        write_file(p, |w| write_train_config(cfg, w))?;
    }
    Ok((params, log))
}

pub fn train(a: TrainArgs) -> CmdResult {
    let cfg = train_config(&a.train, &mut |_| Ok(false))?;
    let (checkpoint, dir) = match (&a.checkpoint, &a.out_dir) {
        (Some(c), d) => (c.clone(), d.clone()),
        (None, Some(d)) => (d.join("model.ckpt"), Some(d.clone())),
        (None, None) => return Err(Failure::usage("pass --checkpoint or --out-dir")),
    };
    let data = load(&a.graph)?;
    let (_, examples) = read_paths(&a.paths, &data)?;
    let log_path = dir.as_ref().map(|d| d.join("train_log.csv"));
    let cfg_path = dir.as_ref().map(|d| d.join("train_config.txt"));
    let (_, log) = train_and_save(&data, &examples, &cfg, &checkpoint, log_path.as_deref(), cfg_path.as_deref())?;
    let best = log.iter().filter_map(|r| r.heldout_mq).fold(f64::NAN, f64::max);
    println!("epochs\t{}\nbest_heldout_mq\t{}\ncheckpoint\t{}", log.len(), format_float(best), checkpoint.display());
    Ok(())
}

pub fn run_eval(data: &Data, params: &ModelParams, examples: &[QueryExample], cfg: &EvalConfig) -> CmdResult<EvalReport> {
    Ok(evaluate(params, data.full(), data.train(), examples, cfg)?)
}

pub fn eval(a: EvalArgs) -> CmdResult {
    let cfg = eval_config(&a.eval)?;
    let data = load(&a.graph)?;
    let params = read_params(&a.checkpoint, &data)?;
    let (_, examples) = read_paths(&a.paths, &data)?;
    let report = run_eval(&data, &params, &examples, &cfg)?;
    match &a.out_dir {
        Some(dir) => {
            write_file(&dir.join("eval.csv"), |w| write_eval_csv(&report, w))?;
            println!(
                "evaluated\t{}\nexcluded_trivial\t{}\nmq\t{}\nhits_at_{}\t{}",
                report.n_evaluated,
                report.n_excluded_trivial,
                report.mean_quantile().map_or("NA".into(), format_float),
                cfg.hits_k,
                report.hits_at_k().map_or("NA".into(), format_float),
            );
        }
        None => write_eval_csv(&report, io::stdout().lock())?,
    }
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> CmdResult {
    if a.baseline.is_none() && a.query.is_empty() {
        return Err(Failure::usage("nothing to analyze: pass --baseline with --relation, and/or --query"));
    }
    let data = load(&a.graph)?;
    let params = read_params(&a.checkpoint, &data)?;
    let graph = data.train();
    let mut outputs: Vec<(&str, Vec<u8>)> = Vec::new();
    if let (Some(base), Some(rel)) = (&a.baseline, &a.relation) {
        let single = read_params(base, &data)?;
        let r = graph.vocab().relation_id(rel).ok_or_else(|| Failure::data(format!("unknown relation `{rel}`")))?;
        let report = delta_dist_report(&params, &single, graph, r, a.threshold)?;
        let mut buf = Vec::new();
        write_delta_dist_csv(graph, &report, &mut buf)?;
        outputs.push(("delta_dist.csv", buf));
    }
    if !a.query.is_empty() {
        let mut buf = Vec::new();
        for (i, text) in a.query.iter().enumerate() {
            let q = graph.parse_query(text).map_err(|e| Failure::from(e).at("--query"))?;
            let profile = rq_profile(&params, graph, &q)?;
            write_rq_profile_csv(graph, &q, &profile, i == 0, &mut buf)?;
        }
        outputs.push(("rq_profile.csv", buf));
    }
    for (name, bytes) in outputs {
        match &a.out_dir {
            Some(dir) => write_file(&dir.join(name), |w| Ok(w.write_all(&bytes)?))?,
            None => {
                let mut out = io::stdout().lock();
                out.write_all(&bytes).map_err(|e| Failure::data(e.to_string()))?;
            }
        }
    }
    Ok(())
}

pub fn query(a: QueryArgs) -> CmdResult {
    if a.k == 0 {
        return Err(Failure::usage("--k must be at least 1"));
    }
    let data = load(&a.graph)?;
    let params = read_params(&a.checkpoint, &data)?;
    let graph = data.full();
    let q = graph.parse_query(&a.query).map_err(|e| Failure::from(e).at("--query"))?;
    let correct = graph.denotation(&q);
    let ranked = params.rank_candidates(graph, &q)?;
    let v = graph.vocab();
    let mut out = io::stdout().lock();
    let mut emit = || -> io::Result<()> {
        writeln!(out, "rank\tentity\tscore\tcorrect")?;
        for (i, (e, s)) in ranked.iter().take(a.k).enumerate() {
            let flag = if correct.contains(e) { "yes" } else { "no" };
            writeln!(out, "{}\t{}\t{}\t{flag}", i + 1, v.entity_name(*e), format_float(*s))?;
        }
        Ok(())
    };
    emit().map_err(|e| Failure::data(e.to_string()))
}

pub fn grid(a: GridArgs) -> CmdResult {
    let base = train_config(&a.train, &mut |_| Ok(false))?;
    let eval_cfg = eval_config(&a.eval)?;
    let models = a.models.iter().map(|m| m.parse()).collect::<Result<Vec<pathquery_core::ModelKind>, _>>()?;
    let curricula =
        a.curricula.iter().map(|c| c.parse()).collect::<Result<Vec<pathquery_core::Curriculum>, _>>()?;
    let dims = if a.dims.is_empty() { vec![base.dim] } else { a.dims.clone() };
    let steps = if a.step_sizes.is_empty() { vec![base.step_size] } else { a.step_sizes.clone() };

    let data = load(&a.graph)?;
    let (_, train_set) = read_paths(&a.paths, &data)?;
    let (_, test_set) = read_paths(&a.test_paths, &data)?;
    let mut rows = vec![format!("model,dim,step_size,curriculum,epochs,best_heldout_mq,mq,hits_at_{}", eval_cfg.hits_k)];
    for &model in &models {
        for &dim in &dims {
            for &step_size in &steps {
                for &curriculum in &curricula {
                    let cfg = TrainConfig { model, dim, step_size, curriculum, ..base.clone() };
                    cfg.validate()?;
                    let name = format!("{model}-d{dim}-s{}-{curriculum}", format_float(step_size));
                    let ckpt: PathBuf = a.out_dir.join(format!("{name}.ckpt"));
                    let stage = |f: Failure| f.at(&format!("train {name}"));
                    let (params, log) = train_and_save(&data, &train_set, &cfg, &ckpt, None, None).map_err(stage)?;
                    let report = run_eval(&data, &params, &test_set, &eval_cfg).map_err(|f| f.at(&format!("eval {name}")))?;
                    let best = log.iter().filter_map(|r| r.heldout_mq).fold(f64::NAN, f64::max);
                    let opt = |x: Option<f64>| x.map_or("NA".into(), format_float);
                    rows.push(format!(
                        "{model},{dim},{},{curriculum},{},{},{},{}",
                        format_float(step_size),
                        log.len(),
                        if best.is_nan() { "NA".into() } else { format_float(best) },
                        opt(report.mean_quantile()),
                        opt(report.hits_at_k()),
                    ));
                    eprintln!("{}", rows.last().unwrap());
                }
            }
        }
    }
    let text = rows.join("\n") + "\n";
    write_file(&a.out_dir.join("grid.csv"), |w| Ok(w.write_all(text.as_bytes())?))
}
