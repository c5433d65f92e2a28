use std::io::Write;

use crate::analysis::{DeltaDistReport, ProfilePoint};
use crate::error::Result;
use crate::eval::EvalReport;
use crate::graph::{KnowledgeGraph, PathQuery};
use crate::training::TrainLog;

use super::{format_float, format_opt};

pub const TRAIN_LOG_HEADER: &str = "epoch,phase,loss,clip_rate,heldout_mq";
pub const EVAL_CSV_HEADER: &str = "subset,length,n,mq,hits_at_k";

pub fn write_train_log<W: Write>(log: &TrainLog, mut out: W) -> Result<()> {
    writeln!(out, "{TRAIN_LOG_HEADER}")?;
    for r in log {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.epoch,
            r.phase,
            format_float(r.loss),
            format_float(r.clip_rate),
            format_opt(r.heldout_mq)
        )?;
    }
    Ok(())
}

pub fn write_eval_csv<W: Write>(report: &EvalReport, mut out: W) -> Result<()> {
    writeln!(out, "{EVAL_CSV_HEADER}")?;
    for r in &report.rows {
        let len = r.length.map_or_else(|| "all".to_owned(), |l| l.to_string());
        writeln!(out, "{},{},{},{},{}", r.subset, len, r.n, format_opt(r.mean_quantile), format_opt(r.hits_at_k))?;
    }
    Ok(())
}

/// Appends rows for one query; `header` controls the column line.
pub fn write_rq_profile_csv<W: Write>(
    graph: &KnowledgeGraph,
    query: &PathQuery,
    profile: &[ProfilePoint],
    header: bool,
    mut out: W,
) -> Result<()> {
    if header {
        writeln!(out, "query,prefix_len,rq,top5")?;
    }
    let v = graph.vocab();
    let q = graph.query_display(query).to_string();
    for p in profile {
        // correct answers are marked with a trailing `*`
        let top: Vec<String> = p
            .top
            .iter()
            .map(|&(e, _, ok)| format!("{}{}", v.entity_name(e), if ok { "*" } else { "" }))
            .collect();
        writeln!(out, "{q},{},{},{}", p.prefix_len, format_opt(p.rq), top.join(";"))?;
    }
    Ok(())
}

pub fn write_delta_dist_csv<W: Write>(graph: &KnowledgeGraph, report: &DeltaDistReport, mut out: W) -> Result<()> {
    writeln!(out, "path,prec,dist_single,dist_comp,delta,group")?;
    let v = graph.vocab();
    for r in &report.rows {
        writeln!(
            out,
            "{}/{},{},{},{},{},{}",
            v.relation_name(r.path[0]),
            v.relation_name(r.path[1]),
            format_opt(r.precision),
            format_opt(r.dist_single),
            format_opt(r.dist_comp),
            format_opt(r.delta),
            r.group
        )?;
    }
    Ok(())
}
