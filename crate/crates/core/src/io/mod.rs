//! Canonical text formats. Every writer emits a fixed ordering and every
//! reader rejects malformed input instead of repairing it.

mod checkpoint;
mod config;
mod queries;
mod reports;
mod triples;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use config::{apply_train_key, parse_key_values, read_train_config, write_train_config, KeyValue};
pub use queries::{format_example, read_path_queries, write_path_queries, DatasetHeader};
pub use reports::{
    write_delta_dist_csv, write_eval_csv, write_rq_profile_csv, write_train_log, EVAL_CSV_HEADER, TRAIN_LOG_HEADER,
};
pub use triples::{graph_hash, write_triples};

/// Shortest decimal string that parses back to exactly `x`.
pub fn format_float(x: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(x).to_owned()
}

pub(crate) fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_owned(), format_float)
}
