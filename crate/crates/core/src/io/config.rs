use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::training::TrainConfig;

use super::format_float;

/// One `key=value` line with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyValue {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Flat `key=value` text. Blank lines and `#` comments are skipped;
/// repeated keys are an error.
pub fn parse_key_values<R: BufRead>(reader: R) -> Result<Vec<KeyValue>> {
    let mut out: Vec<KeyValue> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (k, v) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        let key = k.trim().to_owned();
        if out.iter().any(|kv| kv.key == key) {
            return Err(Error::Parse { line: i + 1, message: format!("duplicate key `{key}`") });
        }
        out.push(KeyValue { line: i + 1, key, value: v.trim().to_owned() });
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(kv: &KeyValue) -> Result<T> {
    kv.value.parse().map_err(|_| Error::Parse {
        line: kv.line,
        message: format!("invalid value `{}` for `{}`", kv.value, kv.key),
    })
}

/// Applies one training key. Returns `Ok(false)` for keys that are not
/// training settings so callers can layer their own keys on top.
pub fn apply_train_key(config: &mut TrainConfig, kv: &KeyValue) -> Result<bool> {
    match kv.key.as_str() {
        "model" => config.model = kv.value.parse()?,
        "dim" => config.dim = parse(kv)?,
        "step_size" => config.step_size = parse(kv)?,
        "minibatch" => config.minibatch = parse(kv)?,
        "negatives_per_example" => config.negatives_per_example = parse(kv)?,
        "margin" => config.margin = parse(kv)?,
        "init_std" => config.init_std = parse(kv)?,
        "max_epochs" => config.max_epochs = parse(kv)?,
        "patience" => config.patience = parse(kv)?,
        "clip_multiplier" => config.clip_multiplier = parse(kv)?,
        "clip_window" => config.clip_window = parse(kv)?,
        "use_max_over_negatives" => {
            config.use_max_over_negatives = match kv.value.as_str() {
                "auto" => None,
                _ => Some(parse(kv)?),
            }
        }
        "aux_l2_weight" => config.aux_l2_weight = parse(kv)?,
        "heldout_fraction" => config.heldout_fraction = parse(kv)?,
        "seed" => config.seed = parse(kv)?,
        "curriculum" => config.curriculum = kv.value.parse()?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Reads a training config on top of the defaults. Unknown keys are errors.
pub fn read_train_config<R: BufRead>(reader: R) -> Result<TrainConfig> {
    let mut config = TrainConfig::default();
    for kv in parse_key_values(reader)? {
        if !apply_train_key(&mut config, &kv)? {
            return Err(Error::Config(format!("line {}: unknown key `{}`", kv.line, kv.key)));
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn write_train_config<W: Write>(config: &TrainConfig, mut out: W) -> Result<()> {
    let c = config;
    let max = c.use_max_over_negatives.map_or("auto".to_owned(), |b| b.to_string());
    let lines = [
        ("model", c.model.to_string()),
        ("dim", c.dim.to_string()),
        ("step_size", format_float(c.step_size)),
        ("minibatch", c.minibatch.to_string()),
        ("negatives_per_example", c.negatives_per_example.to_string()),
        ("margin", format_float(c.margin)),
        ("init_std", format_float(c.init_std)),
        ("max_epochs", c.max_epochs.to_string()),
        ("patience", c.patience.to_string()),
        ("clip_multiplier", format_float(c.clip_multiplier)),
        ("clip_window", c.clip_window.to_string()),
        ("use_max_over_negatives", max),
        ("aux_l2_weight", format_float(c.aux_l2_weight)),
        ("heldout_fraction", format_float(c.heldout_fraction)),
        ("seed", c.seed.to_string()),
        ("curriculum", c.curriculum.to_string()),
    ];
    for (k, v) in lines {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}
