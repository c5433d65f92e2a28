use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelParams};

use super::format_float;

pub const CHECKPOINT_MAGIC: &str = "KGE v1";

/// Header `KGE v1\t<kind>\t<d>\t<|E|>\t<|R|>`, then one `E\t<name>\t<floats>`
/// line per entity and one `R\t<name>\t<floats>` line per relation.
/// Bilinear relation matrices are row-major for the row-vector traversal
/// `vᵀW`.
pub fn write_checkpoint<W: Write>(params: &ModelParams, mut out: W) -> Result<()> {
    if !params.all_finite() {
        return Err(Error::NonFinite("checkpoint parameters".into()));
    }
    writeln!(
        out,
        "{CHECKPOINT_MAGIC}\t{}\t{}\t{}\t{}",
        params.kind(),
        params.dim(),
        params.entity_count(),
        params.relation_count()
    )?;
    let mut line = String::new();
    let mut emit = |out: &mut W, tag: &str, name: &str, values: &[f64]| -> Result<()> {
        line.clear();
        line.push_str(tag);
        line.push('\t');
        line.push_str(name);
        for &x in values {
            line.push('\t');
            line.push_str(&format_float(x));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
        Ok(())
    };
    for (i, name) in params.entity_names().iter().enumerate() {
        emit(&mut out, "E", name, params.entity(crate::graph::EntityId(i as u32)))?;
    }
    for (i, name) in params.relation_names().iter().enumerate() {
        emit(&mut out, "R", name, params.relation(crate::graph::RelationId(i as u32)))?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn read_checkpoint<R: BufRead>(reader: R) -> Result<ModelParams> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    let h: Vec<&str> = header.split('\t').collect();
    if h.first() != Some(&CHECKPOINT_MAGIC) {
        return Err(bad(format!("unsupported version header `{}`", h.first().unwrap_or(&""))));
    }
    if h.len() != 5 {
        return Err(bad("header must have 5 fields"));
    }
    let kind: ModelKind = h[1].parse()?;
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| bad(format!("bad {what} `{s}`")));
    let dim = num(h[2], "dimension")?;
    let ne = num(h[3], "entity count")?;
    let nr = num(h[4], "relation count")?;
    if dim == 0 {
        return Err(bad("dimension must be positive"));
    }

    let mut entity_names = Vec::with_capacity(ne);
    let mut relation_names = Vec::with_capacity(nr);
    let mut entity_values = Vec::with_capacity(ne * dim);
    let mut relation_values = Vec::with_capacity(nr * kind.relation_size(dim));
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let mut fields = line.split('\t');
        let tag = fields.next().unwrap_or_default();
        let name = fields.next().ok_or_else(|| bad(format!("line {lineno}: missing name")))?;
        let (names, values, width) = match tag {
            "E" if relation_names.is_empty() => (&mut entity_names, &mut entity_values, dim),
            "R" => (&mut relation_names, &mut relation_values, kind.relation_size(dim)),
            _ => return Err(bad(format!("line {lineno}: unexpected record `{tag}`"))),
        };
        let before = values.len();
        for f in fields {
            let x: f64 = f.parse().map_err(|_| bad(format!("line {lineno}: bad float `{f}`")))?;
            if !x.is_finite() {
                return Err(Error::NonFinite(format!("checkpoint line {lineno}")));
            }
            values.push(x);
        }
        if values.len() - before != width {
            return Err(bad(format!("line {lineno}: expected {width} values, found {}", values.len() - before)));
        }
        names.push(name.to_owned());
    }
    if entity_names.len() != ne || relation_names.len() != nr {
        return Err(bad(format!(
            "count mismatch: header declares {ne} entities and {nr} relations, found {} and {}",
            entity_names.len(),
            relation_names.len()
        )));
    }
    let mut params = ModelParams::zeros(kind, dim, entity_names, relation_names);
    for e in 0..ne {
        let id = crate::graph::EntityId(e as u32);
        params.entity_mut(id).copy_from_slice(&entity_values[e * dim..(e + 1) * dim]);
    }
    let w = kind.relation_size(dim);
    for r in 0..nr {
        let id = crate::graph::RelationId(r as u32);
        params.relation_mut(id).copy_from_slice(&relation_values[r * w..(r + 1) * w]);
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_triples;

    fn sample() -> ModelParams {
        let g = load_triples("a\tr\tb\nb\ts\tc\n".as_bytes()).unwrap();
        ModelParams::random(ModelKind::Bilinear, 2, g.vocab(), 0.3, &mut crate::rng::seeded(8))
    }

    fn bytes(p: &ModelParams) -> Vec<u8> {
        let mut buf = Vec::new();
        write_checkpoint(p, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = sample();
        let q = read_checkpoint(bytes(&p).as_slice()).unwrap();
        assert_eq!(p, q);
        assert_eq!(bytes(&p), bytes(&q));
    }

    #[test]
    fn truncated_file_is_count_mismatch() {
        let text = String::from_utf8(bytes(&sample())).unwrap();
        let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        let err = read_checkpoint(truncated.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("count mismatch"), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        let text = String::from_utf8(bytes(&sample())).unwrap().replacen("KGE v1", "KGE v2", 1);
        let err = read_checkpoint(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn non_finite_and_short_rows_rejected() {
        let text = String::from_utf8(bytes(&sample())).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let mut row: Vec<&str> = lines[1].split('\t').collect();
        row[2] = "NaN";
        lines[1] = row.join("\t");
        let err = read_checkpoint(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)), "{err}");

        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        lines[1] = lines[1].rsplit_once('\t').unwrap().0.to_owned();
        assert!(read_checkpoint(lines.join("\n").as_bytes()).is_err());
    }
}
