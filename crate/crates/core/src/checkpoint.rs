//! Line-based model checkpoints.
//!
//! Every float is written as the hex of its IEEE-754 bits, so a
//! save/load cycle restores the model bit for bit. Entries are sorted by
//! key, which makes the file itself deterministic.
//!
//! ```text
//! ctxctr-model v1
//! kind ffm
//! learning_rate <bits>
//! ...
//! field <id> <kind> <name>
//! bias <w bits> <acc bits>
//! update_count <n>
//! linear <index> <w bits> <acc bits>
//! latent <index> <field> <w bits> x k <acc bits> x k
//! end
//! ```

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::model::{FfmModel, LatentSlot, TrainConfig, Weight};
use crate::schema::{FieldDef, FieldSchema};

const MAGIC: &str = "ctxctr-model v1";

fn hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn unhex(s: &str, line: usize) -> Result<f64> {
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| bad(line, format!("bad float bits `{s}`")))
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Checkpoint(format!("line {line}: {}", msg.into()))
}

pub fn write_model<W: Write>(model: &FfmModel, mut out: W) -> Result<()> {
    let c = model.config();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", c.kind)?;
    writeln!(out, "learning_rate {}", hex(c.learning_rate))?;
    writeln!(out, "l2 {}", hex(c.l2))?;
    writeln!(out, "init_scale {}", hex(c.init_scale))?;
    writeln!(out, "k {}", c.k)?;
    writeln!(out, "hash_bits {}", c.hash_bits)?;
    writeln!(out, "clip_eps {}", hex(c.clip_eps))?;
    writeln!(out, "seed {}", c.seed)?;
    for f in model.schema().fields() {
        writeln!(out, "field {} {} {}", f.field_id, f.kind, f.name)?;
    }
    writeln!(out, "bias {} {}", hex(model.bias()), hex(model.bias_accumulator()))?;
    writeln!(out, "update_count {}", model.update_count())?;

    let mut linear: Vec<_> = model.linear.iter().collect();
    linear.sort_by_key(|(i, _)| **i);
    for (index, w) in linear {
        writeln!(out, "linear {index} {} {}", hex(w.w), hex(w.acc))?;
    }
    let mut latent: Vec<_> = model.latent.iter().collect();
    latent.sort_by_key(|(key, _)| **key);
    for ((index, field), slot) in latent {
        write!(out, "latent {index} {field}")?;
        for x in slot.w.iter().chain(&slot.acc) {
            write!(out, " {}", hex(*x))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "end")?;
    out.flush()?;
    Ok(())
}

pub fn save(model: &FfmModel, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    write_model(model, BufWriter::new(file))
}

pub fn read_model<R: BufRead>(input: R) -> Result<FfmModel> {
    let mut config = TrainConfig::default();
    let mut fields = Vec::new();
    let mut bias = (0.0, 0.0);
    let mut update_count = 0;
    let mut linear = FxHashMap::default();
    let mut latent = FxHashMap::default();
    let mut seen_magic = false;
    let mut seen_end = false;

    for (n, line) in input.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if !seen_magic {
            if line != MAGIC {
                return Err(bad(line_no, "not a model checkpoint"));
            }
            seen_magic = true;
            continue;
        }
        if seen_end {
            return Err(bad(line_no, "content after `end`"));
        }
        let mut parts = line.split(' ');
        let tag = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let int = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| bad(line_no, format!("bad integer `{s}`")))
        };
        let one = || -> Result<&str> {
            match rest.as_slice() {
                [v] => Ok(v),
                _ => Err(bad(line_no, format!("`{tag}` takes one value"))),
            }
        };
        match tag {
            "kind" => config.kind = one()?.parse()?,
            "learning_rate" => config.learning_rate = unhex(one()?, line_no)?,
            "l2" => config.l2 = unhex(one()?, line_no)?,
            "init_scale" => config.init_scale = unhex(one()?, line_no)?,
            "k" => config.k = int(one()?)? as usize,
            "hash_bits" => config.hash_bits = int(one()?)? as u32,
            "clip_eps" => config.clip_eps = unhex(one()?, line_no)?,
            "seed" => config.seed = int(one()?)?,
            "field" => {
                if rest.len() < 3 {
                    return Err(bad(line_no, "field needs id, kind and name"));
                }
                fields.push(FieldDef::new(
                    int(rest[0])? as u32,
                    rest[2..].join(" "),
                    rest[1].parse()?,
                ));
            }
            "bias" => match rest.as_slice() {
                [w, acc] => bias = (unhex(w, line_no)?, unhex(acc, line_no)?),
                _ => return Err(bad(line_no, "bias needs weight and accumulator")),
            },
            "update_count" => update_count = int(one()?)?,
            "linear" => match rest.as_slice() {
                [i, w, acc] => {
                    linear.insert(
                        int(i)? as u32,
                        Weight {
                            w: unhex(w, line_no)?,
                            acc: unhex(acc, line_no)?,
                        },
                    );
                }
                _ => return Err(bad(line_no, "linear needs index, weight, accumulator")),
            },
            "latent" => {
                let k = config.k;
                if rest.len() != 2 + 2 * k {
                    return Err(bad(line_no, format!("latent needs 2 + 2k values (k = {k})")));
                }
                let vals = rest[2..]
                    .iter()
                    .map(|s| unhex(s, line_no))
                    .collect::<Result<Vec<f64>>>()?;
                latent.insert(
                    (int(rest[0])? as u32, int(rest[1])? as u32),
                    LatentSlot {
                        w: vals[..k].to_vec(),
                        acc: vals[k..].to_vec(),
                    },
                );
            }
            "end" => seen_end = true,
            other => return Err(bad(line_no, format!("unknown record `{other}`"))),
        }
    }
    if !seen_end {
        return Err(Error::Checkpoint("truncated checkpoint (no `end`)".into()));
    }
    config.validate()?;
    let schema = FieldSchema::new(fields)?;
    Ok(FfmModel::restore(schema, config, bias, update_count, linear, latent))
}

pub fn load(path: &Path) -> Result<FfmModel> {
    let file = fs::File::open(path).map_err(|e| {
        Error::Checkpoint(format!("cannot open {}: {e}", path.display()))
    })?;
    read_model(BufReader::new(file))
}
