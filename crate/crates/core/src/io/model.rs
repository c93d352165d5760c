//! Versioned, checksummed text format for trained forests.
//!
//! ```text
//! imforest-model 1
//! dim <d>
//! n_effective <n>
//! psi <psi|none>
//! seed <seed>
//! decision <none | threshold <t> | kmeans <normal_mean> <anomaly_mean>>
//! trees <count>
//! tree <node_count> <rng_seed_hex> <rng_stream> <rng_word_pos>
//! I <split_dim> <split_val> <time> <population> <min_1..min_d> <max_1..max_d>
//! L <time> <population> <min_1..min_d> <max_1..max_d>
//! ...
//! checksum <sha256 of every preceding byte, hex>
//! ```
//!
//! Nodes are listed in preorder. Reals use Rust's shortest round-trip
//! decimal form, so every stored value reloads bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use sha2::{Digest, Sha256};

use crate::decision::DecisionModel;
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::mondrian::{NodeRecord, Tree, TreeRng};

pub const MODEL_VERSION: u32 = 1;
const MAGIC: &str = "imforest-model";

#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub forest: Forest,
    /// Label rule fitted at training time, if any.
    pub decision: Option<DecisionModel>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unhex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok())
        .collect()
}

fn encode(forest: &Forest, decision: Option<&DecisionModel>) -> String {
    let mut out = String::new();
    // writing to a String cannot fail
    let _ = writeln!(out, "{MAGIC} {MODEL_VERSION}");
    let _ = writeln!(out, "dim {}", forest.dim());
    let _ = writeln!(out, "n_effective {}", forest.n_effective());
    match forest.psi() {
        Some(psi) => {
            let _ = writeln!(out, "psi {psi}");
        }
        None => out.push_str("psi none\n"),
    }
    let _ = writeln!(out, "seed {}", forest.seed());
    match decision {
        None => out.push_str("decision none\n"),
        Some(DecisionModel::Threshold { threshold }) => {
            let _ = writeln!(out, "decision threshold {threshold}");
        }
        Some(DecisionModel::KMeans {
            normal_mean,
            anomaly_mean,
        }) => {
            let _ = writeln!(out, "decision kmeans {normal_mean} {anomaly_mean}");
        }
    }
    let _ = writeln!(out, "trees {}", forest.num_trees());
    for tree in forest.trees() {
        let rng = tree.rng();
        let records = tree.to_records();
        let _ = writeln!(
            out,
            "tree {} {} {} {}",
            records.len(),
            hex(&rng.get_seed()),
            rng.get_stream(),
            rng.get_word_pos()
        );
        for rec in &records {
            match rec.split {
                Some((dim, value)) => {
                    let _ = write!(out, "I {dim} {value} {} {}", rec.time, rec.population);
                }
                None => {
                    let _ = write!(out, "L {} {}", rec.time, rec.population);
                }
            }
            for v in rec.min.iter().chain(&rec.max) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
    }
    let digest = Sha256::digest(out.as_bytes());
    let _ = writeln!(out, "checksum {}", hex(&digest));
    out
}

pub fn write_model<W: Write>(
    mut w: W,
    forest: &Forest,
    decision: Option<&DecisionModel>,
) -> Result<()> {
    w.write_all(encode(forest, decision).as_bytes())?;
    Ok(())
}

pub fn save_model(
    path: impl AsRef<Path>,
    forest: &Forest,
    decision: Option<&DecisionModel>,
) -> Result<()> {
    fs::write(path, encode(forest, decision))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    read_model(fs::File::open(path)?)
}

/// Parses a model. The checksum is verified before anything else is
/// interpreted, so a damaged file never yields a partial model.
pub fn read_model<R: Read>(mut r: R) -> Result<SavedModel> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.is_empty() {
        return Err(Error::Format("empty file".into()));
    }
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::Checksum)?;
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map_or(0, |i| i + 1);
    let (body, trailer) = text.split_at(body_end);
    let stored = trailer
        .trim_end_matches('\n')
        .strip_prefix("checksum ")
        .ok_or_else(|| Error::Format("truncated: no checksum line".into()))?;
    if stored != hex(&Sha256::digest(body.as_bytes())) {
        return Err(Error::Checksum);
    }
    parse_body(body)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        self.inner
            .next()
            .map(|(i, line)| (i + 1, line.split(' ').collect()))
            .ok_or_else(|| Error::Format("unexpected end of model".into()))
    }

    /// Next line must read `key value...`; returns the values.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (no, mut fields) = self.next()?;
        if fields.first() != Some(&key) {
            return Err(Error::Format(format!("line {no}: expected `{key}`")));
        }
        fields.remove(0);
        Ok((no, fields))
    }
}

fn num<T: std::str::FromStr>(line: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: bad value `{field}`")))
}

fn single<T: std::str::FromStr>(lines: &mut Lines<'_>, key: &str) -> Result<T> {
    let (no, fields) = lines.keyed(key)?;
    match fields.as_slice() {
        [v] => num(no, v),
        _ => Err(Error::Format(format!("line {no}: `{key}` takes one value"))),
    }
}

fn parse_body(body: &str) -> Result<SavedModel> {
    let mut lines = Lines {
        inner: body.lines().enumerate(),
    };
    let (_, header) = lines.next()?;
    match header.as_slice() {
        [MAGIC, v] if *v == MODEL_VERSION.to_string() => {}
        [MAGIC, v] => {
            return Err(Error::Version {
                expected: MODEL_VERSION,
                found: v.to_string(),
            })
        }
        _ => return Err(Error::Format("not an imforest model".into())),
    }
    let d: usize = single(&mut lines, "dim")?;
    let n_effective: usize = single(&mut lines, "n_effective")?;
    let (no, psi) = lines.keyed("psi")?;
    let psi = match psi.as_slice() {
        ["none"] => None,
        [v] => Some(num(no, v)?),
        _ => return Err(Error::Format(format!("line {no}: bad psi"))),
    };
    let seed: u64 = single(&mut lines, "seed")?;
    let (no, decision) = lines.keyed("decision")?;
    let decision = match decision.as_slice() {
        ["none"] => None,
        ["threshold", t] => Some(DecisionModel::threshold(num(no, t)?)?),
        ["kmeans", a, b] => Some(DecisionModel::KMeans {
            normal_mean: num(no, a)?,
            anomaly_mean: num(no, b)?,
        }),
        _ => return Err(Error::Format(format!("line {no}: bad decision"))),
    };
    let count: usize = single(&mut lines, "trees")?;

    let mut trees = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, fields) = lines.keyed("tree")?;
        let [nodes, rng_seed, stream, word_pos] = fields.as_slice() else {
            return Err(Error::Format(format!("line {no}: bad tree header")));
        };
        let nodes: usize = num(no, nodes)?;
        let rng_seed: [u8; 32] = unhex(rng_seed)
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| Error::Format(format!("line {no}: bad generator seed")))?;
        let mut rng = TreeRng::from_seed(rng_seed);
        rng.set_stream(num(no, stream)?);
        rng.set_word_pos(num(no, word_pos)?);

        let mut records = Vec::with_capacity(nodes);
        for _ in 0..nodes {
            let (no, fields) = lines.next()?;
            let (split, rest) = match fields.as_slice() {
                ["I", dim, value, rest @ ..] => (Some((num(no, dim)?, num(no, value)?)), rest),
                ["L", rest @ ..] => (None, rest),
                _ => return Err(Error::Format(format!("line {no}: expected a node"))),
            };
            if rest.len() != 2 + 2 * d {
                return Err(Error::Format(format!("line {no}: wrong field count")));
            }
            let coords = rest[2..]
                .iter()
                .map(|v| num::<f64>(no, v))
                .collect::<Result<Vec<_>>>()?;
            records.push(NodeRecord {
                split,
                time: num(no, rest[0])?,
                population: num(no, rest[1])?,
                min: coords[..d].to_vec(),
                max: coords[d..].to_vec(),
            });
        }
        trees.push(Tree::from_records(d, &records, rng)?);
    }
    if let Some((no, _)) = lines.inner.next() {
        return Err(Error::Format(format!("line {}: trailing content", no + 1)));
    }
    let forest = Forest::from_parts(trees, n_effective, psi, seed)?;
    if forest.dim() != d {
        return Err(Error::Format("tree dimensionality disagrees with header".into()));
    }
    Ok(SavedModel { forest, decision })
}
