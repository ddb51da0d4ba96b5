//! Retained draws in the constrained space and their on-disk form.
//!
//! Row layout for a series of length `T`: the seven statics (with `σ_λ`
//! signed), `h₀..h_T`, then `λ₁..λ_T`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::SamplerError;
use crate::data_io::DataError;
use crate::model::N_STATIC;

/// Tag written at the top of every draw file.
pub const DRAWS_FORMAT: &str = "skewsv-draws-1";
const BINARY_MAGIC: &[u8; 8] = b"SKSVDRW1";

#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws {
    pub chain_id: usize,
    pub rows: usize,
    /// Row-major, `rows × names.len()`.
    pub values: Vec<f64>,
    pub accept_rate: f64,
    pub divergences: usize,
    pub step_size: f64,
}

impl ChainDraws {
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.values.len() / self.rows.max(1);
        &self.values[i * w..(i + 1) * w]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub names: Vec<String>,
    /// Number of observations `T` the draws were fitted to.
    pub n_obs: usize,
    pub thin: usize,
    pub chains: Vec<ChainDraws>,
    pub config_hash: String,
    pub data_hash: String,
}

impl PosteriorDraws {
    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn total_rows(&self) -> usize {
        self.chains.iter().map(|c| c.rows).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_rows() == 0
    }

    /// Column of `h_t`, `t = 0..=T`.
    pub fn h_index(&self, t: usize) -> usize {
        N_STATIC + t
    }

    /// Column of `λ_t`, `t = 1..=T`.
    pub fn lambda_index(&self, t: usize) -> usize {
        N_STATIC + self.n_obs + t
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// One vector per chain.
    pub fn column(&self, j: usize) -> Vec<Vec<f64>> {
        let w = self.width();
        self.chains.iter().map(|c| c.values.iter().skip(j).step_by(w).copied().collect()).collect()
    }

    /// All chains pooled, chain-major.
    pub fn pooled(&self, j: usize) -> Vec<f64> {
        self.column(j).into_iter().flatten().collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        let w = self.width();
        self.chains.iter().flat_map(move |c| c.values.chunks_exact(w))
    }

    pub fn mean(&self, j: usize) -> f64 {
        let v = self.pooled(j);
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Posterior mean of every column.
    pub fn means(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.width()];
        let mut n = 0usize;
        for row in self.rows() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
            n += 1;
        }
        acc.iter_mut().for_each(|a| *a /= n.max(1) as f64);
        acc
    }

    /// Row-weighted mean acceptance probability.
    pub fn mean_accept(&self) -> f64 {
        let total = self.total_rows().max(1) as f64;
        self.chains.iter().map(|c| c.accept_rate * c.rows as f64).sum::<f64>() / total
    }

    pub fn divergences(&self) -> usize {
        self.chains.iter().map(|c| c.divergences).sum()
    }

    fn header(&self, c: &ChainDraws) -> String {
        let mut h = String::new();
        for (k, v) in [
            ("format", DRAWS_FORMAT.to_string()),
            ("chain", c.chain_id.to_string()),
            ("T", self.n_obs.to_string()),
            ("thin", self.thin.to_string()),
            ("config_hash", self.config_hash.clone()),
            ("data_hash", self.data_hash.clone()),
            ("step_size", c.step_size.to_string()),
            ("accept_rate", c.accept_rate.to_string()),
            ("divergences", c.divergences.to_string()),
        ] {
            h.push_str(&format!("# {k}: {v}\n"));
        }
        h.push_str(&self.names.join(","));
        h.push('\n');
        h
    }

    /// Writes `chain_<k>.csv` (and `chain_<k>.bin` when `binary`) into
    /// `dir`, returning the paths written.
    pub fn write_dir(&self, dir: &Path, binary: bool) -> Result<Vec<PathBuf>, SamplerError> {
        let mut written = Vec::new();
        for c in &self.chains {
            let header = self.header(c);
            let mut text = header.clone();
            for row in c.values.chunks_exact(self.width()) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                text.push_str(&line.join(","));
                text.push('\n');
            }
            let path = dir.join(format!("chain_{}.csv", c.chain_id));
            crate::data_io::write_text(&path, &text)?;
            written.push(path);
            if binary {
                let path = dir.join(format!("chain_{}.bin", c.chain_id));
                let mut bytes = Vec::with_capacity(32 + header.len() + 8 * c.values.len());
                bytes.extend_from_slice(BINARY_MAGIC);
                bytes.extend_from_slice(&(header.len() as u64).to_le_bytes());
                bytes.extend_from_slice(header.as_bytes());
                bytes.extend_from_slice(&(c.rows as u64).to_le_bytes());
                bytes.extend_from_slice(&(self.width() as u64).to_le_bytes());
                for v in &c.values {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
                let mut f = std::fs::File::create(&path).map_err(|e| io(&path, e))?;
                f.write_all(&bytes).map_err(|e| io(&path, e))?;
                written.push(path);
            }
        }
        Ok(written)
    }

    /// Reads every `chain_*.csv` in `dir` (falling back to `chain_*.bin`),
    /// refusing files whose headers disagree.
    pub fn read_dir(dir: &Path) -> Result<PosteriorDraws, SamplerError> {
        let entries = std::fs::read_dir(dir).map_err(|e| io(dir, e))?;
        let mut csv = BTreeMap::new();
        let mut bin = BTreeMap::new();
        for entry in entries {
            let path = entry.map_err(|e| io(dir, e))?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
            let Some(stem) = name.strip_prefix("chain_") else { continue };
            if let Some(k) = stem.strip_suffix(".csv").and_then(|k| k.parse::<usize>().ok()) {
                csv.insert(k, path);
            } else if let Some(k) = stem.strip_suffix(".bin").and_then(|k| k.parse::<usize>().ok()) {
                bin.insert(k, path);
            }
        }
        let files: Vec<(PathBuf, bool)> = if csv.is_empty() {
            bin.into_values().map(|p| (p, true)).collect()
        } else {
            csv.into_values().map(|p| (p, false)).collect()
        };
        if files.is_empty() {
            return Err(SamplerError::Format(format!("no chain files in {}", dir.display())));
        }
        let mut out: Option<PosteriorDraws> = None;
        for (path, is_bin) in files {
            let parsed = if is_bin { parse_binary(&path)? } else { parse_text(&path)? };
            match &mut out {
                None => out = Some(parsed),
                Some(all) => {
                    let same = all.names == parsed.names
                        && all.n_obs == parsed.n_obs
                        && all.thin == parsed.thin
                        && all.config_hash == parsed.config_hash
                        && all.data_hash == parsed.data_hash;
                    if !same {
                        return Err(SamplerError::Format(format!(
                            "{} was produced by a different run than the other chains",
                            path.display()
                        )));
                    }
                    all.chains.extend(parsed.chains);
                }
            }
        }
        Ok(out.expect("at least one file"))
    }
}

fn io(path: &Path, source: std::io::Error) -> SamplerError {
    SamplerError::Data(DataError::Io { path: path.display().to_string(), source })
}

fn bad(path: &Path, what: &str) -> SamplerError {
    SamplerError::Format(format!("{}: {what}", path.display()))
}

/// Parses `# key: value` lines plus the names line.
fn parse_header<'a>(
    path: &Path,
    lines: &mut impl Iterator<Item = &'a str>,
) -> Result<(BTreeMap<String, String>, Vec<String>), SamplerError> {
    let mut meta = BTreeMap::new();
    for line in lines.by_ref() {
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv.split_once(": ").ok_or_else(|| bad(path, "malformed header line"))?;
            meta.insert(k.to_string(), v.to_string());
        } else {
            let names = line.split(',').map(str::to_string).collect();
            return Ok((meta, names));
        }
    }
    Err(bad(path, "missing column names"))
}

fn assemble(path: &Path, meta: &BTreeMap<String, String>, names: Vec<String>, rows: usize, values: Vec<f64>) -> Result<PosteriorDraws, SamplerError> {
    let get = |k: &str| meta.get(k).ok_or_else(|| bad(path, &format!("header lacks {k}")));
    if get("format")? != DRAWS_FORMAT {
        return Err(bad(path, "unknown draw format"));
    }
    let num = |k: &str| -> Result<f64, SamplerError> { get(k)?.parse().map_err(|_| bad(path, &format!("bad {k}"))) };
    let int = |k: &str| -> Result<usize, SamplerError> { get(k)?.parse().map_err(|_| bad(path, &format!("bad {k}"))) };
    let chain = ChainDraws {
        chain_id: int("chain")?,
        rows,
        values,
        accept_rate: num("accept_rate")?,
        divergences: int("divergences")?,
        step_size: num("step_size")?,
    };
    Ok(PosteriorDraws {
        names,
        n_obs: int("T")?,
        thin: int("thin")?,
        chains: vec![chain],
        config_hash: get("config_hash")?.clone(),
        data_hash: get("data_hash")?.clone(),
    })
}

fn parse_text(path: &Path) -> Result<PosteriorDraws, SamplerError> {
    let text = crate::data_io::read_text(path)?;
    let mut lines = text.lines();
    let (meta, names) = parse_header(path, &mut lines)?;
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let before = values.len();
        for field in line.split(',') {
            let v: f64 = field.parse().map_err(|_| bad(path, &format!("row {}: bad value {field:?}", i + 1)))?;
            values.push(v);
        }
        if values.len() - before != names.len() {
            return Err(bad(path, &format!("row {} has the wrong number of fields", i + 1)));
        }
        rows += 1;
    }
    assemble(path, &meta, names, rows, values)
}

fn parse_binary(path: &Path) -> Result<PosteriorDraws, SamplerError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| io(path, e))?;
    let take_u64 = |at: usize| -> Result<u64, SamplerError> {
        let b = bytes.get(at..at + 8).ok_or_else(|| bad(path, "truncated"))?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    };
    if bytes.get(..8) != Some(BINARY_MAGIC.as_slice()) {
        return Err(bad(path, "not a binary draw file"));
    }
    let hlen = take_u64(8)? as usize;
    let header = bytes.get(16..16 + hlen).ok_or_else(|| bad(path, "truncated header"))?;
    let header = std::str::from_utf8(header).map_err(|_| bad(path, "header is not UTF-8"))?;
    let (meta, names) = parse_header(path, &mut header.lines())?;
    let at = 16 + hlen;
    let rows = take_u64(at)? as usize;
    let cols = take_u64(at + 8)? as usize;
    if cols != names.len() {
        return Err(bad(path, "column count disagrees with header"));
    }
    let body = &bytes[at + 16..];
    if body.len() != rows * cols * 8 {
        return Err(bad(path, "payload size disagrees with header"));
    }
    let values = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    assemble(path, &meta, names, rows, values)
}
