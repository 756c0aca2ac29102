//! Prior-data transition buffers.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! 0   magic            8 bytes  "GAITFBUF"
//! 8   schema_version   u32
//! 12  flags            u32      bit 0: final episode cut short by the recorder
//! 16  n_rows           u64
//! 24  control_dt       f64
//! 32  spec_hash        32 bytes (sha256 of the canonical spec TOML)
//! 64  morphology       u16 length + UTF-8
//!     seeds            u32 count + u64 each (seed of episode k at index k)
//!     column table     u32 count, then per column:
//!                      u16 length + UTF-8 name, u8 dtype, u32 width, u64 offset
//!     data blocks      one per column, at its offset, column-major
//! ```
//!
//! dtype is 0 for f64, 1 for u8 and 2 for u32. A block holds `width * n_rows`
//! elements; element (row r, component c) sits at index `c * n_rows + r`.
//! The file ends exactly at the end of the last block. A TOML sidecar next to
//! the file (`<file>.meta.toml`) repeats the metadata in readable form and adds
//! the creation time.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{episode_seeds, rollout, CpgPolicy};
use crate::env::Env;
use crate::error::{Error, Result};
use crate::model::MorphologySpec;

pub const BUFFER_MAGIC: [u8; 8] = *b"GAITFBUF";
pub const BUFFER_SCHEMA_VERSION: u32 = 1;
/// Transitions recorded when no count is given.
pub const DEFAULT_TRANSITIONS: usize = 100_000;

const FLAG_TRUNCATED: u32 = 1;
const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnType {
    F64,
    U8,
    U32,
}

impl ColumnType {
    fn code(self) -> u8 {
        match self {
            ColumnType::F64 => 0,
            ColumnType::U8 => 1,
            ColumnType::U32 => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(ColumnType::F64),
            1 => Some(ColumnType::U8),
            2 => Some(ColumnType::U32),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            ColumnType::F64 => 8,
            ColumnType::U8 => 1,
            ColumnType::U32 => 4,
        }
    }
}

/// Entry of the column table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub dtype: ColumnType,
    pub width: usize,
    pub offset: u64,
}

/// Buffer metadata; everything but `created_unix` is also in the binary header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BufferMeta {
    pub schema_version: u32,
    pub morphology: String,
    pub spec_hash: String,
    pub seeds: Vec<u64>,
    pub control_dt: f64,
    pub truncated_final_episode: bool,
    pub n_transitions: usize,
    pub obs_dim: usize,
    pub action_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

/// Columnar transitions. Matrices are stored row-major in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionBuffer {
    pub meta: BufferMeta,
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: Vec<f64>,
    pub next_obs: Vec<f64>,
    pub terminated: Vec<bool>,
    pub truncated: Vec<bool>,
    pub episode_id: Vec<u32>,
}

impl TransitionBuffer {
    pub fn empty(spec: &MorphologySpec) -> Self {
        TransitionBuffer {
            meta: BufferMeta {
                schema_version: BUFFER_SCHEMA_VERSION,
                morphology: spec.name.clone(),
                spec_hash: spec.spec_hash(),
                seeds: Vec::new(),
                control_dt: spec.control_dt(),
                truncated_final_episode: false,
                n_transitions: 0,
                obs_dim: spec.obs_dim(),
                action_dim: spec.n_u,
                created_unix: None,
            },
            obs: Vec::new(),
            action: Vec::new(),
            reward: Vec::new(),
            next_obs: Vec::new(),
            terminated: Vec::new(),
            truncated: Vec::new(),
            episode_id: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }

    pub fn obs_row(&self, i: usize) -> &[f64] {
        let d = self.meta.obs_dim;
        &self.obs[i * d..(i + 1) * d]
    }

    pub fn next_obs_row(&self, i: usize) -> &[f64] {
        let d = self.meta.obs_dim;
        &self.next_obs[i * d..(i + 1) * d]
    }

    pub fn action_row(&self, i: usize) -> &[f64] {
        let d = self.meta.action_dim;
        &self.action[i * d..(i + 1) * d]
    }

    /// Refuses a buffer recorded with a different spec.
    pub fn check_spec(&self, spec: &MorphologySpec) -> Result<()> {
        let hash = spec.spec_hash();
        if self.meta.spec_hash != hash {
            return Err(Error::Schema {
                offset: 32,
                msg: format!(
                    "buffer was recorded with spec {} of `{}`, loaded spec `{}` hashes to {}",
                    self.meta.spec_hash, self.meta.morphology, spec.name, hash
                ),
            });
        }
        Ok(())
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta.toml");
        PathBuf::from(s)
    }

    fn columns(&self) -> Vec<(&'static str, ColumnType, usize)> {
        vec![
            ("obs", ColumnType::F64, self.meta.obs_dim),
            ("action", ColumnType::F64, self.meta.action_dim),
            ("reward", ColumnType::F64, 1),
            ("next_obs", ColumnType::F64, self.meta.obs_dim),
            ("terminated", ColumnType::U8, 1),
            ("truncated", ColumnType::U8, 1),
            ("episode_id", ColumnType::U32, 1),
        ]
    }

    /// Serialises to the binary layout described in the module docs.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let n = self.len();
        let m = &self.meta;
        let hash = hex::decode(&m.spec_hash)
            .ok()
            .filter(|h| h.len() == 32)
            .ok_or_else(|| Error::InvalidInput(format!("spec hash `{}` is not 32 hex bytes", m.spec_hash)))?;
        let mut out = Vec::new();
        out.extend_from_slice(&BUFFER_MAGIC);
        out.extend_from_slice(&m.schema_version.to_le_bytes());
        let flags = if m.truncated_final_episode { FLAG_TRUNCATED } else { 0 };
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&m.control_dt.to_le_bytes());
        out.extend_from_slice(&hash);
        put_str(&mut out, &m.morphology)?;
        out.extend_from_slice(&(m.seeds.len() as u32).to_le_bytes());
        for s in &m.seeds {
            out.extend_from_slice(&s.to_le_bytes());
        }

        let cols = self.columns();
        out.extend_from_slice(&(cols.len() as u32).to_le_bytes());
        let table_len: usize = cols.iter().map(|(name, ..)| 2 + name.len() + 1 + 4 + 8).sum();
        let mut offset = (out.len() + table_len) as u64;
        for (name, dtype, width) in &cols {
            put_str(&mut out, name)?;
            out.push(dtype.code());
            out.extend_from_slice(&(*width as u32).to_le_bytes());
            out.extend_from_slice(&offset.to_le_bytes());
            offset += (width * n * dtype.size()) as u64;
        }

        put_f64_block(&mut out, &self.obs, n, m.obs_dim);
        put_f64_block(&mut out, &self.action, n, m.action_dim);
        put_f64_block(&mut out, &self.reward, n, 1);
        put_f64_block(&mut out, &self.next_obs, n, m.obs_dim);
        out.extend(self.terminated.iter().map(|b| *b as u8));
        out.extend(self.truncated.iter().map(|b| *b as u8));
        for e in &self.episode_id {
            out.extend_from_slice(&e.to_le_bytes());
        }
        Ok(out)
    }

    /// Parses the binary layout; errors carry the byte offset of the problem.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(8)?;
        if magic != BUFFER_MAGIC {
            return Err(r.err_at(0, "bad magic bytes, not a gaitforge buffer"));
        }
        let version = r.u32()?;
        if version != BUFFER_SCHEMA_VERSION {
            return Err(r.err_at(8, format!("schema version {version}, reader supports {BUFFER_SCHEMA_VERSION}")));
        }
        let flags = r.u32()?;
        let n = r.u64()? as usize;
        let control_dt = r.f64()?;
        let spec_hash = hex::encode(r.take(32)?);
        let morphology = r.string()?;
        let n_seeds = r.u32()? as usize;
        let mut seeds = Vec::with_capacity(n_seeds.min(1 << 20));
        for _ in 0..n_seeds {
            seeds.push(r.u64()?);
        }
        let n_cols = r.u32()? as usize;
        let mut cols = Vec::new();
        for _ in 0..n_cols {
            let at = r.pos;
            let name = r.string()?;
            let code = r.u8()?;
            let dtype = ColumnType::from_code(code).ok_or_else(|| r.err_at(at, format!("column `{name}` has unknown dtype {code}")))?;
            let width = r.u32()? as usize;
            let offset = r.u64()?;
            cols.push((at, Column { name, dtype, width, offset }));
        }

        let find = |name: &str, dtype: ColumnType| -> Result<&Column> {
            let (at, c) = cols
                .iter()
                .find(|(_, c)| c.name == name)
                .ok_or_else(|| Error::Schema { offset: r.pos as u64, msg: format!("missing column `{name}`") })?;
            if c.dtype != dtype {
                return Err(Error::Schema {
                    offset: *at as u64,
                    msg: format!("column `{name}` has dtype {:?}, expected {dtype:?}", c.dtype),
                });
            }
            Ok(c)
        };
        let obs_c = find("obs", ColumnType::F64)?;
        let act_c = find("action", ColumnType::F64)?;
        let rew_c = find("reward", ColumnType::F64)?;
        let next_c = find("next_obs", ColumnType::F64)?;
        let term_c = find("terminated", ColumnType::U8)?;
        let trunc_c = find("truncated", ColumnType::U8)?;
        let ep_c = find("episode_id", ColumnType::U32)?;
        for c in [rew_c, term_c, trunc_c, ep_c] {
            if c.width != 1 {
                return Err(Error::Schema { offset: c.offset, msg: format!("column `{}` must have width 1, found {}", c.name, c.width) });
            }
        }
        if next_c.width != obs_c.width {
            return Err(Error::Schema {
                offset: next_c.offset,
                msg: format!("next_obs width {} differs from obs width {}", next_c.width, obs_c.width),
            });
        }

        let mut end = r.pos as u64;
        for (_, c) in &cols {
            end = end.max(c.offset + (c.width * n * c.dtype.size()) as u64);
        }
        if (bytes.len() as u64) < end {
            return Err(Error::Schema {
                offset: bytes.len() as u64,
                msg: format!("file truncated: data blocks need {end} bytes, file has {}", bytes.len()),
            });
        }
        if (bytes.len() as u64) > end {
            return Err(Error::Schema { offset: end, msg: format!("{} trailing bytes after the last block", bytes.len() as u64 - end) });
        }

        let f64s = |c: &Column| -> Result<Vec<f64>> {
            let block = r.block(c, n)?;
            let col_major: Vec<f64> = block.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
            Ok(transpose_to_rows(&col_major, n, c.width))
        };
        let bools = |c: &Column| -> Result<Vec<bool>> {
            let block = r.block(c, n)?;
            block
                .iter()
                .enumerate()
                .map(|(i, b)| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    _ => Err(Error::Schema { offset: c.offset + i as u64, msg: format!("column `{}` holds {b}, expected 0 or 1", c.name) }),
                })
                .collect()
        };
        let episode_id: Vec<u32> = r.block(ep_c, n)?.chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes"))).collect();

        Ok(TransitionBuffer {
            meta: BufferMeta {
                schema_version: version,
                morphology,
                spec_hash,
                seeds,
                control_dt,
                truncated_final_episode: flags & FLAG_TRUNCATED != 0,
                n_transitions: n,
                obs_dim: obs_c.width,
                action_dim: act_c.width,
                created_unix: None,
            },
            obs: f64s(obs_c)?,
            action: f64s(act_c)?,
            reward: f64s(rew_c)?,
            next_obs: f64s(next_c)?,
            terminated: bools(term_c)?,
            truncated: bools(trunc_c)?,
            episode_id,
        })
    }

    /// Writes the binary file and its sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        let text = toml::to_string(&self.meta).map_err(|e| Error::Config { path: None, msg: e.to_string() })?;
        std::fs::write(Self::sidecar_path(path), text)?;
        Ok(())
    }

    /// Reads the binary file; the creation time comes from the sidecar if present.
    pub fn read(path: &Path) -> Result<Self> {
        let mut buf = Self::from_bytes(&std::fs::read(path)?)?;
        let sidecar = Self::sidecar_path(path);
        if let Ok(text) = std::fs::read_to_string(&sidecar) {
            let meta: BufferMeta = toml::from_str(&text).map_err(|e| Error::Config { path: Some(sidecar), msg: e.to_string() })?;
            buf.meta.created_unix = meta.created_unix;
        }
        Ok(buf)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    let len: u16 = s.len().try_into().map_err(|_| Error::InvalidInput(format!("name too long: {} bytes", s.len())))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

fn put_f64_block(out: &mut Vec<u8>, rows: &[f64], n: usize, width: usize) {
    for c in 0..width {
        for r in 0..n {
            out.extend_from_slice(&rows[r * width + c].to_le_bytes());
        }
    }
}

fn transpose_to_rows(col_major: &[f64], n: usize, width: usize) -> Vec<f64> {
    let mut rows = vec![0.0; n * width];
    for c in 0..width {
        for r in 0..n {
            rows[r * width + c] = col_major[c * n + r];
        }
    }
    rows
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err_at(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::Schema { offset: offset as u64, msg: msg.into() }
    }

    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|e| *e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.err_at(self.pos, format!("unexpected end of file reading {k} bytes"))),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let at = self.pos;
        let len = u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")) as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| self.err_at(at, "string is not UTF-8"))
    }

    fn block(&self, c: &Column, n: usize) -> Result<&'a [u8]> {
        let len = c.width * n * c.dtype.size();
        let start = c.offset as usize;
        self.bytes
            .get(start..start + len)
            .ok_or_else(|| self.err_at(start, format!("column `{}` block runs past the end of the file", c.name)))
    }
}

/// Records CPG transitions until `n_transitions` are collected, cutting the
/// final episode short if needed. Episode k uses seed
/// [`episode_seeds`]`(seeds, ..)[k]`. Episodes run in parallel batches and are
/// assembled in order, so the result does not depend on the thread count.
pub fn record_buffer(spec: &MorphologySpec, n_transitions: usize, seeds: &[u64]) -> Result<TransitionBuffer> {
    let spec = Arc::new(spec.clone());
    let mut buf = TransitionBuffer::empty(&spec);
    let batch = rayon::current_num_threads().max(1);
    let mut k = 0;
    while buf.len() < n_transitions {
        let seed_batch: Vec<u64> = episode_seeds(seeds, k + batch)[k..].to_vec();
        let episodes = seed_batch.par_iter().map(|seed| record_episode(&spec, *seed)).collect::<Result<Vec<_>>>()?;
        for (seed, ep) in seed_batch.into_iter().zip(episodes) {
            if buf.len() >= n_transitions {
                break;
            }
            let id = buf.meta.seeds.len() as u32;
            buf.meta.seeds.push(seed);
            let take = ep.len().min(n_transitions - buf.len());
            buf.meta.truncated_final_episode = take < ep.len();
            for t in &ep[..take] {
                buf.obs.extend_from_slice(&t.obs);
                buf.action.extend_from_slice(&t.action);
                buf.reward.push(t.reward);
                buf.next_obs.extend_from_slice(&t.next_obs);
                buf.terminated.push(t.terminated);
                buf.truncated.push(t.truncated);
                buf.episode_id.push(id);
            }
        }
        k += batch;
    }
    buf.meta.n_transitions = buf.len();
    buf.meta.created_unix = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs());
    Ok(buf)
}

struct Transition {
    obs: Vec<f64>,
    action: Vec<f64>,
    reward: f64,
    next_obs: Vec<f64>,
    terminated: bool,
    truncated: bool,
}

fn record_episode(spec: &Arc<MorphologySpec>, seed: u64) -> Result<Vec<Transition>> {
    let mut env = Env::from_arc(Arc::clone(spec));
    let mut out = Vec::new();
    rollout(&mut env, &mut CpgPolicy, seed, |obs, action, r| {
        let clipped = action.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        out.push(Transition {
            obs: obs.clone(),
            action: clipped,
            reward: r.reward,
            next_obs: r.observation.clone(),
            terminated: r.terminated,
            truncated: r.truncated,
        });
        Ok(())
    })?;
    Ok(out)
}

/// Summary of a successful replay check.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub episodes: usize,
    pub transitions: usize,
    pub max_reward_error: f64,
    pub max_obs_error: f64,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Replays every episode from its seed and stored actions and checks the
/// stored observations, rewards, flags and the next_obs/obs chain.
pub fn verify_buffer(buf: &TransitionBuffer, spec: &MorphologySpec) -> Result<VerifyReport> {
    buf.check_spec(spec)?;
    let n = buf.len();
    let widths = [
        ("obs", buf.obs.len(), n * buf.meta.obs_dim),
        ("next_obs", buf.next_obs.len(), n * buf.meta.obs_dim),
        ("action", buf.action.len(), n * buf.meta.action_dim),
        ("terminated", buf.terminated.len(), n),
        ("truncated", buf.truncated.len(), n),
        ("episode_id", buf.episode_id.len(), n),
    ];
    for (what, got, expected) in widths {
        crate::error::check_len(what, expected, got)?;
    }
    crate::error::check_len("obs width", spec.obs_dim(), buf.meta.obs_dim)?;
    crate::error::check_len("action width", spec.n_u, buf.meta.action_dim)?;

    let mismatch = |row: usize, msg: String| Error::ReplayMismatch { row, msg };
    let mut env = Env::new(spec.clone());
    let (mut max_r, mut max_o) = (0.0_f64, 0.0_f64);
    let mut episodes = 0;
    let mut row = 0;
    while row < n {
        let id = buf.episode_id[row];
        if id as usize != episodes {
            return Err(mismatch(row, format!("episode id {id}, expected {episodes}")));
        }
        let seed = *buf.meta.seeds.get(id as usize).ok_or_else(|| mismatch(row, format!("no seed stored for episode {id}")))?;
        let obs = env.reset(seed);
        let e = max_abs_diff(&obs, buf.obs_row(row));
        if e > TOL {
            return Err(mismatch(row, format!("reset observation differs by {e:e}")));
        }
        max_o = max_o.max(e);
        loop {
            let r = env.step(buf.action_row(row))?;
            let er = (r.reward - buf.reward[row]).abs();
            if er.is_nan() || er > TOL {
                return Err(mismatch(row, format!("reward {} replays as {} (|Δ| = {er:e})", buf.reward[row], r.reward)));
            }
            let eo = max_abs_diff(&r.observation, buf.next_obs_row(row));
            if eo > TOL {
                return Err(mismatch(row, format!("next_obs differs by {eo:e}")));
            }
            if r.terminated != buf.terminated[row] || r.truncated != buf.truncated[row] {
                return Err(mismatch(
                    row,
                    format!(
                        "flags (terminated {}, truncated {}) replay as ({}, {})",
                        buf.terminated[row], buf.truncated[row], r.terminated, r.truncated
                    ),
                ));
            }
            max_r = max_r.max(er);
            max_o = max_o.max(eo);
            let done = r.terminated || r.truncated;
            let last_of_episode = row + 1 == n || buf.episode_id[row + 1] != id;
            row += 1;
            if done || last_of_episode {
                if !done && row < n {
                    return Err(mismatch(row - 1, "episode ends without a terminal flag before another begins".into()));
                }
                if done && !last_of_episode {
                    return Err(mismatch(row, "transitions stored after the episode ended".into()));
                }
                break;
            }
            let chain = max_abs_diff(buf.next_obs_row(row - 1), buf.obs_row(row));
            if chain > 0.0 {
                return Err(mismatch(row, format!("obs does not chain from the previous next_obs (|Δ| = {chain:e})")));
            }
        }
        episodes += 1;
    }
    if !buf.meta.truncated_final_episode && n > 0 && !(buf.terminated[n - 1] || buf.truncated[n - 1]) {
        return Err(mismatch(n - 1, "final episode ends early but the truncation flag is not set".into()));
    }
    Ok(VerifyReport { episodes, transitions: n, max_reward_error: max_r, max_obs_error: max_o })
}
