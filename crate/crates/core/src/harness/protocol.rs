//! Length-prefixed request/response protocol for external action servers.
//!
//! Every frame is a little-endian `u32` payload length followed by the
//! payload, whose first byte is the message kind:
//!
//! | kind | name   | direction       | body                                              |
//! |------|--------|-----------------|---------------------------------------------------|
//! | 1    | HELLO  | harness → server | magic `GFPP`, u32 version, u32 obs_dim, u32 action_dim, u16-prefixed morphology |
//! | 2    | ACCEPT | server → harness | magic `GFPP`, u32 version                        |
//! | 3    | RESET  | harness → server | u64 episode seed (no reply)                       |
//! | 4    | OBS    | harness → server | obs_dim f64                                       |
//! | 5    | ACTION | server → harness | action_dim f64                                    |
//! | 6    | BYE    | harness → server | empty (no reply)                                  |
//!
//! The server must answer HELLO with ACCEPT carrying the same version and
//! every OBS with exactly one ACTION.

use std::io::{BufReader, BufWriter, Read, Write};
use std::process::{Child, Command, Stdio};

use super::Policy;
use crate::env::{Env, Observation};
use crate::error::{Error, Result};
use crate::model::MorphologySpec;

pub const PROTOCOL_MAGIC: [u8; 4] = *b"GFPP";
pub const PROTOCOL_VERSION: u32 = 1;

const HELLO: u8 = 1;
const ACCEPT: u8 = 2;
const RESET: u8 = 3;
const OBS: u8 = 4;
const ACTION: u8 = 5;
const BYE: u8 = 6;
const MAX_FRAME: usize = 1 << 24;

fn perr(msg: impl Into<String>) -> Error {
    Error::Protocol(msg.into())
}

fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<()> {
    let len: u32 = payload.len().try_into().map_err(|_| perr("frame too large"))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `None` on a clean end of stream before the length prefix.
fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_le_bytes(len) as usize;
    if len == 0 || len > MAX_FRAME {
        return Err(perr(format!("frame length {len} out of range")));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(|e| perr(format!("truncated frame: {e}")))?;
    Ok(Some(payload))
}

fn f64s(kind: u8, values: &[f64]) -> Vec<u8> {
    let mut p = Vec::with_capacity(1 + 8 * values.len());
    p.push(kind);
    for v in values {
        p.extend_from_slice(&v.to_le_bytes());
    }
    p
}

fn parse_f64s(body: &[u8], expected: usize, what: &str) -> Result<Vec<f64>> {
    if !body.len().is_multiple_of(8) {
        return Err(perr(format!("{what} body of {} bytes is not a whole number of f64", body.len())));
    }
    let got = body.len() / 8;
    if got != expected {
        return Err(perr(format!("{what} has {got} values, expected {expected}")));
    }
    Ok(body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect())
}

fn hello_body(version: u32, obs_dim: usize, action_dim: usize, name: &str) -> Vec<u8> {
    let mut p = vec![HELLO];
    p.extend_from_slice(&PROTOCOL_MAGIC);
    p.extend_from_slice(&version.to_le_bytes());
    p.extend_from_slice(&(obs_dim as u32).to_le_bytes());
    p.extend_from_slice(&(action_dim as u32).to_le_bytes());
    p.extend_from_slice(&(name.len() as u16).to_le_bytes());
    p.extend_from_slice(name.as_bytes());
    p
}

/// Policy backed by an external action server.
pub struct ExternPolicy {
    reader: Box<dyn Read + Send>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
    obs_dim: usize,
    action_dim: usize,
    name: String,
}

impl ExternPolicy {
    /// Handshakes over an existing pair of streams.
    pub fn connect(reader: Box<dyn Read + Send>, writer: Box<dyn Write + Send>, spec: &MorphologySpec) -> Result<Self> {
        let mut p = ExternPolicy { reader, writer, child: None, obs_dim: spec.obs_dim(), action_dim: spec.n_u, name: "extern".to_string() };
        write_frame(&mut p.writer, &hello_body(PROTOCOL_VERSION, p.obs_dim, p.action_dim, &spec.name))?;
        let reply = read_frame(&mut p.reader)?.ok_or_else(|| perr("server closed the stream during the handshake"))?;
        if reply.len() != 9 || reply[0] != ACCEPT || reply[1..5] != PROTOCOL_MAGIC {
            return Err(perr("malformed ACCEPT"));
        }
        let version = u32::from_le_bytes(reply[5..9].try_into().expect("4 bytes"));
        if version != PROTOCOL_VERSION {
            return Err(perr(format!("server speaks version {version}, harness speaks {PROTOCOL_VERSION}")));
        }
        Ok(p)
    }

    /// Spawns `program args..` and talks to it over its stdin/stdout.
    pub fn spawn(program: &str, args: &[String], spec: &MorphologySpec) -> Result<Self> {
        let mut child = Command::new(program).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::inherit()).spawn()?;
        let stdin = child.stdin.take().ok_or_else(|| perr("child has no stdin"))?;
        let stdout = child.stdout.take().ok_or_else(|| perr("child has no stdout"))?;
        let mut p = Self::connect(Box::new(BufReader::new(stdout)), Box::new(BufWriter::new(stdin)), spec)?;
        p.child = Some(child);
        p.name = format!("extern:{program}");
        Ok(p)
    }
}

impl Policy for ExternPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn begin_episode(&mut self, seed: u64, _obs: &Observation) -> Result<()> {
        let mut p = vec![RESET];
        p.extend_from_slice(&seed.to_le_bytes());
        write_frame(&mut self.writer, &p)
    }

    fn act(&mut self, _env: &Env, obs: &Observation) -> Result<Vec<f64>> {
        write_frame(&mut self.writer, &f64s(OBS, obs))?;
        let reply = read_frame(&mut self.reader)?.ok_or_else(|| perr("server closed the stream mid-episode"))?;
        if reply[0] != ACTION {
            return Err(perr(format!("expected ACTION, got message kind {}", reply[0])));
        }
        let action = parse_f64s(&reply[1..], self.action_dim, "ACTION")?;
        if let Some(i) = action.iter().position(|a| !a.is_finite()) {
            return Err(perr(format!("action[{i}] is not finite")));
        }
        Ok(action)
    }
}

impl Drop for ExternPolicy {
    fn drop(&mut self) {
        let _ = write_frame(&mut self.writer, &[BYE]);
        if let Some(mut child) = self.child.take() {
            let _ = child.wait();
        }
    }
}

/// Server side: answers HELLO, then maps every OBS through
/// `act(action_dim, obs)` until BYE or end of stream. Returns the number of
/// actions served.
pub fn serve_policy<R: Read, W: Write>(mut reader: R, mut writer: W, mut act: impl FnMut(usize, &[f64]) -> Vec<f64>) -> Result<usize> {
    let hello = read_frame(&mut reader)?.ok_or_else(|| perr("stream closed before HELLO"))?;
    if hello.len() < 19 || hello[0] != HELLO || hello[1..5] != PROTOCOL_MAGIC {
        return Err(perr("malformed HELLO"));
    }
    let version = u32::from_le_bytes(hello[5..9].try_into().expect("4 bytes"));
    if version != PROTOCOL_VERSION {
        return Err(perr(format!("client speaks version {version}, server speaks {PROTOCOL_VERSION}")));
    }
    let obs_dim = u32::from_le_bytes(hello[9..13].try_into().expect("4 bytes")) as usize;
    let action_dim = u32::from_le_bytes(hello[13..17].try_into().expect("4 bytes")) as usize;
    let mut accept = vec![ACCEPT];
    accept.extend_from_slice(&PROTOCOL_MAGIC);
    accept.extend_from_slice(&PROTOCOL_VERSION.to_le_bytes());
    write_frame(&mut writer, &accept)?;

    let mut served = 0;
    while let Some(msg) = read_frame(&mut reader)? {
        match msg[0] {
            RESET => {}
            OBS => {
                let obs = parse_f64s(&msg[1..], obs_dim, "OBS")?;
                write_frame(&mut writer, &f64s(ACTION, &act(action_dim, &obs)))?;
                served += 1;
            }
            BYE => break,
            k => return Err(perr(format!("unexpected message kind {k}"))),
        }
    }
    Ok(served)
}
