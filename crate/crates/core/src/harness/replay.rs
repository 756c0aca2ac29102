//! Per-step body poses as JSON lines for external viewers.
//!
//! The first line is a header with the morphology, seed, control period and
//! body names; every following line is one [`ReplayFrame`]. Poses are
//! `[x, y, z, qw, qx, qy, qz]` in world coordinates, in body order.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Policy;
use crate::env::Env;
use crate::error::Result;
use crate::model::MorphologySpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayHeader {
    pub morphology: String,
    pub seed: u64,
    pub policy: String,
    pub control_dt: f64,
    pub bodies: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayFrame {
    pub step: usize,
    pub time: f64,
    pub reward: f64,
    pub poses: Vec<[f64; 7]>,
}

fn poses(env: &Env) -> Vec<[f64; 7]> {
    env.dynamics().body_poses(env.state()).into_iter().map(|(p, q)| [p[0], p[1], p[2], q[0], q[1], q[2], q[3]]).collect()
}

/// Rolls one episode and writes the header and one frame per step (plus the
/// reset frame) to `out`. Returns the number of frames written.
pub fn dump_replay<P: Policy + ?Sized, W: Write>(spec: &MorphologySpec, policy: &mut P, seed: u64, mut out: W) -> Result<usize> {
    let header = ReplayHeader {
        morphology: spec.name.clone(),
        seed,
        policy: policy.name().to_string(),
        control_dt: spec.control_dt(),
        bodies: spec.bodies.iter().map(|b| b.name.clone()).collect(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;

    let mut env = Env::new(spec.clone());
    let mut obs = env.reset(seed);
    policy.begin_episode(seed, &obs)?;
    let mut write = |f: &ReplayFrame| -> Result<()> {
        serde_json::to_writer(&mut out, f)?;
        out.write_all(b"\n")?;
        Ok(())
    };
    write(&ReplayFrame { step: 0, time: 0.0, reward: 0.0, poses: poses(&env) })?;
    let mut n = 1;
    loop {
        let action = policy.act(&env, &obs)?;
        let r = env.step(&action)?;
        write(&ReplayFrame { step: r.info.step, time: env.state().time, reward: r.reward, poses: poses(&env) })?;
        n += 1;
        if r.terminated || r.truncated {
            break;
        }
        obs = r.observation;
    }
    out.flush()?;
    Ok(n)
}
