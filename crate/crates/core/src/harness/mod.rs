//! Rollouts, evaluation reports, prior-data buffers and replay export.

mod buffer;
mod protocol;
mod replay;
mod report;

use rayon::prelude::*;

use crate::cpg::cpg_policy;
use crate::env::{Env, Observation, StepResult};
use crate::error::{Error, Result};
use crate::model::MorphologySpec;

pub use buffer::{
    record_buffer, verify_buffer, BufferMeta, Column, ColumnType, TransitionBuffer, VerifyReport, BUFFER_MAGIC, BUFFER_SCHEMA_VERSION,
    DEFAULT_TRANSITIONS,
};
pub use protocol::{serve_policy, ExternPolicy, PROTOCOL_MAGIC, PROTOCOL_VERSION};
pub use replay::{dump_replay, ReplayFrame};
pub use report::{append_csv, emit_csv, CsvRow, EpisodeStats, EvalReport, CSV_HEADER};

/// Anything that maps the current environment to an action.
pub trait Policy {
    fn name(&self) -> &str;
    /// Called after every reset with the episode's seed.
    fn begin_episode(&mut self, _seed: u64, _obs: &Observation) -> Result<()> {
        Ok(())
    }
    fn act(&mut self, env: &Env, obs: &Observation) -> Result<Vec<f64>>;
}

/// The built-in CPG expert.
#[derive(Clone, Copy, Debug, Default)]
pub struct CpgPolicy;

impl Policy for CpgPolicy {
    fn name(&self) -> &str {
        "cpg"
    }

    fn act(&mut self, env: &Env, _obs: &Observation) -> Result<Vec<f64>> {
        let spec = env.spec();
        cpg_policy(env.state(), env.state().time, env.clock(), &spec.cpg, spec)
    }
}

/// All-zero actions: the robot sags under its own weight.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn name(&self) -> &str {
        "zero"
    }

    fn act(&mut self, env: &Env, _obs: &Observation) -> Result<Vec<f64>> {
        Ok(vec![0.0; env.action_dim()])
    }
}

/// Rolls one episode to termination or the horizon. `on_step` sees every
/// (observation, action, result) triple in order.
pub fn rollout<P: Policy + ?Sized>(
    env: &mut Env,
    policy: &mut P,
    seed: u64,
    mut on_step: impl FnMut(&Observation, &[f64], &StepResult) -> Result<()>,
) -> Result<EpisodeStats> {
    let mut obs = env.reset(seed);
    policy.begin_episode(seed, &obs)?;
    let x0 = env.state().base_pos[0];
    let spec = env.spec_arc();
    let mut stats = EpisodeStats { seed, ret: 0.0, length: 0, displacement: 0.0, compliant_steps: 0, in_band_steps: 0, terminated: false };
    loop {
        let action = policy.act(env, &obs)?;
        let r = env.step(&action)?;
        on_step(&obs, &action, &r)?;
        stats.ret += r.reward;
        stats.length += 1;
        if r.info.breakdown.n_errors == 0 {
            stats.compliant_steps += 1;
        }
        if (r.info.v_x - spec.v_star).abs() <= spec.sigma_v {
            stats.in_band_steps += 1;
        }
        if r.terminated || r.truncated {
            stats.terminated = r.terminated;
            break;
        }
        obs = r.observation;
    }
    stats.displacement = env.state().base_pos[0] - x0;
    Ok(stats)
}

/// Seeds for `n` episodes: the given list first, then consecutive integers
/// after its maximum.
pub fn episode_seeds(seeds: &[u64], n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = seeds.iter().copied().take(n).collect();
    let mut next = seeds.iter().max().map_or(0, |m| m + 1);
    while out.len() < n {
        out.push(next);
        next += 1;
    }
    out
}

/// Rolls the CPG for `n_episodes`, in parallel, one env per episode.
pub fn run_cpg(spec: &MorphologySpec, n_episodes: usize, seeds: &[u64]) -> Result<EvalReport> {
    evaluate_parallel(spec, n_episodes, seeds, || CpgPolicy)
}

/// Parallel evaluation of a stateless built-in policy.
pub fn evaluate_parallel<P, F>(spec: &MorphologySpec, n_episodes: usize, seeds: &[u64], make: F) -> Result<EvalReport>
where
    P: Policy,
    F: Fn() -> P + Sync,
{
    if n_episodes == 0 {
        return Err(Error::EmptyReport);
    }
    let spec = std::sync::Arc::new(spec.clone());
    let name = make().name().to_string();
    let episodes = episode_seeds(seeds, n_episodes)
        .into_par_iter()
        .map(|seed| {
            let mut env = Env::from_arc(std::sync::Arc::clone(&spec));
            rollout(&mut env, &mut make(), seed, |_, _, _| Ok(()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::new(&spec.name, &name, episodes))
}

/// Sequential evaluation of any policy, seeds `0..n_episodes`.
pub fn evaluate<P: Policy + ?Sized>(spec: &MorphologySpec, policy: &mut P, n_episodes: usize) -> Result<EvalReport> {
    if n_episodes == 0 {
        return Err(Error::EmptyReport);
    }
    let mut env = Env::new(spec.clone());
    let episodes = (0..n_episodes as u64).map(|seed| rollout(&mut env, policy, seed, |_, _, _| Ok(()))).collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::new(&spec.name, policy.name(), episodes))
}
