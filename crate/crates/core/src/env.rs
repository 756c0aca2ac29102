//! Reset/step episode shell around the simulator, reward and gait clock.
//!
//! Observation layout (all morphologies):
//!
//! | block    | contents                                   | length      |
//! |----------|--------------------------------------------|-------------|
//! | posture  | torso z, torso quaternion (w,x,y,z), joints | 1 + 4 + n_u |
//! | velocity | torso linear (world), angular (body), joint rates | 3 + 3 + n_u |
//! | contact  | per-body wrench, clipped to [−1, 1]        | 6 · n_body  |
//! | phase    | sin φ, cos φ                               | 2           |
//!
//! Horizontal torso coordinates are never observed.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ContactState, Dynamics, SimState};
use crate::error::{check_len, Error, Result};
use crate::model::MorphologySpec;
use crate::reward::{clip_wrench, is_healthy, total_reward, GaitClock, RewardBreakdown};

/// Half-width of the uniform joint noise applied at reset, rad.
pub const RESET_NOISE: f64 = 0.01;

/// Index ranges of the four observation blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObsLayout {
    pub posture: Range<usize>,
    pub velocity: Range<usize>,
    pub contact: Range<usize>,
    pub phase: Range<usize>,
}

impl ObsLayout {
    pub fn new(spec: &MorphologySpec) -> Self {
        let a = 5 + spec.n_u;
        let b = a + 6 + spec.n_u;
        let c = b + 6 * spec.n_body;
        Self { posture: 0..a, velocity: a..b, contact: b..c, phase: c..c + 2 }
    }

    pub fn len(&self) -> usize {
        self.phase.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat observation vector; see the module docs for the layout.
pub type Observation = Vec<f64>;

/// Assembles the four observation blocks in order.
pub fn observe(state: &SimState, contact: &ContactState, clock: &GaitClock, spec: &MorphologySpec) -> Observation {
    let mut obs = Vec::with_capacity(spec.obs_dim());
    obs.push(state.z_torso());
    obs.extend_from_slice(&state.base_quat);
    obs.extend_from_slice(&state.q_joints);
    obs.extend_from_slice(&state.base_linvel);
    obs.extend_from_slice(&state.base_angvel);
    obs.extend_from_slice(&state.qd_joints);
    let scale = spec.sim.contact_clip_scale;
    obs.extend(contact.wrenches.iter().flatten().map(|v| clip_wrench(*v, scale)));
    obs.extend_from_slice(&clock.encode());
    obs
}

/// Per-step diagnostics. Field names are part of the stable API.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub breakdown: RewardBreakdown,
    pub phi: f64,
    pub v_x: f64,
    pub z_torso: f64,
    /// Torso x, used for displacement statistics (never observed).
    pub x_torso: f64,
    pub step: usize,
    pub blowup: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    NeedsReset,
    Running,
}

/// One environment instance.
pub struct Env {
    spec: Arc<MorphologySpec>,
    dynamics: Dynamics,
    state: SimState,
    contact: ContactState,
    clock: GaitClock,
    a_prev: Vec<f64>,
    step_index: usize,
    phase: Phase,
}

impl Env {
    pub fn new(spec: MorphologySpec) -> Self {
        Self::from_arc(Arc::new(spec))
    }

    pub fn from_arc(spec: Arc<MorphologySpec>) -> Self {
        let dynamics = Dynamics::new(&spec);
        let state = SimState::at_rest([0.0, 0.0, z_mid(&spec)], spec.q_def.clone());
        let contact = ContactState::zeros(spec.n_body, spec.n_legs);
        Self {
            clock: GaitClock::new(spec.f_g),
            a_prev: vec![0.0; spec.n_u],
            dynamics,
            state,
            contact,
            step_index: 0,
            phase: Phase::NeedsReset,
            spec,
        }
    }

    /// Loads a morphology by name or config path.
    pub fn make(name_or_path: &str) -> Result<Self> {
        Ok(Self::new(crate::model::load_morphology(name_or_path)?))
    }

    pub fn spec(&self) -> &MorphologySpec {
        &self.spec
    }

    pub fn spec_arc(&self) -> Arc<MorphologySpec> {
        Arc::clone(&self.spec)
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn contact(&self) -> &ContactState {
        &self.contact
    }

    pub fn clock(&self) -> &GaitClock {
        &self.clock
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn obs_dim(&self) -> usize {
        self.spec.obs_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.spec.n_u
    }

    /// Starts an episode: torso at mid healthy height, joints at q_def with
    /// ±0.01 rad seeded noise, everything at rest, φ = 0.
    pub fn reset(&mut self, seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = self.spec.q_def.iter().map(|q| q + rng.gen_range(-RESET_NOISE..=RESET_NOISE)).collect();
        self.reset_to(SimState::at_rest([0.0, 0.0, z_mid(&self.spec)], q))
    }

    /// Starts an episode from an arbitrary state (scripted scenarios, replays).
    pub fn reset_to(&mut self, state: SimState) -> Observation {
        self.contact = ContactState { wrenches: vec![[0.0; 6]; self.spec.n_body], foot_heights: self.dynamics.contact_heights(&state) };
        self.state = state;
        self.clock = GaitClock::new(self.spec.f_g);
        self.a_prev = vec![0.0; self.spec.n_u];
        self.step_index = 0;
        self.phase = Phase::Running;
        self.observation()
    }

    pub fn observation(&self) -> Observation {
        observe(&self.state, &self.contact, &self.clock, &self.spec)
    }

    /// Advances one control step. Errors with [`Error::NotReset`] once the
    /// episode has terminated or been truncated.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.phase != Phase::Running {
            return Err(Error::NotReset);
        }
        check_len("action", self.spec.n_u, action.len())?;
        if let Some(i) = action.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(format!("action[{i}] is not finite")));
        }
        let clipped: Vec<f64> = action.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        self.step_index += 1;

        match self.dynamics.control_step(&self.state, &clipped, &self.spec) {
            Ok((state, contact)) => {
                self.state = state;
                self.contact = contact;
            }
            Err(Error::NumericalBlowup { .. }) => {
                self.phase = Phase::NeedsReset;
                self.clock = self.clock.advance(self.spec.control_dt());
                let mut breakdown = total_reward(&self.state, &self.contact, &clipped, &self.a_prev, &self.clock, &self.spec)?;
                zero_terms(&mut breakdown);
                return Ok(StepResult {
                    observation: self.observation(),
                    reward: 0.0,
                    terminated: true,
                    truncated: false,
                    info: self.info(breakdown, true),
                });
            }
            Err(e) => return Err(e),
        }
        self.clock = self.clock.advance(self.spec.control_dt());
        let breakdown = total_reward(&self.state, &self.contact, &clipped, &self.a_prev, &self.clock, &self.spec)?;
        self.a_prev = clipped;

        let terminated = !is_healthy(self.state.z_torso(), &self.spec);
        let truncated = !terminated && self.step_index >= self.spec.horizon;
        if terminated || truncated {
            self.phase = Phase::NeedsReset;
        }
        Ok(StepResult {
            observation: self.observation(),
            reward: breakdown.total,
            terminated,
            truncated,
            info: self.info(breakdown, false),
        })
    }

    fn info(&self, breakdown: RewardBreakdown, blowup: bool) -> StepInfo {
        StepInfo {
            breakdown,
            phi: self.clock.phi,
            v_x: self.state.base_linvel[0],
            z_torso: self.state.z_torso(),
            x_torso: self.state.base_pos[0],
            step: self.step_index,
            blowup,
        }
    }
}

fn zero_terms(b: &mut RewardBreakdown) {
    b.r_fwd = 0.0;
    b.r_h = 0.0;
    b.r_gait_bonus = 0.0;
    b.c_gait = 0.0;
    b.c_ctrl = 0.0;
    b.c_smooth = 0.0;
    b.c_contact = 0.0;
    b.c_ang = 0.0;
    b.c_zvel = 0.0;
    b.c_post = 0.0;
    b.total = 0.0;
}

fn z_mid(spec: &MorphologySpec) -> f64 {
    0.5 * (spec.healthy_z[0] + spec.healthy_z[1])
}
