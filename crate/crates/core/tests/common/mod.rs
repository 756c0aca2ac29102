//! Shared test helpers: an independent reward oracle and random reward inputs.
#![allow(dead_code)]

use std::f64::consts::TAU;

use gaitforge::{ContactState, GaitClock, MorphologySpec, SimState};
use rand::Rng;

/// Inputs of one reward evaluation.
pub struct RewardCase {
    pub state: SimState,
    pub contact: ContactState,
    pub action: Vec<f64>,
    pub a_prev: Vec<f64>,
    pub clock: GaitClock,
}

pub fn random_case<R: Rng>(rng: &mut R, spec: &MorphologySpec) -> RewardCase {
    let [lo, hi] = spec.healthy_z;
    let span = hi - lo;
    let mut state = SimState::at_rest(
        [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(lo - 0.3 * span..hi + 0.3 * span)],
        spec.q_def.iter().map(|q| q + rng.gen_range(-0.8..0.8)).collect(),
    );
    let v_band = spec.v_star + rng.gen_range(-2.0..2.0) * spec.sigma_v;
    state.base_linvel = [v_band, rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0)];
    state.base_angvel = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
    if rng.gen_bool(0.05) {
        state.q_joints = spec.q_def.clone();
    }
    let wrenches = (0..spec.n_body)
        .map(|_| {
            let mut w = [0.0; 6];
            if rng.gen_bool(0.4) {
                for x in &mut w {
                    *x = rng.gen_range(-400.0..400.0) * rng.gen_range(0.0f64..1.0).powi(3);
                }
            }
            w
        })
        .collect();
    let foot_heights = (0..spec.n_legs).map(|_| if rng.gen_bool(0.1) { spec.z_thr } else { rng.gen_range(-0.01..0.25) }).collect();
    let gen_action = |rng: &mut R| (0..spec.n_u).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let action = gen_action(rng);
    let a_prev = if rng.gen_bool(0.1) { vec![0.0; spec.n_u] } else { gen_action(rng) };
    RewardCase {
        state,
        contact: ContactState { wrenches, foot_heights },
        action,
        a_prev,
        clock: GaitClock { phi: rng.gen_range(0.0..TAU), f_g: spec.f_g },
    }
}

/// Straight-line re-statement of the ten-term reward, written against the
/// formulas only. Returns (terms in breakdown order, total).
pub fn oracle_reward(c: &RewardCase, spec: &MorphologySpec) -> ([f64; 10], f64) {
    let w = &spec.weights;
    let v_x = c.state.base_linvel[0];
    let mut r_fwd = 1.0 - (v_x - spec.v_star).abs() / spec.sigma_v;
    if r_fwd < 0.0 {
        r_fwd = 0.0;
    }
    r_fwd *= w.w_fwd;

    let z = c.state.base_pos[2];
    let r_h = if spec.healthy_z[0] <= z && z <= spec.healthy_z[1] { w.w_h } else { 0.0 };

    let mut n_e = 0.0;
    for i in 0..spec.n_legs {
        let u = (c.clock.phi + spec.offsets[i]) % TAU;
        let target = u < TAU * spec.duty;
        let actual = c.contact.foot_heights[i] < spec.z_thr;
        if target != actual {
            n_e += 1.0;
        }
    }
    let bonus = w.w_gb * (1.0 - n_e / spec.n_legs as f64);
    let cost = w.w_gc * n_e;

    let mut a2 = 0.0;
    let mut da2 = 0.0;
    for i in 0..spec.n_u {
        a2 += c.action[i] * c.action[i];
        da2 += (c.action[i] - c.a_prev[i]) * (c.action[i] - c.a_prev[i]);
    }
    let c_ctrl = w.w_c_hat / spec.n_u as f64 * a2;
    let c_smooth = w.w_s * da2;

    let mut f2 = 0.0;
    for row in &c.contact.wrenches {
        for v in row {
            let s = v * spec.sim.contact_clip_scale;
            let clipped = s.clamp(-1.0, 1.0);
            f2 += clipped * clipped;
        }
    }
    let c_contact = w.w_cc * f2;
    let om = c.state.base_angvel;
    let c_ang = w.w_a * (om[0] * om[0] + om[1] * om[1]);
    let c_zvel = w.w_z * c.state.base_linvel[2] * c.state.base_linvel[2];
    let mut p2 = 0.0;
    for i in 0..spec.n_u {
        let d = c.state.q_joints[i] - spec.q_def[i];
        p2 += d * d;
    }
    let c_post = w.w_p * p2;

    let total = r_fwd + r_h + bonus - cost - c_ctrl - c_smooth - c_contact - c_ang - c_zvel - c_post;
    ([r_fwd, r_h, bonus, cost, c_ctrl, c_smooth, c_contact, c_ang, c_zvel, c_post], total)
}

pub fn breakdown_terms(b: &gaitforge::RewardBreakdown) -> [f64; 10] {
    [b.r_fwd, b.r_h, b.r_gait_bonus, b.c_gait, b.c_ctrl, b.c_smooth, b.c_contact, b.c_ang, b.c_zvel, b.c_post]
}

/// Tilts the torso by `angle` about the body y axis (scalar-first quaternion).
pub fn pitch_quat(angle: f64) -> [f64; 4] {
    [(angle / 2.0).cos(), 0.0, (angle / 2.0).sin(), 0.0]
}
