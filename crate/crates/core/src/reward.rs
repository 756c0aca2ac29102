//! Ten-term locomotion reward with a phase-locked gait-compliance pair.
//!
//! ```text
//! r = r_fwd + r_h + r_gait⁺ − (c_gait + c_ctrl + c_smooth + c_contact + c_ang + c_zvel + c_post)
//! ```
//!
//! Boundary conventions: the healthy range is inclusive at both ends, the
//! actual stance test `z_foot < z_thr` and the target stance test
//! `(φ + Δ) mod 2π < 2π·d` are both strict.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ContactState, SimState};
use crate::error::{check_len, Result};
use crate::model::MorphologySpec;

/// Gait phase clock, `phi ∈ [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitClock {
    pub phi: f64,
    pub f_g: f64,
}

/// `x mod 2π` folded into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl GaitClock {
    pub fn new(f_g: f64) -> Self {
        Self { phi: 0.0, f_g }
    }

    /// Advances by `dt` seconds. A zero step returns the clock unchanged.
    pub fn advance(self, dt: f64) -> Self {
        if dt == 0.0 {
            return self;
        }
        Self { phi: wrap_phase(self.phi + TAU * self.f_g * dt), f_g: self.f_g }
    }

    /// `[sin φ, cos φ]`
    pub fn encode(&self) -> [f64; 2] {
        [self.phi.sin(), self.phi.cos()]
    }
}

/// The ten named reward terms and their signed sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_fwd: f64,
    pub r_h: f64,
    pub r_gait_bonus: f64,
    pub c_gait: f64,
    pub c_ctrl: f64,
    pub c_smooth: f64,
    pub c_contact: f64,
    pub c_ang: f64,
    pub c_zvel: f64,
    pub c_post: f64,
    pub total: f64,
    pub stance_target: Vec<bool>,
    pub stance_actual: Vec<bool>,
    pub n_errors: usize,
}

impl RewardBreakdown {
    /// Signed sum recomputed from the term fields.
    pub fn term_sum(&self) -> f64 {
        self.r_fwd + self.r_h + self.r_gait_bonus
            - (self.c_gait + self.c_ctrl + self.c_smooth + self.c_contact + self.c_ang + self.c_zvel + self.c_post)
    }
}

/// Triangular tent peaked at `v_star`, zero outside `[v* − σ_v, v* + σ_v]`.
pub fn forward_reward(v_x: f64, spec: &MorphologySpec) -> f64 {
    spec.weights.w_fwd * (1.0 - (v_x - spec.v_star).abs() / spec.sigma_v).max(0.0)
}

pub fn healthy_bonus(z_torso: f64, spec: &MorphologySpec) -> f64 {
    if is_healthy(z_torso, spec) {
        spec.weights.w_h
    } else {
        0.0
    }
}

pub fn is_healthy(z_torso: f64, spec: &MorphologySpec) -> bool {
    let [lo, hi] = spec.healthy_z;
    z_torso >= lo && z_torso <= hi
}

/// Scheduled stance for a foot with offset `delta`.
pub fn target_stance(phi: f64, delta: f64, duty: f64) -> bool {
    wrap_phase(phi + delta) < TAU * duty
}

/// Measured stance: the foot is below the threshold height.
pub fn actual_stance(z_foot: f64, z_thr: f64) -> bool {
    z_foot < z_thr
}

/// Gait bonus, gait cost and mismatch count.
pub fn gait_terms(actual: &[bool], target: &[bool], spec: &MorphologySpec) -> Result<(f64, f64, usize)> {
    check_len("stance_actual", spec.n_legs, actual.len())?;
    check_len("stance_target", spec.n_legs, target.len())?;
    let n_errors = actual.iter().zip(target).filter(|(a, t)| a != t).count();
    let n = spec.n_legs as f64;
    let bonus = spec.weights.w_gb * (1.0 - n_errors as f64 / n);
    let cost = spec.weights.w_gc * n_errors as f64;
    Ok((bonus, cost, n_errors))
}

fn sq_norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum()
}

/// `(c_ctrl, c_smooth)`; `a_prev` is the zero vector on the first step.
pub fn action_costs(action: &[f64], a_prev: &[f64], spec: &MorphologySpec) -> Result<(f64, f64)> {
    check_len("action", spec.n_u, action.len())?;
    check_len("a_prev", spec.n_u, a_prev.len())?;
    let ctrl = spec.w_ctrl() * sq_norm(action.iter().copied());
    let smooth = spec.weights.w_s * sq_norm(action.iter().zip(a_prev).map(|(a, b)| a - b));
    Ok((ctrl, smooth))
}

/// Contact wrench entry after scaling and the [−1, 1] clip shared with the observation.
pub fn clip_wrench(v: f64, scale: f64) -> f64 {
    (v * scale).clamp(-1.0, 1.0)
}

/// `(c_contact, c_ang, c_zvel)`. `angvel` is body-frame; yaw is ignored.
pub fn safety_costs(contact: &ContactState, angvel: [f64; 3], v_z: f64, spec: &MorphologySpec) -> Result<(f64, f64, f64)> {
    check_len("contact wrenches", spec.n_body, contact.wrenches.len())?;
    let scale = spec.sim.contact_clip_scale;
    let c_contact = spec.weights.w_cc * sq_norm(contact.wrenches.iter().flatten().map(|v| clip_wrench(*v, scale)));
    let c_ang = spec.weights.w_a * (angvel[0] * angvel[0] + angvel[1] * angvel[1]);
    let c_zvel = spec.weights.w_z * v_z * v_z;
    Ok((c_contact, c_ang, c_zvel))
}

pub fn posture_cost(q_joints: &[f64], spec: &MorphologySpec) -> Result<f64> {
    check_len("q_joints", spec.n_u, q_joints.len())?;
    Ok(spec.weights.w_p * sq_norm(q_joints.iter().zip(&spec.q_def).map(|(q, d)| q - d)))
}

/// Target stance of every foot at the clock's phase.
pub fn stance_targets(phi: f64, spec: &MorphologySpec) -> Vec<bool> {
    spec.offsets.iter().map(|d| target_stance(phi, *d, spec.duty)).collect()
}

/// Evaluates every term at `state` (post-step) and the clock's current phase.
pub fn total_reward(
    state: &SimState,
    contact: &ContactState,
    action: &[f64],
    a_prev: &[f64],
    clock: &GaitClock,
    spec: &MorphologySpec,
) -> Result<RewardBreakdown> {
    check_len("foot_heights", spec.n_legs, contact.foot_heights.len())?;
    let r_fwd = forward_reward(state.base_linvel[0], spec);
    let r_h = healthy_bonus(state.z_torso(), spec);
    let stance_target = stance_targets(clock.phi, spec);
    let stance_actual: Vec<bool> = contact.foot_heights.iter().map(|z| actual_stance(*z, spec.z_thr)).collect();
    let (r_gait_bonus, c_gait, n_errors) = gait_terms(&stance_actual, &stance_target, spec)?;
    let (c_ctrl, c_smooth) = action_costs(action, a_prev, spec)?;
    let (c_contact, c_ang, c_zvel) = safety_costs(contact, state.base_angvel, state.base_linvel[2], spec)?;
    let c_post = posture_cost(&state.q_joints, spec)?;
    let mut out = RewardBreakdown {
        r_fwd,
        r_h,
        r_gait_bonus,
        c_gait,
        c_ctrl,
        c_smooth,
        c_contact,
        c_ang,
        c_zvel,
        c_post,
        total: 0.0,
        stance_target,
        stance_actual,
        n_errors,
    };
    out.total = out.term_sum();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn clock_advance() {
        let c = GaitClock::new(1.25).advance(0.05);
        assert!(close(c.phi, TAU * 0.0625));
        let near = GaitClock { phi: TAU - 1e-6, f_g: 1.25 }.advance(0.001);
        assert!(near.phi >= 0.0 && near.phi < TAU);
        assert!(near.phi < 0.01);
        let same = GaitClock { phi: 1.0, f_g: 1.25 };
        assert_eq!(same.advance(0.0), same);
    }

    #[test]
    fn clock_returns_after_one_period() {
        let mut c = GaitClock { phi: 0.7, f_g: 1.25 };
        // 16 control steps of 0.05 s = 0.8 s = 1 / f_g
        for _ in 0..16 {
            c = c.advance(0.05);
        }
        assert!((c.phi - 0.7).abs() < 1e-9, "{}", c.phi);
    }

    #[test]
    fn tent_examples() {
        let spec = model::bastion();
        assert!(close(forward_reward(1.0, &spec), 1.0));
        assert_eq!(forward_reward(1.5, &spec), 0.0);
        assert_eq!(forward_reward(0.5, &spec), 0.0);
        assert!(close(forward_reward(0.75, &spec), 0.5));
        assert_eq!(forward_reward(-3.0, &spec), 0.0);
    }

    #[test]
    fn healthy_examples() {
        let spec = model::bastion();
        assert_eq!(healthy_bonus(0.5, &spec), 0.5);
        assert_eq!(healthy_bonus(0.24, &spec), 0.0);
        assert_eq!(healthy_bonus(0.8, &spec), 0.5);
        assert_eq!(healthy_bonus(0.25, &spec), 0.5);
        assert_eq!(healthy_bonus(0.8000001, &spec), 0.0);
    }

    #[test]
    fn stance_examples() {
        assert!(target_stance(0.0, PI, 0.6));
        assert!(!target_stance(PI / 2.0, PI, 0.6));
        assert!(target_stance(0.0, 0.0, 0.6));
        assert!(actual_stance(0.0, 0.08));
        assert!(!actual_stance(0.08, 0.08));
        assert!(!actual_stance(0.2, 0.08));
    }

    #[test]
    fn gait_term_examples() {
        let spec = model::queen();
        let t = vec![true, false, false, true, true, false];
        let (b, c, n) = gait_terms(&t, &t, &spec).unwrap();
        assert_eq!((b, c, n), (0.5, 0.0, 0));
        let flipped: Vec<bool> = t.iter().map(|x| !x).collect();
        let (b, c, n) = gait_terms(&flipped, &t, &spec).unwrap();
        assert_eq!(n, 6);
        assert!(close(b, 0.0) && close(c, 0.6));
        let mut two = t.clone();
        two[0] = !two[0];
        two[5] = !two[5];
        let (b, c, n) = gait_terms(&two, &t, &spec).unwrap();
        assert_eq!(n, 2);
        assert!(close(b, 0.5 * 2.0 / 3.0) && close(c, 0.2));
        assert!(gait_terms(&t[..4], &t, &spec).is_err());
    }

    #[test]
    fn action_cost_examples() {
        let spec = model::bastion();
        let zero = vec![0.0; 12];
        assert_eq!(action_costs(&zero, &zero, &spec).unwrap(), (0.0, 0.0));
        let ones = vec![1.0; 12];
        let (ctrl, smooth) = action_costs(&ones, &zero, &spec).unwrap();
        assert!(close(ctrl, 0.6));
        assert!(close(smooth, 0.05 * 12.0));
        let (_, smooth) = action_costs(&ones, &ones, &spec).unwrap();
        assert_eq!(smooth, 0.0);
        assert!(action_costs(&ones[..3], &zero, &spec).is_err());
    }

    #[test]
    fn safety_cost_examples() {
        let spec = model::bastion();
        let mut contact = ContactState::zeros(spec.n_body, spec.n_legs);
        assert_eq!(safety_costs(&contact, [0.0; 3], 0.0, &spec).unwrap(), (0.0, 0.0, 0.0));
        contact.wrenches[4][2] = 3.7;
        let (cc, _, _) = safety_costs(&contact, [0.0; 3], 0.0, &spec).unwrap();
        assert!(close(cc, 5e-4));
        let (_, ca, cz) = safety_costs(&contact, [0.2, 0.0, 5.0], 0.3, &spec).unwrap();
        assert!(close(ca, 0.002));
        assert!(close(cz, 0.1 * 0.09));
        let short = ContactState::zeros(3, spec.n_legs);
        assert!(safety_costs(&short, [0.0; 3], 0.0, &spec).is_err());
    }

    #[test]
    fn posture_examples() {
        let spec = model::queen();
        assert_eq!(posture_cost(&spec.q_def, &spec).unwrap(), 0.0);
        let mut q = spec.q_def.clone();
        q[0] += 0.1;
        assert!(close(posture_cost(&q, &spec).unwrap(), 5e-4));
        let mut q = spec.q_def.clone();
        q[2] += 0.2;
        q[7] -= 0.2;
        assert!(close(posture_cost(&q, &spec).unwrap(), 2.0 * 0.05 * 0.04));
    }

    #[test]
    fn resting_composition() {
        let spec = model::bastion();
        let z_mid = 0.5 * (spec.healthy_z[0] + spec.healthy_z[1]);
        let state = SimState::at_rest([0.0, 0.0, z_mid], spec.q_def.clone());
        let clock = GaitClock::new(spec.f_g);
        // feet matching the schedule at phi = 0: every foot with target stance on the ground
        let targets = stance_targets(0.0, &spec);
        let mut contact = ContactState::zeros(spec.n_body, spec.n_legs);
        contact.foot_heights = targets.iter().map(|t| if *t { 0.0 } else { 0.2 }).collect();
        let zero = vec![0.0; spec.n_u];
        let r = total_reward(&state, &contact, &zero, &zero, &clock, &spec).unwrap();
        assert_eq!(r.r_fwd, 0.0);
        assert!(close(r.total, spec.weights.w_h + spec.weights.w_gb));
        assert_eq!(r.n_errors, 0);
        assert_eq!(r.total, r.term_sum());
    }
}
