//! Open-loop central pattern generator with PD joint tracking.
//!
//! Each leg reads the shared gait clock through its own phase offset and is
//! split into a stance window (the first `duty` of its cycle) and a swing
//! window. Hips follow a triangle wave, knees and ankles follow half-sine
//! bells, and a PD loop turns the targets into normalised actions. The loop
//! only reads joint angles and rates; there is no balance feedback.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::SimState;
use crate::error::{check_len, Result};
use crate::model::{CpgParams, JointClass, MorphologySpec};
use crate::reward::{wrap_phase, GaitClock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegMode {
    Stance,
    Swing,
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Mode of a leg and its progress `s ∈ [0, 1)` through that mode.
///
/// The stance test is the same expression the reward uses for its target
/// schedule, so the two agree on every phase.
pub fn leg_phase(phi: f64, delta: f64, duty: f64) -> (LegMode, f64) {
    let x = wrap_phase(phi + delta);
    let stance_len = TAU * duty;
    if x < stance_len {
        (LegMode::Stance, (x / stance_len).min(BELOW_ONE))
    } else {
        let s = (x - stance_len) / (TAU - stance_len);
        (LegMode::Swing, s.clamp(0.0, BELOW_ONE))
    }
}

fn bell(s: f64) -> f64 {
    (PI * s).sin()
}

/// Target angle for one joint of class `class` with default angle `q_def`.
pub fn joint_target(class: JointClass, q_def: f64, mode: LegMode, s: f64, params: &CpgParams) -> f64 {
    match (class, mode) {
        // stance sweeps +A → −A (propulsion), swing returns −A → +A
        (JointClass::Hip, LegMode::Stance) => q_def + params.a_hip * (1.0 - 2.0 * s),
        (JointClass::Hip, LegMode::Swing) => q_def + params.a_hip * (2.0 * s - 1.0),
        (JointClass::Knee, LegMode::Stance) => q_def + params.a_push * bell(s),
        (JointClass::Knee, LegMode::Swing) => q_def + params.a_knee * bell(s),
        (JointClass::Ankle, LegMode::Stance) => q_def + 0.5 * params.a_push * bell(s),
        (JointClass::Ankle, LegMode::Swing) => q_def + params.a_ankle * bell(s),
    }
}

/// Targets for every joint of leg `leg`, root to tip.
pub fn joint_targets(leg: usize, mode: LegMode, s: f64, params: &CpgParams, spec: &MorphologySpec) -> Vec<f64> {
    spec.actuator_legs()
        .into_iter()
        .zip(spec.joint_classes())
        .zip(&spec.q_def)
        .filter(|((l, _), _)| *l == leg)
        .map(|((_, class), q)| joint_target(class, *q, mode, s, params))
        .collect()
}

/// Targets for all actuators at phase `phi`.
pub fn all_targets(phi: f64, params: &CpgParams, spec: &MorphologySpec) -> Vec<f64> {
    let modes: Vec<(LegMode, f64)> = spec.offsets.iter().map(|d| leg_phase(phi, *d, spec.duty)).collect();
    spec.actuator_legs()
        .into_iter()
        .zip(spec.joint_classes())
        .zip(&spec.q_def)
        .map(|((leg, class), q)| {
            let (mode, s) = modes[leg];
            joint_target(class, *q, mode, s, params)
        })
        .collect()
}

/// Ramp factor `min(1, t / t_ramp)`.
pub fn ramp(t: f64, t_ramp: f64) -> f64 {
    if t_ramp <= 0.0 {
        1.0
    } else {
        (t / t_ramp).clamp(0.0, 1.0)
    }
}

/// PD torques, ramped and normalised by gear, clipped to [−1, 1].
pub fn pd_action(q_targets: &[f64], state: &SimState, t: f64, params: &CpgParams, spec: &MorphologySpec) -> Result<Vec<f64>> {
    check_len("q_targets", spec.n_u, q_targets.len())?;
    check_len("q_joints", spec.n_u, state.q_joints.len())?;
    let rho = ramp(t, params.t_ramp);
    Ok((0..spec.n_u)
        .map(|i| {
            let tau = params.kp[i] * (q_targets[i] - state.q_joints[i]) - params.kd[i] * state.qd_joints[i];
            (rho * tau / spec.gear[i]).clamp(-1.0, 1.0)
        })
        .collect())
}

/// Expert action for `state` at time `t` and the clock's phase.
pub fn cpg_policy(state: &SimState, t: f64, clock: &GaitClock, params: &CpgParams, spec: &MorphologySpec) -> Result<Vec<f64>> {
    let targets = all_targets(clock.phi, params, spec);
    pd_action(&targets, state, t, params, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;
    use crate::reward::target_stance;

    #[test]
    fn leg_phase_examples() {
        assert_eq!(leg_phase(0.0, 0.0, 0.6), (LegMode::Stance, 0.0));
        let (m, s) = leg_phase(0.6 * TAU, 0.0, 0.6);
        assert_eq!(m, LegMode::Swing);
        assert_eq!(s, 0.0);
        let (m, s) = leg_phase(0.8 * TAU, 0.0, 0.6);
        assert_eq!(m, LegMode::Swing);
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn target_examples() {
        let spec = model::queen();
        let p = &spec.cpg;
        let hip = spec.q_def[0];
        let knee = spec.q_def[1];
        let t = joint_targets(0, LegMode::Stance, 0.5, p, &spec);
        assert!((t[0] - hip).abs() < 1e-12);
        let t = joint_targets(0, LegMode::Swing, 0.5, p, &spec);
        assert!((t[1] - (knee + p.a_knee)).abs() < 1e-12);
        let end_stance = joint_targets(0, LegMode::Stance, BELOW_ONE, p, &spec);
        let start_swing = joint_targets(0, LegMode::Swing, 0.0, p, &spec);
        assert!((end_stance[0] - (hip - p.a_hip)).abs() < 1e-9);
        assert!((start_swing[0] - (hip - p.a_hip)).abs() < 1e-12);
    }

    #[test]
    fn pd_examples() {
        let spec = model::bastion();
        let p = &spec.cpg;
        let mut s = SimState::at_rest([0.0, 0.0, 0.5], spec.q_def.clone());
        let a = pd_action(&spec.q_def, &s, 1.0, p, &spec).unwrap();
        assert!(a.iter().all(|v| *v == 0.0));
        s.q_joints[0] += 0.3;
        let a = pd_action(&spec.q_def, &s, 0.0, p, &spec).unwrap();
        assert!(a.iter().all(|v| *v == 0.0));
        s.q_joints[0] += 100.0;
        s.q_joints[1] -= 100.0;
        let a = pd_action(&spec.q_def, &s, 10.0, p, &spec).unwrap();
        assert_eq!(a[0], -1.0);
        assert_eq!(a[1], 1.0);
        assert!(pd_action(&spec.q_def[..3], &s, 1.0, p, &spec).is_err());
    }

    #[test]
    fn tripod_modes_at_phase_zero() {
        for duty in [0.6, 0.5] {
            let mut spec = model::bastion();
            spec.duty = duty;
            let modes: Vec<LegMode> = spec.offsets.iter().map(|d| leg_phase(0.0, *d, duty).0).collect();
            for (leg, m) in modes.iter().enumerate() {
                // tripod B starts its stance at π, inside tripod A's stance when duty > 0.5
                let want = if spec.offsets[leg] == 0.0 || duty > 0.5 { LegMode::Stance } else { LegMode::Swing };
                assert_eq!(*m, want);
            }
        }
    }

    #[test]
    fn policy_is_deterministic() {
        let spec = model::tick();
        let s = SimState::at_rest([0.0, 0.0, 0.3], spec.q_def.clone());
        let clock = GaitClock { phi: 1.3, f_g: spec.f_g };
        let a = cpg_policy(&s, 0.7, &clock, &spec.cpg, &spec).unwrap();
        let b = cpg_policy(&s, 0.7, &clock, &spec.cpg, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), spec.n_u);
    }

    #[test]
    fn schedule_agrees_with_reward_targets_on_grid() {
        for spec in [model::queen(), model::leaper()] {
            for k in 0..10_000 {
                let phi = TAU * k as f64 / 10_000.0;
                for d in &spec.offsets {
                    let stance = leg_phase(phi, *d, spec.duty).0 == LegMode::Stance;
                    assert_eq!(stance, target_stance(phi, *d, spec.duty));
                }
            }
        }
    }
}
