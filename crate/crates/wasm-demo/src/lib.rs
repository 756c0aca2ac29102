//! Browser bindings for three read-only views of a built-in morphology: the
//! forward-velocity reward tent, the stance schedule and the CPG joint
//! targets over one gait cycle.

use std::f64::consts::TAU;

use gaitforge::cpg::all_targets;
use gaitforge::model::{builtin, JointClass, MorphologySpec, BUILTIN_NAMES};
use gaitforge::reward::{forward_reward, target_stance};
use wasm_bindgen::prelude::*;

type Res<T> = Result<T, String>;

fn js<T>(r: Res<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn spec(name: &str) -> Res<MorphologySpec> {
    builtin(name).ok_or_else(|| format!("unknown morphology `{name}`"))
}

fn tent(name: &str, v_star: f64, sigma_v: f64, v_min: f64, v_max: f64, n: usize) -> Res<Vec<f64>> {
    let mut s = spec(name)?;
    if sigma_v.is_nan() || sigma_v <= 0.0 {
        return Err("sigma_v must be positive".into());
    }
    s.v_star = v_star;
    s.sigma_v = sigma_v;
    let step = if n > 1 { (v_max - v_min) / (n - 1) as f64 } else { 0.0 };
    Ok((0..n).map(|k| forward_reward(v_min + step * k as f64, &s)).collect())
}

fn grid(name: &str, duty: f64, cols: usize) -> Res<Vec<u8>> {
    let s = spec(name)?;
    if duty.is_nan() || duty <= 0.0 || duty >= 1.0 {
        return Err("duty must lie in (0, 1)".into());
    }
    let mut out = Vec::with_capacity(s.n_legs * cols);
    for delta in &s.offsets {
        for k in 0..cols {
            out.push(target_stance(TAU * k as f64 / cols as f64, *delta, duty) as u8);
        }
    }
    Ok(out)
}

fn labels(name: &str) -> Res<Vec<String>> {
    let s = spec(name)?;
    Ok(s.actuator_legs()
        .into_iter()
        .zip(s.joint_classes())
        .map(|(leg, class)| {
            let c = match class {
                JointClass::Hip => "hip",
                JointClass::Knee => "knee",
                JointClass::Ankle => "ankle",
            };
            format!("L{leg} {c}")
        })
        .collect())
}

fn targets(name: &str, joint: usize, amplitude_scale: f64, n: usize) -> Res<Vec<f64>> {
    let s = spec(name)?;
    if joint >= s.n_u {
        return Err(format!("joint {joint} out of range for {} actuators", s.n_u));
    }
    let mut p = s.cpg.clone();
    p.a_hip *= amplitude_scale;
    p.a_knee *= amplitude_scale;
    p.a_ankle *= amplitude_scale;
    p.a_push *= amplitude_scale;
    let mut out: Vec<f64> = (0..n).map(|k| all_targets(TAU * k as f64 / n as f64, &p, &s)[joint]).collect();
    out.push(s.q_def[joint]);
    Ok(out)
}

/// Names of the built-in morphologies, comma separated.
#[wasm_bindgen]
pub fn morphologies() -> String {
    BUILTIN_NAMES.join(",")
}

/// Default target speed, tent half-width and duty factor of a morphology.
#[wasm_bindgen]
pub fn tent_defaults(name: &str) -> Result<Vec<f64>, JsError> {
    js(spec(name).map(|s| vec![s.v_star, s.sigma_v, s.duty]))
}

/// Forward reward sampled at `n` evenly spaced speeds in `[v_min, v_max]`.
#[wasm_bindgen]
pub fn tent_curve(name: &str, v_star: f64, sigma_v: f64, v_min: f64, v_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(tent(name, v_star, sigma_v, v_min, v_max, n))
}

/// Scheduled stance per leg over one cycle, row-major `n_legs × cols`, 1 = stance.
#[wasm_bindgen]
pub fn stance_grid(name: &str, duty: f64, cols: usize) -> Result<Vec<u8>, JsError> {
    js(grid(name, duty, cols))
}

/// Joint labels such as `L0 hip`, comma separated, in actuator order.
#[wasm_bindgen]
pub fn joint_labels(name: &str) -> Result<String, JsError> {
    js(labels(name).map(|l| l.join(",")))
}

/// Target angle of actuator `joint` at `n` phases over one cycle, with the
/// joint's default angle appended last.
#[wasm_bindgen]
pub fn cpg_joint_targets(name: &str, joint: usize, amplitude_scale: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(targets(name, joint, amplitude_scale, n))
}
