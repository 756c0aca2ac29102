//! Static robot descriptions.
//!
//! A [`MorphologySpec`] carries everything the rest of the kit needs to know
//! about one robot: the kinematic tree, actuator gains, the gait schedule,
//! reward parameters, simulator constants and the CPG parameter block. Specs
//! are immutable once loaded.
//!
//! Config files are TOML with a mandatory `schema_version` field; see
//! `docs/config-schema.md` for the field reference. The four built-in robots are
//! compiled in and can be exported with `gaitforge export-spec`.

mod builtin;

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use builtin::{bastion, builtin, leaper, queen, tick, BUILTIN_NAMES};

/// Version of the morphology config schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the config search path.
pub const CONFIG_DIR_ENV: &str = "GAITFORGE_CONFIG_DIR";

/// Role of an actuated joint inside its leg; drives CPG primitive selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointClass {
    Hip,
    Knee,
    Ankle,
}

/// How a body attaches to its parent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JointDef {
    /// Six-DoF floating base; only valid on the root body.
    Free,
    /// Welded to the parent.
    Fixed,
    /// Single actuated hinge about `axis` (parent frame, unit length).
    Revolute { axis: [f64; 3], class: JointClass },
}

/// Contact primitive attached to a body, in body-local coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSphere {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyDef {
    pub name: String,
    /// Parent body index; `None` only for the torso.
    pub parent: Option<usize>,
    /// Leg this body belongs to; `None` for the torso.
    pub leg: Option<usize>,
    /// Joint origin in the parent frame.
    pub offset: [f64; 3],
    pub joint: JointDef,
    /// kg
    pub mass: f64,
    /// Centre of mass in the body frame.
    pub com: [f64; 3],
    /// Principal moments about the centre of mass, body axes, kg·m².
    pub inertia: [f64; 3],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contacts: Vec<ContactSphere>,
}

impl BodyDef {
    pub fn is_actuated(&self) -> bool {
        matches!(self.joint, JointDef::Revolute { .. })
    }
}

/// Reward weights. The control weight is stored before the 1/n_u scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub w_fwd: f64,
    pub w_h: f64,
    pub w_gb: f64,
    pub w_gc: f64,
    pub w_c_hat: f64,
    pub w_s: f64,
    pub w_cc: f64,
    pub w_a: f64,
    pub w_z: f64,
    pub w_p: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { w_fwd: 1.0, w_h: 0.5, w_gb: 0.5, w_gc: 0.1, w_c_hat: 0.6, w_s: 0.05, w_cc: 5e-4, w_a: 0.05, w_z: 0.1, w_p: 0.05 }
    }
}

impl RewardWeights {
    fn as_array(&self) -> [(&'static str, f64); 10] {
        [
            ("w_fwd", self.w_fwd),
            ("w_h", self.w_h),
            ("w_gb", self.w_gb),
            ("w_gc", self.w_gc),
            ("w_c_hat", self.w_c_hat),
            ("w_s", self.w_s),
            ("w_cc", self.w_cc),
            ("w_a", self.w_a),
            ("w_z", self.w_z),
            ("w_p", self.w_p),
        ]
    }
}

/// Simulator constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Physics substep, s.
    pub dt_sub: f64,
    /// Substeps per control step.
    pub frame_skip: usize,
    /// m/s², acts along −z.
    pub gravity: f64,
    /// Normal penalty stiffness, N/m.
    pub contact_stiffness: f64,
    /// Normal penalty damping, N·s/m.
    pub contact_damping: f64,
    /// Viscous tangential coefficient, N·s/m (before the Coulomb cap).
    pub tangential_damping: f64,
    pub friction: f64,
    /// N·m·s/rad, every actuated joint.
    pub joint_damping: f64,
    /// Soft joint-limit spring, N·m/rad.
    pub limit_stiffness: f64,
    /// Any |state entry| above this aborts the episode.
    pub blowup_cap: f64,
    /// Wrenches are multiplied by this before the [−1, 1] clip (observation and contact cost).
    pub contact_clip_scale: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt_sub: 0.002,
            frame_skip: 25,
            gravity: 9.81,
            contact_stiffness: 2e4,
            contact_damping: 200.0,
            tangential_damping: 1000.0,
            friction: 1.0,
            joint_damping: 0.1,
            limit_stiffness: 200.0,
            blowup_cap: 1e6,
            contact_clip_scale: 1.0,
        }
    }
}

impl SimParams {
    /// Seconds per control step.
    pub fn control_dt(&self) -> f64 {
        self.dt_sub * self.frame_skip as f64
    }
}

/// CPG demonstrator parameters. Gait frequency, duty and offsets are shared
/// with the enclosing spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpgParams {
    /// Hip sweep half-amplitude, rad.
    pub a_hip: f64,
    /// Knee lift amplitude during swing, rad.
    pub a_knee: f64,
    /// Ankle lift amplitude during swing, rad.
    pub a_ankle: f64,
    /// Stance push-off amplitude, rad.
    pub a_push: f64,
    /// Per-actuator proportional gains, N·m/rad.
    pub kp: Vec<f64>,
    /// Per-actuator derivative gains, N·m·s/rad.
    pub kd: Vec<f64>,
    /// Torque ramp duration at episode start, s.
    pub t_ramp: f64,
}

/// Full static description of one robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphologySpec {
    pub schema_version: u32,
    pub name: String,
    pub n_legs: usize,
    pub joints_per_leg: usize,
    pub n_u: usize,
    pub n_body: usize,
    /// Torso first, then legs in canonical order, links root to tip.
    pub bodies: Vec<BodyDef>,
    /// N·m per unit action, one per actuator.
    pub gear: Vec<f64>,
    /// Reflected rotor inertia added to each actuated joint, kg·m².
    pub armature: Vec<f64>,
    pub q_def: Vec<f64>,
    pub joint_limits: Vec<[f64; 2]>,
    /// Torso height range `[z_min, z_max]`, m.
    pub healthy_z: [f64; 2],
    pub v_star: f64,
    pub sigma_v: f64,
    pub f_g: f64,
    pub duty: f64,
    /// Per-leg phase offsets in [0, 2π).
    pub offsets: Vec<f64>,
    pub z_thr: f64,
    pub weights: RewardWeights,
    /// Control steps per episode.
    pub horizon: usize,
    pub sim: SimParams,
    pub cpg: CpgParams,
}

impl MorphologySpec {
    /// Length of the flattened observation vector.
    pub fn obs_dim(&self) -> usize {
        1 + 4 + self.n_u + 3 + 3 + self.n_u + 6 * self.n_body + 2
    }

    /// Effective control-cost weight (scaled by action dimensionality).
    pub fn w_ctrl(&self) -> f64 {
        self.weights.w_c_hat / self.n_u as f64
    }

    pub fn control_dt(&self) -> f64 {
        self.sim.control_dt()
    }

    /// Index of the body driven by each actuator, in actuator order.
    pub fn actuated_bodies(&self) -> Vec<usize> {
        self.bodies.iter().enumerate().filter(|(_, b)| b.is_actuated()).map(|(i, _)| i).collect()
    }

    /// Joint class per actuator.
    pub fn joint_classes(&self) -> Vec<JointClass> {
        self.bodies
            .iter()
            .filter_map(|b| match b.joint {
                JointDef::Revolute { class, .. } => Some(class),
                _ => None,
            })
            .collect()
    }

    /// Leg index per actuator.
    pub fn actuator_legs(&self) -> Vec<usize> {
        self.bodies.iter().filter(|b| b.is_actuated()).map(|b| b.leg.unwrap_or(0)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.mass).sum()
    }

    /// Collects every violated invariant; an empty list means the spec is valid.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();

        need(
            &mut errs,
            self.schema_version == SCHEMA_VERSION,
            format!("schema_version is {}, this build reads {SCHEMA_VERSION}", self.schema_version),
        );
        need(&mut errs, !self.name.is_empty(), "name is empty".into());
        need(&mut errs, self.n_legs == 4 || self.n_legs == 6, format!("n_legs must be 4 or 6, got {}", self.n_legs));
        need(
            &mut errs,
            self.joints_per_leg == 2 || self.joints_per_leg == 3,
            format!("joints_per_leg must be 2 or 3, got {}", self.joints_per_leg),
        );
        need(
            &mut errs,
            self.n_u == self.n_legs * self.joints_per_leg,
            format!("n_u ({}) != n_legs × joints_per_leg ({})", self.n_u, self.n_legs * self.joints_per_leg),
        );
        need(&mut errs, self.bodies.len() == self.n_body, format!("n_body is {} but {} bodies are listed", self.n_body, self.bodies.len()));

        let n_act = self.bodies.iter().filter(|b| b.is_actuated()).count();
        need(&mut errs, n_act == self.n_u, format!("{n_act} revolute joints but n_u = {}", self.n_u));
        for (what, len) in [
            ("gear", self.gear.len()),
            ("armature", self.armature.len()),
            ("q_def", self.q_def.len()),
            ("joint_limits", self.joint_limits.len()),
            ("cpg.kp", self.cpg.kp.len()),
            ("cpg.kd", self.cpg.kd.len()),
        ] {
            need(&mut errs, len == self.n_u, format!("{what} has length {len}, expected n_u = {}", self.n_u));
        }

        for (i, body) in self.bodies.iter().enumerate() {
            match (i, &body.parent, &body.joint) {
                (0, None, JointDef::Free) => {}
                (0, _, _) => errs.push("body 0 must be the free-floating torso with no parent".into()),
                (_, Some(p), j) => {
                    if *p >= i {
                        errs.push(format!("body {i} ({}) has parent {p} not preceding it", body.name));
                    }
                    if matches!(j, JointDef::Free) {
                        errs.push(format!("body {i} ({}) has a free joint", body.name));
                    }
                    if let JointDef::Revolute { axis, .. } = j {
                        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                        if (n - 1.0).abs() > 1e-9 {
                            errs.push(format!("body {i} ({}) joint axis is not unit length", body.name));
                        }
                    }
                    match body.leg {
                        Some(l) if l < self.n_legs => {}
                        _ => errs.push(format!("body {i} ({}) has no valid leg index", body.name)),
                    }
                }
                (_, None, _) => errs.push(format!("body {i} ({}) has no parent", body.name)),
            }
            if !(body.mass > 0.0 && body.mass.is_finite()) {
                errs.push(format!("body {i} ({}) mass must be positive", body.name));
            }
            if body.inertia.iter().any(|v| v.is_nan() || *v <= 0.0) {
                errs.push(format!("body {i} ({}) inertia must be positive", body.name));
            }
            if body.contacts.iter().any(|c| c.radius.is_nan() || c.radius <= 0.0) {
                errs.push(format!("body {i} ({}) has a non-positive contact radius", body.name));
            }
        }

        // each leg carries joints_per_leg actuators and at least one contact sphere
        for leg in 0..self.n_legs {
            let joints = self.bodies.iter().filter(|b| b.leg == Some(leg) && b.is_actuated()).count();
            if joints != self.joints_per_leg {
                errs.push(format!("leg {leg} has {joints} actuated joints, expected {}", self.joints_per_leg));
            }
            if !self.bodies.iter().any(|b| b.leg == Some(leg) && !b.contacts.is_empty()) {
                errs.push(format!("leg {leg} has no contact sphere"));
            }
        }

        for (i, g) in self.gear.iter().enumerate() {
            need(&mut errs, *g > 0.0, format!("gear[{i}] must be positive"));
        }
        for (i, a) in self.armature.iter().enumerate() {
            need(&mut errs, *a >= 0.0, format!("armature[{i}] must be nonnegative"));
        }
        for (i, (q, lim)) in self.q_def.iter().zip(&self.joint_limits).enumerate() {
            if lim[0] >= lim[1] {
                errs.push(format!("joint_limits[{i}] is empty: [{}, {}]", lim[0], lim[1]));
            } else if *q < lim[0] || *q > lim[1] {
                errs.push(format!("q_def[{i}] = {q} outside joint_limits [{}, {}]", lim[0], lim[1]));
            }
        }

        need(&mut errs, self.healthy_z[0] < self.healthy_z[1], format!("healthy_z must satisfy z_min < z_max, got {:?}", self.healthy_z));
        need(&mut errs, self.v_star.is_finite(), "v_star must be finite".into());
        need(&mut errs, self.sigma_v > 0.0, format!("sigma_v must be positive, got {}", self.sigma_v));
        need(&mut errs, self.f_g > 0.0, format!("f_g must be positive, got {}", self.f_g));
        need(&mut errs, self.duty > 0.0 && self.duty < 1.0, format!("duty must lie in (0, 1), got {}", self.duty));
        need(
            &mut errs,
            self.offsets.len() == self.n_legs,
            format!("offsets has length {}, expected n_legs = {}", self.offsets.len(), self.n_legs),
        );
        for (i, o) in self.offsets.iter().enumerate() {
            need(&mut errs, (0.0..TAU).contains(o), format!("offsets[{i}] = {o} outside [0, 2π)"));
        }
        need(&mut errs, self.z_thr > 0.0, format!("z_thr must be positive, got {}", self.z_thr));
        for (name, w) in self.weights.as_array() {
            need(&mut errs, w >= 0.0 && w.is_finite(), format!("weight {name} must be nonnegative, got {w}"));
        }
        need(&mut errs, self.horizon > 0, "horizon must be positive".into());

        let s = &self.sim;
        need(&mut errs, s.dt_sub > 0.0, "sim.dt_sub must be positive".into());
        need(&mut errs, s.frame_skip > 0, "sim.frame_skip must be positive".into());
        need(&mut errs, s.contact_stiffness > 0.0, "sim.contact_stiffness must be positive".into());
        need(&mut errs, s.contact_damping >= 0.0, "sim.contact_damping must be nonnegative".into());
        need(&mut errs, s.tangential_damping >= 0.0, "sim.tangential_damping must be nonnegative".into());
        need(&mut errs, s.friction >= 0.0, "sim.friction must be nonnegative".into());
        need(&mut errs, s.joint_damping >= 0.0, "sim.joint_damping must be nonnegative".into());
        need(&mut errs, s.limit_stiffness >= 0.0, "sim.limit_stiffness must be nonnegative".into());
        need(&mut errs, s.blowup_cap > 0.0, "sim.blowup_cap must be positive".into());
        need(&mut errs, s.contact_clip_scale > 0.0, "sim.contact_clip_scale must be positive".into());

        let c = &self.cpg;
        for (name, a) in [("a_hip", c.a_hip), ("a_knee", c.a_knee), ("a_ankle", c.a_ankle), ("a_push", c.a_push), ("t_ramp", c.t_ramp)] {
            need(&mut errs, a >= 0.0, format!("cpg.{name} must be nonnegative, got {a}"));
        }
        for (i, (kp, kd)) in c.kp.iter().zip(&c.kd).enumerate() {
            need(&mut errs, *kp >= 0.0 && *kd >= 0.0, format!("cpg gains for actuator {i} must be nonnegative"));
        }
        // the pattern must never ask for an angle outside the joint range
        if self.q_def.len() == self.n_u && self.joint_limits.len() == self.n_u && n_act == self.n_u {
            for (i, (class, (q, lim))) in self.joint_classes().into_iter().zip(self.q_def.iter().zip(&self.joint_limits)).enumerate() {
                let (lo, hi) = match class {
                    JointClass::Hip => (q - c.a_hip, q + c.a_hip),
                    JointClass::Knee => (*q, q + c.a_knee.max(c.a_push)),
                    JointClass::Ankle => (*q, q + c.a_ankle.max(0.5 * c.a_push)),
                };
                if lo < lim[0] || hi > lim[1] {
                    errs.push(format!(
                        "cpg targets of actuator {i} span [{lo:.3}, {hi:.3}], outside joint_limits [{}, {}]",
                        lim[0], lim[1]
                    ));
                }
            }
        }

        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Serialises to the TOML config format.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("MorphologySpec always serialises")
    }

    /// Parses and validates a TOML config.
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::parse(text, None)
    }

    fn parse(text: &str, path: Option<&Path>) -> Result<Self> {
        let config_err = |msg: String| Error::Config { path: path.map(Path::to_path_buf), msg };
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        match raw.get("schema_version") {
            None => return Err(config_err("missing mandatory field `schema_version`".into())),
            Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION as i64 => {}
            Some(v) => return Err(config_err(format!("unsupported schema_version {v}; this build reads {SCHEMA_VERSION}"))),
        }
        let spec: MorphologySpec = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, Some(path))
    }

    /// Hex SHA-256 of the canonical TOML encoding; stamps recorded buffers.
    pub fn spec_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

fn need(errs: &mut Vec<String>, cond: bool, msg: String) {
    if !cond {
        errs.push(msg);
    }
}

/// Resolves a built-in name (case-insensitive) or a config path.
///
/// When `GAITFORGE_CONFIG_DIR` is set, `<dir>/<name>.toml` takes precedence
/// over the compiled-in spec of the same name.
pub fn load_morphology(name_or_path: &str) -> Result<MorphologySpec> {
    let dir = std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from);
    load_morphology_from(name_or_path, dir.as_deref())
}

/// [`load_morphology`] with an explicit search directory instead of the environment.
pub fn load_morphology_from(name_or_path: &str, config_dir: Option<&Path>) -> Result<MorphologySpec> {
    let lower = name_or_path.to_ascii_lowercase();
    if BUILTIN_NAMES.contains(&lower.as_str()) {
        if let Some(dir) = config_dir {
            let candidate = dir.join(format!("{lower}.toml"));
            if candidate.is_file() {
                return MorphologySpec::from_path(&candidate);
            }
        }
        return Ok(builtin(&lower).expect("listed built-in"));
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        return MorphologySpec::from_path(path);
    }
    if let Some(dir) = config_dir {
        let candidate = dir.join(format!("{name_or_path}.toml"));
        if candidate.is_file() {
            return MorphologySpec::from_path(&candidate);
        }
    }
    Err(Error::UnknownMorphology(name_or_path.to_string()))
}

/// Alternating tripod for legs ordered L1, R1, L2, R2, L3, R3.
/// Tripod A = {L1, R2, L3} sits at Δ = 0, tripod B at Δ = π.
pub fn tripod_offsets(n_legs: usize) -> Result<Vec<f64>> {
    use std::f64::consts::PI;
    if n_legs != 6 {
        return Err(Error::Validation(vec![format!("alternating tripod needs 6 legs, got {n_legs}")]));
    }
    Ok(vec![0.0, PI, PI, 0.0, 0.0, PI])
}

/// Diagonal-pair trot for legs ordered FL, FR, HL, HR.
pub fn trot_offsets() -> Vec<f64> {
    use std::f64::consts::PI;
    vec![0.0, PI, PI, 0.0]
}
