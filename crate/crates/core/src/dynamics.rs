//! Reduced-coordinate rigid-body engine with penalty ground contact.
//!
//! Generalised coordinates are the floating torso pose plus one angle per
//! actuated hinge. Each substep assembles the joint-space mass matrix from
//! per-body Jacobians, evaluates velocity-product and gravity terms
//! recursively, solves for accelerations with a Cholesky factorisation and
//! advances with semi-implicit Euler.
//!
//! The torso velocity is not integrated from its acceleration directly.
//! Instead the total linear and angular momentum of the robot is advanced by
//! the external wrench (gravity and contact) and the torso velocity is
//! recovered from it at the new configuration. With no external load the
//! momentum of the system is therefore conserved to round-off.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Quaternion, Rotation3, Unit, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::model::{JointDef, MorphologySpec, SimParams};

/// Dynamic state of one robot.
///
/// `base_linvel` is expressed in the world frame, `base_angvel` in the torso
/// frame. The quaternion is scalar-first `(w, x, y, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub base_pos: [f64; 3],
    pub base_quat: [f64; 4],
    pub q_joints: Vec<f64>,
    pub base_linvel: [f64; 3],
    pub base_angvel: [f64; 3],
    pub qd_joints: Vec<f64>,
    pub time: f64,
}

impl SimState {
    /// Torso at `base_pos`, identity orientation, joints at `q`, everything at rest.
    pub fn at_rest(base_pos: [f64; 3], q: Vec<f64>) -> Self {
        let n = q.len();
        Self {
            base_pos,
            base_quat: [1.0, 0.0, 0.0, 0.0],
            q_joints: q,
            base_linvel: [0.0; 3],
            base_angvel: [0.0; 3],
            qd_joints: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn z_torso(&self) -> f64 {
        self.base_pos[2]
    }

    pub fn quat_norm(&self) -> f64 {
        self.base_quat.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.base_pos
            .iter()
            .chain(&self.base_quat)
            .chain(&self.q_joints)
            .chain(&self.base_linvel)
            .chain(&self.base_angvel)
            .chain(&self.qd_joints)
            .copied()
    }
}

/// External wrench per body plus per-leg foot heights.
///
/// Each wrench row is `[τx, τy, τz, fx, fy, fz]` in world axes, torque taken
/// about the body's centre of mass; rows of bodies not touching the ground
/// are exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactState {
    pub wrenches: Vec<[f64; 6]>,
    /// Lowest point of each leg's contact spheres above the ground plane, m.
    pub foot_heights: Vec<f64>,
}

impl ContactState {
    pub fn zeros(n_body: usize, n_legs: usize) -> Self {
        Self { wrenches: vec![[0.0; 6]; n_body], foot_heights: vec![0.0; n_legs] }
    }
}

/// Maps a normalised action to joint torques: `clip(a, −1, 1) · gear`.
pub fn apply_action(action: &[f64], spec: &MorphologySpec) -> Result<Vec<f64>> {
    check_len("action", spec.n_u, action.len())?;
    if let Some(i) = action.iter().position(|a| !a.is_finite()) {
        return Err(Error::InvalidInput(format!("action[{i}] is not finite")));
    }
    Ok(action.iter().zip(&spec.gear).map(|(a, g)| a.clamp(-1.0, 1.0) * g).collect())
}

struct Body {
    parent: Option<usize>,
    offset: Vector3<f64>,
    /// Hinge axis in the parent frame.
    axis: Option<Unit<Vector3<f64>>>,
    dof: Option<usize>,
    mass: f64,
    com: Vector3<f64>,
    inertia: Vector3<f64>,
    contacts: Vec<(Vector3<f64>, f64)>,
    leg: Option<usize>,
    /// (dof, body owning the hinge) for every hinge between the torso and this body.
    chain: Vec<(usize, usize)>,
}

/// World-frame kinematics of every body at one configuration.
struct Frames {
    rot: Vec<Matrix3<f64>>,
    origin: Vec<Vector3<f64>>,
    com: Vec<Vector3<f64>>,
    /// World hinge axis (zero for welded bodies and the torso).
    axis: Vec<Vector3<f64>>,
    inertia: Vec<Matrix3<f64>>,
}

/// Precomputed articulated model of one morphology.
pub struct Dynamics {
    bodies: Vec<Body>,
    n_u: usize,
    n_legs: usize,
    armature: Vec<f64>,
    limits: Vec<[f64; 2]>,
    params: SimParams,
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

impl Dynamics {
    pub fn new(spec: &MorphologySpec) -> Self {
        let mut bodies: Vec<Body> = Vec::with_capacity(spec.bodies.len());
        let mut next_dof = 0;
        for def in &spec.bodies {
            let (axis, dof) = match &def.joint {
                JointDef::Revolute { axis, .. } => {
                    let d = next_dof;
                    next_dof += 1;
                    (Some(Unit::new_normalize(Vector3::from(*axis))), Some(d))
                }
                _ => (None, None),
            };
            let idx = bodies.len();
            let mut chain = def.parent.map(|p| bodies[p].chain.clone()).unwrap_or_default();
            if let Some(d) = dof {
                chain.push((d, idx));
            }
            bodies.push(Body {
                parent: def.parent,
                offset: Vector3::from(def.offset),
                axis,
                dof,
                mass: def.mass,
                com: Vector3::from(def.com),
                inertia: Vector3::from(def.inertia),
                contacts: def.contacts.iter().map(|c| (Vector3::from(c.center), c.radius)).collect(),
                leg: def.leg,
                chain,
            });
        }
        Self {
            bodies,
            n_u: spec.n_u,
            n_legs: spec.n_legs,
            armature: spec.armature.clone(),
            limits: spec.joint_limits.clone(),
            params: spec.sim.clone(),
        }
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn n_dof(&self) -> usize {
        6 + self.n_u
    }

    fn gravity(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -self.params.gravity)
    }

    fn frames(&self, state: &SimState) -> Frames {
        let n = self.bodies.len();
        let mut f = Frames {
            rot: Vec::with_capacity(n),
            origin: Vec::with_capacity(n),
            com: Vec::with_capacity(n),
            axis: Vec::with_capacity(n),
            inertia: Vec::with_capacity(n),
        };
        let [w, x, y, z] = state.base_quat;
        let base_rot = UnitQuaternion::from_quaternion(Quaternion::new(w, x, y, z)).to_rotation_matrix().into_inner();
        for body in &self.bodies {
            let (rot, origin, axis) = match body.parent {
                None => (base_rot, Vector3::from(state.base_pos), Vector3::zeros()),
                Some(p) => {
                    let prot = f.rot[p];
                    let origin = f.origin[p] + prot * body.offset;
                    match (body.axis, body.dof) {
                        (Some(axis), Some(d)) => {
                            let local = Rotation3::from_axis_angle(&axis, state.q_joints[d]).into_inner();
                            (prot * local, origin, prot * axis.into_inner())
                        }
                        _ => (prot, origin, Vector3::zeros()),
                    }
                }
            };
            f.com.push(origin + rot * body.com);
            f.inertia.push(rot * Matrix3::from_diagonal(&body.inertia) * rot.transpose());
            f.rot.push(rot);
            f.origin.push(origin);
            f.axis.push(axis);
        }
        f
    }

    /// Generalised velocity `[v_torso(world), ω_torso(world), q̇]`.
    fn gen_velocity(&self, state: &SimState, frames: &Frames) -> DVector<f64> {
        let mut nu = DVector::zeros(self.n_dof());
        let w_body = Vector3::from(state.base_angvel);
        let w_world = frames.rot[0] * w_body;
        for i in 0..3 {
            nu[i] = state.base_linvel[i];
            nu[3 + i] = w_world[i];
        }
        for (k, qd) in state.qd_joints.iter().enumerate() {
            nu[6 + k] = *qd;
        }
        nu
    }

    /// Linear and angular Jacobian columns of point `x` rigidly attached to body `b`.
    fn point_jacobian(&self, frames: &Frames, b: usize, x: &Vector3<f64>) -> Vec<(usize, Vector3<f64>, Vector3<f64>)> {
        let mut cols = Vec::with_capacity(6 + self.bodies[b].chain.len());
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = 1.0;
            cols.push((i, e, Vector3::zeros()));
        }
        let r = x - frames.origin[0];
        for i in 0..3 {
            let mut e = Vector3::zeros();
            e[i] = 1.0;
            cols.push((3 + i, e.cross(&r), e));
        }
        for &(dof, jb) in &self.bodies[b].chain {
            let a = frames.axis[jb];
            cols.push((6 + dof, a.cross(&(x - frames.origin[jb])), a));
        }
        cols
    }

    /// Body angular velocities and origin velocities, world frame.
    fn velocities(&self, frames: &Frames, nu: &DVector<f64>) -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>) {
        let n = self.bodies.len();
        let mut omega = Vec::with_capacity(n);
        let mut v_origin = Vec::with_capacity(n);
        for (i, body) in self.bodies.iter().enumerate() {
            match body.parent {
                None => {
                    v_origin.push(Vector3::new(nu[0], nu[1], nu[2]));
                    omega.push(Vector3::new(nu[3], nu[4], nu[5]));
                }
                Some(p) => {
                    let vo = v_origin[p] + omega[p].cross(&(frames.origin[i] - frames.origin[p]));
                    let w = match body.dof {
                        Some(d) => omega[p] + frames.axis[i] * nu[6 + d],
                        None => omega[p],
                    };
                    v_origin.push(vo);
                    omega.push(w);
                }
            }
        }
        (omega, v_origin)
    }

    /// Total momentum `[P; L]` (L about the world origin) for the given body velocities.
    fn spatial_momentum(&self, frames: &Frames, omega: &[Vector3<f64>], v_origin: &[Vector3<f64>]) -> Vector6<f64> {
        let mut p = Vector3::zeros();
        let mut l = Vector3::zeros();
        for (i, body) in self.bodies.iter().enumerate() {
            let c = frames.com[i];
            let pc = (v_origin[i] + omega[i].cross(&(c - frames.origin[i]))) * body.mass;
            p += pc;
            l += c.cross(&pc) + frames.inertia[i] * omega[i];
        }
        Vector6::new(p.x, p.y, p.z, l.x, l.y, l.z)
    }

    /// Total linear and angular momentum (about the world origin).
    pub fn momentum(&self, state: &SimState) -> (Vector3<f64>, Vector3<f64>) {
        let frames = self.frames(state);
        let nu = self.gen_velocity(state, &frames);
        let (omega, v_origin) = self.velocities(&frames, &nu);
        let h = self.spatial_momentum(&frames, &omega, &v_origin);
        (Vector3::new(h[0], h[1], h[2]), Vector3::new(h[3], h[4], h[5]))
    }

    /// Torso velocity (world linear, world angular) that realises momentum `h`
    /// given joint rates `qd` at configuration `frames`.
    fn base_from_momentum(&self, frames: &Frames, h: &Vector6<f64>, qd: &[f64]) -> Result<Vector6<f64>> {
        // momentum of the joint motion alone, torso held still
        let mut nu = DVector::zeros(self.n_dof());
        for (k, qd) in qd.iter().enumerate() {
            nu[6 + k] = *qd;
        }
        let (omega, v_origin) = self.velocities(frames, &nu);
        let rhs = h - self.spatial_momentum(frames, &omega, &v_origin);

        // composite inertia seen by the torso twist [v; ω]
        let o = frames.origin[0];
        let mut ab = Matrix6::zeros();
        let mut mass = 0.0;
        let mut first = Vector3::zeros();
        let mut rot_block = Matrix3::zeros();
        for (i, body) in self.bodies.iter().enumerate() {
            let c = frames.com[i];
            mass += body.mass;
            first += c * body.mass;
            rot_block += frames.inertia[i] - skew(&c) * skew(&(c - o)) * body.mass;
        }
        let cm = first / mass;
        ab.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() * mass));
        ab.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(&(cm - o)) * mass));
        ab.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(&first)));
        ab.fixed_view_mut::<3, 3>(3, 3).copy_from(&rot_block);
        ab.lu().solve(&rhs).ok_or_else(|| Error::NumericalBlowup { time: f64::NAN, detail: "singular composite inertia".into() })
    }

    /// Ground penalty forces. Returns per-body wrenches, the generalised contact
    /// force, and the total external wrench (force, torque about origin).
    fn contacts(
        &self,
        frames: &Frames,
        omega: &[Vector3<f64>],
        v_origin: &[Vector3<f64>],
        gen_force: &mut DVector<f64>,
        ext: &mut (Vector3<f64>, Vector3<f64>),
    ) -> Vec<[f64; 6]> {
        let p = &self.params;
        let mut wrenches = vec![[0.0; 6]; self.bodies.len()];
        for (b, body) in self.bodies.iter().enumerate() {
            for (center, radius) in &body.contacts {
                let c = frames.origin[b] + frames.rot[b] * center;
                let pen = radius - c.z;
                if pen <= 0.0 {
                    continue;
                }
                let x = Vector3::new(c.x, c.y, 0.0);
                let v = v_origin[b] + omega[b].cross(&(x - frames.origin[b]));
                let fn_ = (p.contact_stiffness * pen - p.contact_damping * v.z).max(0.0);
                if fn_ == 0.0 {
                    continue;
                }
                let mut ft = Vector3::new(-p.tangential_damping * v.x, -p.tangential_damping * v.y, 0.0);
                let cap = p.friction * fn_;
                let mag = ft.norm();
                if mag > cap {
                    ft *= cap / mag;
                }
                let f = ft + Vector3::new(0.0, 0.0, fn_);
                for (col, jv, _) in self.point_jacobian(frames, b, &x) {
                    gen_force[col] += jv.dot(&f);
                }
                let tau = (x - frames.com[b]).cross(&f);
                let w = &mut wrenches[b];
                for i in 0..3 {
                    w[i] += tau[i];
                    w[3 + i] += f[i];
                }
                ext.0 += f;
                ext.1 += x.cross(&f);
            }
        }
        wrenches
    }

    fn foot_heights(&self, frames: &Frames) -> Vec<f64> {
        let mut h = vec![f64::INFINITY; self.n_legs];
        for (b, body) in self.bodies.iter().enumerate() {
            if let Some(leg) = body.leg {
                for (center, radius) in &body.contacts {
                    let c = frames.origin[b] + frames.rot[b] * center;
                    h[leg] = h[leg].min(c.z - radius);
                }
            }
        }
        h
    }

    /// Foot heights of `state` without stepping.
    pub fn contact_heights(&self, state: &SimState) -> Vec<f64> {
        self.foot_heights(&self.frames(state))
    }

    /// World position and scalar-first orientation of every body frame.
    pub fn body_poses(&self, state: &SimState) -> Vec<([f64; 3], [f64; 4])> {
        let frames = self.frames(state);
        frames
            .origin
            .iter()
            .zip(&frames.rot)
            .map(|(o, r)| {
                let q = UnitQuaternion::from_matrix(r);
                ([o.x, o.y, o.z], [q.w, q.i, q.j, q.k])
            })
            .collect()
    }

    /// One semi-implicit Euler step of length `dt` under constant joint torques.
    pub fn substep(&self, state: &SimState, torques: &[f64], dt: f64) -> Result<(SimState, ContactState)> {
        check_len("torques", self.n_u, torques.len())?;
        check_len("q_joints", self.n_u, state.q_joints.len())?;
        check_len("qd_joints", self.n_u, state.qd_joints.len())?;
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::InvalidInput(format!("substep dt must be positive, got {dt}")));
        }
        let n = self.n_dof();
        let frames = self.frames(state);
        let nu = self.gen_velocity(state, &frames);
        let (omega, v_origin) = self.velocities(&frames, &nu);
        let g = self.gravity();

        // velocity-product accelerations with ν̇ = 0
        let nb = self.bodies.len();
        let mut alpha: Vec<Vector3<f64>> = Vec::with_capacity(nb);
        let mut acc_origin: Vec<Vector3<f64>> = Vec::with_capacity(nb);
        for (i, body) in self.bodies.iter().enumerate() {
            match body.parent {
                None => {
                    alpha.push(Vector3::zeros());
                    acc_origin.push(Vector3::zeros());
                }
                Some(p) => {
                    let r = frames.origin[i] - frames.origin[p];
                    acc_origin.push(acc_origin[p] + alpha[p].cross(&r) + omega[p].cross(&omega[p].cross(&r)));
                    let a = match body.dof {
                        Some(d) => alpha[p] + omega[p].cross(&(frames.axis[i] * nu[6 + d])),
                        None => alpha[p],
                    };
                    alpha.push(a);
                }
            }
        }

        let mut mass = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        let mut ext = (Vector3::zeros(), Vector3::zeros());
        for (i, body) in self.bodies.iter().enumerate() {
            let x = frames.com[i];
            let r = x - frames.origin[i];
            let a_com = acc_origin[i] + alpha[i].cross(&r) + omega[i].cross(&omega[i].cross(&r));
            let iw = frames.inertia[i];
            let lin = (a_com - g) * body.mass;
            let ang = iw * alpha[i] + omega[i].cross(&(iw * omega[i]));
            let cols = self.point_jacobian(&frames, i, &x);
            for (a, (ca, jva, jwa)) in cols.iter().enumerate() {
                rhs[*ca] -= jva.dot(&lin) + jwa.dot(&ang);
                let iwa = iw * jwa;
                for (cb, jvb, jwb) in &cols[a..] {
                    let m = body.mass * jva.dot(jvb) + jwb.dot(&iwa);
                    mass[(*ca, *cb)] += m;
                    if ca != cb {
                        mass[(*cb, *ca)] += m;
                    }
                }
            }
            ext.0 += g * body.mass;
            ext.1 += x.cross(&(g * body.mass));
        }

        let wrenches = self.contacts(&frames, &omega, &v_origin, &mut rhs, &mut ext);

        let p = &self.params;
        for k in 0..self.n_u {
            let q = state.q_joints[k];
            let [lo, hi] = self.limits[k];
            let limit = if q < lo {
                p.limit_stiffness * (lo - q)
            } else if q > hi {
                p.limit_stiffness * (hi - q)
            } else {
                0.0
            };
            rhs[6 + k] += torques[k] - p.joint_damping * state.qd_joints[k] + limit;
            mass[(6 + k, 6 + k)] += self.armature[k];
        }

        let acc = mass
            .cholesky()
            .ok_or_else(|| Error::NumericalBlowup { time: state.time, detail: "mass matrix lost positive definiteness".into() })?
            .solve(&rhs);

        let h0 = self.spatial_momentum(&frames, &omega, &v_origin);
        let mut h1 = Vector6::zeros();
        for r in 0..3 {
            h1[r] = h0[r] + dt * ext.0[r];
            h1[3 + r] = h0[3 + r] + dt * ext.1[r];
        }

        let qd1: Vec<f64> = (0..self.n_u).map(|k| nu[6 + k] + dt * acc[6 + k]).collect();
        let v_mid = Vector3::new(nu[0] + dt * acc[0], nu[1] + dt * acc[1], nu[2] + dt * acc[2]);
        let w_mid = Vector3::new(nu[3] + dt * acc[3], nu[4] + dt * acc[4], nu[5] + dt * acc[5]);

        let mut next = state.clone();
        for i in 0..3 {
            next.base_pos[i] += dt * v_mid[i];
        }
        if w_mid != Vector3::zeros() {
            let [w, x, y, z] = state.base_quat;
            let q = UnitQuaternion::from_scaled_axis(w_mid * dt) * UnitQuaternion::new_unchecked(Quaternion::new(w, x, y, z));
            let q = q.into_inner().normalize();
            next.base_quat = [q.w, q.i, q.j, q.k];
        }
        for (q, qd) in next.q_joints.iter_mut().zip(&qd1) {
            *q += dt * qd;
        }
        next.qd_joints.clone_from(&qd1);
        next.time += dt;

        let frames1 = self.frames(&next);
        let base = self
            .base_from_momentum(&frames1, &h1, &qd1)
            .map_err(|_| Error::NumericalBlowup { time: next.time, detail: "singular composite inertia".into() })?;
        let w_body = frames1.rot[0].transpose() * Vector3::new(base[3], base[4], base[5]);
        next.base_linvel = [base[0], base[1], base[2]];
        next.base_angvel = [w_body.x, w_body.y, w_body.z];

        let cap = self.params.blowup_cap;
        if let Some(v) = next.values().find(|v| !v.is_finite() || v.abs() > cap) {
            return Err(Error::NumericalBlowup { time: next.time, detail: format!("state entry {v:e} exceeds cap {cap:e}") });
        }

        let contact = ContactState { wrenches, foot_heights: self.foot_heights(&frames1) };
        Ok((next, contact))
    }

    /// Holds `torques` for `frame_skip` substeps.
    pub fn step_torques(&self, state: &SimState, torques: &[f64]) -> Result<(SimState, ContactState)> {
        let dt = self.params.dt_sub;
        let (mut s, mut c) = self.substep(state, torques, dt)?;
        for _ in 1..self.params.frame_skip {
            (s, c) = self.substep(&s, torques, dt)?;
        }
        Ok((s, c))
    }

    /// One control step: clip and scale `action`, then run `frame_skip` substeps.
    /// Returns the final state and the contact state of the last substep.
    pub fn control_step(&self, state: &SimState, action: &[f64], spec: &MorphologySpec) -> Result<(SimState, ContactState)> {
        let torques = apply_action(action, spec)?;
        self.step_torques(state, &torques)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;

    fn floating(spec: &MorphologySpec, z: f64) -> SimState {
        SimState::at_rest([0.0, 0.0, z], spec.q_def.clone())
    }

    #[test]
    fn apply_action_clips_then_scales() {
        let spec = model::bastion();
        let g = spec.gear[3];
        let mut a = vec![0.0; spec.n_u];
        assert!(apply_action(&a, &spec).unwrap().iter().all(|t| *t == 0.0));
        a[3] = 1.0;
        assert_eq!(apply_action(&a, &spec).unwrap()[3], g);
        a[3] = 2.5;
        assert_eq!(apply_action(&a, &spec).unwrap()[3], g);
        a[3] = -7.0;
        assert_eq!(apply_action(&a, &spec).unwrap()[3], -g);
        assert!(matches!(apply_action(&a[..5], &spec), Err(Error::DimensionMismatch { expected: 12, got: 5, .. })));
        a[0] = f64::NAN;
        assert!(matches!(apply_action(&a, &spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_everything_is_an_equilibrium() {
        let mut spec = model::queen();
        spec.sim.gravity = 0.0;
        let dynamics = Dynamics::new(&spec);
        let s0 = floating(&spec, 3.0);
        let (s1, c) = dynamics.substep(&s0, &vec![0.0; spec.n_u], 0.002).unwrap();
        assert_eq!(s1.base_pos, s0.base_pos);
        assert_eq!(s1.base_quat, s0.base_quat);
        assert_eq!(s1.q_joints, s0.q_joints);
        assert_eq!(s1.base_linvel, s0.base_linvel);
        assert_eq!(s1.base_angvel, s0.base_angvel);
        assert_eq!(s1.qd_joints, s0.qd_joints);
        assert!(c.wrenches.iter().all(|w| w.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn contact_rows_zero_when_airborne() {
        let spec = model::leaper();
        let dynamics = Dynamics::new(&spec);
        let (_, c) = dynamics.substep(&floating(&spec, 5.0), &vec![0.0; spec.n_u], 0.002).unwrap();
        assert_eq!(c.wrenches.len(), spec.n_body);
        assert_eq!(c.foot_heights.len(), spec.n_legs);
        assert!(c.wrenches.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_bad_dimensions_and_dt() {
        let spec = model::tick();
        let dynamics = Dynamics::new(&spec);
        let s = floating(&spec, 1.0);
        assert!(matches!(dynamics.substep(&s, &[0.0; 3], 0.002), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(dynamics.substep(&s, &[0.0; 18], 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn blowup_is_reported() {
        let mut spec = model::bastion();
        spec.sim.blowup_cap = 5.0;
        let dynamics = Dynamics::new(&spec);
        let mut s = floating(&spec, 1.0);
        s.base_linvel = [6.0, 0.0, 0.0];
        assert!(matches!(dynamics.substep(&s, &vec![0.0; spec.n_u], 0.002), Err(Error::NumericalBlowup { .. })));
    }

    #[test]
    fn joint_torque_spins_link_and_reacts_on_base() {
        let mut spec = model::bastion();
        spec.sim.gravity = 0.0;
        let dynamics = Dynamics::new(&spec);
        let s = floating(&spec, 3.0);
        let mut tau = vec![0.0; spec.n_u];
        tau[0] = 10.0;
        let (s1, _) = dynamics.substep(&s, &tau, 0.002).unwrap();
        assert!(s1.qd_joints[0] > 0.0);
        // internal torque leaves total momentum untouched
        let (p, l) = dynamics.momentum(&s1);
        assert!(p.norm() < 1e-12 && l.norm() < 1e-12, "{p} {l}");
        assert!(s1.base_angvel.iter().any(|w| w.abs() > 0.0));
    }
}
