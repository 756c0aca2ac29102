//! The four compiled-in robots.
//!
//! Geometry, masses, gains and healthy ranges here are desk-scale choices,
//! not measured values. Every leg is a planar chain of pitch hinges hanging
//! from the torso, splayed outward by a fixed angle. Hip angles are positive
//! when the foot swings forward; knee and ankle angles are positive when they
//! lift the foot.
//!
//! Armature is large next to the link inertias. It stands in for the rotor
//! inertia reflected through the gearbox and lets the held PD action stay
//! stiff enough to carry the body in stance at the 20 Hz control rate.

use super::{
    tripod_offsets, trot_offsets, BodyDef, ContactSphere, CpgParams, JointClass, JointDef, MorphologySpec, RewardWeights, SimParams,
    SCHEMA_VERSION,
};

pub const BUILTIN_NAMES: [&str; 4] = ["queen", "bastion", "tick", "leaper"];

pub fn builtin(name: &str) -> Option<MorphologySpec> {
    match name {
        "queen" => Some(queen()),
        "bastion" => Some(bastion()),
        "tick" => Some(tick()),
        "leaper" => Some(leaper()),
        _ => None,
    }
}

const HEX_LEGS: [&str; 6] = ["L1", "R1", "L2", "R2", "L3", "R3"];
const QUAD_LEGS: [&str; 4] = ["FL", "FR", "HL", "HR"];

#[derive(Clone, Copy)]
enum Link {
    /// Actuated pitch hinge at the link root.
    Joint {
        class: JointClass,
        q_def: f64,
        range: [f64; 2],
        gear: f64,
        armature: f64,
        kp: f64,
        kd: f64,
    },
    Fixed,
}

#[derive(Clone, Copy)]
struct LinkPlan {
    name: &'static str,
    link: Link,
    /// Length along the link direction; scaled by the leg fit.
    length: f64,
    /// Pitch of the link direction in the parent-link frame (only used by fixed links).
    pitch: f64,
    mass: f64,
    contact: Option<f64>,
    /// Excluded from the height fit (feet, toes).
    rigid: bool,
}

struct Design {
    name: &'static str,
    torso_mass: f64,
    torso_size: [f64; 3],
    torso_contact: f64,
    legs: &'static [&'static str],
    /// (x, |y|, z) of the front-left mount; other mounts mirror/shift from `mount_x`.
    mount_x: Vec<f64>,
    mount_y: f64,
    mount_z: f64,
    splay: f64,
    links: Vec<LinkPlan>,
    healthy_z: [f64; 2],
    z_thr: f64,
    offsets: Vec<f64>,
    /// Expected static foot penetration at rest, m.
    preload: f64,
    cpg: (f64, f64, f64, f64),
    f_g: f64,
}

fn hinge(class: JointClass, q_def: f64, range: [f64; 2], gear: f64, armature: f64, (kp, kd): (f64, f64)) -> Link {
    Link::Joint { class, q_def, range, gear, armature, kp, kd }
}

fn rod_inertia(mass: f64, length: f64) -> [f64; 3] {
    // lumped: thin rod about its centre, radius a tenth of its length
    let r = 0.1 * length.max(0.02);
    let it = mass * (3.0 * r * r + length * length) / 12.0;
    [it, it, it]
}

fn box_inertia(mass: f64, s: [f64; 3]) -> [f64; 3] {
    [mass * (s[1] * s[1] + s[2] * s[2]) / 12.0, mass * (s[0] * s[0] + s[2] * s[2]) / 12.0, mass * (s[0] * s[0] + s[1] * s[1]) / 12.0]
}

/// Direction of a link whose accumulated pitch is `angle` (forward positive) and
/// which is splayed outward by `splay` on side `side` (+1 left, −1 right).
fn link_dir(angle: f64, splay: f64, side: f64) -> [f64; 3] {
    // chain of pitch hinges about y keeps the lateral component fixed
    let lateral = side * splay.sin();
    let sagittal = splay.cos();
    [sagittal * angle.sin(), lateral, -sagittal * angle.cos()]
}

fn build(d: Design) -> MorphologySpec {
    let z_mid = 0.5 * (d.healthy_z[0] + d.healthy_z[1]);
    let foot_r = d.links.iter().filter_map(|l| l.contact).next().unwrap_or(0.03);

    // Vertical reach at q_def, split into the rigid (foot) and scalable parts.
    let reach = |rigid: bool| -> f64 {
        let mut angle = 0.0;
        let mut z = 0.0;
        for l in &d.links {
            angle += match l.link {
                Link::Joint { class, q_def, .. } => pitch_sign(class) * q_def,
                Link::Fixed => l.pitch,
            };
            if l.rigid == rigid {
                z += l.length * angle.cos() * d.splay.cos();
            }
        }
        z
    };
    let target = z_mid + d.mount_z - foot_r + d.preload;
    let (rigid_reach, flex_reach) = (reach(true), reach(false));
    let scale = (target - rigid_reach) / flex_reach;

    let mut bodies = vec![BodyDef {
        name: "torso".into(),
        parent: None,
        leg: None,
        offset: [0.0; 3],
        joint: JointDef::Free,
        mass: d.torso_mass,
        com: [0.0; 3],
        inertia: box_inertia(d.torso_mass, d.torso_size),
        contacts: {
            let [sx, sy, sz] = d.torso_size;
            let r = d.torso_contact;
            let mut c = Vec::new();
            for fx in [0.5, -0.5] {
                for fy in [0.5, -0.5] {
                    c.push(ContactSphere { center: [fx * sx - fx.signum() * r, fy * sy - fy.signum() * r, -0.5 * sz + r], radius: r });
                }
            }
            c
        },
    }];

    let mut gear = Vec::new();
    let mut armature = Vec::new();
    let mut q_def = Vec::new();
    let mut joint_limits = Vec::new();
    let mut kp = Vec::new();
    let mut kd = Vec::new();

    let n_rows = d.mount_x.len();
    for (leg, _) in d.legs.iter().enumerate() {
        let side = if leg % 2 == 0 { 1.0 } else { -1.0 };
        let row = leg / 2;
        debug_assert!(row < n_rows);
        let mount = [d.mount_x[row], side * d.mount_y, d.mount_z];
        let mut parent = 0usize;
        let mut offset = mount;
        for l in &d.links {
            let len = if l.rigid { l.length } else { l.length * scale };
            // link direction in its own frame at zero joint angle
            let dir = match l.link {
                Link::Joint { .. } => link_dir(0.0, d.splay, side),
                Link::Fixed => link_dir(l.pitch, d.splay, side),
            };
            let tip = [dir[0] * len, dir[1] * len, dir[2] * len];
            let joint = match l.link {
                Link::Joint { class, q_def: q, range, gear: g, armature: a, kp: p, kd: v } => {
                    gear.push(g);
                    armature.push(a);
                    q_def.push(q);
                    joint_limits.push(range);
                    kp.push(p);
                    kd.push(v);
                    JointDef::Revolute { axis: [0.0, -pitch_sign(class), 0.0], class }
                }
                Link::Fixed => JointDef::Fixed,
            };
            let contacts = l.contact.map(|r| vec![ContactSphere { center: tip, radius: r }]).unwrap_or_default();
            bodies.push(BodyDef {
                name: format!("{}_{}", d.legs[leg], l.name),
                parent: Some(parent),
                leg: Some(leg),
                offset,
                joint,
                mass: l.mass,
                com: [tip[0] * 0.5, tip[1] * 0.5, tip[2] * 0.5],
                inertia: rod_inertia(l.mass, len),
                contacts,
            });
            parent = bodies.len() - 1;
            offset = tip;
        }
    }

    let n_legs = d.legs.len();
    let joints_per_leg = d.links.iter().filter(|l| matches!(l.link, Link::Joint { .. })).count();
    let (a_hip, a_knee, a_ankle, a_push) = d.cpg;
    let n_body = bodies.len();
    MorphologySpec {
        schema_version: SCHEMA_VERSION,
        name: d.name.into(),
        n_legs,
        joints_per_leg,
        n_u: n_legs * joints_per_leg,
        n_body,
        bodies,
        gear,
        armature,
        q_def,
        joint_limits,
        healthy_z: d.healthy_z,
        v_star: 1.0,
        sigma_v: 0.5,
        f_g: d.f_g,
        duty: 0.6,
        offsets: d.offsets,
        z_thr: d.z_thr,
        weights: RewardWeights::default(),
        horizon: 1000,
        sim: SimParams::default(),
        cpg: CpgParams { a_hip, a_knee, a_ankle, a_push, kp, kd, t_ramp: 0.5 },
    }
}

/// Hip hinges turn about −y (forward swing), knees about +y, ankles about −y.
fn pitch_sign(class: JointClass) -> f64 {
    match class {
        JointClass::Hip | JointClass::Ankle => 1.0,
        JointClass::Knee => -1.0,
    }
}

/// Tall 18-DoF hexapod.
pub fn queen() -> MorphologySpec {
    use JointClass::*;
    // PD gains (kp, kd) of every joint
    const G: (f64, f64) = (1200.0, 112.5);
    build(Design {
        name: "queen",
        torso_mass: 40.0,
        torso_size: [1.0, 0.6, 0.25],
        torso_contact: 0.1,
        legs: &HEX_LEGS,
        mount_x: vec![0.4, 0.0, -0.4],
        mount_y: 0.3,
        mount_z: 0.0,
        splay: 0.3,
        links: vec![
            LinkPlan {
                name: "coxa",
                link: hinge(Hip, 0.3, [-0.6, 1.2], 150.0, 5.0, G),
                length: 0.25,
                pitch: 0.0,
                mass: 1.0,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "femur",
                link: hinge(Knee, 0.8, [-0.2, 2.0], 150.0, 5.0, G),
                length: 0.5,
                pitch: 0.0,
                mass: 2.0,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "tibia",
                link: hinge(Ankle, 0.85, [-0.2, 2.0], 150.0, 5.0, G),
                length: 0.45,
                pitch: 0.0,
                mass: 1.5,
                contact: None,
                rigid: false,
            },
            LinkPlan { name: "foot", link: Link::Fixed, length: 0.05, pitch: 0.0, mass: 0.3, contact: Some(0.04), rigid: true },
        ],
        healthy_z: [0.6, 1.6],
        z_thr: 0.08,
        offsets: tripod_offsets(6).expect("six legs"),
        preload: 0.01,
        cpg: (0.34, 0.5, 0.52, 0.12),
        f_g: 1.25,
    })
}

/// Armoured 12-DoF hexapod with two-link legs.
pub fn bastion() -> MorphologySpec {
    use JointClass::*;
    const G: (f64, f64) = (360.0, 40.5);
    build(Design {
        name: "bastion",
        torso_mass: 25.0,
        torso_size: [0.9, 0.6, 0.25],
        torso_contact: 0.08,
        legs: &HEX_LEGS,
        mount_x: vec![0.35, 0.0, -0.35],
        mount_y: 0.3,
        mount_z: 0.0,
        splay: 0.35,
        links: vec![
            LinkPlan {
                name: "femur",
                link: hinge(Hip, 0.35, [-0.6, 1.3], 80.0, 3.0, G),
                length: 0.26,
                pitch: 0.0,
                mass: 2.0,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "tibia",
                link: hinge(Knee, 0.7, [-0.2, 2.0], 80.0, 3.0, G),
                length: 0.22,
                pitch: 0.0,
                mass: 1.5,
                contact: None,
                rigid: false,
            },
            LinkPlan { name: "foot", link: Link::Fixed, length: 0.04, pitch: 0.0, mass: 0.5, contact: Some(0.035), rigid: true },
        ],
        healthy_z: [0.25, 0.8],
        z_thr: 0.08,
        offsets: tripod_offsets(6).expect("six legs"),
        preload: 0.005,
        cpg: (0.49, 0.46, 0.0, 0.18),
        f_g: 1.25,
    })
}

/// Compact hexapod sharing the queen's leg layout at a smaller scale.
pub fn tick() -> MorphologySpec {
    use JointClass::*;
    const G: (f64, f64) = (48.0, 4.8);
    build(Design {
        name: "tick",
        torso_mass: 8.0,
        torso_size: [0.4, 0.3, 0.12],
        torso_contact: 0.04,
        legs: &HEX_LEGS,
        mount_x: vec![0.14, 0.0, -0.14],
        mount_y: 0.15,
        mount_z: 0.0,
        splay: 0.4,
        links: vec![
            LinkPlan {
                name: "coxa",
                link: hinge(Hip, 0.3, [-1.0, 1.5], 20.0, 0.4, G),
                length: 0.25,
                pitch: 0.0,
                mass: 0.2,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "femur",
                link: hinge(Knee, 0.8, [-0.2, 2.2], 20.0, 0.4, G),
                length: 0.5,
                pitch: 0.0,
                mass: 0.4,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "tibia",
                link: hinge(Ankle, 0.85, [-0.2, 2.2], 20.0, 0.4, G),
                length: 0.45,
                pitch: 0.0,
                mass: 0.3,
                contact: None,
                rigid: false,
            },
            LinkPlan { name: "foot", link: Link::Fixed, length: 0.02, pitch: 0.0, mass: 0.05, contact: Some(0.02), rigid: true },
        ],
        healthy_z: [0.12, 0.45],
        z_thr: 0.04,
        offsets: tripod_offsets(6).expect("six legs"),
        preload: 0.003,
        cpg: (0.61, 0.43, 0.1, 0.03),
        f_g: 1.5,
    })
}

/// 12-DoF quadruped with three-link legs and an unactuated toe.
pub fn leaper() -> MorphologySpec {
    use JointClass::*;
    const G: (f64, f64) = (240.0, 22.5);
    build(Design {
        name: "leaper",
        torso_mass: 12.0,
        torso_size: [0.8, 0.35, 0.15],
        torso_contact: 0.06,
        legs: &QUAD_LEGS,
        mount_x: vec![0.45, -0.45],
        mount_y: 0.2,
        mount_z: 0.0,
        splay: 0.9,
        links: vec![
            LinkPlan { name: "hip_mount", link: Link::Fixed, length: 0.05, pitch: 0.0, mass: 0.3, contact: None, rigid: true },
            LinkPlan {
                name: "thigh",
                link: hinge(Hip, 0.4, [-0.8, 1.4], 60.0, 1.0, G),
                length: 0.25,
                pitch: 0.0,
                mass: 1.0,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "shank",
                link: hinge(Knee, 0.9, [-0.2, 2.2], 60.0, 1.0, G),
                length: 0.25,
                pitch: 0.0,
                mass: 0.6,
                contact: None,
                rigid: false,
            },
            LinkPlan {
                name: "foot",
                link: hinge(Ankle, 0.6, [-0.4, 2.0], 60.0, 1.0, G),
                length: 0.15,
                pitch: 0.0,
                mass: 0.3,
                contact: None,
                rigid: false,
            },
            LinkPlan { name: "toe", link: Link::Fixed, length: 0.03, pitch: 0.0, mass: 0.1, contact: Some(0.03), rigid: true },
        ],
        healthy_z: [0.25, 0.9],
        z_thr: 0.08,
        offsets: trot_offsets(),
        preload: 0.005,
        cpg: (0.35, 0.5, 0.2, 0.1),
        f_g: 1.25,
    })
}
