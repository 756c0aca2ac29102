//! Rolls the CPG with parameter overrides and prints a one-line summary.
//!
//! `sweep_probe <morph> <seeds> [path=value | path=*factor]...`
//! Paths are dotted (`cpg.a_hip`, `sim.friction`); a factor scales every
//! element of a numeric field or array.

use gaitforge::cpg::{cpg_policy, pd_action};
use gaitforge::model::{load_morphology, MorphologySpec};
use gaitforge::Env;
use serde_json::Value;

fn apply(v: &mut Value, f: &dyn Fn(f64) -> f64) {
    match v {
        Value::Number(n) => *v = Value::from(f(n.as_f64().unwrap())),
        Value::Array(a) => a.iter_mut().for_each(|x| apply(x, f)),
        _ => panic!("not numeric"),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let spec = load_morphology(&args[1]).unwrap();
    let seeds: u64 = args[2].parse().unwrap();
    let mut json = serde_json::to_value(&spec).unwrap();
    for ov in &args[3..] {
        let (path, val) = ov.split_once('=').unwrap();
        let mut node = &mut json;
        for key in path.split('.') {
            node = node.get_mut(key).unwrap_or_else(|| panic!("no field {key}"));
        }
        if let Some(k) = val.strip_prefix('*') {
            let k: f64 = k.parse().unwrap();
            apply(node, &|x| x * k);
        } else {
            let c: f64 = val.parse().unwrap();
            apply(node, &|_| c);
        }
    }
    let spec: MorphologySpec = serde_json::from_value(json).unwrap();
    let stand = std::env::var("STAND").is_ok();
    let trace = std::env::var("TRACE").is_ok();
    let mut env = Env::new(spec.clone());
    let (mut band_steps, mut all_steps) = (0usize, 0usize);
    let (mut survive, mut band_ok, mut disp, mut vbar, mut comply) = (0, 0, 0.0, 0.0, 0.0);
    let mut lens = Vec::new();
    for seed in 0..seeds {
        env.reset(seed);
        let x0 = env.state().base_pos[0];
        let (mut steps, mut in_band, mut vsum, mut c) = (0usize, 0usize, 0.0, 0usize);
        let mut fell = false;
        loop {
            let a = if stand {
                pd_action(&spec.q_def, env.state(), env.state().time, &spec.cpg, &spec).unwrap()
            } else {
                cpg_policy(env.state(), env.state().time, env.clock(), &spec.cpg, &spec).unwrap()
            };
            let r = env.step(&a).unwrap();
            steps += 1;
            if trace && seed == 0 {
                let st = env.state();
                let [w, x, y, z] = st.base_quat;
                let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
                let pitch = (2.0 * (w * y - z * x)).asin();
                let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
                let feet: String = r
                    .info
                    .breakdown
                    .stance_actual
                    .iter()
                    .zip(&r.info.breakdown.stance_target)
                    .map(|(a, t)| format!("{}{} ", *a as u8, *t as u8))
                    .collect();
                let h: String = env.contact().foot_heights.iter().map(|h| format!("{h:+.3} ")).collect();
                let j = spec.joints_per_leg;
                let q: String = (0..j).map(|i| format!("{:+.2} ", st.q_joints[i])).collect();
                println!("    h {h} L1 q {q}");
                println!(
                    "t {:.2} x {:+.2} z {:.3} vx {:+.2} vy {:+.2} roll {:+.3} pitch {:+.3} yaw {:+.3} feet {feet}",
                    st.time, st.base_pos[0], st.base_pos[2], st.base_linvel[0], st.base_linvel[1], roll, pitch, yaw
                );
            }
            vsum += r.info.v_x;
            if (r.info.v_x - spec.v_star).abs() <= spec.sigma_v {
                in_band += 1;
            }
            if r.info.breakdown.n_errors == 0 {
                c += 1;
            }
            if r.terminated {
                fell = true;
                break;
            }
            if r.truncated {
                break;
            }
        }
        if !fell {
            survive += 1;
        }
        band_steps += in_band;
        all_steps += steps;
        if in_band * 2 >= steps {
            band_ok += 1;
        }
        disp += env.state().base_pos[0] - x0;
        vbar += vsum / steps as f64;
        comply += c as f64 / steps as f64;
        lens.push(steps);
    }
    let n = seeds as f64;
    println!(
        "{} {:?}: survive {survive}/{seeds} band {band_ok}/{seeds} bandfrac {:.3} disp {:.2} v̄ {:.3} comply {:.2} lens {:?}",
        spec.name,
        &args[3..],
        band_steps as f64 / all_steps as f64,
        disp / n,
        vbar / n,
        comply / n,
        lens
    );
}
