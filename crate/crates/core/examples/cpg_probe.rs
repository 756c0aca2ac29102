//! Rolls the CPG demonstrator on each morphology and prints gait statistics.
//!
//! `cargo run --release --example cpg_probe -- [morph] [seeds] [zero]`

use gaitforge::cpg::cpg_policy;
use gaitforge::model::{load_morphology, BUILTIN_NAMES};
use gaitforge::Env;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let names: Vec<String> = match args.get(1) {
        Some(n) if n != "all" => vec![n.clone()],
        _ => BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let seeds: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5);
    let zero = args.get(3).map(|s| s == "zero").unwrap_or(false);
    for name in names {
        let spec = load_morphology(&name).unwrap();
        let mut env = Env::new(spec.clone());
        let t0 = std::time::Instant::now();
        for seed in 0..seeds {
            env.reset(seed);
            let (mut steps, mut in_band, mut ret, mut compliant) = (0, 0, 0.0, 0);
            let (mut zmin, mut zmax, mut vsum) = (f64::MAX, f64::MIN, 0.0);
            let mut end = "horizon";
            loop {
                let a = if zero {
                    vec![0.0; spec.n_u]
                } else {
                    cpg_policy(env.state(), env.state().time, env.clock(), &spec.cpg, &spec).unwrap()
                };
                let r = env.step(&a).unwrap();
                steps += 1;
                ret += r.reward;
                let v = r.info.v_x;
                vsum += v;
                if (v - spec.v_star).abs() <= spec.sigma_v {
                    in_band += 1;
                }
                if r.info.breakdown.n_errors == 0 {
                    compliant += 1;
                }
                zmin = zmin.min(r.info.z_torso);
                zmax = zmax.max(r.info.z_torso);
                if r.terminated {
                    end = if r.info.blowup { "BLOWUP" } else { "FELL" };
                    break;
                }
                if r.truncated {
                    break;
                }
            }
            let s = env.state();
            let [w, x, y, z] = s.base_quat;
            let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
            println!(
                "{name:8} seed {seed}: {end:7} steps {steps:4} ret {ret:8.2} v̄ {:.3} band {:.2} comply {:.2} x {:.2} y {:.2} yaw {:.2} z [{zmin:.3},{zmax:.3}]",
                vsum / steps as f64,
                in_band as f64 / steps as f64,
                compliant as f64 / steps as f64,
                s.base_pos[0],
                s.base_pos[1],
                yaw
            );
        }
        println!("{name}: {:.2}s", t0.elapsed().as_secs_f64());
    }
}
