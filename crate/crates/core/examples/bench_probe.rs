//! Times one CPG rollout: `bench_probe [morph] [steps]`.

use gaitforge::harness::{rollout, CpgPolicy};
use gaitforge::Env;
fn main() {
    let name = std::env::args().nth(1).unwrap_or("queen".into());
    let steps: usize = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(1000);
    let mut spec = gaitforge::load_morphology(&name).unwrap();
    spec.horizon = steps;
    let mut env = Env::new(spec);
    let t = std::time::Instant::now();
    let s = rollout(&mut env, &mut CpgPolicy, 0, |_, _, _| Ok(())).unwrap();
    let dt = t.elapsed().as_secs_f64();
    println!("{} steps in {dt:.3}s: {:.0} steps/s", s.length, s.length as f64 / dt);
}
