use gaitforge::env::{ObsLayout, RESET_NOISE};
use gaitforge::model::{load_morphology, BUILTIN_NAMES};
use gaitforge::{Env, Error};

#[test]
fn observation_and_action_dimensions() {
    for (name, obs, act) in [("bastion", 151, 12), ("leaper", 163, 12), ("queen", 199, 18), ("tick", 199, 18)] {
        let mut env = Env::make(name).unwrap();
        assert_eq!(env.obs_dim(), obs);
        assert_eq!(env.action_dim(), act);
        assert_eq!(env.reset(0).len(), obs);
        let r = env.step(&vec![0.0; act]).unwrap();
        assert_eq!(r.observation.len(), obs, "{name}");
        assert_eq!(ObsLayout::new(env.spec()).len(), obs);
    }
}

#[test]
fn observation_blocks_hold_the_state() {
    let mut env = Env::make("queen").unwrap();
    env.reset(4);
    let r = env.step(&[0.1; 18]).unwrap();
    let o = &r.observation;
    let s = env.state();
    let l = ObsLayout::new(env.spec());
    assert_eq!(o[0], s.base_pos[2]);
    assert_eq!(&o[1..5], &s.base_quat);
    assert_eq!(&o[5..l.posture.end], &s.q_joints[..]);
    assert_eq!(&o[l.velocity.start..l.velocity.start + 3], &s.base_linvel);
    assert_eq!(&o[l.velocity.end - 18..l.velocity.end], &s.qd_joints[..]);
    assert!(o[l.contact.clone()].iter().all(|v| v.abs() <= 1.0));
    let (sin, cos) = (o[l.phase.start], o[l.phase.start + 1]);
    assert_eq!(sin, env.clock().phi.sin());
    assert_eq!(cos, env.clock().phi.cos());
}

#[test]
fn stepping_before_reset_is_an_error() {
    let mut env = Env::make("tick").unwrap();
    assert!(matches!(env.step(&[0.0; 18]), Err(Error::NotReset)));
}

#[test]
fn wrong_action_length_is_rejected() {
    let mut env = Env::make("leaper").unwrap();
    env.reset(0);
    match env.step(&[0.0; 11]) {
        Err(Error::DimensionMismatch { expected, got, .. }) => assert_eq!((expected, got), (12, 11)),
        other => panic!("expected a dimension mismatch, got {other:?}"),
    }
    // a rejected action leaves the episode running
    assert!(env.step(&[0.0; 12]).is_ok());
}

#[test]
fn non_finite_actions_are_rejected() {
    let mut env = Env::make("bastion").unwrap();
    env.reset(0);
    for bad in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
        let mut a = vec![0.0; 12];
        a[7] = bad;
        assert!(matches!(env.step(&a), Err(Error::InvalidInput(_))));
    }
    assert_eq!(env.step_index(), 0);
}

#[test]
fn out_of_range_actions_are_clipped() {
    let run = |scale: f64| {
        let mut env = Env::make("bastion").unwrap();
        env.reset(1);
        let a: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { scale } else { -scale }).collect();
        env.step(&a).unwrap()
    };
    let (a, b) = (run(1.0), run(40.0));
    assert_eq!(a.observation, b.observation);
    assert_eq!(a.reward, b.reward);
}

#[test]
fn reset_noise_is_seeded_and_bounded() {
    for name in BUILTIN_NAMES {
        let mut env = Env::make(name).unwrap();
        let a = env.reset(12);
        let q = env.state().q_joints.clone();
        assert_eq!(env.reset(12), a);
        assert_ne!(env.reset(13), a);
        for (q, d) in q.iter().zip(&env.spec().q_def) {
            assert!((q - d).abs() <= RESET_NOISE);
        }
        assert_eq!(env.clock().phi, 0.0);
    }
}

#[test]
fn limp_robot_falls_and_terminates_early() {
    for name in BUILTIN_NAMES {
        let mut env = Env::make(name).unwrap();
        env.reset(0);
        // fold every joint: knees and ankles lift the feet, hips swing back
        let fold = vec![-1.0; env.action_dim()];
        let mut steps = 0;
        loop {
            let r = env.step(&fold).unwrap();
            steps += 1;
            if r.terminated {
                assert!(!r.truncated);
                assert!(r.info.z_torso < env.spec().healthy_z[0], "{name}");
                break;
            }
            assert!(!r.truncated, "{name} reached the horizon");
        }
        assert!(steps < env.spec().horizon);
        assert!(matches!(env.step(&fold), Err(Error::NotReset)));
    }
}

#[test]
fn truncates_at_the_horizon() {
    let mut spec = load_morphology("queen").unwrap();
    spec.horizon = 5;
    let mut env = Env::new(spec);
    env.reset(0);
    for k in 1..=5 {
        let r = env.step(&[0.0; 18]).unwrap();
        assert_eq!(r.info.step, k);
        assert_eq!(r.truncated, k == 5);
        assert!(!r.terminated);
    }
    assert!(matches!(env.step(&[0.0; 18]), Err(Error::NotReset)));
    env.reset(0);
    assert!(env.step(&[0.0; 18]).is_ok());
}

#[test]
fn blowup_ends_the_episode_with_zero_reward() {
    let mut spec = load_morphology("bastion").unwrap();
    spec.sim.blowup_cap = 1e-3;
    let mut env = Env::new(spec);
    env.reset(0);
    let r = env.step(&[0.5; 12]).unwrap();
    assert!(r.terminated && r.info.blowup);
    assert_eq!(r.reward, 0.0);
    assert_eq!(r.info.breakdown.total, 0.0);
    assert!(matches!(env.step(&[0.0; 12]), Err(Error::NotReset)));
}

#[test]
fn reward_info_is_consistent_with_state() {
    let mut env = Env::make("leaper").unwrap();
    env.reset(2);
    for _ in 0..20 {
        let r = env.step(&[0.2; 12]).unwrap();
        assert_eq!(r.reward, r.info.breakdown.total);
        assert!((r.info.breakdown.total - r.info.breakdown.term_sum()).abs() <= 1e-9);
        assert_eq!(r.info.v_x, env.state().base_linvel[0]);
        assert_eq!(r.info.phi, env.clock().phi);
        if r.terminated {
            break;
        }
    }
}

#[test]
fn unknown_morphology_is_reported() {
    assert!(matches!(Env::make("centipede"), Err(Error::UnknownMorphology(_))));
}
