use gaitforge::model::{builtin, load_morphology_from, MorphologySpec, BUILTIN_NAMES};
use gaitforge::{Dynamics, Error, SimState};
use proptest::prelude::*;

#[test]
fn builtins_validate_and_keep_feet_lowest() {
    for name in BUILTIN_NAMES {
        let spec = builtin(name).unwrap();
        spec.validate().unwrap();
        // at the default pose every foot sits below the torso and near the ground
        let z = 0.5 * (spec.healthy_z[0] + spec.healthy_z[1]);
        let d = Dynamics::new(&spec);
        let heights = d.contact_heights(&SimState::at_rest([0.0, 0.0, z], spec.q_def.clone()));
        for h in heights {
            assert!(h.abs() < 0.02, "{name}: foot height {h}");
        }
    }
}

#[test]
fn dimensions_follow_the_leg_layout() {
    for name in BUILTIN_NAMES {
        let s = builtin(name).unwrap();
        assert_eq!(s.obs_dim(), 1 + 4 + s.n_u + 3 + 3 + s.n_u + 6 * s.n_body + 2);
        assert_eq!(s.joint_classes().len(), s.n_u);
        assert_eq!(s.actuated_bodies().len(), s.n_u);
        assert!((s.w_ctrl() * s.n_u as f64 - s.weights.w_c_hat).abs() < 1e-15);
    }
}

#[test]
fn config_dir_takes_precedence_and_accepts_new_names() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = builtin("tick").unwrap();
    spec.v_star = 0.7;
    std::fs::write(dir.path().join("tick.toml"), spec.to_toml()).unwrap();
    spec.name = "tick_slow".into();
    std::fs::write(dir.path().join("tick_slow.toml"), spec.to_toml()).unwrap();

    assert_eq!(load_morphology_from("tick", Some(dir.path())).unwrap().v_star, 0.7);
    assert_eq!(load_morphology_from("tick", None).unwrap().v_star, 1.0);
    assert_eq!(load_morphology_from("tick_slow", Some(dir.path())).unwrap().name, "tick_slow");
    let path = dir.path().join("tick_slow.toml");
    assert_eq!(load_morphology_from(path.to_str().unwrap(), None).unwrap(), spec);
    assert!(matches!(load_morphology_from("tick_slow", None), Err(Error::UnknownMorphology(_))));
}

#[test]
fn invalid_config_files_are_rejected_with_reasons() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = builtin("bastion").unwrap();
    spec.duty = 1.5;
    spec.gear.pop();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, spec.to_toml()).unwrap();
    match load_morphology_from(path.to_str().unwrap(), None) {
        Err(Error::Validation(errs)) => {
            assert!(errs.iter().any(|e| e.contains("duty")), "{errs:?}");
            assert!(errs.iter().any(|e| e.contains("gear")), "{errs:?}");
        }
        other => panic!("expected validation errors, got {other:?}"),
    }
    std::fs::write(&path, "name = \"broken\"\n").unwrap();
    assert!(matches!(load_morphology_from(path.to_str().unwrap(), None), Err(Error::Config { .. })));
}

#[test]
fn cpg_amplitudes_beyond_joint_range_are_rejected() {
    let mut spec = builtin("queen").unwrap();
    spec.cpg.a_hip = 2.0;
    let errs = spec.validation_errors();
    assert!(errs.iter().any(|e| e.contains("cpg targets")), "{errs:?}");
}

#[test]
fn spec_hash_tracks_content() {
    let a = builtin("leaper").unwrap();
    let mut b = a.clone();
    assert_eq!(a.spec_hash(), b.spec_hash());
    assert_eq!(a.spec_hash().len(), 64);
    b.sim.friction = 0.9;
    assert_ne!(a.spec_hash(), b.spec_hash());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toml_round_trip_is_field_equal(m in 0usize..4, v in 0.1f64..3.0, s in 0.05f64..1.0, f in 0.2f64..4.0, kp in 1.0f64..1e4) {
        let mut spec = builtin(BUILTIN_NAMES[m]).unwrap();
        spec.v_star = v;
        spec.sigma_v = s;
        spec.f_g = f;
        spec.cpg.kp[0] = kp;
        let back = MorphologySpec::from_toml(&spec.to_toml()).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.spec_hash(), spec.spec_hash());
    }
}
