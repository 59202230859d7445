use super::*;
use crate::human::{Joint, JointAngles};

fn fixed_pose_env(target: Target) -> BeddingEnv {
    BeddingEnv::new(EnvConfig { vary_pose: false, ..EnvConfig::for_target(target) }).unwrap()
}

#[test]
fn same_seed_gives_the_same_episode() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    let (a, oa) = env.reset(12).unwrap();
    let (b, ob) = env.reset(12).unwrap();
    assert_eq!(oa, ob);
    assert_eq!(a.cloth.positions, b.cloth.positions);
    let act = Action::new([0.05, -0.3, 0.0, 0.5]);
    let ra = env.execute(&a, &act).unwrap();
    let rb = env.execute(&b, &act).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(ra.reward.total.to_bits(), rb.reward.total.to_bits());
}

#[test]
fn reset_meets_the_coverage_contract() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    for seed in 0..4 {
        let (s, _) = env.reset(seed).unwrap();
        assert!(s.initial.body_covered_fraction() >= RESET_BODY_COVERED);
        assert!(s.initial.head_exposed_fraction() >= RESET_HEAD_EXPOSED);
        assert_eq!(s.partition.target.len(), s.initial.target_total);
    }
}

#[test]
fn observation_slots_hold_knees_then_elbows() {
    let env = fixed_pose_env(Target::UpperBody);
    let (s, obs) = env.reset(0).unwrap();
    let lm = s.human.landmarks();
    assert_eq!([obs.0[0], obs.0[1]], [lm.knee_right.x, lm.knee_right.y]);
    assert_eq!([obs.0[3], obs.0[4]], [lm.knee_left.x, lm.knee_left.y]);
    assert_eq!([obs.0[6], obs.0[7]], [lm.elbow_right.x, lm.elbow_right.y]);
    assert_eq!([obs.0[9], obs.0[10]], [lm.elbow_left.x, lm.elbow_left.y]);
    // The person's right side is at +x.
    assert!(obs.0[0] > 0.0 && obs.0[3] < 0.0);
}

#[test]
fn turning_a_forearm_turns_its_yaw_slot() {
    let base = HumanModel::new(JointAngles::base(), BodyShape::default());
    let before = Observation::from_human(&base);
    let delta = 0.15;
    let mut joints = JointAngles::base();
    joints.set(Joint::ElbowLeft, delta);
    let after = Observation::from_human(&HumanModel::new(joints, BodyShape::default()));
    let turn = (after.0[11] - before.0[11]).rem_euclid(std::f64::consts::TAU);
    let turn = turn.min(std::f64::consts::TAU - turn);
    assert!((turn - delta).abs() < 1e-12, "turned {turn}");
    assert_eq!(after.0[..9], before.0[..9]);
}

#[test]
fn observation_ignores_the_blanket() {
    let still = BeddingEnv::new(EnvConfig::default()).unwrap();
    let moved = BeddingEnv::new(EnvConfig {
        blanket: BlanketPose { x: 0.015, y: 0.0, yaw: 0.0 },
        ..EnvConfig::default()
    })
    .unwrap();
    let (a, oa) = still.reset(3).unwrap();
    let (b, ob) = moved.reset(3).unwrap();
    assert_eq!(a.attempts, b.attempts);
    assert_eq!(oa, ob);
    assert_ne!(a.cloth.positions, b.cloth.positions);
}

#[test]
fn dropping_in_place_keeps_the_head_clear() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    for seed in [1, 2] {
        let (s, _) = env.reset(seed).unwrap();
        for p in [[0.0, 0.3], [0.2, -0.2]] {
            let o = env.execute(&s, &Action::new([p[0], p[1], p[0], p[1]])).unwrap();
            assert_eq!(o.report.head_covered, 0, "seed {seed} at {p:?}");
            assert_eq!(o.reward.distance, 0.0);
        }
    }
}

#[test]
fn long_moves_pay_the_distance_penalty() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    let (s, _) = env.reset(0).unwrap();
    let o = env.execute(&s, &Action::new([0.0, 1.0, 0.0, -0.6])).unwrap();
    assert_eq!(o.reward.distance, -150.0);
    let sum = o.reward.target + o.reward.non_target + o.reward.head + o.reward.distance;
    assert_eq!(o.reward.total, sum);
}

#[test]
fn out_of_box_actions_are_clamped() {
    let (a, moved) = Action::new([0.5, -2.0, 0.1, 0.2]).clamped().unwrap();
    assert!(moved);
    assert_eq!(a, Action::new([ACTION_X, -ACTION_Y, 0.1, 0.2]));
    let (b, moved) = a.clamped().unwrap();
    assert!(!moved && a == b);
    assert!(Action::new([f64::NAN, 0.0, 0.0, 0.0]).clamped().is_err());
    let u = Action::new([0.2, -0.7, 0.44, 1.05]).to_unit();
    assert_eq!(Action::from_unit(u), Action::new([0.2, -0.7, 0.44, 1.05]));
}

#[test]
fn grasp_picks_the_nearest_vertex() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    let human = HumanModel::new(JointAngles::base(), BodyShape::default());
    let cloth = env.blanket_over(&human, &BlanketPose::default()).unwrap();
    for v in [0, 17, 400, cloth.len() - 1] {
        let p = cloth.positions[v];
        assert_eq!(nearest_vertex(&cloth, [p.x, p.y]), v);
    }
    // Midway between two neighbours: the lower index wins.
    let (a, b) = (cloth.positions[5], cloth.positions[6]);
    assert_eq!(nearest_vertex(&cloth, [0.5 * (a.x + b.x), 0.5 * (a.y + b.y)]), 5);
}

#[test]
fn blanket_draws_stay_in_their_box() {
    let mut rng = seed::rng(31);
    for _ in 0..1000 {
        let b = randomize_blanket(&mut rng);
        assert!((-0.02..=0.02).contains(&b.x));
        assert!((-0.25..=0.05).contains(&b.y));
        assert!(b.yaw.abs() <= std::f64::consts::FRAC_PI_4);
    }
}

#[test]
fn fixed_blanket_is_the_same_every_reset() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    let poses: Vec<BlanketPose> = (0..3).map(|s| env.reset(s).unwrap().0.blanket).collect();
    assert!(poses.iter().all(|p| *p == BlanketPose::default()));
}

#[test]
fn random_blanket_still_covers_the_body() {
    let env = BeddingEnv::new(EnvConfig { vary_blanket: true, ..EnvConfig::default() }).unwrap();
    let (s, _) = env.reset(2).unwrap();
    assert_ne!(s.blanket, BlanketPose::default());
    assert!(s.initial.body_covered_fraction() >= RESET_BODY_COVERED);
}

#[test]
fn episode_records_round_trip() {
    let env = BeddingEnv::new(EnvConfig::default()).unwrap();
    let (s, obs) = env.reset(5).unwrap();
    let act = Action::new([0.0, -0.5, 0.6, 0.3]);
    let o = env.execute(&s, &act).unwrap();
    assert!(o.clamped);
    let rec = EpisodeRecord::new(5, "upper_body", obs, s.blanket, act, &o);
    let mut buf = Vec::new();
    rec.write_line(&mut buf).unwrap();
    rec.write_line(&mut buf).unwrap();
    let back = EpisodeRecord::read_all(&buf[..]).unwrap();
    assert_eq!(back, vec![rec.clone(), rec]);
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        EnvConfig { lambda: 0.0, ..EnvConfig::default() },
        EnvConfig { pose_variation: -0.1, ..EnvConfig::default() },
        EnvConfig { transport_speed: 0.0, ..EnvConfig::default() },
    ] {
        assert!(matches!(BeddingEnv::new(cfg), Err(Error::InvalidArgument(_))));
    }
}
