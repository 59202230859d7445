//! Randomized checks of the invariants each module promises.

use bedding::env::coverage::{COVER_THRESHOLD, MOVE_LIMIT};
use bedding::env::{
    covered, nearest_vertex, reward, Action, BeddingEnv, CoverageIndex, CoverageReport, EnvConfig, Environment,
};
use bedding::human::{
    discretize, label_points, place_on_bed, sample_pose_with_shape, vary_body_shape, Target, POINT_SPACING,
};
use bedding::optimizer::{action_from_search, default_population, CmaState};
use bedding::physics::{build_cloth, Bed, Capsule, ClothMesh, ClothParams, ColliderSet, GridResolution, Vec3};
use bedding::policy::{grad_check, Activation, CheckBatch, Mlp, PolicyModel, PpoConfig, PpoSample};
use bedding::seed;
use proptest::prelude::*;
use rand::Rng;

fn small_cloth(rows: usize, cols: usize, z: f64, jitter_seed: u64) -> ClothMesh {
    let params = ClothParams::default();
    let mut c = build_cloth(&params, 0.4, 0.5, GridResolution { rows, cols }, Vec3::new(0.0, 0.0, z)).unwrap();
    let mut rng = seed::rng(jitter_seed);
    for (p, v) in c.positions.iter_mut().zip(c.velocities.iter_mut()) {
        *p += Vec3::new(rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02));
        *v = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    }
    c
}

fn colliders() -> ColliderSet {
    let arm = Capsule::new(Vec3::new(-0.15, -0.05, 0.05), Vec3::new(0.15, 0.05, 0.05), 0.05, "bar");
    ColliderSet::new(Bed::default(), vec![arm])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spring_forces_sum_to_zero(rows in 2usize..9, cols in 2usize..9, s in any::<u64>()) {
        let c = small_cloth(rows, cols, 0.2, s);
        let total = c.internal_forces(&ClothParams::default()).iter().fold(Vec3::zeros(), |a, f| a + f);
        prop_assert!(total.norm() < 1e-9, "net internal force {}", total.norm());
    }

    #[test]
    fn stepping_keeps_contacts_anchors_and_balance(rows in 3usize..8, cols in 3usize..8, s in any::<u64>(), steps in 1usize..120) {
        let params = ClothParams::default();
        let set = colliders();
        let mut c = small_cloth(rows, cols, 0.12, s);
        let lead = (s as usize) % c.len();
        c.anchor(lead).unwrap();
        let target = c.anchors[&lead] + Vec3::new(0.0, 0.0, 0.05);
        c.anchors.insert(lead, target);
        for _ in 0..steps {
            c.step(&set, &params);
            let total = c.internal_forces(&params).iter().fold(Vec3::zeros(), |a, f| a + f);
            prop_assert!(total.norm() < 1e-9);
            prop_assert!((c.positions[lead] - target).norm() <= 1e-9);
            for p in &c.positions {
                if set.bed.contains_xy(p.x, p.y) {
                    prop_assert!(p.z >= set.bed.height - 1e-9, "below the bed at {p:?}");
                }
                for cap in set.capsules() {
                    prop_assert!(cap.signed_distance(p) >= -1e-6, "inside {} by {}", cap.label, -cap.signed_distance(p));
                }
            }
        }
    }

    #[test]
    fn cloth_trajectories_are_bitwise_repeatable(s in any::<u64>()) {
        let params = ClothParams::default();
        let set = colliders();
        let mut a = small_cloth(5, 4, 0.15, s);
        let mut b = a.clone();
        for _ in 0..50 {
            a.step(&set, &params);
            b.step(&set, &params);
        }
        prop_assert_eq!(&a.positions, &b.positions);
        prop_assert_eq!(&a.velocities, &b.velocities);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn settled_cloth_has_little_kinetic_energy(rows in 3usize..7, cols in 3usize..7, s in any::<u64>()) {
        let params = ClothParams::default();
        let set = ColliderSet::bed_only(Bed::default());
        let mut c = small_cloth(rows, cols, 0.05, s);
        let v = 0.01;
        let out = c.settle(&set, &params, v, 20_000).unwrap();
        prop_assert!(out.settled);
        prop_assert!(c.kinetic_energy() < 0.5 * params.total_mass * v * v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn people_split_cleanly_and_sit_still_on_the_bed(s in any::<u64>(), resize in any::<bool>()) {
        let mut rng = seed::rng(s);
        let shape = if resize { vary_body_shape(&mut rng) } else { Default::default() };
        let human = sample_pose_with_shape(&mut rng, 0.2, shape).unwrap();
        let bed = Bed::default();
        let Ok(placed) = place_on_bed(&human, &bed) else { return Ok(()) };
        let again = place_on_bed(&placed, &bed).unwrap();
        prop_assert_eq!(placed.capsules(), again.capsules());

        let cloud = discretize(&placed, POINT_SPACING).unwrap();
        for t in Target::ALL {
            let p = label_points(&cloud, t);
            let mut all: Vec<usize> = p.target.iter().chain(&p.non_target).chain(&p.head).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..cloud.len()).collect::<Vec<_>>());
            prop_assert!(!p.target.is_empty() && !p.head.is_empty());
        }
        for p in &cloud.points {
            prop_assert!(bed.contains_xy(p.x, p.y));
        }
    }

    #[test]
    fn coverage_index_agrees_with_a_full_scan(
        cloth in prop::collection::vec((-0.6f64..0.6, -0.9f64..0.9), 0..400),
        points in prop::collection::vec((-0.7f64..0.7, -1.0f64..1.0), 1..200),
    ) {
        let cloth: Vec<[f64; 2]> = cloth.into_iter().map(|(x, y)| [x, y]).collect();
        let index = CoverageIndex::new(&cloth, COVER_THRESHOLD).unwrap();
        for (x, y) in points {
            let brute = cloth.iter().any(|v| ((v[0] - x).powi(2) + (v[1] - y).powi(2)).sqrt() < COVER_THRESHOLD);
            prop_assert_eq!(index.covered([x, y]), brute);
            prop_assert_eq!(covered([x, y], &cloth, COVER_THRESHOLD), brute);
        }
    }

    #[test]
    fn nearest_vertex_is_the_first_minimum(s in any::<u64>(), qx in -0.3f64..0.3, qy in -0.3f64..0.3) {
        let mut c = small_cloth(6, 5, 0.1, s);
        // Snap to a coarse lattice so exact ties actually occur.
        for p in c.positions.iter_mut() {
            p.x = (p.x * 20.0).round() / 20.0;
            p.y = (p.y * 20.0).round() / 20.0;
        }
        let q = [(qx * 20.0).round() / 20.0, (qy * 20.0).round() / 20.0];
        let d = |i: usize| (c.positions[i].x - q[0]).powi(2) + (c.positions[i].y - q[1]).powi(2);
        let best = (0..c.len()).fold(0, |b, i| if d(i) < d(b) { i } else { b });
        prop_assert_eq!(nearest_vertex(&c, q), best);
    }
}

fn report_strategy() -> impl Strategy<Value = (usize, usize, usize, usize, usize, usize)> {
    (1usize..800, 0usize..1500, 1usize..300).prop_flat_map(|(t, n, h)| (Just(t), 0..=t, Just(n), 0..=n, Just(h), 0..=h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn reward_adds_up_and_never_beats_one_hundred(
        (tt, tu, nt, nu, ht, hc) in report_strategy(),
        a in prop::array::uniform4(-1.2f64..1.2),
    ) {
        let r = CoverageReport::from_counts((tu, tt), (nu, nt), (hc, ht)).unwrap();
        let action = Action::new(a);
        let w = reward(&r, &action).unwrap();
        prop_assert_eq!(w.total, w.target + w.non_target + w.head + w.distance);
        prop_assert!(w.total <= 100.0);
        let perfect = tu == tt && nu == 0 && hc == 0 && action.move_length() < MOVE_LIMIT;
        prop_assert_eq!(w.total == 100.0, perfect);
    }

    #[test]
    fn reward_is_monotone_in_each_count((tt, tu, nt, nu, ht, hc) in report_strategy()) {
        let a = Action::new([0.0; 4]);
        let r = |t, n, h| reward(&CoverageReport::from_counts((t, tt), (n, nt), (h, ht)).unwrap(), &a).unwrap().total;
        let base = r(tu, nu, hc);
        if tu < tt { prop_assert!(r(tu + 1, nu, hc) >= base); }
        if nu < nt { prop_assert!(r(tu, nu + 1, hc) <= base); }
        if hc < ht { prop_assert!(r(tu, nu, hc + 1) <= base); }
    }

    #[test]
    fn search_points_always_map_inside_the_box(x in prop::array::uniform4(-1e6f64..1e6)) {
        prop_assert!(action_from_search(&x).in_bounds());
    }

    #[test]
    fn clamping_lands_in_the_box_and_is_idempotent(a in prop::array::uniform4(-5.0f64..5.0)) {
        let (c, moved) = Action::new(a).clamped().unwrap();
        prop_assert!(c.in_bounds());
        prop_assert_eq!(moved, !Action::new(a).in_bounds());
        prop_assert_eq!(c.clamped().unwrap(), (c, false));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cma_covariance_stays_positive_definite(s in any::<u64>(), kind in 0usize..3, sigma in 0.05f64..3.0) {
        let f = |x: &[f64]| match kind {
            0 => x.iter().map(|v| v * v).sum::<f64>(),
            1 => x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum(),
            _ => x.iter().enumerate().map(|(i, v)| 10f64.powi(i as i32 * 2) * v * v).sum(),
        };
        let mut rng = seed::rng(s);
        let mut es = CmaState::new(&[0.5; 4], sigma, default_population(4)).unwrap();
        for _ in 0..300 {
            let xs = es.ask(&mut rng).unwrap();
            let fs: Vec<f64> = xs.iter().map(|x| f(x)).collect();
            es.tell(&xs, &fs).unwrap();
            prop_assert!(es.is_symmetric());
            prop_assert!(es.min_eigenvalue() > 0.0);
        }
    }

    #[test]
    fn policy_outputs_stay_in_the_action_box(s in any::<u64>(), obs in prop::array::uniform12(-50.0f64..50.0)) {
        let mut rng = seed::rng(s);
        let mut m = PolicyModel::supervised(Target::UpperBody, &mut rng);
        for p in m.params_mut() {
            *p *= 40.0;
        }
        let (a, _) = m.forward(&obs).unwrap();
        prop_assert!(a.in_bounds());
    }

    #[test]
    fn loss_gradients_match_central_differences(s in any::<u64>(), n in 1usize..6) {
        let mut rng = seed::rng(s);
        let mut m = PolicyModel::supervised(Target::LeftArm, &mut rng);
        m.net = Mlp::random(&[12, 7, 5, 4], Activation::Relu, Activation::Tanh, &mut rng).unwrap();
        let obs = |rng: &mut seed::SimRng| -> [f64; 12] { std::array::from_fn(|_| rng.random_range(-1.0..1.0)) };
        let pairs: Vec<_> = (0..n)
            .map(|_| (obs(&mut rng), std::array::from_fn(|_| rng.random_range(-0.9..0.9))))
            .collect();
        let err = grad_check(&m, &CheckBatch::Mse(pairs)).unwrap();
        prop_assert!(err < 1e-4, "mse gradient error {}", err);

        let mut p = PolicyModel::ppo(Target::LeftArm, -0.7, &mut rng);
        p.net = Mlp::random(&[12, 6, 6, 4], Activation::Tanh, Activation::Tanh, &mut rng).unwrap();
        p.value = Some(Mlp::random(&[12, 6, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap());
        let samples: Vec<PpoSample> = (0..n)
            .map(|_| {
                let observation = obs(&mut rng);
                PpoSample {
                    observation,
                    raw: std::array::from_fn(|_| rng.random_range(-1.2..1.2)),
                    log_prob_old: rng.random_range(-2.0..2.0),
                    advantage: rng.random_range(-1.0..1.0),
                    ret: rng.random_range(-1.0..1.0),
                }
            })
            .collect();
        let config = PpoConfig { entropy_coef: 0.01, ..PpoConfig::default() };
        let batch = CheckBatch::Ppo { samples, config };
        prop_assert!(grad_check(&p, &batch).unwrap() < 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn episodes_repeat_bit_for_bit(s in any::<u64>(), a in prop::array::uniform4(-1.0f64..1.0)) {
        let env = BeddingEnv::new(EnvConfig::default()).unwrap();
        let action = Action::from_unit(a);
        let (s1, o1) = env.reset(s).unwrap();
        let (s2, o2) = env.reset(s).unwrap();
        prop_assert_eq!(o1, o2);
        let r1 = env.execute(&s1, &action).unwrap();
        let r2 = env.execute(&s2, &action).unwrap();
        prop_assert_eq!(r1.reward.total.to_bits(), r2.reward.total.to_bits());
        prop_assert_eq!(r1, r2);
    }
}
