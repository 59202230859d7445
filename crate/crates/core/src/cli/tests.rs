use std::collections::HashSet;

use super::*;

#[test]
fn defaults_survive_a_toml_round_trip() {
    let cfg = RunConfig::default();
    let text = cfg.to_toml().unwrap();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
}

#[test]
fn unknown_keys_are_rejected_at_every_level() {
    for text in [
        "schema = 1\nbogus = 3",
        "[env]\ntarget = \"upper_body\"\nblanket_colour = \"red\"",
        "[collect]\nrollout = 10",
        "[train.ppo]\nlr = 0.1",
        "[eval]\nconditions = [\"sideways\"]",
    ] {
        let e = RunConfig::from_toml(text).unwrap_err();
        assert_eq!(e.category(), "config", "{text}");
    }
}

#[test]
fn other_schema_versions_are_refused() {
    assert!(matches!(RunConfig::from_toml("schema = 2"), Err(Error::Config(_))));
}

#[test]
fn flags_beat_the_file_and_the_file_beats_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "seed = 5\n[collect]\nrollouts = 40\nkeep_above = 80.0\n[env]\ntarget = \"left_arm\"\n").unwrap();

    let cfg = resolve(Some(&path), &Overrides::default(), Command::Collect).unwrap();
    assert_eq!((cfg.seed, cfg.collect.rollouts, cfg.collect.keep_above), (5, 40, 80.0));
    assert_eq!(cfg.env.target, Target::LeftArm);
    assert_eq!(cfg.collect.pose_budget, RunConfig::default().collect.pose_budget);

    let flags = Overrides {
        seed: Some(9),
        rollouts: Some(12),
        output: Some("x.csv".into()),
        ..Overrides::default()
    };
    let cfg = resolve(Some(&path), &flags, Command::Collect).unwrap();
    assert_eq!((cfg.seed, cfg.collect.rollouts, cfg.collect.keep_above), (9, 12, 80.0));
    assert_eq!(cfg.collect.output, PathBuf::from("x.csv"));
    assert_eq!(cfg.train.ppo.seed, 9);
    assert_eq!(cfg.train.supervised.seed, 9);
}

#[test]
fn output_flag_lands_in_the_running_command() {
    let flags = Overrides { output: Some("o".into()), log: Some("l".into()), ..Overrides::default() };
    let mut c = RunConfig::default();
    flags.apply(&mut c, Command::Train);
    assert_eq!(c.train.output, PathBuf::from("o"));
    assert_eq!(c.replay.log, PathBuf::from("l"));
    let mut c = RunConfig::default();
    flags.apply(&mut c, Command::Eval);
    assert_eq!((c.eval.output.clone(), c.eval.log.clone()), (PathBuf::from("o"), PathBuf::from("l")));
}

#[test]
fn invalid_values_fail_validation() {
    let mut c = RunConfig::default();
    c.eval.trials = 0;
    assert!(matches!(c.validate(), Err(Error::InvalidArgument(_))));
    let mut c = RunConfig::default();
    c.train.ppo.learning_rate = -1.0;
    assert!(c.validate().is_err());
    let mut c = RunConfig::default();
    c.replay.stride = 0;
    assert!(c.validate().is_err());
}

#[test]
fn every_category_has_its_own_exit_code() {
    let errors = [
        Error::InvalidArgument(String::new()),
        Error::InvalidState(String::new()),
        Error::OutOfBed(String::new()),
        Error::ResetFailed { attempts: 1, reason: String::new() },
        Error::Config(String::new()),
        Error::Format(String::new()),
        Error::Io(std::io::Error::other("x")),
        Error::Json(serde_json::from_str::<u8>("x").unwrap_err()),
    ];
    let codes: HashSet<u8> = errors.iter().map(exit_code).collect();
    assert_eq!(codes.len(), errors.len());
    assert!(!codes.contains(&0));
}

#[test]
fn missing_dataset_is_an_argument_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.train.dataset = dir.path().join("nope.csv");
    cfg.train.output = dir.path().join("m.json");
    assert!(matches!(cmd_train(&cfg), Err(Error::InvalidArgument(_))));
    assert!(!cfg.train.output.exists());
}

#[test]
fn worker_pools_run_the_closure() {
    assert_eq!(with_workers(2, || Ok(rayon::current_num_threads())).unwrap(), 2);
    assert_eq!(with_workers(0, || Ok(7)).unwrap(), 7);
}
