//! The four commands, called through the library and through the binary.

use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use bedding::cli::{cmd_collect, cmd_eval, cmd_replay, cmd_train, RunConfig};
use bedding::env::{BeddingEnv, EnvConfig, Environment, EpisodeRecord, Observation};
use bedding::eval::Condition;
use bedding::human::{sample_pose, Target};
use bedding::optimizer::{Dataset, DatasetRow};
use bedding::physics::Frame;
use bedding::policy::{Mode, PolicyModel};
use bedding::seed;

fn run_in(dir: &Path, seed: u64) -> RunConfig {
    let mut c = RunConfig { seed, ..RunConfig::default() };
    c.collect.output = dir.join("dataset.csv");
    c.collect.all_rows = dir.join("rollouts.csv");
    c.train.dataset = dir.join("dataset.csv");
    c.train.output = dir.join("model.json");
    c.train.curve = dir.join("curve.csv");
    c.eval.models = vec![dir.join("model.json")];
    c.eval.output = dir.join("results.csv");
    c.eval.markdown = dir.join("results.md");
    c.eval.trials_output = dir.join("trials.csv");
    c.eval.log = dir.join("episodes.jsonl");
    c.replay.log = dir.join("episodes.jsonl");
    c.replay.frames = dir.join("frames");
    c.sync_seeds();
    c
}

/// Rows labelled by a fixed random network, over real observations.
fn teacher_dataset(path: &Path, rows: usize) {
    let teacher = PolicyModel::supervised(Target::UpperBody, &mut seed::rng(3));
    let mut rng = seed::rng(4);
    let ds = Dataset {
        rows: (0..rows)
            .map(|i| {
                let obs = Observation::from_human(&sample_pose(&mut rng, 0.2).unwrap());
                DatasetRow {
                    observation: obs,
                    action: teacher.forward(&obs.0).unwrap().0,
                    reward: 99.0,
                    target: Target::UpperBody,
                    pose_seed: i as u64,
                }
            })
            .collect(),
    };
    ds.save(path).unwrap();
}

#[test]
fn collect_smoke_run_writes_every_rollout() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 3);
    c.collect.rollouts = 10;
    let s = cmd_collect(&c).unwrap();
    assert_eq!(s.rollouts, 10);
    let all = Dataset::load(&c.collect.all_rows).unwrap();
    assert_eq!(all.len(), 10);
    let kept = Dataset::load(&c.collect.output).unwrap();
    assert_eq!(kept.len(), s.kept);
    assert!(kept.rows.iter().all(|r| r.reward > 90.0));
    assert_eq!(c.collect.keep_above, 90.0);

    let first = fs::read(&c.collect.all_rows).unwrap();
    c.workers = 1;
    cmd_collect(&c).unwrap();
    assert_eq!(fs::read(&c.collect.all_rows).unwrap(), first, "worker count changed the output");
}

#[test]
fn supervised_train_fits_a_teacher() {
    let dir = tempfile::tempdir().unwrap();
    let c = run_in(dir.path(), 0);
    teacher_dataset(&c.train.dataset, 24);
    let s = cmd_train(&c).unwrap();
    assert!(s.last < 1e-3, "final mse {}", s.last);
    let curve = fs::read_to_string(&c.train.curve).unwrap();
    assert_eq!(curve.lines().count(), 1 + c.train.supervised.epochs);

    let saved = fs::read(&c.train.output).unwrap();
    let model = PolicyModel::load(&c.train.output).unwrap();
    assert_eq!(model.to_json().unwrap() + "\n", String::from_utf8(saved.clone()).unwrap());
    cmd_train(&c).unwrap();
    assert_eq!(fs::read(&c.train.output).unwrap(), saved);
}

#[test]
fn supervised_train_rejects_another_targets_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 0);
    teacher_dataset(&c.train.dataset, 4);
    c.env.target = Target::LeftArm;
    assert_eq!(cmd_train(&c).unwrap_err().category(), "invalid-argument");
}

#[test]
fn ppo_smoke_run_writes_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 5);
    c.train.mode = Mode::Ppo;
    c.train.ppo.rollouts = 64;
    let s = cmd_train(&c).unwrap();
    assert!(s.last.is_finite());
    let m = PolicyModel::load(&c.train.output).unwrap();
    assert_eq!((m.mode, m.target), (Mode::Ppo, Target::UpperBody));
    assert_eq!(fs::read_to_string(&c.train.curve).unwrap().lines().count(), 1 + 2);
}

fn with_random_model(dir: &Path, target: Target, name: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    PolicyModel::supervised(target, &mut seed::rng(11)).save(&path).unwrap();
    path
}

#[test]
fn eval_writes_one_record_per_trial_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 8);
    c.eval.models = vec![with_random_model(dir.path(), Target::UpperBody, "model.json")];
    c.eval.trials = 5;
    let rows = cmd_eval(&c).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].metrics.trials.len(), 5);
    let log = EpisodeRecord::read_all(&fs::read(&c.eval.log).unwrap()[..]).unwrap();
    assert_eq!(log.len(), 5);
    assert_eq!(fs::read_to_string(&c.eval.trials_output).unwrap().lines().count(), 6);

    let files = [&c.eval.output, &c.eval.markdown, &c.eval.trials_output, &c.eval.log];
    let before: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
    cmd_eval(&c).unwrap();
    let after: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn eval_matrix_has_a_row_per_target_and_condition() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 2);
    c.eval.models = vec![
        with_random_model(dir.path(), Target::UpperBody, "a.json"),
        with_random_model(dir.path(), Target::RightLowerLeg, "b.json"),
    ];
    c.eval.trials = 1;
    c.eval.conditions = Condition::ALL.to_vec();
    let rows = cmd_eval(&c).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(fs::read_to_string(&c.eval.output).unwrap().lines().count(), 7);
    assert_eq!(fs::read_to_string(&c.eval.markdown).unwrap().lines().count(), 4);
}

#[test]
fn replay_reproduces_a_logged_episode() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 6);
    c.eval.models = vec![with_random_model(dir.path(), Target::UpperBody, "model.json")];
    c.eval.trials = 2;
    c.eval.conditions = vec![Condition::RandomBlanket];
    cmd_eval(&c).unwrap();
    let log = EpisodeRecord::read_all(&fs::read(&c.eval.log).unwrap()[..]).unwrap();

    c.replay.episode = 1;
    let s = cmd_replay(&c).unwrap();
    assert!(s.frames > 1);
    assert_eq!(s.reward.to_bits(), log[1].reward.to_bits());

    let env = BeddingEnv::new(EnvConfig { vary_blanket: true, ..c.env.clone() }).unwrap();
    let (state, _) = env.reset(log[1].seed).unwrap();
    let first = Frame::read(&c.replay.frames.join("frame_00000.json")).unwrap();
    assert_eq!(first, Frame::capture(&state.cloth, 0));
    assert_eq!(fs::read_dir(&c.replay.frames).unwrap().count(), s.frames);

    c.replay.episode = 2;
    assert_eq!(cmd_replay(&c).unwrap_err().category(), "invalid-argument");
}

#[test]
fn replay_notices_a_tampered_log() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = run_in(dir.path(), 6);
    c.eval.models = vec![with_random_model(dir.path(), Target::UpperBody, "model.json")];
    c.eval.trials = 1;
    cmd_eval(&c).unwrap();
    let mut rec = EpisodeRecord::read_all(&fs::read(&c.eval.log).unwrap()[..]).unwrap().remove(0);
    rec.reward += 1e-9;
    let mut buf = Vec::new();
    rec.write_line(&mut buf).unwrap();
    fs::write(&c.replay.log, buf).unwrap();
    assert_eq!(cmd_replay(&c).unwrap_err().category(), "invalid-state");
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_bedding"))
}

#[test]
fn binary_reports_error_categories() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "schema = 1\nmystery = true\n").unwrap();
    let out = bin().args(["collect", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[config]"));

    let out = bin().args(["train", "--dataset"]).arg(dir.path().join("none.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[invalid-argument]"));
}

#[test]
fn binary_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    fs::write(&file, "seed = 4\n[eval]\ntrials = 7\n").unwrap();
    let out = bin()
        .args(["eval", "--seed", "9", "--workers", "1", "--print-config", "--config"])
        .arg(&file)
        .output()
        .unwrap();
    assert!(out.status.success());
    let cfg = RunConfig::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!((cfg.seed, cfg.workers, cfg.eval.trials), (9, 1, 7));
}

#[test]
fn binary_runs_a_tiny_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = |p: &mut Proc| {
        let out = p.current_dir(d).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    ok(bin().args(["collect", "--rollouts", "8", "--keep-above", "-1000", "--seed", "1"]));
    ok(bin().args(["train", "--seed", "1"]));
    ok(bin().args(["eval", "--trials", "2", "--seed", "1"]));
    ok(bin().args(["replay", "--episode", "1"]));
    for f in ["dataset.csv", "rollouts.csv", "model.json", "results.csv", "results.md", "episodes.jsonl"] {
        assert!(d.join(f).exists(), "{f} missing");
    }
    assert!(d.join("frames/frame_00000.json").exists());
}
