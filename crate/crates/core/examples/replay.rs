//! Runs a short configured evaluation, then replays one logged episode into
//! per-frame blanket snapshots, the same path the `eval` and `replay`
//! commands take.
//!
//!     cargo run --release --example replay [out_dir]

use std::path::PathBuf;

use bedding::cli::{cmd_eval, cmd_replay, RunConfig};
use bedding::human::Target;
use bedding::policy::PolicyModel;
use bedding::seed;

fn main() -> bedding::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "replay_out".into()));
    std::fs::create_dir_all(&dir)?;
    let model = dir.join("model.json");
    PolicyModel::supervised(Target::UpperBody, &mut seed::rng(2)).save(&model)?;

    let mut cfg = RunConfig::from_toml(
        r#"
        schema = 1
        seed = 3
        [eval]
        trials = 2
        [replay]
        episode = 1
        stride = 20
        "#,
    )?;
    cfg.eval.models = vec![model];
    for p in [&mut cfg.eval.output, &mut cfg.eval.markdown, &mut cfg.eval.trials_output, &mut cfg.eval.log] {
        *p = dir.join(&*p);
    }
    cfg.replay.log = cfg.eval.log.clone();
    cfg.replay.frames = dir.join("frames");

    let rows = cmd_eval(&cfg)?;
    println!("logged {} episodes", rows[0].metrics.trials.len());
    let s = cmd_replay(&cfg)?;
    println!("{} frames over {} steps, reward {} matches the log", s.frames, s.steps, s.reward);
    println!("frames in {}", cfg.replay.frames.display());
    Ok(())
}
