//! Trains a policy directly against the simulator with one-step PPO.
//!
//!     cargo run --release --example ppo [rollouts] [learning_rate]

use std::path::Path;

use bedding::env::{BeddingEnv, EnvConfig};
use bedding::eval::evaluate;
use bedding::human::Target;
use bedding::policy::{ppo_train, PpoConfig};

fn main() -> bedding::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rollouts = args.first().and_then(|s| s.parse().ok()).unwrap_or(320);
    let learning_rate = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1e-3);

    let config = EnvConfig::for_target(Target::UpperBody);
    let env = BeddingEnv::new(config.clone())?;
    let cfg = PpoConfig { rollouts, learning_rate, ..PpoConfig::default() };
    let (model, _) = ppo_train(&env, Target::UpperBody, &cfg, &mut |b| {
        println!("batch {:>3}: mean reward {:7.2}, policy std {:.3}", b.index, b.mean_reward, b.mean_std);
    })?;
    model.save(Path::new("ppo.json"))?;

    let m = evaluate(&model, &config, 10, 1)?;
    println!("deterministic policy: F1 {:.3}, reward {:.1} over 10 trials", m.f1, m.mean_reward);
    Ok(())
}
