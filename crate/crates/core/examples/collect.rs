//! Mines high-reward actions with CMA-ES, one pose at a time, and keeps the
//! rows above the reward filter.
//!
//!     cargo run --release --example collect [rollouts] [target] [out.csv]

use std::path::Path;

use bedding::env::{BeddingEnv, EnvConfig};
use bedding::human::Target;
use bedding::optimizer::{collect_dataset, filter_dataset, CollectConfig, KEEP_ABOVE};

fn main() -> bedding::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rollouts = args.first().and_then(|s| s.parse().ok()).unwrap_or(200);
    let target: Target = args.get(1).map_or(Ok(Target::UpperBody), |s| s.parse())?;
    let out = args.get(2).map_or("dataset.csv", String::as_str);

    let env = BeddingEnv::new(EnvConfig::for_target(target))?;
    let cfg = CollectConfig { rollouts, ..CollectConfig::default() };
    let collection = collect_dataset(&env, target, &cfg)?;
    for p in &collection.poses {
        println!(
            "pose {:>20}: {:>3} rollouts, best {:6.2} at {}",
            p.pose_seed, p.rollouts, p.best_reward, p.best_action
        );
    }
    let kept = filter_dataset(&collection.dataset, KEEP_ABOVE);
    kept.save(Path::new(out))?;
    println!("{} of {} rollouts scored above {KEEP_ABOVE} -> {out}", kept.len(), collection.dataset.len());
    Ok(())
}
