//! Fits the small policy network to a filtered dataset and scores it.
//!
//!     cargo run --release --example supervised [dataset.csv] [model.json]
//!
//! Run the `collect` example first, or point at any dataset CSV.

use std::path::Path;

use bedding::env::EnvConfig;
use bedding::eval::evaluate;
use bedding::optimizer::Dataset;
use bedding::policy::{train_supervised, SupervisedConfig};

fn main() -> bedding::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let data = args.first().map_or("dataset.csv", String::as_str);
    let out = args.get(1).map_or("model.json", String::as_str);

    let ds = Dataset::load(Path::new(data))?;
    let target = ds.rows.first().map(|r| r.target).ok_or_else(|| {
        bedding::Error::InvalidArgument(format!("{data} has no rows"))
    })?;
    let (model, report) = train_supervised(&ds, target, &SupervisedConfig::default())?;
    for (i, l) in report.losses.iter().enumerate().step_by(10) {
        println!("epoch {i:>3}  mse {l:.5}");
    }
    model.save(Path::new(out))?;

    let m = evaluate(&model, &EnvConfig::for_target(target), 10, 1)?;
    println!("{}: F1 {:.3}, reward {:.1} (±{:.1}) over 10 trials", target.name(), m.f1, m.mean_reward, m.std_reward);
    Ok(())
}
