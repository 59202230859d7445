//! Scores one model per target under the original setting and both
//! randomizations, printing the table the `eval` command writes.
//!
//!     cargo run --release --example compare [trials] [model.json ...]
//!
//! With no model files, untrained networks stand in for every target, which
//! is enough to see the harness work.

use std::path::Path;

use bedding::env::EnvConfig;
use bedding::eval::{compare_conditions, markdown_table, Condition};
use bedding::human::Target;
use bedding::policy::PolicyModel;
use bedding::seed;

fn main() -> bedding::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials = args.first().and_then(|s| s.parse().ok()).unwrap_or(2);
    let models = if args.len() > 1 {
        args[1..].iter().map(|p| PolicyModel::load(Path::new(p))).collect::<bedding::Result<Vec<_>>>()?
    } else {
        Target::ALL.iter().map(|&t| PolicyModel::supervised(t, &mut seed::rng(1))).collect()
    };
    let rows = compare_conditions(&models, &Condition::ALL, &EnvConfig::default(), trials, 0)?;
    print!("{}", markdown_table(&rows));
    Ok(())
}
