//! One grasp-and-release episode: reset, act, and read the reward apart.
//!
//!     cargo run --release --example episode [seed] [gx gy rx ry]

use bedding::env::{Action, BeddingEnv, EnvConfig, Environment, EpisodeRecord};
use bedding::human::Target;

fn main() -> bedding::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let seed = args.first().copied().unwrap_or(0.0) as u64;
    // Pull the blanket from the chest down toward the knees.
    let action = match args.get(1..5) {
        Some(a) => Action::new([a[0], a[1], a[2], a[3]]),
        None => Action::new([0.0, -0.2, 0.0, 0.45]),
    };

    let env = BeddingEnv::new(EnvConfig::for_target(Target::UpperBody))?;
    let (state, obs) = env.reset(seed)?;
    println!("reset in {} attempt(s); observation {:.3?}", state.attempts, obs.0);
    println!(
        "initially {:.1}% of the body covered",
        100.0 * state.initial.body_covered_fraction()
    );

    let outcome = env.execute(&state, &action)?;
    let r = &outcome.reward;
    let c = &outcome.report;
    println!("action {}{}", outcome.action, if outcome.clamped { " (clamped)" } else { "" });
    println!("target uncovered     {:>4} / {:<4} -> {:+8.2}", c.target_uncovered, c.target_total, r.target);
    println!("non-target uncovered {:>4} / {:<4} -> {:+8.2}", c.non_target_uncovered, c.non_target_total, r.non_target);
    println!("head covered         {:>4} / {:<4} -> {:+8.2}", c.head_covered, c.head_total, r.head);
    println!("move length {:.3} m              -> {:+8.2}", outcome.action.move_length(), r.distance);
    println!("reward {:.2}, settled {}", r.total, outcome.settled);

    let mut line = Vec::new();
    EpisodeRecord::new(seed, Target::UpperBody.name(), obs, state.blanket, action, &outcome).write_line(&mut line)?;
    print!("log line: {}", String::from_utf8_lossy(&line));
    Ok(())
}
