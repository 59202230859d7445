use bedding::env::{BeddingEnv, EnvConfig};
use bedding::eval::evaluate;
use bedding::human::Target;
use bedding::policy::{ppo_train, PpoConfig};
fn main() {
    let a: Vec<String> = std::env::args().collect();
    let lr: f64 = a[1].parse().unwrap();
    let n: usize = a[2].parse().unwrap();
    let t0 = std::time::Instant::now();
    let cfg = EnvConfig::for_target(Target::UpperBody);
    let env = BeddingEnv::new(cfg.clone()).unwrap();
    let pc = PpoConfig { rollouts: n, learning_rate: lr, seed: 0, ..PpoConfig::default() };
    let (m, rep) = ppo_train(&env, Target::UpperBody, &pc, &mut |b| eprintln!("batch {} mean {:.1} std {:.3}", b.index, b.mean_reward, b.mean_std)).unwrap();
    let b = &rep.batches;
    let first: f64 = b[..10].iter().map(|x| x.mean_reward).sum::<f64>() / 10.0;
    let last: f64 = b[b.len() - 10..].iter().map(|x| x.mean_reward).sum::<f64>() / 10.0;
    let e = evaluate(&m, &cfg, 50, 1).unwrap();
    println!("lr {lr} first10 {first:.1} last10 {last:.1} gain {:.1} F1 {:.3} mu {:.1} ({:.0}s)", last - first, e.f1, e.mean_reward, t0.elapsed().as_secs_f64());
}
