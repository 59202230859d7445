//! Samples a few people, including resized ones, and shows how each target
//! splits their body points.
//!
//!     cargo run --release --example body_points [seed]

use bedding::env::Observation;
use bedding::human::{discretize, label_points, sample_pose_with_shape, vary_body_shape, BodyShape, Target, POINT_SPACING};
use bedding::seed;

fn main() -> bedding::Result<()> {
    let master: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut rng = seed::rng(master);
    for i in 0..3 {
        let shape = if i == 0 { BodyShape::default() } else { vary_body_shape(&mut rng) };
        let human = sample_pose_with_shape(&mut rng, 0.2, shape)?;
        let cloud = discretize(&human, POINT_SPACING)?;
        println!("person {i}: stature {:.3} m, {} points", human.stature(), cloud.len());
        let obs = Observation::from_human(&human);
        let knees = &obs.0[..6];
        println!("  right knee ({:+.3}, {:+.3}) shin yaw {:+.3}", knees[0], knees[1], knees[2]);
        for t in Target::ALL {
            let p = label_points(&cloud, t);
            println!("  {:<16} target {:>4}  other {:>4}  head {:>3}", t.name(), p.target.len(), p.non_target.len(), p.head.len());
        }
    }
    Ok(())
}
