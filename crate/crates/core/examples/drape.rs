//! Drops the blanket onto a person lying in the resting pose and reports how
//! the settled cloth covers them.
//!
//!     cargo run --release --example drape [frames_dir]

use std::path::PathBuf;

use bedding::env::{coverage_report, EnvConfig, BLANKET_EDGE};
use bedding::human::{discretize, label_points, place_on_bed, BodyShape, HumanModel, JointAngles, Target, POINT_SPACING};
use bedding::physics::{build_cloth, ColliderSet, Frame, GridResolution, Vec3, CLOTH_LENGTH, CLOTH_WIDTH, SETTLE_SPEED};

fn main() -> bedding::Result<()> {
    let frames = std::env::args().nth(1).map(PathBuf::from);
    let config = EnvConfig::default();
    let human = place_on_bed(&HumanModel::new(JointAngles::base(), BodyShape::default()), &config.bed)?;
    let colliders = ColliderSet::new(config.bed, human.capsules().to_vec());

    let center = Vec3::new(0.0, 0.5 * CLOTH_LENGTH - BLANKET_EDGE, human.top() + 0.03);
    let mut cloth = build_cloth(&config.cloth, CLOTH_WIDTH, CLOTH_LENGTH, GridResolution::default(), center)?;
    println!("{} vertices, {} springs", cloth.len(), cloth.springs.len());

    if let Some(dir) = &frames {
        std::fs::create_dir_all(dir)?;
    }
    let mut step = 0;
    let outcome = cloth.settle_observed(&colliders, &config.cloth, SETTLE_SPEED, config.reset_settle_steps, &mut |c| {
        step += 1;
        if let Some(dir) = &frames {
            if step % 25 == 0 {
                let _ = Frame::capture(c, step / 25).write(&dir.join(format!("frame_{:05}.json", step / 25)));
            }
        }
    })?;
    println!(
        "settled: {} after {} steps ({:.2} s simulated), max speed {:.4} m/s",
        outcome.settled, outcome.steps, cloth.time, cloth.max_speed()
    );

    let cloud = discretize(&human, POINT_SPACING)?;
    let partition = label_points(&cloud, Target::EntireBody);
    let report = coverage_report(&cloud.points, &partition, &cloth.projected(), config.lambda)?;
    println!(
        "{} body points: {:.1}% of the body covered, {:.1}% of the head exposed",
        cloud.len(),
        100.0 * report.body_covered_fraction(),
        100.0 * report.head_exposed_fraction()
    );
    Ok(())
}
