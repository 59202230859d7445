//! Every default a run starts from, gathered in one place. The owning
//! modules define them; this table only re-exports.
//!
//! | name | value | meaning |
//! |---|---|---|
//! | `POINT_SPACING` | 0.03 m | body point grid |
//! | `COVER_THRESHOLD` | 0.028 m | planar distance below which a point counts as covered |
//! | `TARGET_WEIGHT` | 100 | reward for uncovering every target point |
//! | `NON_TARGET_WEIGHT` | 100 | penalty for uncovering every non-target point |
//! | `HEAD_WEIGHT` | 200 | penalty for covering every head point |
//! | `MOVE_PENALTY`, `MOVE_LIMIT` | 150, 1.5 m | penalty for long grasp-to-release moves |
//! | `ACTION_X`, `ACTION_Y` | 0.44 m, 1.05 m | half-extent of the action box |
//! | `POSE_VARIATION` | 0.2 rad | joint noise around the resting pose |
//! | `BLANKET_X_RANGE` | ±0.02 m | randomized blanket offset across the bed |
//! | `BLANKET_Y_RANGE` | -0.25..0.05 m | randomized blanket offset along the bed |
//! | `BLANKET_YAW_RANGE` | ±45° | randomized blanket rotation |
//! | `STATURE_RANGE` | 1.60..1.85 m | randomized body size |
//! | `POSE_BUDGET` | 300 | CMA-ES rollouts per pose |
//! | `SOLVED_REWARD` | 95 | CMA-ES moves on once a pose reaches this |
//! | `KEEP_ABOVE` | 90 | dataset filter |
//! | `DEFAULT_TRIALS` | 100 | evaluation episodes |
//! | `SUPERVISED_HIDDEN`, `PPO_HIDDEN` | 32, 50 | hidden layer widths |
//!
//! Cloth constants live in [`ClothParams::default`], supervised training in
//! [`SupervisedConfig::default`] (100 epochs, batch 8, Adam at 1e-3) and PPO
//! in [`PpoConfig::default`] (Adam at 5e-5, clip 0.2).

pub use crate::env::coverage::{
    COVER_THRESHOLD, HEAD_WEIGHT, MOVE_LIMIT, MOVE_PENALTY, NON_TARGET_WEIGHT, TARGET_WEIGHT,
};
pub use crate::env::{
    ACTION_X, ACTION_Y, BLANKET_EDGE, BLANKET_X_RANGE, BLANKET_Y_RANGE, BLANKET_YAW_RANGE, LIFT_HEIGHT,
    RELEASE_SETTLE_STEPS, RESET_BODY_COVERED, RESET_HEAD_EXPOSED, RESET_RETRIES, RESET_SETTLE_STEPS,
    TRANSPORT_SPEED,
};
pub use crate::eval::DEFAULT_TRIALS;
pub use crate::human::{POINT_SPACING, POSE_VARIATION, STATURE_RANGE};
pub use crate::optimizer::{KEEP_ABOVE, POPULATION, POSE_BUDGET, SIGMA0, SOLVED_REWARD};
pub use crate::physics::cloth::{ClothParams, CLOTH_COLS, CLOTH_LENGTH, CLOTH_ROWS, CLOTH_WIDTH, SETTLE_SPEED};
pub use crate::policy::{PpoConfig, SupervisedConfig, PPO_HIDDEN, SUPERVISED_HIDDEN};
