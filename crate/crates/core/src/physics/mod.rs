//! Cloth dynamics and the static colliders it drapes over.

pub mod cloth;
pub mod collide;
pub mod frame;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use cloth::{
    build_cloth, ClothMesh, ClothParams, GridResolution, SettleOutcome, Spring, SpringClass,
    CLOTH_COLS, CLOTH_LENGTH, CLOTH_ROWS, CLOTH_WIDTH, SETTLE_SPEED,
};
pub use collide::{Bed, Capsule, ColliderSet};
pub use frame::Frame;
