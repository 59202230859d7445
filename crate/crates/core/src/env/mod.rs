//! Single grasp-and-release bedding episodes.
//!
//! An episode is one observation, one action and one reward: [`reset`]
//! places a person on the bed and drapes the blanket over them, and
//! [`Environment::execute`] grasps the blanket vertex nearest the grasp
//! point, lifts it, carries it to the release point and drops it.
//!
//! [`reset`]: Environment::reset

pub mod coverage;
mod log;
pub mod toy;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::human::{
    discretize, label_points, place_on_bed, sample_pose_with_shape, vary_body_shape, BodyPointCloud,
    BodyShape, HumanModel, PointPartition, Segment, Target, POINT_SPACING, POSE_VARIATION,
};
use crate::physics::{
    build_cloth, Bed, ClothMesh, ClothParams, ColliderSet, GridResolution, Vec3, CLOTH_LENGTH,
    CLOTH_WIDTH, SETTLE_SPEED,
};
use crate::seed::{self, SimRng};

pub use coverage::{
    coverage_report, covered, reward, CoverageIndex, CoverageReport, RewardBreakdown, COVER_THRESHOLD,
};
pub use log::EpisodeRecord;
pub use toy::ToyEnv;

/// Half-extent of the action box across the bed, m.
pub const ACTION_X: f64 = 0.44;
/// Half-extent of the action box along the bed, m.
pub const ACTION_Y: f64 = 1.05;
/// Height above the mattress the grasped vertex is carried at, m.
pub const LIFT_HEIGHT: f64 = 0.4;
/// End-effector speed for both the lift and the carry, m/s.
pub const TRANSPORT_SPEED: f64 = 0.5;
/// Resets attempted before giving up on a seed.
pub const RESET_RETRIES: usize = 10;
/// Distance from the bed centre to the blanket's head-end edge, m. Puts the
/// edge just above the shoulders of the default body.
pub const BLANKET_EDGE: f64 = 0.58;
/// Gap between the highest point of the body and the blanket when dropped, m.
pub const DROP_CLEARANCE: f64 = 0.03;
/// Step caps for the drape at reset and for the fall after release.
pub const RESET_SETTLE_STEPS: usize = 3000;
pub const RELEASE_SETTLE_STEPS: usize = 1000;
/// Fraction of non-head points a fresh drape must cover.
pub const RESET_BODY_COVERED: f64 = 0.99;
/// Fraction of head points a fresh drape must leave exposed.
pub const RESET_HEAD_EXPOSED: f64 = 0.90;

/// Pose of the four limbs: for the right leg, left leg, right arm and left
/// arm in turn, the knee or elbow position (x, y) and the yaw of the shin or
/// forearm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub [f64; 12]);

impl Observation {
    pub const LEN: usize = 12;

    pub fn from_human(human: &HumanModel) -> Self {
        let limbs = [
            (Segment::ShinRight, human.landmarks().knee_right),
            (Segment::ShinLeft, human.landmarks().knee_left),
            (Segment::ForearmRight, human.landmarks().elbow_right),
            (Segment::ForearmLeft, human.landmarks().elbow_left),
        ];
        let mut out = [0.0; 12];
        for (k, (seg, joint)) in limbs.into_iter().enumerate() {
            let c = human.capsule(seg);
            let axis = c.b - c.a;
            out[3 * k] = joint.x;
            out[3 * k + 1] = joint.y;
            out[3 * k + 2] = axis.y.atan2(axis.x);
        }
        Self(out)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Grasp point followed by release point, both in the bed plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action(pub [f64; 4]);

impl Action {
    pub const LEN: usize = 4;
    pub const HALF_RANGE: [f64; 4] = [ACTION_X, ACTION_Y, ACTION_X, ACTION_Y];

    pub fn new(values: [f64; 4]) -> Self {
        Self(values)
    }

    pub fn grasp(&self) -> [f64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn release(&self) -> [f64; 2] {
        [self.0[2], self.0[3]]
    }

    pub fn move_length(&self) -> f64 {
        (self.0[2] - self.0[0]).hypot(self.0[3] - self.0[1])
    }

    pub fn in_bounds(&self) -> bool {
        self.0.iter().zip(Self::HALF_RANGE).all(|(v, h)| v.abs() <= h)
    }

    /// Clamps into the action box; the flag tells whether anything moved.
    /// Non-finite components are rejected.
    pub fn clamped(&self) -> Result<(Self, bool)> {
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_arg(format!("non-finite action {:?}", self.0)));
        }
        let mut out = self.0;
        for (v, h) in out.iter_mut().zip(Self::HALF_RANGE) {
            *v = v.clamp(-h, h);
        }
        Ok((Self(out), out != self.0))
    }

    /// Maps normalised coordinates in [-1, 1] onto the action box.
    pub fn from_unit(u: [f64; 4]) -> Self {
        Self(std::array::from_fn(|i| u[i] * Self::HALF_RANGE[i]))
    }

    pub fn to_unit(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.0[i] / Self::HALF_RANGE[i])
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [gx, gy, rx, ry] = self.0;
        write!(f, "grasp ({gx:.3}, {gy:.3}) -> release ({rx:.3}, {ry:.3})")
    }
}

/// Offset of the blanket from its default drop placement: a translation in
/// the bed plane and a turn about the vertical through the blanket centre.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlanketPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

/// Sampling box for randomized blanket placements: ±2 cm across the bed,
/// -25 to +5 cm along it and ±45 degrees of yaw.
pub const BLANKET_X_RANGE: (f64, f64) = (-0.02, 0.02);
pub const BLANKET_Y_RANGE: (f64, f64) = (-0.25, 0.05);
pub const BLANKET_YAW_RANGE: (f64, f64) = (-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4);

pub fn randomize_blanket<R: Rng + ?Sized>(rng: &mut R) -> BlanketPose {
    let mut draw = |(lo, hi): (f64, f64)| rng.random_range(lo..=hi);
    let x = draw(BLANKET_X_RANGE);
    let y = draw(BLANKET_Y_RANGE);
    let yaw = draw(BLANKET_YAW_RANGE);
    BlanketPose { x, y, yaw }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub target: Target,
    /// Coverage distance, m.
    pub lambda: f64,
    /// Blanket placement used when `vary_blanket` is off.
    pub blanket: BlanketPose,
    pub vary_pose: bool,
    pub vary_blanket: bool,
    pub vary_body: bool,
    /// Joint perturbation amplitude, rad.
    pub pose_variation: f64,
    pub cloth: ClothParams,
    pub bed: Bed,
    pub transport_speed: f64,
    pub lift_height: f64,
    pub reset_settle_steps: usize,
    pub release_settle_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            target: Target::UpperBody,
            lambda: COVER_THRESHOLD,
            blanket: BlanketPose::default(),
            vary_pose: true,
            vary_blanket: false,
            vary_body: false,
            pose_variation: POSE_VARIATION,
            cloth: ClothParams::default(),
            bed: Bed::default(),
            transport_speed: TRANSPORT_SPEED,
            lift_height: LIFT_HEIGHT,
            reset_settle_steps: RESET_SETTLE_STEPS,
            release_settle_steps: RELEASE_SETTLE_STEPS,
        }
    }
}

impl EnvConfig {
    pub fn for_target(target: Target) -> Self {
        Self { target, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::invalid_arg("coverage threshold must be positive"));
        }
        if !(self.pose_variation >= 0.0) {
            return Err(Error::invalid_arg("pose variation must be non-negative"));
        }
        if !(self.transport_speed > 0.0 && self.lift_height > 0.0) {
            return Err(Error::invalid_arg("transport speed and lift height must be positive"));
        }
        self.cloth.validate()
    }
}

/// A draped scene ready for one action.
#[derive(Debug, Clone)]
pub struct EnvState {
    /// Seed this state was reset from.
    pub seed: u64,
    /// Reset attempts consumed, 1 when the first drape met the contract.
    pub attempts: usize,
    pub human: HumanModel,
    pub cloud: BodyPointCloud,
    pub partition: PointPartition,
    pub colliders: ColliderSet,
    pub blanket: BlanketPose,
    pub cloth: ClothMesh,
    pub observation: Observation,
    /// Coverage straight after the drape.
    pub initial: CoverageReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// The action actually executed, after clamping.
    pub action: Action,
    pub clamped: bool,
    pub report: CoverageReport,
    pub reward: RewardBreakdown,
    /// False when the cloth was still moving at the step cap after release.
    pub settled: bool,
}

/// One-shot episodes: a seeded reset followed by a single action. Anything
/// implementing this can be optimised, trained against and evaluated.
pub trait Environment: Sync {
    type State: Send + Sync;

    fn reset(&self, seed: u64) -> Result<(Self::State, Observation)>;

    fn execute(&self, state: &Self::State, action: &Action) -> Result<Outcome>;
}

#[derive(Debug, Clone)]
pub struct BeddingEnv {
    pub config: EnvConfig,
}

impl BeddingEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    /// Fresh blanket at `pose` relative to the default drop placement, hovering
    /// just above `human`.
    pub fn blanket_over(&self, human: &HumanModel, pose: &BlanketPose) -> Result<ClothMesh> {
        let center = Vec3::new(0.0, 0.5 * CLOTH_LENGTH - BLANKET_EDGE, human.top() + DROP_CLEARANCE);
        let mut cloth =
            build_cloth(&self.config.cloth, CLOTH_WIDTH, CLOTH_LENGTH, GridResolution::default(), center)?;
        cloth.transform(center, pose.yaw, Vec3::new(pose.x, pose.y, 0.0));
        Ok(cloth)
    }

    fn sample_human(&self, rng: &mut SimRng) -> Result<HumanModel> {
        let shape = if self.config.vary_body { vary_body_shape(rng) } else { BodyShape::default() };
        let variation = if self.config.vary_pose { self.config.pose_variation } else { 0.0 };
        let mut last = None;
        for _ in 0..1000 {
            let h = sample_pose_with_shape(rng, variation, shape.clone())?;
            match place_on_bed(&h, &self.config.bed) {
                Ok(placed) => return Ok(placed),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one placement attempted"))
    }

    /// Drapes the blanket over a sampled person. Returns the state and
    /// whether it meets the reset contract.
    fn drape(&self, rng: &mut SimRng, seed: u64, attempt: usize) -> Result<(EnvState, bool)> {
        let human = self.sample_human(rng)?;
        let blanket = if self.config.vary_blanket { randomize_blanket(rng) } else { self.config.blanket };
        let cloud = discretize(&human, POINT_SPACING)?;
        let partition = label_points(&cloud, self.config.target);
        let colliders = ColliderSet::new(self.config.bed, human.capsules().to_vec());
        let mut cloth = self.blanket_over(&human, &blanket)?;
        let settle =
            cloth.settle(&colliders, &self.config.cloth, SETTLE_SPEED, self.config.reset_settle_steps)?;
        let initial = coverage_report(&cloud.points, &partition, &cloth.projected(), self.config.lambda)?;
        // A randomized blanket may drift over the face; only the body must
        // start covered.
        let ok = settle.settled
            && initial.body_covered_fraction() >= RESET_BODY_COVERED
            && (self.config.vary_blanket || initial.head_exposed_fraction() >= RESET_HEAD_EXPOSED);
        let observation = Observation::from_human(&human);
        let state = EnvState {
            seed,
            attempts: attempt,
            human,
            cloud,
            partition,
            colliders,
            blanket,
            cloth,
            observation,
            initial,
        };
        Ok((state, ok))
    }

    /// Runs the grasp, lift, carry and release, calling `observer` after
    /// every physics step.
    pub fn execute_observed(
        &self,
        state: &EnvState,
        action: &Action,
        observer: &mut dyn FnMut(&ClothMesh),
    ) -> Result<Outcome> {
        Ok(self.run(state, action, observer)?.0)
    }

    /// Like [`Environment::execute`], also returning the final blanket.
    pub fn execute_with_cloth(&self, state: &EnvState, action: &Action) -> Result<(Outcome, ClothMesh)> {
        self.run(state, action, &mut |_| {})
    }

    fn run(
        &self,
        state: &EnvState,
        action: &Action,
        observer: &mut dyn FnMut(&ClothMesh),
    ) -> Result<(Outcome, ClothMesh)> {
        let (action, clamped) = action.clamped()?;
        let params = &self.config.cloth;
        let mut cloth = state.cloth.clone();
        let grasp = nearest_vertex(&cloth, action.grasp());
        cloth.anchor(grasp)?;
        let start = cloth.positions[grasp];
        let height = self.config.bed.height + self.config.lift_height;
        let [rx, ry] = action.release();
        let path = [Vec3::new(start.x, start.y, height), Vec3::new(rx, ry, height)];
        cloth.transport_anchor_observed(
            &state.colliders,
            params,
            &path,
            self.config.transport_speed,
            observer,
        )?;
        cloth.release_anchors();
        let settle = cloth.settle_observed(
            &state.colliders,
            params,
            SETTLE_SPEED,
            self.config.release_settle_steps,
            observer,
        )?;
        let report =
            coverage_report(&state.cloud.points, &state.partition, &cloth.projected(), self.config.lambda)?;
        let reward = reward(&report, &action)?;
        Ok((Outcome { action, clamped, report, reward, settled: settle.settled }, cloth))
    }
}

impl Environment for BeddingEnv {
    type State = EnvState;

    /// Samples a person from `seed`, drops the blanket on them and lets it
    /// settle. Drapes that do not settle, leave body points exposed or cover
    /// the head are redrawn from the same stream, up to [`RESET_RETRIES`]
    /// times.
    fn reset(&self, seed: u64) -> Result<(EnvState, Observation)> {
        let mut rng = seed::rng(seed);
        let mut worst = String::new();
        for attempt in 1..=RESET_RETRIES {
            let (state, ok) = self.drape(&mut rng, seed, attempt)?;
            if ok {
                let obs = state.observation;
                return Ok((state, obs));
            }
            worst = format!(
                "body covered {:.3}, head exposed {:.3}",
                state.initial.body_covered_fraction(),
                state.initial.head_exposed_fraction()
            );
        }
        Err(Error::ResetFailed { attempts: RESET_RETRIES, reason: worst })
    }

    fn execute(&self, state: &EnvState, action: &Action) -> Result<Outcome> {
        self.execute_observed(state, action, &mut |_| {})
    }
}

/// Index of the vertex whose bed-plane projection is nearest `point`;
/// the lowest index wins ties.
pub fn nearest_vertex(cloth: &ClothMesh, point: [f64; 2]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in cloth.positions.iter().enumerate() {
        let d = (p.x - point[0]).powi(2) + (p.y - point[1]).powi(2);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

#[cfg(test)]
mod tests;
