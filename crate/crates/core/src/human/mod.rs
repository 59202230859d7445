//! Capsule human lying supine on the bed.
//!
//! Bed frame: origin at the centre of the mattress top, x across the bed, y
//! along it toward the foot end, z up. The person lies face up with the head
//! toward -y, so their right side is at +x.
//!
//! Limb placement is kinematic: every capsule rests on the mattress with its
//! axis parallel to it (feet point up), and the in-plane joint angles below
//! decide where the limbs go.

pub mod points;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{Bed, Capsule, Vec3};

pub use points::{discretize, label_points, BodyPointCloud, PointPartition, Target, POINT_SPACING};

/// Distance from the bed centre to the top of the head, toward the head end.
pub const HEAD_TOP_Y: f64 = 0.87;
/// Default amplitude of the uniform joint perturbation, rad.
pub const POSE_VARIATION: f64 = 0.2;
/// Stature range covered by [`vary_body_shape`], m.
pub const STATURE_RANGE: (f64, f64) = (1.60, 1.85);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Head,
    Neck,
    Chest,
    Waist,
    UpperArmLeft,
    UpperArmRight,
    ForearmLeft,
    ForearmRight,
    HandLeft,
    HandRight,
    ThighLeft,
    ThighRight,
    ShinLeft,
    ShinRight,
    FootLeft,
    FootRight,
}

impl Segment {
    pub const ALL: [Segment; 16] = [
        Segment::Head,
        Segment::Neck,
        Segment::Chest,
        Segment::Waist,
        Segment::UpperArmLeft,
        Segment::UpperArmRight,
        Segment::ForearmLeft,
        Segment::ForearmRight,
        Segment::HandLeft,
        Segment::HandRight,
        Segment::ThighLeft,
        Segment::ThighRight,
        Segment::ShinLeft,
        Segment::ShinRight,
        Segment::FootLeft,
        Segment::FootRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Segment::Head => "head",
            Segment::Neck => "neck",
            Segment::Chest => "chest",
            Segment::Waist => "waist",
            Segment::UpperArmLeft => "upper_arm_left",
            Segment::UpperArmRight => "upper_arm_right",
            Segment::ForearmLeft => "forearm_left",
            Segment::ForearmRight => "forearm_right",
            Segment::HandLeft => "hand_left",
            Segment::HandRight => "hand_right",
            Segment::ThighLeft => "thigh_left",
            Segment::ThighRight => "thigh_right",
            Segment::ShinLeft => "shin_left",
            Segment::ShinRight => "shin_right",
            Segment::FootLeft => "foot_left",
            Segment::FootRight => "foot_right",
        }
    }

    /// Unscaled (length, radius) of the segment capsule, m.
    fn base_dims(self) -> (f64, f64) {
        match self {
            Segment::Head => (0.05, 0.09),
            Segment::Neck => (0.12, 0.05),
            Segment::Chest => (0.20, 0.14),
            Segment::Waist => (0.14, 0.08),
            Segment::UpperArmLeft | Segment::UpperArmRight => (0.21, 0.045),
            Segment::ForearmLeft | Segment::ForearmRight => (0.18, 0.038),
            Segment::HandLeft | Segment::HandRight => (0.07, 0.032),
            Segment::ThighLeft | Segment::ThighRight => (0.34, 0.085),
            Segment::ShinLeft | Segment::ShinRight => (0.32, 0.06),
            Segment::FootLeft | Segment::FootRight => (0.13, 0.04),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Segment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Segment::ALL
            .into_iter()
            .find(|seg| seg.name() == s)
            .ok_or_else(|| Error::invalid_arg(format!("unknown body segment '{s}'")))
    }
}

/// In-plane articulations. Shoulder and hip angles are abductions of the
/// upper arm / thigh away from the body axis; elbow and knee angles are the
/// additional outward turn of the forearm / shin. Positive is away from the
/// midline on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Joint {
    ShoulderLeft,
    ShoulderRight,
    ElbowLeft,
    ElbowRight,
    HipLeft,
    HipRight,
    KneeLeft,
    KneeRight,
}

impl Joint {
    pub const ALL: [Joint; 8] = [
        Joint::ShoulderLeft,
        Joint::ShoulderRight,
        Joint::ElbowLeft,
        Joint::ElbowRight,
        Joint::HipLeft,
        Joint::HipRight,
        Joint::KneeLeft,
        Joint::KneeRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Joint::ShoulderLeft => "shoulder_left",
            Joint::ShoulderRight => "shoulder_right",
            Joint::ElbowLeft => "elbow_left",
            Joint::ElbowRight => "elbow_right",
            Joint::HipLeft => "hip_left",
            Joint::HipRight => "hip_right",
            Joint::KneeLeft => "knee_left",
            Joint::KneeRight => "knee_right",
        }
    }

    /// Resting supine pose: arms out 20 degrees, legs out 10 degrees.
    pub fn base_angle(self) -> f64 {
        match self {
            Joint::ShoulderLeft | Joint::ShoulderRight => 20f64.to_radians(),
            Joint::HipLeft | Joint::HipRight => 10f64.to_radians(),
            _ => 0.0,
        }
    }

    /// Anatomical limits (lo, hi), rad.
    ///
    /// | joint    | lo    | hi   |
    /// |----------|-------|------|
    /// | shoulder | -0.10 | 1.20 |
    /// | elbow    | -0.60 | 0.60 |
    /// | hip      | -0.20 | 0.70 |
    /// | knee     | -0.50 | 0.50 |
    pub fn limits(self) -> (f64, f64) {
        match self {
            Joint::ShoulderLeft | Joint::ShoulderRight => (-0.10, 1.20),
            Joint::ElbowLeft | Joint::ElbowRight => (-0.60, 0.60),
            Joint::HipLeft | Joint::HipRight => (-0.20, 0.70),
            Joint::KneeLeft | Joint::KneeRight => (-0.50, 0.50),
        }
    }
}

impl FromStr for Joint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Joint::ALL
            .into_iter()
            .find(|j| j.name() == s)
            .ok_or_else(|| Error::invalid_arg(format!("unknown joint '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAngles([f64; 8]);

impl JointAngles {
    pub fn base() -> Self {
        Self(Joint::ALL.map(Joint::base_angle))
    }

    pub fn get(&self, j: Joint) -> f64 {
        self.0[j as usize]
    }

    pub fn set(&mut self, j: Joint, radians: f64) {
        self.0[j as usize] = radians;
    }

    pub fn within_limits(&self) -> bool {
        Joint::ALL.iter().all(|&j| {
            let (lo, hi) = j.limits();
            (lo..=hi).contains(&self.get(j))
        })
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        Joint::ALL.iter().map(|&j| (j.name().to_string(), self.get(j))).collect()
    }

    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self> {
        let mut out = Self::base();
        for (k, &v) in map {
            out.set(k.parse()?, v);
        }
        Ok(out)
    }
}

impl Default for JointAngles {
    fn default() -> Self {
        Self::base()
    }
}

impl Serialize for JointAngles {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointAngles {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        Self::from_map(&map).map_err(serde::de::Error::custom)
    }
}

/// Per-segment length and radius multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyShape {
    pub length: [f64; 16],
    pub radius: [f64; 16],
}

impl Default for BodyShape {
    fn default() -> Self {
        Self { length: [1.0; 16], radius: [1.0; 16] }
    }
}

#[derive(Serialize, Deserialize)]
struct ShapeRecord {
    length: BTreeMap<String, f64>,
    radius: BTreeMap<String, f64>,
}

impl Serialize for BodyShape {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let named = |v: &[f64; 16]| {
            Segment::ALL.iter().map(|&seg| (seg.name().to_string(), v[seg as usize])).collect()
        };
        ShapeRecord { length: named(&self.length), radius: named(&self.radius) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BodyShape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = ShapeRecord::deserialize(d)?;
        let mut out = BodyShape::default();
        for (k, v) in rec.length {
            let seg: Segment = k.parse().map_err(serde::de::Error::custom)?;
            out.length[seg as usize] = v;
        }
        for (k, v) in rec.radius {
            let seg: Segment = k.parse().map_err(serde::de::Error::custom)?;
            out.radius[seg as usize] = v;
        }
        Ok(out)
    }
}

impl BodyShape {
    fn dims(&self, seg: Segment) -> (f64, f64) {
        let (l, r) = seg.base_dims();
        (l * self.length[seg as usize], r * self.radius[seg as usize])
    }

    /// Head-top to heel distance with the legs straight.
    pub fn stature(&self) -> f64 {
        let mut straight = JointAngles::base();
        for j in [Joint::HipLeft, Joint::HipRight, Joint::KneeLeft, Joint::KneeRight] {
            straight.set(j, 0.0);
        }
        let caps = build_capsules(&straight, self, 0.0);
        let lo = caps.iter().map(|c| c.a.y.min(c.b.y) - c.radius).fold(f64::INFINITY, f64::min);
        let hi = caps.iter().map(|c| c.a.y.max(c.b.y) + c.radius).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { length: self.length.map(|v| v * factor), radius: self.radius.map(|v| v * factor) }
    }
}

/// Joint positions in the bed plane used to build observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub elbow_left: Vec3,
    pub elbow_right: Vec3,
    pub knee_left: Vec3,
    pub knee_right: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanModel {
    pub joints: JointAngles,
    pub shape: BodyShape,
    pub bed_height: f64,
    capsules: Vec<Capsule>,
    landmarks: Landmarks,
}

impl HumanModel {
    pub fn new(joints: JointAngles, shape: BodyShape) -> Self {
        let mut h = Self {
            joints,
            shape,
            bed_height: 0.0,
            capsules: Vec::new(),
            landmarks: Landmarks {
                elbow_left: Vec3::zeros(),
                elbow_right: Vec3::zeros(),
                knee_left: Vec3::zeros(),
                knee_right: Vec3::zeros(),
            },
        };
        h.rebuild();
        h
    }

    fn rebuild(&mut self) {
        self.capsules = build_capsules(&self.joints, &self.shape, self.bed_height);
        self.landmarks = landmarks(&self.capsules);
    }

    pub fn capsules(&self) -> &[Capsule] {
        &self.capsules
    }

    pub fn capsule(&self, seg: Segment) -> &Capsule {
        &self.capsules[seg as usize]
    }

    pub fn landmarks(&self) -> &Landmarks {
        &self.landmarks
    }

    pub fn stature(&self) -> f64 {
        self.shape.stature()
    }

    pub fn top(&self) -> f64 {
        self.capsules.iter().map(|c| c.a.z.max(c.b.z) + c.radius).fold(self.bed_height, f64::max)
    }

    /// Serializable record of this body (joint name -> radians, shape multipliers).
    pub fn record(&self) -> PoseRecord {
        PoseRecord { joints: self.joints, shape: self.shape.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub joints: JointAngles,
    pub shape: BodyShape,
}

fn limb_dir(side: f64, angle: f64) -> Vec3 {
    Vec3::new(side * angle.sin(), -angle.cos(), 0.0)
}

/// Lays out all segment capsules for a pose on a bed whose top is at
/// `bed_height`. Output is indexed by `Segment as usize`.
fn build_capsules(joints: &JointAngles, shape: &BodyShape, bed_height: f64) -> Vec<Capsule> {
    let d = |s| shape.dims(s);
    let flat = |x: f64, y: f64, r: f64| Vec3::new(x, y, bed_height + r);
    let mut caps: Vec<Option<Capsule>> = vec![None; 16];
    let mut put = |seg: Segment, a: Vec3, b: Vec3, r: f64| {
        caps[seg as usize] = Some(Capsule::new(a, b, r, seg.name()));
    };

    let (head_l, head_r) = d(Segment::Head);
    let head_a = HEAD_TOP_Y - head_r;
    let head_b = head_a - head_l;
    put(Segment::Head, flat(0.0, head_a, head_r), flat(0.0, head_b, head_r), head_r);

    let (neck_l, neck_r) = d(Segment::Neck);
    let neck_a = head_b - 0.5 * head_r;
    let shoulder_y = neck_a - neck_l;
    // The neck ends at the shoulder line instead of sinking into the chest.
    put(Segment::Neck, flat(0.0, neck_a, neck_r), flat(0.0, shoulder_y + neck_r, neck_r), neck_r);

    // The chest runs along the body axis; the waist lies across it.
    let (chest_l, chest_r) = d(Segment::Chest);
    let chest_top = shoulder_y - chest_r;
    let chest_bottom = chest_top - chest_l;
    put(Segment::Chest, flat(0.0, chest_top, chest_r), flat(0.0, chest_bottom, chest_r), chest_r);

    let (waist_l, waist_r) = d(Segment::Waist);
    let waist_y = chest_bottom - 0.8 * (chest_r + waist_r);
    put(
        Segment::Waist,
        flat(-0.5 * waist_l, waist_y, waist_r),
        flat(0.5 * waist_l, waist_y, waist_r),
        waist_r,
    );

    let shoulder_x = chest_r + 0.02;
    let shoulder_joint_y = shoulder_y - 0.3 * chest_r;
    let hip_x = 0.25 * waist_l + 0.2 * waist_r;
    let hip_y = waist_y - 0.5 * waist_r;

    for (side, left) in [(1.0, true), (-1.0, false)] {
        let pick = |l: Segment, r: Segment| if left { l } else { r };
        let (shoulder, elbow, hip, knee) = if left {
            (Joint::ShoulderLeft, Joint::ElbowLeft, Joint::HipLeft, Joint::KneeLeft)
        } else {
            (Joint::ShoulderRight, Joint::ElbowRight, Joint::HipRight, Joint::KneeRight)
        };

        let upper = pick(Segment::UpperArmLeft, Segment::UpperArmRight);
        let fore = pick(Segment::ForearmLeft, Segment::ForearmRight);
        let hand = pick(Segment::HandLeft, Segment::HandRight);
        let a_sh = joints.get(shoulder);
        let a_el = a_sh + joints.get(elbow);
        let (ul, ur) = d(upper);
        let (fl, fr) = d(fore);
        let (hl, hr) = d(hand);
        let sh = Vec3::new(side * shoulder_x, shoulder_joint_y, 0.0);
        let el = sh + limb_dir(side, a_sh) * ul;
        let wr = el + limb_dir(side, a_el) * fl;
        let tip = wr + limb_dir(side, a_el) * hl;
        put(upper, flat(sh.x, sh.y, ur), flat(el.x, el.y, ur), ur);
        put(fore, flat(el.x, el.y, fr), flat(wr.x, wr.y, fr), fr);
        put(hand, flat(wr.x, wr.y, hr), flat(tip.x, tip.y, hr), hr);

        let thigh = pick(Segment::ThighLeft, Segment::ThighRight);
        let shin = pick(Segment::ShinLeft, Segment::ShinRight);
        let foot = pick(Segment::FootLeft, Segment::FootRight);
        let a_hip = joints.get(hip);
        let a_kn = a_hip + joints.get(knee);
        let (tl, tr) = d(thigh);
        let (sl, sr) = d(shin);
        let (ftl, ftr) = d(foot);
        let hp = Vec3::new(side * hip_x, hip_y, 0.0);
        let kn = hp + limb_dir(side, a_hip) * tl;
        let an = kn + limb_dir(side, a_kn) * sl;
        put(thigh, flat(hp.x, hp.y, tr), flat(kn.x, kn.y, tr), tr);
        put(shin, flat(kn.x, kn.y, sr), flat(an.x, an.y, sr), sr);
        // Feet rest on the heel and point toes-up, tilted 60 degrees from the mattress.
        let heel = flat(an.x, an.y, ftr) + limb_dir(side, a_kn) * (0.5 * ftr);
        let toe_dir = limb_dir(side, a_kn) * 0.5 + Vec3::new(0.0, 0.0, 3f64.sqrt() * 0.5);
        put(foot, heel, heel + toe_dir * ftl, ftr);
    }

    // Laid out head toward +y with the left side at +x, then turned half a
    // revolution about the vertical into the bed frame.
    let turn = |p: Vec3| Vec3::new(-p.x, -p.y, p.z);
    caps.into_iter()
        .map(|c| {
            let c = c.expect("every segment placed");
            Capsule { a: turn(c.a), b: turn(c.b), ..c }
        })
        .collect()
}

fn landmarks(caps: &[Capsule]) -> Landmarks {
    let joint = |seg: Segment| {
        let c = &caps[seg as usize];
        Vec3::new(c.a.x, c.a.y, 0.0)
    };
    Landmarks {
        elbow_left: joint(Segment::ForearmLeft),
        elbow_right: joint(Segment::ForearmRight),
        knee_left: joint(Segment::ShinLeft),
        knee_right: joint(Segment::ShinRight),
    }
}

/// Base supine pose with every articulation perturbed by an independent
/// uniform draw in `[-variation, variation]`, clamped to the joint limits.
pub fn sample_pose<R: Rng + ?Sized>(rng: &mut R, variation: f64) -> Result<HumanModel> {
    sample_pose_with_shape(rng, variation, BodyShape::default())
}

pub fn sample_pose_with_shape<R: Rng + ?Sized>(
    rng: &mut R,
    variation: f64,
    shape: BodyShape,
) -> Result<HumanModel> {
    if !(variation >= 0.0) {
        return Err(Error::invalid_arg("pose variation must be non-negative"));
    }
    let mut joints = JointAngles::base();
    for j in Joint::ALL {
        // Always consume one draw per joint so streams stay aligned.
        let u: f64 = rng.random_range(-1.0..=1.0);
        let (lo, hi) = j.limits();
        joints.set(j, (j.base_angle() + u * variation).clamp(lo, hi));
    }
    Ok(HumanModel::new(joints, shape))
}

/// Rests the body on `bed`: capsules are rebuilt on the mattress top and the
/// footprint must lie inside the mattress rectangle.
pub fn place_on_bed(human: &HumanModel, bed: &Bed) -> Result<HumanModel> {
    let mut placed = human.clone();
    placed.bed_height = bed.height;
    placed.rebuild();
    for c in placed.capsules() {
        for p in [c.a, c.b] {
            let (x, y) = (p.x.abs() + c.radius, p.y.abs() + c.radius);
            if x > bed.half_width() || y > bed.half_length() {
                return Err(Error::OutOfBed(format!(
                    "{} reaches ({:.3}, {:.3}) beyond the {:.2} x {:.2} m mattress",
                    c.label, p.x, p.y, bed.width, bed.length
                )));
            }
        }
    }
    Ok(placed)
}

/// Random per-segment multipliers whose stature is uniform over
/// [`STATURE_RANGE`]. Segment lengths and girths are jittered independently,
/// then the whole body is scaled to the drawn stature.
pub fn vary_body_shape<R: Rng + ?Sized>(rng: &mut R) -> BodyShape {
    let girth: f64 = rng.random_range(0.92..=1.12);
    let mut shape = BodyShape::default();
    for seg in Segment::ALL {
        shape.length[seg as usize] = rng.random_range(0.95..=1.05);
        shape.radius[seg as usize] = girth * rng.random_range(0.97..=1.03);
    }
    // Left and right limbs share multipliers.
    for (l, r) in [
        (Segment::UpperArmLeft, Segment::UpperArmRight),
        (Segment::ForearmLeft, Segment::ForearmRight),
        (Segment::HandLeft, Segment::HandRight),
        (Segment::ThighLeft, Segment::ThighRight),
        (Segment::ShinLeft, Segment::ShinRight),
        (Segment::FootLeft, Segment::FootRight),
    ] {
        shape.length[r as usize] = shape.length[l as usize];
        shape.radius[r as usize] = shape.radius[l as usize];
    }
    let target: f64 = rng.random_range(STATURE_RANGE.0..=STATURE_RANGE.1);
    shape.scaled(target / shape.stature())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn zero_variation_gives_base_pose() {
        let mut rng = seed::rng(3);
        let h = sample_pose(&mut rng, 0.0).unwrap();
        assert_eq!(h.joints, JointAngles::base());
        assert!(h.joints.within_limits());
    }

    #[test]
    fn negative_variation_rejected() {
        assert!(sample_pose(&mut seed::rng(0), -0.1).is_err());
    }

    #[test]
    fn same_seed_same_pose() {
        let a = sample_pose(&mut seed::rng(11), POSE_VARIATION).unwrap();
        let b = sample_pose(&mut seed::rng(11), POSE_VARIATION).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn joint_offsets_are_uniform_on_the_variation_box() {
        // E|U(-a, a)| = a / 2.
        let mut rng = seed::rng(5);
        let mut sum = 0.0;
        let mut n = 0.0;
        for _ in 0..1000 {
            let h = sample_pose(&mut rng, 0.2).unwrap();
            for j in Joint::ALL {
                let off = h.joints.get(j) - j.base_angle();
                assert!(off.abs() <= 0.2 + 1e-12);
                sum += off.abs();
                n += 1.0;
            }
        }
        let mean = sum / n;
        assert!((mean - 0.1).abs() < 0.005, "mean |offset| = {mean}");
    }

    #[test]
    fn base_pose_is_centered_and_aligned() {
        let h = place_on_bed(&HumanModel::new(JointAngles::base(), BodyShape::default()), &Bed::default()).unwrap();
        for seg in [Segment::Head, Segment::Neck] {
            let c = h.capsule(seg);
            assert_eq!(c.a.x, 0.0);
            assert_eq!(c.b.x, 0.0);
        }
        let chest = h.capsule(Segment::Chest);
        assert!((chest.a.x + chest.b.x).abs() < 1e-15);
        // Mirror symmetry of the limbs.
        let l = h.capsule(Segment::HandLeft);
        let r = h.capsule(Segment::HandRight);
        assert!((l.b.x + r.b.x).abs() < 1e-12 && (l.b.y - r.b.y).abs() < 1e-12);
    }

    #[test]
    fn placement_rests_on_bed_and_is_idempotent() {
        let bed = Bed { height: 0.45, ..Bed::default() };
        let mut rng = seed::rng(9);
        let mut accepted = 0;
        for _ in 0..100 {
            let h = sample_pose(&mut rng, POSE_VARIATION).unwrap();
            let Ok(placed) = place_on_bed(&h, &bed) else { continue };
            accepted += 1;
            for c in placed.capsules() {
                let lowest = c.a.z.min(c.b.z) - c.radius;
                assert!(lowest >= bed.height - 1e-12);
                if c.label.starts_with("foot") {
                    continue;
                }
                assert!((lowest - bed.height).abs() < 1e-3, "{} floats", c.label);
            }
            assert_eq!(place_on_bed(&placed, &bed).unwrap(), placed);
        }
        // About three in four perturbed poses fit a 0.88 m mattress.
        assert!(accepted > 60, "only {accepted} poses fit the bed");
    }

    #[test]
    fn default_stature_in_range() {
        let s = BodyShape::default().stature();
        assert!((1.58..=1.66).contains(&s), "stature {s}");
    }

    #[test]
    fn shape_sampling_covers_stature_range() {
        let mut rng = seed::rng(21);
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for _ in 0..500 {
            let s = vary_body_shape(&mut rng).stature();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        assert!(lo >= 1.58 && hi <= 1.87, "stature range {lo}..{hi}");
        assert!(lo < 1.63 && hi > 1.82, "range not spanned: {lo}..{hi}");
        assert_eq!(vary_body_shape(&mut seed::rng(4)), vary_body_shape(&mut seed::rng(4)));
    }

    #[test]
    fn pose_record_round_trips() {
        let h = HumanModel::new(sample_pose(&mut seed::rng(2), 0.2).unwrap().joints, vary_body_shape(&mut seed::rng(2)));
        let text = serde_json::to_string(&h.record()).unwrap();
        let back: PoseRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h.record());
    }
}
