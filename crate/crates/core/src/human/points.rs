//! Body-surface samples and their target / non-target / head labelling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HumanModel, Segment};
use crate::error::{Error, Result};
use crate::physics::{Capsule, Vec3};

/// Default surface sample spacing, m.
pub const POINT_SPACING: f64 = 0.03;
/// Samples closer than this fraction of the spacing to a sample of an
/// earlier capsule are dropped.
const SEAM_SEPARATION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct BodyPointCloud {
    pub points: Vec<Vec3>,
    pub segments: Vec<Segment>,
}

impl BodyPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn projected(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p.x, p.y]).collect()
    }
}

/// Orthonormal pair perpendicular to `axis` (unit).
fn frame(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let u = axis.cross(&helper).normalize();
    let w = axis.cross(&u);
    (u, w)
}

/// Number of rings along the cylindrical part and points per ring.
fn cylinder_layout(length: f64, radius: f64, spacing: f64) -> (usize, usize) {
    let segments = ((length / spacing).round() as usize).max(1);
    let per_ring = ((std::f64::consts::TAU * radius / spacing).round() as usize).max(3);
    (segments + 1, per_ring)
}

/// Polar angles and point counts of the latitude rings of one hemispherical
/// cap, pole first, equator excluded.
fn cap_layout(radius: f64, spacing: f64) -> Vec<(f64, usize)> {
    let n_lat = ((std::f64::consts::FRAC_PI_2 * radius / spacing).round() as usize).max(1);
    (0..n_lat)
        .map(|k| {
            let phi = k as f64 * std::f64::consts::FRAC_PI_2 / n_lat as f64;
            let circ = std::f64::consts::TAU * radius * phi.sin();
            let count = if k == 0 { 1 } else { ((circ / spacing).round() as usize).max(1) };
            (phi, count)
        })
        .collect()
}

/// Number of samples the ring construction puts on a lone capsule.
pub fn ring_count(length: f64, radius: f64, spacing: f64) -> usize {
    let (rings, per_ring) = cylinder_layout(length, radius, spacing);
    let cap: usize = cap_layout(radius, spacing).iter().map(|&(_, n)| n).sum();
    rings * per_ring + 2 * cap
}

/// Ring samples on the full surface of one capsule.
pub fn capsule_surface(c: &Capsule, spacing: f64) -> Vec<Vec3> {
    let axis_vec = c.b - c.a;
    let length = axis_vec.norm();
    let axis = if length > 1e-12 { axis_vec / length } else { Vec3::y() };
    let (u, w) = frame(&axis);
    let r = c.radius;
    let mut out = Vec::new();

    let (rings, per_ring) = cylinder_layout(length, r, spacing);
    for i in 0..rings {
        let t = if rings > 1 { i as f64 / (rings - 1) as f64 } else { 0.5 };
        let centre = c.a + axis_vec * t;
        for k in 0..per_ring {
            let th = std::f64::consts::TAU * k as f64 / per_ring as f64;
            out.push(centre + (u * th.cos() + w * th.sin()) * r);
        }
    }
    for (end, dir) in [(c.a, -axis), (c.b, axis)] {
        for (phi, count) in cap_layout(r, spacing) {
            let centre = end + dir * (r * phi.cos());
            let rr = r * phi.sin();
            for k in 0..count {
                let th = std::f64::consts::TAU * k as f64 / count as f64;
                out.push(centre + (u * th.cos() + w * th.sin()) * rr);
            }
        }
    }
    out
}

/// Samples the outer surface of the body: ring samples of every capsule,
/// dropping those buried inside another capsule or below the mattress, and
/// those crowding an earlier sample where two capsules meet.
pub fn discretize(human: &HumanModel, spacing: f64) -> Result<BodyPointCloud> {
    if !(spacing > 0.0) {
        return Err(Error::invalid_arg("point spacing must be positive"));
    }
    let min_sep2 = (SEAM_SEPARATION * spacing).powi(2);
    let caps = human.capsules();
    let mut points: Vec<Vec3> = Vec::new();
    let mut segments = Vec::new();
    for (i, c) in caps.iter().enumerate() {
        let first_own = points.len();
        for p in capsule_surface(c, spacing) {
            if p.z < human.bed_height - 1e-9 {
                continue;
            }
            let buried = caps
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && other.signed_distance(&p) < -1e-9);
            if buried {
                continue;
            }
            let crowded = points[..first_own].iter().any(|q| (p - q).norm_squared() < min_sep2);
            if !crowded {
                points.push(p);
                segments.push(Segment::ALL[i]);
            }
        }
    }
    Ok(BodyPointCloud { points, segments })
}

/// The body part a policy is trained to uncover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    RightLowerLeg,
    LeftArm,
    BothLowerLegs,
    UpperBody,
    LowerBody,
    EntireBody,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::RightLowerLeg,
        Target::LeftArm,
        Target::BothLowerLegs,
        Target::UpperBody,
        Target::LowerBody,
        Target::EntireBody,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::RightLowerLeg => "right_lower_leg",
            Target::LeftArm => "left_arm",
            Target::BothLowerLegs => "both_lower_legs",
            Target::UpperBody => "upper_body",
            Target::LowerBody => "lower_body",
            Target::EntireBody => "entire_body",
        }
    }

    /// Display label in results tables.
    pub fn title(self) -> &'static str {
        match self {
            Target::RightLowerLeg => "Right Lower Leg",
            Target::LeftArm => "Left Arm",
            Target::BothLowerLegs => "Lower Legs",
            Target::UpperBody => "Upper Body",
            Target::LowerBody => "Lower Body",
            Target::EntireBody => "Entire Body",
        }
    }

    /// Segments whose points belong to the target set.
    pub fn segments(self) -> &'static [Segment] {
        use Segment::*;
        match self {
            Target::RightLowerLeg => &[ShinRight, FootRight],
            Target::LeftArm => &[UpperArmLeft, ForearmLeft, HandLeft],
            Target::BothLowerLegs => &[ShinLeft, ShinRight, FootLeft, FootRight],
            Target::UpperBody => &[
                Chest,
                UpperArmLeft,
                UpperArmRight,
                ForearmLeft,
                ForearmRight,
                HandLeft,
                HandRight,
            ],
            Target::LowerBody => &[
                Waist, ThighLeft, ThighRight, ShinLeft, ShinRight, FootLeft, FootRight,
            ],
            Target::EntireBody => &[
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
            ],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid_arg(format!("unknown target '{s}'")))
    }
}

pub fn is_head(seg: Segment) -> bool {
    matches!(seg, Segment::Head | Segment::Neck)
}

/// Indices into a [`BodyPointCloud`] split into target, non-target and head.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PointPartition {
    pub target: Vec<usize>,
    pub non_target: Vec<usize>,
    pub head: Vec<usize>,
}

pub fn label_points(cloud: &BodyPointCloud, target: Target) -> PointPartition {
    let wanted = target.segments();
    let mut out = PointPartition::default();
    for (i, &seg) in cloud.segments.iter().enumerate() {
        if is_head(seg) {
            out.head.push(i);
        } else if wanted.contains(&seg) {
            out.target.push(i);
        } else {
            out.non_target.push(i);
        }
    }
    out
}
