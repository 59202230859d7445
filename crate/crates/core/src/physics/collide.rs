//! Static colliders for the cloth: the bed plane and the capsules that make up
//! the body.

use serde::{Deserialize, Serialize};

use super::Vec3;

/// Bed footprint used when none is supplied (width along x, length along y).
pub const BED_WIDTH: f64 = 0.88;
pub const BED_LENGTH: f64 = 2.1;

/// Margin the broadphase grid is padded by. Collision margins larger than
/// this fall back to testing every capsule.
const BROADPHASE_PAD: f64 = 0.03;
const CELL: f64 = 0.08;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
    pub label: String,
}

impl Capsule {
    pub fn new(a: Vec3, b: Vec3, radius: f64, label: impl Into<String>) -> Self {
        debug_assert!(radius > 0.0);
        Self { a, b, radius, label: label.into() }
    }

    /// Closest point to `p` on the capsule axis.
    #[inline]
    pub fn closest_on_axis(&self, p: &Vec3) -> Vec3 {
        let ab = self.b - self.a;
        let len2 = ab.norm_squared();
        if len2 <= f64::EPSILON {
            return self.a;
        }
        let t = ((p - self.a).dot(&ab) / len2).clamp(0.0, 1.0);
        self.a + ab * t
    }

    /// Signed distance from `p` to the capsule surface (negative inside).
    #[inline]
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.closest_on_axis(p)).norm() - self.radius
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    fn aabb(&self, pad: f64) -> ([f64; 3], [f64; 3]) {
        let r = self.radius + pad;
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..3 {
            lo[k] = self.a[k].min(self.b[k]) - r;
            hi[k] = self.a[k].max(self.b[k]) + r;
        }
        (lo, hi)
    }
}

/// The bed top: an infinite horizontal collision plane at `height`, plus the
/// rectangular mattress extent used for placement and action bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bed {
    pub height: f64,
    pub width: f64,
    pub length: f64,
}

impl Default for Bed {
    fn default() -> Self {
        Self { height: 0.0, width: BED_WIDTH, length: BED_LENGTH }
    }
}

impl Bed {
    pub fn half_width(&self) -> f64 {
        0.5 * self.width
    }

    pub fn half_length(&self) -> f64 {
        0.5 * self.length
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.half_width() && y.abs() <= self.half_length()
    }
}

/// Uniform xy grid listing the capsules whose padded bounds touch each cell.
#[derive(Debug, Clone, Default)]
struct Broadphase {
    origin: [f64; 2],
    dims: [usize; 2],
    z_top: f64,
    cells: Vec<Vec<u16>>,
}

impl Broadphase {
    fn build(capsules: &[Capsule]) -> Self {
        if capsules.is_empty() {
            return Self { z_top: f64::NEG_INFINITY, ..Default::default() };
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let boxes: Vec<_> = capsules.iter().map(|c| c.aabb(BROADPHASE_PAD)).collect();
        for (l, h) in &boxes {
            for k in 0..3 {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(h[k]);
            }
        }
        let dims = [
            ((hi[0] - lo[0]) / CELL).ceil().max(1.0) as usize,
            ((hi[1] - lo[1]) / CELL).ceil().max(1.0) as usize,
        ];
        let mut cells = vec![Vec::new(); dims[0] * dims[1]];
        for (idx, (l, h)) in boxes.iter().enumerate() {
            let i0 = ((l[0] - lo[0]) / CELL).floor() as usize;
            let i1 = (((h[0] - lo[0]) / CELL).floor() as usize).min(dims[0] - 1);
            let j0 = ((l[1] - lo[1]) / CELL).floor() as usize;
            let j1 = (((h[1] - lo[1]) / CELL).floor() as usize).min(dims[1] - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * dims[0] + i].push(idx as u16);
                }
            }
        }
        Self { origin: [lo[0], lo[1]], dims, z_top: hi[2], cells }
    }

    #[inline]
    fn candidates(&self, p: &Vec3) -> &[u16] {
        if p.z > self.z_top || self.cells.is_empty() {
            return &[];
        }
        let fx = (p.x - self.origin[0]) / CELL;
        let fy = (p.y - self.origin[1]) / CELL;
        if fx < 0.0 || fy < 0.0 {
            return &[];
        }
        let (i, j) = (fx as usize, fy as usize);
        if i >= self.dims[0] || j >= self.dims[1] {
            return &[];
        }
        &self.cells[j * self.dims[0] + i]
    }
}

/// Capsule axis with the per-query constants precomputed.
#[derive(Debug, Clone, Copy)]
struct Axis {
    a: Vec3,
    ab: Vec3,
    inv_len2: f64,
    radius: f64,
}

impl Axis {
    fn new(c: &Capsule) -> Self {
        let ab = c.b - c.a;
        let len2 = ab.norm_squared();
        let inv_len2 = if len2 <= f64::EPSILON { 0.0 } else { 1.0 / len2 };
        Self { a: c.a, ab, inv_len2, radius: c.radius }
    }

    #[inline]
    fn closest(&self, p: &Vec3) -> Vec3 {
        let t = ((p - self.a).dot(&self.ab) * self.inv_len2).clamp(0.0, 1.0);
        self.a + self.ab * t
    }
}

/// Everything the cloth can collide with.
#[derive(Debug, Clone)]
pub struct ColliderSet {
    pub bed: Bed,
    capsules: Vec<Capsule>,
    axes: Vec<Axis>,
    every: Vec<u16>,
    broadphase: Broadphase,
}

impl ColliderSet {
    pub fn new(bed: Bed, capsules: Vec<Capsule>) -> Self {
        let broadphase = Broadphase::build(&capsules);
        let axes = capsules.iter().map(Axis::new).collect();
        let every = (0..capsules.len() as u16).collect();
        Self { bed, capsules, axes, every, broadphase }
    }

    pub fn bed_only(bed: Bed) -> Self {
        Self::new(bed, Vec::new())
    }

    pub fn capsules(&self) -> &[Capsule] {
        &self.capsules
    }

    /// Highest point of any capsule, or the bed height when there are none.
    pub fn top(&self) -> f64 {
        self.capsules
            .iter()
            .map(|c| c.a.z.max(c.b.z) + c.radius)
            .fold(self.bed.height, f64::max)
    }

    /// Pushes `p` out of every collider it penetrates and removes the inward
    /// velocity component, scaling the tangential part by Coulomb friction.
    /// Returns `true` if any contact was resolved.
    #[inline]
    pub(crate) fn resolve(&self, p: &mut Vec3, v: &mut Vec3, margin: f64, friction: f64) -> bool {
        let candidates = if margin > BROADPHASE_PAD {
            &self.every[..]
        } else {
            self.broadphase.candidates(p)
        };
        let mut contacts = 0;
        for &ci in candidates {
            contacts += push_out_capsule(&self.axes[ci as usize], p, v, margin, friction) as usize;
        }
        contacts += push_out_plane(self.bed.height, p, v, margin, friction) as usize;
        // A second sweep settles vertices wedged between two colliders.
        if contacts > 1 {
            for &ci in candidates {
                push_out_capsule(&self.axes[ci as usize], p, v, margin, friction);
            }
            push_out_plane(self.bed.height, p, v, margin, friction);
        }
        contacts > 0
    }
}

#[inline]
fn apply_contact(v: &mut Vec3, n: &Vec3, friction: f64) {
    let vn = v.dot(n);
    if vn >= 0.0 {
        return;
    }
    let impulse = -vn;
    let mut vt = *v - n * vn;
    let vt_len = vt.norm();
    if vt_len > 0.0 {
        let scale = (1.0 - friction * impulse / vt_len).clamp(0.0, 1.0);
        vt *= scale;
    }
    *v = vt;
}

#[inline]
fn push_out_plane(height: f64, p: &mut Vec3, v: &mut Vec3, margin: f64, friction: f64) -> bool {
    let floor = height + margin;
    if p.z >= floor {
        return false;
    }
    p.z = floor;
    apply_contact(v, &Vec3::z(), friction);
    true
}

#[inline]
fn push_out_capsule(c: &Axis, p: &mut Vec3, v: &mut Vec3, margin: f64, friction: f64) -> bool {
    let q = c.closest(p);
    let d = *p - q;
    let dist2 = d.norm_squared();
    let reach = c.radius + margin;
    if dist2 >= reach * reach {
        return false;
    }
    let dist = dist2.sqrt();
    let n = if dist > 1e-12 { d / dist } else { Vec3::z() };
    *p = q + n * reach;
    apply_contact(v, &n, friction);
    true
}
