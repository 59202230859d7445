//! Mass-spring blanket.
//!
//! The blanket is a regular grid of equal point masses joined by structural
//! (4-neighbour), shear (diagonal) and bend (2-step) springs. Each step is a
//! semi-implicit Euler update followed by a deformation-limiting pass over the
//! structural and shear springs, collision projection, and anchor snapping.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::collide::ColliderSet;
use super::Vec3;
use crate::error::{Error, Result};

/// Default blanket footprint (width along x, length along y).
pub const CLOTH_WIDTH: f64 = 1.25;
pub const CLOTH_LENGTH: f64 = 1.7;
/// 41 x 51 = 2091 vertices.
pub const CLOTH_COLS: usize = 41;
pub const CLOTH_ROWS: usize = 51;

/// Default settling threshold on the fastest vertex, m/s.
pub const SETTLE_SPEED: f64 = 0.01;
/// Consecutive below-threshold steps required before settling is declared.
const SETTLE_CONFIRM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClothParams {
    /// kg
    pub total_mass: f64,
    /// N/m
    pub stiffness_structural: f64,
    pub stiffness_shear: f64,
    pub stiffness_bend: f64,
    /// N·s/m, along each spring
    pub damping: f64,
    pub friction_coeff: f64,
    /// m/s², magnitude of downward gravity
    pub gravity: f64,
    /// s
    pub dt: f64,
    /// m
    pub collision_margin: f64,
    /// m/s, per-vertex speed clamp
    pub max_speed: f64,
    /// Largest allowed relative elongation of structural and shear springs.
    pub strain_limit: f64,
    /// Gauss-Seidel sweeps of the deformation-limiting pass.
    pub strain_iterations: usize,
}

impl Default for ClothParams {
    fn default() -> Self {
        Self {
            total_mass: 2.0,
            stiffness_structural: 10.0,
            stiffness_shear: 3.0,
            stiffness_bend: 1.0,
            damping: 0.02,
            friction_coeff: 0.4,
            gravity: 9.81,
            dt: 0.005,
            collision_margin: 0.005,
            max_speed: 5.0,
            strain_limit: 0.1,
            strain_iterations: 1,
        }
    }
}

impl ClothParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("total_mass", self.total_mass),
            ("stiffness_structural", self.stiffness_structural),
            ("stiffness_shear", self.stiffness_shear),
            ("stiffness_bend", self.stiffness_bend),
            ("damping", self.damping),
            ("dt", self.dt),
            ("max_speed", self.max_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid_arg(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.collision_margin >= 0.0) {
            return Err(Error::invalid_arg("collision_margin must be >= 0"));
        }
        if !(self.strain_limit > 0.0) {
            return Err(Error::invalid_arg("strain_limit must be positive"));
        }
        if !(self.friction_coeff >= 0.0) || !(self.gravity >= 0.0) {
            return Err(Error::invalid_arg("friction and gravity must be non-negative"));
        }
        Ok(())
    }

    pub fn stiffness(&self, class: SpringClass) -> f64 {
        match class {
            SpringClass::Structural => self.stiffness_structural,
            SpringClass::Shear => self.stiffness_shear,
            SpringClass::Bend => self.stiffness_bend,
        }
    }

    pub fn gravity_vector(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, -self.gravity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringClass {
    Structural,
    Shear,
    Bend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spring {
    pub a: u32,
    pub b: u32,
    pub rest_length: f64,
    pub class: SpringClass,
}

/// Number of vertices along each grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridResolution {
    pub rows: usize,
    pub cols: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        Self { rows: CLOTH_ROWS, cols: CLOTH_COLS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SettleOutcome {
    pub steps: usize,
    pub settled: bool,
}

#[derive(Debug, Clone)]
pub struct ClothMesh {
    pub rows: usize,
    pub cols: usize,
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub springs: Vec<Spring>,
    pub per_vertex_mass: f64,
    pub anchors: BTreeMap<usize, Vec3>,
    /// Simulated time, s.
    pub time: f64,
    forces: Vec<Vec3>,
    pinned: Vec<bool>,
}

/// Builds a flat grid in the plane `z = center.z`, centered on `center`, with
/// rows running along y and columns along x.
pub fn build_cloth(
    params: &ClothParams,
    width: f64,
    height: f64,
    resolution: GridResolution,
    center: Vec3,
) -> Result<ClothMesh> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::invalid_arg(format!(
            "cloth dimensions must be positive, got {width} x {height}"
        )));
    }
    let GridResolution { rows, cols } = resolution;
    if rows < 2 || cols < 2 {
        return Err(Error::invalid_arg(format!("grid must be at least 2x2, got {rows}x{cols}")));
    }
    params.validate()?;

    let dx = width / (cols - 1) as f64;
    let dy = height / (rows - 1) as f64;
    let x0 = center.x - 0.5 * width;
    let y0 = center.y - 0.5 * height;
    let n = rows * cols;
    let mut positions = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            positions.push(Vec3::new(x0 + c as f64 * dx, y0 + r as f64 * dy, center.z));
        }
    }

    let idx = |r: usize, c: usize| (r * cols + c) as u32;
    let mut springs = Vec::new();
    let mut push = |a: u32, b: u32, class: SpringClass, positions: &[Vec3]| {
        let rest_length = (positions[b as usize] - positions[a as usize]).norm();
        springs.push(Spring { a, b, rest_length, class });
    };
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                push(idx(r, c), idx(r, c + 1), SpringClass::Structural, &positions);
            }
            if r + 1 < rows {
                push(idx(r, c), idx(r + 1, c), SpringClass::Structural, &positions);
            }
        }
    }
    for r in 0..rows.saturating_sub(1) {
        for c in 0..cols - 1 {
            push(idx(r, c), idx(r + 1, c + 1), SpringClass::Shear, &positions);
            push(idx(r, c + 1), idx(r + 1, c), SpringClass::Shear, &positions);
        }
    }
    for r in 0..rows {
        for c in 0..cols {
            if c + 2 < cols {
                push(idx(r, c), idx(r, c + 2), SpringClass::Bend, &positions);
            }
            if r + 2 < rows {
                push(idx(r, c), idx(r + 2, c), SpringClass::Bend, &positions);
            }
        }
    }
    // Structural rest lengths are the grid spacing exactly, not a recomputed norm.
    for s in springs.iter_mut().filter(|s| s.class == SpringClass::Structural) {
        s.rest_length = if s.b - s.a == 1 { dx } else { dy };
    }

    Ok(ClothMesh {
        rows,
        cols,
        velocities: vec![Vec3::zeros(); n],
        forces: vec![Vec3::zeros(); n],
        pinned: vec![false; n],
        positions,
        springs,
        per_vertex_mass: params.total_mass / n as f64,
        anchors: BTreeMap::new(),
        time: 0.0,
    })
}

impl ClothMesh {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn vertex(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Rigidly rotates the cloth about the vertical axis through `pivot` and
    /// then translates it by `offset`.
    pub fn transform(&mut self, pivot: Vec3, yaw: f64, offset: Vec3) {
        let (s, c) = yaw.sin_cos();
        for p in &mut self.positions {
            let d = *p - pivot;
            *p = pivot + Vec3::new(c * d.x - s * d.y, s * d.x + c * d.y, d.z) + offset;
        }
        for v in &mut self.velocities {
            *v = Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z);
        }
    }

    pub fn anchor(&mut self, vertex: usize) -> Result<()> {
        if vertex >= self.len() {
            return Err(Error::invalid_arg(format!(
                "vertex {vertex} out of range for {} vertices",
                self.len()
            )));
        }
        let target = self.positions[vertex];
        self.anchors.entry(vertex).or_insert(target);
        self.velocities[vertex] = Vec3::zeros();
        Ok(())
    }

    pub fn release_anchors(&mut self) {
        self.anchors.clear();
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm_squared()).fold(0.0, f64::max).sqrt()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.per_vertex_mass * self.velocities.iter().map(|v| v.norm_squared()).sum::<f64>()
    }

    /// Spring and damping forces on every vertex, excluding gravity.
    pub fn internal_forces(&self, params: &ClothParams) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.len()];
        accumulate_spring_forces(&self.positions, &self.velocities, &self.springs, params, &mut out);
        out
    }

    /// Advances the simulation by one time step.
    pub fn step(&mut self, colliders: &ColliderSet, params: &ClothParams) {
        let dt = params.dt;
        let n = self.len();
        self.pinned.iter_mut().for_each(|p| *p = false);
        for &i in self.anchors.keys() {
            self.pinned[i] = true;
        }

        self.forces.iter_mut().for_each(|f| *f = Vec3::zeros());
        accumulate_spring_forces(&self.positions, &self.velocities, &self.springs, params, &mut self.forces);

        let g = params.gravity_vector();
        let inv_m = 1.0 / self.per_vertex_mass;
        let vmax = params.max_speed;
        // `forces` doubles as the predicted-position buffer from here on.
        for i in 0..n {
            if self.pinned[i] {
                continue;
            }
            let mut v = self.velocities[i] + (self.forces[i] * inv_m + g) * dt;
            let speed2 = v.norm_squared();
            if speed2 > vmax * vmax {
                v *= vmax / speed2.sqrt();
            }
            self.velocities[i] = v;
            self.forces[i] = self.positions[i] + v * dt;
        }
        for (&i, target) in &self.anchors {
            self.forces[i] = *target;
            self.velocities[i] = Vec3::zeros();
        }

        limit_strain(&mut self.forces, &mut self.velocities, &self.springs, &self.pinned, params);

        let margin = params.collision_margin;
        let mu = params.friction_coeff;
        for i in 0..n {
            if !self.pinned[i] {
                colliders.resolve(&mut self.forces[i], &mut self.velocities[i], margin, mu);
            }
        }
        std::mem::swap(&mut self.positions, &mut self.forces);
        self.time += dt;
    }

    /// Steps until every vertex moves slower than `v_thresh` for a few
    /// consecutive steps, or `max_steps` is exhausted.
    pub fn settle(
        &mut self,
        colliders: &ColliderSet,
        params: &ClothParams,
        v_thresh: f64,
        max_steps: usize,
    ) -> Result<SettleOutcome> {
        self.settle_observed(colliders, params, v_thresh, max_steps, &mut |_| {})
    }

    pub fn settle_observed(
        &mut self,
        colliders: &ColliderSet,
        params: &ClothParams,
        v_thresh: f64,
        max_steps: usize,
        observer: &mut dyn FnMut(&ClothMesh),
    ) -> Result<SettleOutcome> {
        if !(v_thresh > 0.0) {
            return Err(Error::invalid_arg("settling threshold must be positive"));
        }
        let mut calm = 0;
        for steps in 1..=max_steps {
            self.step(colliders, params);
            observer(self);
            if self.max_speed() < v_thresh {
                calm += 1;
                if calm >= SETTLE_CONFIRM {
                    return Ok(SettleOutcome { steps, settled: true });
                }
            } else {
                calm = 0;
            }
        }
        Ok(SettleOutcome { steps: max_steps, settled: false })
    }

    /// Moves every anchor along the piecewise-linear path through `waypoints`
    /// at `speed`, one physics step per increment. The path starts at the
    /// target of the lowest-indexed anchor; other anchors keep their offset
    /// from it. Returns the number of steps taken.
    pub fn transport_anchor(
        &mut self,
        colliders: &ColliderSet,
        params: &ClothParams,
        waypoints: &[Vec3],
        speed: f64,
    ) -> Result<usize> {
        self.transport_anchor_observed(colliders, params, waypoints, speed, &mut |_| {})
    }

    pub fn transport_anchor_observed(
        &mut self,
        colliders: &ColliderSet,
        params: &ClothParams,
        waypoints: &[Vec3],
        speed: f64,
        observer: &mut dyn FnMut(&ClothMesh),
    ) -> Result<usize> {
        if !(speed > 0.0) {
            return Err(Error::invalid_arg("transport speed must be positive"));
        }
        let (&lead, &start) = self
            .anchors
            .iter()
            .next()
            .ok_or_else(|| Error::InvalidState("transport requires at least one anchor".into()))?;
        let offsets: Vec<(usize, Vec3)> =
            self.anchors.iter().map(|(&i, t)| (i, *t - start)).collect();
        let increment = speed * params.dt;
        let mut from = start;
        let mut steps = 0;
        for &to in waypoints {
            let length = (to - from).norm();
            // Guard against 999.9999999 rounding up to an extra increment.
            let count = (length / increment - 1e-9).ceil().max(0.0) as usize;
            for k in 1..=count {
                let here = if k == count { to } else { from + (to - from) * (k as f64 / count as f64) };
                for (i, off) in &offsets {
                    self.anchors.insert(*i, here + off);
                }
                self.step(colliders, params);
                observer(self);
                steps += 1;
            }
            from = to;
        }
        debug_assert!(self.anchors.contains_key(&lead));
        Ok(steps)
    }

    /// Bed-plane projection of every vertex.
    pub fn projected(&self) -> Vec<[f64; 2]> {
        self.positions.iter().map(|p| [p.x, p.y]).collect()
    }
}

fn accumulate_spring_forces(
    positions: &[Vec3],
    velocities: &[Vec3],
    springs: &[Spring],
    params: &ClothParams,
    out: &mut [Vec3],
) {
    let ks = [params.stiffness_structural, params.stiffness_shear, params.stiffness_bend];
    let c = params.damping;
    for s in springs {
        let (a, b) = (s.a as usize, s.b as usize);
        let d = positions[b] - positions[a];
        let len = d.norm();
        if len < 1e-12 {
            continue;
        }
        let inv = 1.0 / len;
        let k = ks[s.class as usize];
        let stretch = k * (len - s.rest_length);
        let relax = c * (velocities[b] - velocities[a]).dot(&d) * inv;
        let f = d * ((stretch + relax) * inv);
        out[a] += f;
        out[b] -= f;
    }
}

/// Pulls over-stretched structural and shear springs back to the strain limit,
/// moving only unpinned endpoints and carrying the correction into velocity.
fn limit_strain(
    predicted: &mut [Vec3],
    velocities: &mut [Vec3],
    springs: &[Spring],
    pinned: &[bool],
    params: &ClothParams,
) {
    let max_ratio = 1.0 + params.strain_limit;
    let inv_dt = 1.0 / params.dt;
    for _ in 0..params.strain_iterations {
        for s in springs.iter().filter(|s| s.class != SpringClass::Bend) {
            let (a, b) = (s.a as usize, s.b as usize);
            let wa = if pinned[a] { 0.0 } else { 1.0 };
            let wb = if pinned[b] { 0.0 } else { 1.0 };
            if wa + wb == 0.0 {
                continue;
            }
            let d = predicted[b] - predicted[a];
            let limit = max_ratio * s.rest_length;
            let len2 = d.norm_squared();
            if len2 <= limit * limit {
                continue;
            }
            let len = len2.sqrt();
            let corr = d * ((len - limit) / (len * (wa + wb)));
            if wa > 0.0 {
                predicted[a] += corr * wa;
                velocities[a] += corr * (wa * inv_dt);
            }
            if wb > 0.0 {
                predicted[b] -= corr * wb;
                velocities[b] -= corr * (wb * inv_dt);
            }
        }
    }
}
