//! Planar coverage classification and the reward terms built on it.

use serde::{Deserialize, Serialize};

use super::Action;
use crate::error::{Error, Result};
use crate::human::PointPartition;
use crate::physics::Vec3;

/// Default coverage distance, m.
pub const COVER_THRESHOLD: f64 = 0.028;
/// Grasp-to-release distance at which the long-move penalty applies, m.
pub const MOVE_LIMIT: f64 = 1.5;
pub const TARGET_WEIGHT: f64 = 100.0;
pub const NON_TARGET_WEIGHT: f64 = 100.0;
pub const HEAD_WEIGHT: f64 = 200.0;
pub const MOVE_PENALTY: f64 = 150.0;

/// True when some projected cloth vertex lies strictly closer than `lambda`
/// to `point` in the bed plane.
pub fn covered(point: [f64; 2], cloth: &[[f64; 2]], lambda: f64) -> bool {
    let l2 = lambda * lambda;
    cloth.iter().any(|v| {
        let (dx, dy) = (v[0] - point[0], v[1] - point[1]);
        dx * dx + dy * dy < l2
    })
}

/// Uniform grid over projected cloth vertices with cells of side `lambda`,
/// so a query only has to look at the 3x3 block around its own cell.
pub struct CoverageIndex<'a> {
    cloth: &'a [[f64; 2]],
    lambda: f64,
    origin: [f64; 2],
    dims: [usize; 2],
    starts: Vec<u32>,
    order: Vec<u32>,
}

impl<'a> CoverageIndex<'a> {
    pub fn new(cloth: &'a [[f64; 2]], lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::invalid_arg("coverage threshold must be positive"));
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in cloth {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        if cloth.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let dims = [0, 1].map(|k| ((hi[k] - lo[k]) / lambda).floor() as usize + 1);
        let cell = |v: &[f64; 2]| {
            let cx = (((v[0] - lo[0]) / lambda) as usize).min(dims[0] - 1);
            let cy = (((v[1] - lo[1]) / lambda) as usize).min(dims[1] - 1);
            cy * dims[0] + cx
        };
        // Counting sort of vertex indices by cell.
        let mut starts = vec![0u32; dims[0] * dims[1] + 1];
        for v in cloth {
            starts[cell(v) + 1] += 1;
        }
        for i in 1..starts.len() {
            starts[i] += starts[i - 1];
        }
        let mut fill = starts.clone();
        let mut order = vec![0u32; cloth.len()];
        for (i, v) in cloth.iter().enumerate() {
            let c = cell(v);
            order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        Ok(Self { cloth, lambda, origin: lo, dims, starts, order })
    }

    pub fn covered(&self, point: [f64; 2]) -> bool {
        let l2 = self.lambda * self.lambda;
        let fx = ((point[0] - self.origin[0]) / self.lambda).floor();
        let fy = ((point[1] - self.origin[1]) / self.lambda).floor();
        for cy in (fy as i64 - 1)..=(fy as i64 + 1) {
            if cy < 0 || cy >= self.dims[1] as i64 {
                continue;
            }
            for cx in (fx as i64 - 1)..=(fx as i64 + 1) {
                if cx < 0 || cx >= self.dims[0] as i64 {
                    continue;
                }
                let c = cy as usize * self.dims[0] + cx as usize;
                let span = self.starts[c] as usize..self.starts[c + 1] as usize;
                for &i in &self.order[span] {
                    let v = self.cloth[i as usize];
                    let (dx, dy) = (v[0] - point[0], v[1] - point[1]);
                    if dx * dx + dy * dy < l2 {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Counts of uncovered target / non-target points and covered head points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Per body point, true when covered. Empty for reports built from counts.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covered: Vec<bool>,
    pub target_uncovered: usize,
    pub non_target_uncovered: usize,
    pub head_covered: usize,
    pub target_total: usize,
    pub non_target_total: usize,
    pub head_total: usize,
}

impl CoverageReport {
    /// Report without per-point flags. Fails if any count exceeds its total.
    pub fn from_counts(
        (target_uncovered, target_total): (usize, usize),
        (non_target_uncovered, non_target_total): (usize, usize),
        (head_covered, head_total): (usize, usize),
    ) -> Result<Self> {
        let report = Self {
            covered: Vec::new(),
            target_uncovered,
            non_target_uncovered,
            head_covered,
            target_total,
            non_target_total,
            head_total,
        };
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_uncovered > self.target_total
            || self.non_target_uncovered > self.non_target_total
            || self.head_covered > self.head_total
        {
            return Err(Error::invalid_arg(format!("inconsistent coverage counts {self:?}")));
        }
        Ok(())
    }

    /// Fraction of non-head points covered.
    pub fn body_covered_fraction(&self) -> f64 {
        let n = self.target_total + self.non_target_total;
        if n == 0 {
            return 1.0;
        }
        1.0 - (self.target_uncovered + self.non_target_uncovered) as f64 / n as f64
    }

    /// Fraction of head points left uncovered.
    pub fn head_exposed_fraction(&self) -> f64 {
        if self.head_total == 0 {
            return 1.0;
        }
        1.0 - self.head_covered as f64 / self.head_total as f64
    }
}

pub fn coverage_report(
    points: &[Vec3],
    partition: &PointPartition,
    cloth: &[[f64; 2]],
    lambda: f64,
) -> Result<CoverageReport> {
    let index = CoverageIndex::new(cloth, lambda)?;
    let covered: Vec<bool> = points.iter().map(|p| index.covered([p.x, p.y])).collect();
    let count = |ids: &[usize]| ids.iter().filter(|&&i| covered[i]).count();
    let report = CoverageReport {
        target_uncovered: partition.target.len() - count(&partition.target),
        non_target_uncovered: partition.non_target.len() - count(&partition.non_target),
        head_covered: count(&partition.head),
        target_total: partition.target.len(),
        non_target_total: partition.non_target.len(),
        head_total: partition.head.len(),
        covered,
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub target: f64,
    pub non_target: f64,
    pub head: f64,
    pub distance: f64,
    pub total: f64,
}

pub fn reward(report: &CoverageReport, action: &Action) -> Result<RewardBreakdown> {
    report.validate()?;
    if report.target_total == 0 {
        return Err(Error::invalid_arg("target has no body points"));
    }
    let frac = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let target = TARGET_WEIGHT * frac(report.target_uncovered, report.target_total);
    // Written as 0 - x so that an untouched term is +0.0, not -0.0.
    let non_target = 0.0 - NON_TARGET_WEIGHT * frac(report.non_target_uncovered, report.non_target_total);
    let head = 0.0 - HEAD_WEIGHT * frac(report.head_covered, report.head_total);
    let distance = if action.move_length() >= MOVE_LIMIT { -MOVE_PENALTY } else { 0.0 };
    Ok(RewardBreakdown { target, non_target, head, distance, total: target + non_target + head + distance })
}
