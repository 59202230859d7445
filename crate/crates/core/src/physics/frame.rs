//! Per-frame JSON snapshots of the blanket for external viewers.
//!
//! One document per frame:
//!
//! ```json
//! {
//!   "format": "bedding-frame/1",
//!   "frame": 0,
//!   "time": 0.0,
//!   "rows": 51,
//!   "cols": 41,
//!   "positions": [[x, y, z], ...],          // row-major, rows along y
//!   "anchors": [{"vertex": 12, "target": [x, y, z]}]
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cloth::ClothMesh;
use crate::error::Result;

pub const FRAME_FORMAT: &str = "bedding-frame/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub vertex: usize,
    pub target: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub format: String,
    pub frame: usize,
    pub time: f64,
    pub rows: usize,
    pub cols: usize,
    pub positions: Vec<[f64; 3]>,
    pub anchors: Vec<AnchorRecord>,
}

impl Frame {
    pub fn capture(cloth: &ClothMesh, frame: usize) -> Self {
        Self {
            format: FRAME_FORMAT.to_string(),
            frame,
            time: cloth.time,
            rows: cloth.rows,
            cols: cloth.cols,
            positions: cloth.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
            anchors: cloth
                .anchors
                .iter()
                .map(|(&vertex, t)| AnchorRecord { vertex, target: [t.x, t.y, t.z] })
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&std::fs::read(path)?)?)
    }
}
