//! Episode log: one JSON object per line, one line per rollout.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Action, BlanketPose, Observation, Outcome};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub target: String,
    pub observation: Observation,
    /// Action as proposed, before clamping.
    pub proposed: Action,
    pub action: Action,
    pub blanket: BlanketPose,
    pub target_uncovered: usize,
    pub non_target_uncovered: usize,
    pub head_covered: usize,
    pub target_total: usize,
    pub non_target_total: usize,
    pub head_total: usize,
    pub reward_target: f64,
    pub reward_non_target: f64,
    pub reward_head: f64,
    pub reward_distance: f64,
    pub reward: f64,
    pub clamped: bool,
    pub settled: bool,
    /// Evaluation condition the episode ran under, when it came from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

impl EpisodeRecord {
    pub fn new(
        seed: u64,
        target: &str,
        observation: Observation,
        blanket: BlanketPose,
        proposed: Action,
        outcome: &Outcome,
    ) -> Self {
        let r = &outcome.report;
        let w = &outcome.reward;
        Self {
            seed,
            target: target.to_string(),
            observation,
            proposed,
            action: outcome.action,
            blanket,
            target_uncovered: r.target_uncovered,
            non_target_uncovered: r.non_target_uncovered,
            head_covered: r.head_covered,
            target_total: r.target_total,
            non_target_total: r.non_target_total,
            head_total: r.head_total,
            reward_target: w.target,
            reward_non_target: w.non_target,
            reward_head: w.head,
            reward_distance: w.distance,
            reward: w.total,
            clamped: outcome.clamped,
            settled: outcome.settled,
            condition: None,
        }
    }

    pub fn write_line<W: Write>(&self, out: &mut W) -> Result<()> {
        serde_json::to_writer(&mut *out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_all<R: BufRead>(input: R) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for line in input.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
        Ok(out)
    }
}
