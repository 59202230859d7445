//! A closed-form stand-in for the cloth simulation.
//!
//! Each seed draws an observation and a hidden best action that is a fixed
//! linear function of it. The fraction of target points uncovered falls off
//! as a Gaussian in the distance between the executed action and that best
//! action, so rewards, reports and F1 behave like the real thing at a tiny
//! fraction of the cost.

use rand::Rng;

use super::coverage::{reward, CoverageReport};
use super::{Action, Environment, Observation, Outcome};
use crate::error::Result;
use crate::seed;

pub const TOY_TARGET_POINTS: usize = 200;
pub const TOY_OTHER_POINTS: usize = 800;

#[derive(Debug, Clone)]
pub struct ToyEnv {
    /// Length scale of the reward peak in action space, m.
    pub width: f64,
}

impl Default for ToyEnv {
    fn default() -> Self {
        Self { width: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyState {
    pub observation: Observation,
    pub best: Action,
}

impl ToyEnv {
    pub fn best_action(obs: &Observation) -> Action {
        let o = &obs.0;
        Action::new([
            0.5 * o[0] + 0.2 * o[6],
            0.3 * o[1] + 0.4 * o[7] - 0.1,
            0.4 * o[3] - 0.2 * o[9].sin(),
            0.5 * o[4] + 0.1 * o[2].cos(),
        ])
        .clamped()
        .expect("finite")
        .0
    }
}

impl Environment for ToyEnv {
    type State = ToyState;

    fn reset(&self, seed: u64) -> Result<(ToyState, Observation)> {
        let mut rng = seed::rng(seed);
        let observation = Observation(std::array::from_fn(|i| match i % 3 {
            2 => rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            1 => rng.random_range(-0.9..0.9),
            _ => rng.random_range(-0.4..0.4),
        }));
        let best = Self::best_action(&observation);
        Ok((ToyState { observation, best }, observation))
    }

    fn execute(&self, state: &ToyState, action: &Action) -> Result<Outcome> {
        let (action, clamped) = action.clamped()?;
        let d2: f64 = action.0.iter().zip(&state.best.0).map(|(a, b)| (a - b).powi(2)).sum();
        let quality = (-d2 / (self.width * self.width)).exp();
        let exposed = (quality * TOY_TARGET_POINTS as f64).round() as usize;
        let spill = (((1.0 - quality) * 0.1) * TOY_OTHER_POINTS as f64).round() as usize;
        let report = CoverageReport::from_counts(
            (exposed, TOY_TARGET_POINTS),
            (spill, TOY_OTHER_POINTS),
            (0, 50),
        )?;
        let reward = reward(&report, &action)?;
        Ok(Outcome { action, clamped, report, reward, settled: true })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_action_scores_one_hundred() {
        let env = ToyEnv::default();
        let (s, _) = env.reset(3).unwrap();
        assert_eq!(env.execute(&s, &s.best).unwrap().reward.total, 100.0);
        let off = Action::new([s.best.0[0] + 0.3, s.best.0[1], s.best.0[2], s.best.0[3]]);
        assert!(env.execute(&s, &off).unwrap().reward.total < 10.0);
    }
}
