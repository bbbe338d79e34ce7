use std::fmt;

use serde::{Deserialize, Serialize};

use super::reward::RewardBreakdown;
use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    Dropped,
    Horizon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeOutcome {
    HoldTheEnd,
    StopBefore,
    ReachEndButDrop,
    DropBefore,
}

impl EpisodeOutcome {
    pub const ALL: [EpisodeOutcome; 4] = [
        EpisodeOutcome::HoldTheEnd,
        EpisodeOutcome::StopBefore,
        EpisodeOutcome::ReachEndButDrop,
        EpisodeOutcome::DropBefore,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EpisodeOutcome::HoldTheEnd => "hold_the_end",
            EpisodeOutcome::StopBefore => "stop_before",
            EpisodeOutcome::ReachEndButDrop => "reach_end_but_drop",
            EpisodeOutcome::DropBefore => "drop_before",
        }
    }
}

impl fmt::Display for EpisodeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub gripper: Vec2,
    pub closure: f64,
    pub n_h: usize,
    pub mean_index: Option<f64>,
    pub max_index: Option<usize>,
    /// Holding one of the last `hold_window` particles.
    pub at_end: bool,
    pub reward: RewardBreakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub n_particles: usize,
    pub hold_window: usize,
    /// Highest index held right after reset.
    pub initial_max_index: Option<usize>,
    pub steps: Vec<TraceStep>,
    pub terminal: Option<TerminalCause>,
    /// Reached the end at some point, finished without a drop, but was no
    /// longer at the end on the last step. Classified as `StopBefore`.
    #[serde(default)]
    pub retreated_from_end: bool,
}

impl EpisodeTrace {
    pub fn new(n_particles: usize, hold_window: usize, initial_max_index: Option<usize>) -> Self {
        Self {
            n_particles,
            hold_window,
            initial_max_index,
            steps: Vec::new(),
            terminal: None,
            retreated_from_end: false,
        }
    }

    pub fn is_end_index(&self, i: usize) -> bool {
        i + self.hold_window >= self.n_particles
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward.total).sum()
    }

    fn reached_end(&self) -> bool {
        self.steps.iter().any(|s| s.at_end)
    }

    pub(crate) fn finish(&mut self, cause: TerminalCause) {
        self.terminal = Some(cause);
        let last_at_end = self.steps.last().is_some_and(|s| s.at_end);
        self.retreated_from_end = cause == TerminalCause::Horizon && self.reached_end() && !last_at_end;
    }
}

/// Assigns a finished episode to exactly one outcome class.
pub fn classify_episode(trace: &EpisodeTrace) -> Result<EpisodeOutcome> {
    let cause = trace
        .terminal
        .ok_or_else(|| Error::Usage("cannot classify an unfinished episode".into()))?;
    let reached = trace.reached_end();
    let dropped = cause == TerminalCause::Dropped;
    let holding_at_end = trace.steps.last().is_some_and(|s| s.at_end);
    Ok(match (dropped, reached) {
        (true, true) => EpisodeOutcome::ReachEndButDrop,
        (true, false) => EpisodeOutcome::DropBefore,
        (false, _) if holding_at_end => EpisodeOutcome::HoldTheEnd,
        (false, _) => EpisodeOutcome::StopBefore,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// Steps spent holding one of the last particles.
    pub time_at_end: usize,
    /// Particles between the furthest held index and the tail.
    pub reach: usize,
}

pub fn episode_metrics(trace: &EpisodeTrace) -> EpisodeMetrics {
    let time_at_end = trace.steps.iter().filter(|s| s.at_end).count();
    let furthest = trace
        .steps
        .iter()
        .filter_map(|s| s.max_index)
        .chain(trace.initial_max_index)
        .max()
        .unwrap_or(0);
    EpisodeMetrics {
        time_at_end,
        reach: trace.n_particles.saturating_sub(1 + furthest),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(t: usize, max_index: Option<usize>, n: usize) -> TraceStep {
        TraceStep {
            t,
            gripper: Vec2::ZERO,
            closure: 0.9,
            n_h: usize::from(max_index.is_some()),
            mean_index: max_index.map(|i| i as f64),
            max_index,
            at_end: max_index.is_some_and(|i| i + 10 >= n),
            reward: RewardBreakdown::default(),
        }
    }

    fn trace(n: usize, held: &[Option<usize>], cause: TerminalCause) -> EpisodeTrace {
        let mut tr = EpisodeTrace::new(n, 10, Some(2));
        for (t, &h) in held.iter().enumerate() {
            tr.steps.push(step(t + 1, h, n));
        }
        tr.finish(cause);
        tr
    }

    #[test]
    fn hold_the_end() {
        let held: Vec<_> = (0..150).map(|t| Some((2 + t / 3).min(39))).collect();
        let tr = trace(40, &held, TerminalCause::Horizon);
        assert_eq!(classify_episode(&tr).unwrap(), EpisodeOutcome::HoldTheEnd);
        let m = episode_metrics(&tr);
        assert_eq!(m.reach, 0);
        assert!(m.time_at_end >= 30);
    }

    #[test]
    fn drop_before() {
        let mut held: Vec<_> = (0..60).map(|t| Some(2 + t / 3)).collect();
        held.push(None);
        let tr = trace(44, &held, TerminalCause::Dropped);
        assert_eq!(classify_episode(&tr).unwrap(), EpisodeOutcome::DropBefore);
        assert_eq!(episode_metrics(&tr).time_at_end, 0);
    }

    #[test]
    fn reach_end_but_drop() {
        let n = 50;
        let mut held: Vec<_> = (0..120).map(|t| Some(((t * n) / 100).min(n - 1))).collect();
        held.push(None);
        let tr = trace(n, &held, TerminalCause::Dropped);
        assert_eq!(classify_episode(&tr).unwrap(), EpisodeOutcome::ReachEndButDrop);
    }

    #[test]
    fn stop_before_and_retreat() {
        let tr = trace(40, &vec![Some(5); 150], TerminalCause::Horizon);
        assert_eq!(classify_episode(&tr).unwrap(), EpisodeOutcome::StopBefore);
        assert_eq!(episode_metrics(&tr).reach, 34);

        let mut held = vec![Some(35); 100];
        held.extend(vec![Some(20); 50]);
        let tr = trace(40, &held, TerminalCause::Horizon);
        assert_eq!(classify_episode(&tr).unwrap(), EpisodeOutcome::StopBefore);
        assert!(tr.retreated_from_end);
    }

    #[test]
    fn unfinished_trace_rejected() {
        let tr = EpisodeTrace::new(40, 10, Some(2));
        assert!(classify_episode(&tr).is_err());
    }
}
