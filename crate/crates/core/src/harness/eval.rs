//! Deterministic-policy evaluation on freshly randomized ropes.

use serde::{Deserialize, Serialize};

use crate::env::{classify_episode, episode_metrics, DloEnv, EnvConfig, EpisodeOutcome, Trajectory};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::perception::ModalityMask;
use crate::sac::SacAgent;

/// Per-component observation multipliers that bring every slot to roughly
/// unit range: gripper position in decimetres, line offsets in centimetres.
pub const ROPE_OBS_SCALE: [f64; 9] = [10.0, 10.0, 1.0, 1.0, 100.0, 1.0, 1.0, 1.0, 100.0];

/// Summary of one evaluation round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: u64,
    pub mean_reward: f64,
    /// Indexed by [`EpisodeOutcome::index`].
    pub outcome_freq: [f64; 4],
    pub time_at_end: f64,
    pub reach: f64,
}

impl EvalRecord {
    pub const METRICS: [&'static str; 7] = [
        "reward",
        "hold_the_end",
        "stop_before",
        "reach_end_but_drop",
        "drop_before",
        "time_at_end",
        "reach",
    ];

    /// Value of a metric named in [`EvalRecord::METRICS`].
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "reward" => self.mean_reward,
            "time_at_end" => self.time_at_end,
            "reach" => self.reach,
            _ => {
                let o = EpisodeOutcome::ALL.iter().find(|o| o.name() == name)?;
                self.outcome_freq[o.index()]
            }
        })
    }

    pub fn from_episodes(step: u64, episodes: &[EpisodeResult]) -> Result<Self> {
        if episodes.is_empty() {
            return Err(Error::Usage("evaluation needs at least one episode".into()));
        }
        let n = episodes.len() as f64;
        let mut counts = [0usize; 4];
        for e in episodes {
            counts[e.outcome.index()] += 1;
        }
        let freq = counts.map(|c| c as f64 / n);
        Ok(Self {
            step,
            mean_reward: episodes.iter().map(|e| e.reward).sum::<f64>() / n,
            outcome_freq: freq,
            time_at_end: episodes.iter().map(|e| e.time_at_end as f64).sum::<f64>() / n,
            reach: episodes.iter().map(|e| e.reach as f64).sum::<f64>() / n,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub reward: f64,
    pub outcome: EpisodeOutcome,
    pub time_at_end: usize,
    pub reach: usize,
}

/// Any deterministic controller mapping an observation to a raw action.
pub trait Policy: Sync {
    fn act(&self, obs: &[f64; 9]) -> Result<[f64; 3]>;
}

impl Policy for SacAgent {
    fn act(&self, obs: &[f64; 9]) -> Result<[f64; 3]> {
        let o: Vec<f32> = obs.iter().map(|&v| v as f32).collect();
        let a = self.act_deterministic(&o)?;
        if a.len() != 3 {
            return Err(Error::Usage("agent action dimension is not 3".into()));
        }
        Ok([a[0] as f64, a[1] as f64, a[2] as f64])
    }
}

impl<F: Fn(&[f64; 9]) -> [f64; 3] + Sync> Policy for F {
    fn act(&self, obs: &[f64; 9]) -> Result<[f64; 3]> {
        Ok(self(obs))
    }
}

/// SplitMix64 finaliser, used to derive independent sub-seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Environment seeds for the `round`-th evaluation of a run. They do not
/// depend on the mask, so every eval mask sees the same ropes.
pub fn eval_seeds(run_seed: u64, round: u64, n: usize) -> Vec<u64> {
    let base = mix_seed(mix_seed(run_seed, 0xE7A1), round);
    (0..n as u64).map(|i| mix_seed(base, i)).collect()
}

/// Runs one episode to termination.
pub fn run_episode<P: Policy + ?Sized>(
    policy: &P,
    cfg: &EnvConfig,
    seed: u64,
    record: bool,
) -> Result<(EpisodeResult, Option<Trajectory>)> {
    let mut env = DloEnv::new(cfg.clone())?;
    env.set_recording(record);
    let mut obs = env.reset_seeded(seed)?;
    let mut reward = 0.0;
    while !env.is_done() {
        let r = env.step(policy.act(&obs.values)?)?;
        reward += r.reward.total;
        obs = r.obs;
    }
    let trace = env.trace().expect("episode started");
    let m = episode_metrics(trace);
    Ok((
        EpisodeResult {
            reward,
            outcome: classify_episode(trace)?,
            time_at_end: m.time_at_end,
            reach: m.reach,
        },
        env.trajectory(),
    ))
}

/// Evaluates `policy` under `mask` on the given environment seeds.
pub fn evaluate<P: Policy + ?Sized>(
    policy: &P,
    cfg: &EnvConfig,
    mask: ModalityMask,
    seeds: &[u64],
    step: u64,
    exec: Execution,
) -> Result<EvalRecord> {
    let mut cfg = cfg.clone();
    cfg.mask = mask;
    let results = exec.map_slice(seeds, |&s| run_episode(policy, &cfg, s, false).map(|r| r.0));
    let episodes = results.into_iter().collect::<Result<Vec<_>>>()?;
    EvalRecord::from_episodes(step, &episodes)
}
