//! Off-policy training loop.

use rand_chacha::ChaCha8Rng;

use super::agent::{SacAgent, UpdateStats};
use super::replay::ReplayBuffer;
use crate::env::DloEnv;
use crate::error::{Error, Result};

/// One environment transition as seen by the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// The episode ended in a state with no future reward.
    pub terminal: bool,
    /// The episode was cut off by a time limit.
    pub truncated: bool,
}

/// Episodic environment with continuous actions in `[-1, 1]^act_dim`.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn act_dim(&self) -> usize;
    fn reset_env(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
    fn step_env(&mut self, action: &[f64]) -> Result<Transition>;
}

impl Environment for DloEnv {
    fn obs_dim(&self) -> usize {
        crate::perception::OBS_DIM
    }

    fn act_dim(&self) -> usize {
        3
    }

    fn reset_env(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(self.reset(rng)?.values.to_vec())
    }

    fn step_env(&mut self, action: &[f64]) -> Result<Transition> {
        let raw: [f64; 3] = action
            .try_into()
            .map_err(|_| Error::Usage(format!("expected 3 action components, got {}", action.len())))?;
        let r = self.step(raw)?;
        let dropped = r.info.terminal == Some(crate::env::TerminalCause::Dropped);
        Ok(Transition {
            obs: r.obs.values.to_vec(),
            reward: r.reward.total,
            terminal: dropped,
            truncated: r.done && !dropped,
        })
    }
}

/// What a training run produced besides the trained agent.
#[derive(Clone, Debug)]
pub struct TrainReport<R> {
    /// Hook results keyed by environment step.
    pub evals: Vec<(u64, R)>,
    /// `(step at episode end, undiscounted return)`.
    pub episode_returns: Vec<(u64, f64)>,
    pub last_update: Option<UpdateStats>,
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

/// Trains `agent` on `env` until `cfg.total_steps`, calling `eval_hook`
/// every `cfg.eval_every` steps. The first `cfg.warmup_steps` steps act
/// uniformly at random and never update the networks.
///
/// All randomness comes from the agent's rng and `env_rng`, so two runs from
/// the same state produce identical results.
pub fn train<E, R, F>(
    agent: &mut SacAgent,
    env: &mut E,
    env_rng: &mut ChaCha8Rng,
    mut eval_hook: F,
) -> Result<TrainReport<R>>
where
    E: Environment,
    F: FnMut(u64, &SacAgent) -> Result<R>,
{
    if env.obs_dim() != agent.obs_dim() || env.act_dim() != agent.act_dim() {
        return Err(Error::Usage("agent and environment dimensions differ".into()));
    }
    let cfg = agent.config().clone();
    let mut buffer = ReplayBuffer::<f32>::new(cfg.replay_capacity, agent.obs_dim(), agent.act_dim())?;
    let mut report = TrainReport {
        evals: Vec::new(),
        episode_returns: Vec::new(),
        last_update: None,
    };
    let mut obs = to_f32(&env.reset_env(env_rng)?);
    let mut ep_return = 0.0;
    while agent.step < cfg.total_steps {
        let action = if agent.step < cfg.warmup_steps {
            agent.random_action()
        } else {
            agent.sample_action(&obs)?.0
        };
        let act64: Vec<f64> = action.iter().map(|&a| a as f64).collect();
        let tr = env.step_env(&act64)?;
        let next = to_f32(&tr.obs);
        buffer.push(&obs, &action, tr.reward as f32, &next, tr.terminal)?;
        ep_return += tr.reward;
        agent.step += 1;

        if tr.terminal || tr.truncated {
            report.episode_returns.push((agent.step, ep_return));
            ep_return = 0.0;
            obs = to_f32(&env.reset_env(env_rng)?);
        } else {
            obs = next;
        }

        if agent.step > cfg.warmup_steps && buffer.len() >= cfg.batch_size {
            let batch = buffer.sample(cfg.batch_size, agent.rng_mut())?;
            report.last_update = Some(agent.update(&batch)?);
        }
        if agent.step % cfg.eval_every == 0 {
            report.evals.push((agent.step, eval_hook(agent.step, agent)?));
        }
    }
    Ok(report)
}
