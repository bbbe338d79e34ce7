//! Planar point-mass reaching task used to sanity-check the learner.
//!
//! The point starts uniformly in a square and moves by at most `step_cap`
//! per axis each step toward a fixed goal. The reward is minus the distance
//! to the goal after the move. Because motion is capped per axis, the best
//! achievable return has a closed form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::mix_seed;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sac::{train, Environment, SacAgent, SacConfig, Transition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointMassConfig {
    pub goal: [f64; 2],
    /// Start positions are uniform in `[-half, half]^2`.
    pub start_half: f64,
    pub step_cap: f64,
    pub horizon: usize,
    pub eval_episodes: usize,
}

impl Default for PointMassConfig {
    fn default() -> Self {
        Self {
            goal: [0.1, -0.05],
            start_half: 0.3,
            step_cap: 0.02,
            horizon: 30,
            eval_episodes: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointMassEnv {
    cfg: PointMassConfig,
    pos: Vec2,
    t: usize,
}

impl PointMassEnv {
    pub fn new(cfg: PointMassConfig) -> Result<Self> {
        if !(cfg.step_cap > 0.0) || cfg.horizon == 0 || !(cfg.start_half > 0.0) {
            return Err(Error::Config("point-mass cap, horizon and start box must be positive".into()));
        }
        Ok(Self {
            cfg,
            pos: Vec2::ZERO,
            t: 0,
        })
    }

    fn goal(&self) -> Vec2 {
        Vec2::new(self.cfg.goal[0], self.cfg.goal[1])
    }

    fn obs(&self) -> Vec<f64> {
        let d = self.goal() - self.pos;
        vec![d.x / self.cfg.start_half, d.y / self.cfg.start_half]
    }

    pub fn start_at(&mut self, p: Vec2) -> Vec<f64> {
        self.pos = p;
        self.t = 0;
        self.obs()
    }

    pub fn position(&self) -> Vec2 {
        self.pos
    }
}

impl Environment for PointMassEnv {
    fn obs_dim(&self) -> usize {
        2
    }

    fn act_dim(&self) -> usize {
        2
    }

    fn reset_env(&mut self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let h = self.cfg.start_half;
        let p = Vec2::new(rng.random_range(-h..=h), rng.random_range(-h..=h));
        Ok(self.start_at(p))
    }

    fn step_env(&mut self, action: &[f64]) -> Result<Transition> {
        if action.len() != 2 {
            return Err(Error::Usage("point mass takes 2 action components".into()));
        }
        let cap = self.cfg.step_cap;
        let a = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) * cap };
        self.pos += Vec2::new(a(action[0]), a(action[1]));
        self.t += 1;
        Ok(Transition {
            obs: self.obs(),
            reward: -(self.goal() - self.pos).norm(),
            terminal: false,
            truncated: self.t >= self.cfg.horizon,
        })
    }
}

/// Best return from `start`: each axis closes the gap at full speed.
pub fn optimal_return(cfg: &PointMassConfig, start: Vec2) -> f64 {
    let (mut dx, mut dy) = ((cfg.goal[0] - start.x).abs(), (cfg.goal[1] - start.y).abs());
    let mut total = 0.0;
    for _ in 0..cfg.horizon {
        dx = (dx - cfg.step_cap).max(0.0);
        dy = (dy - cfg.step_cap).max(0.0);
        total -= dx.hypot(dy);
    }
    total
}

/// Return of standing still.
pub fn idle_return(cfg: &PointMassConfig, start: Vec2) -> f64 {
    let g = Vec2::new(cfg.goal[0], cfg.goal[1]);
    -(g - start).norm() * cfg.horizon as f64
}

/// Fixed evaluation starts for a seed.
pub fn eval_starts(cfg: &PointMassConfig, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x9017));
    let h = cfg.start_half;
    (0..cfg.eval_episodes)
        .map(|_| Vec2::new(rng.random_range(-h..=h), rng.random_range(-h..=h)))
        .collect()
}

/// Fraction of the attainable improvement over idling:
/// `(R - R_idle) / (R* - R_idle)` summed over the evaluation starts.
pub fn score_policy(cfg: &PointMassConfig, starts: &[Vec2], mut act: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<f64> {
    let mut env = PointMassEnv::new(cfg.clone())?;
    let (mut got, mut best) = (0.0, 0.0);
    for &s in starts {
        let mut obs = env.start_at(s);
        let mut ret = 0.0;
        loop {
            let tr = env.step_env(&act(&obs)?)?;
            ret += tr.reward;
            obs = tr.obs;
            if tr.truncated {
                break;
            }
        }
        let idle = idle_return(cfg, s);
        got += ret - idle;
        best += optimal_return(cfg, s) - idle;
    }
    if best <= 0.0 {
        return Err(Error::Degenerate("every start already sits on the goal".into()));
    }
    Ok(got / best)
}

/// Evaluation point of a point-mass run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMassPoint {
    pub step: u64,
    pub score: f64,
}

/// Trains a fresh agent and returns its score curve.
pub fn pointmass_benchmark(cfg: &PointMassConfig, sac: &SacConfig) -> Result<Vec<PointMassPoint>> {
    let mut env = PointMassEnv::new(cfg.clone())?;
    let mut agent = SacAgent::new(2, 2, sac.clone())?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(mix_seed(sac.seed, 1));
    let starts = eval_starts(cfg, sac.seed);
    let report = train(&mut agent, &mut env, &mut env_rng, |step, a| {
        let score = score_policy(cfg, &starts, |o| {
            let o: Vec<f32> = o.iter().map(|&v| v as f32).collect();
            Ok(a.act_deterministic(&o)?.iter().map(|&v| v as f64).collect())
        })?;
        Ok(PointMassPoint { step, score })
    })?;
    Ok(report.evals.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_beats_idle_and_greedy_scores_one() {
        let cfg = PointMassConfig::default();
        let starts = eval_starts(&cfg, 3);
        let greedy = score_policy(&cfg, &starts, |o| {
            Ok(o.iter().map(|&d| (d * cfg.start_half / cfg.step_cap).clamp(-1.0, 1.0)).collect())
        })
        .unwrap();
        assert!((greedy - 1.0).abs() < 1e-9, "{greedy}");
        let idle = score_policy(&cfg, &starts, |_| Ok(vec![0.0, 0.0])).unwrap();
        assert!(idle.abs() < 1e-12);
    }

    #[test]
    fn random_policy_far_below_optimum() {
        let cfg = PointMassConfig::default();
        let starts = eval_starts(&cfg, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = score_policy(&cfg, &starts, |_| Ok(vec![rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])).unwrap();
        assert!(s < 0.3, "{s}");
    }
}
