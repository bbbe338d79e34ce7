//! Twin-critic soft actor-critic with automatic temperature.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::net::{Adam, DenseNet, Real};
use super::policy::{standard_normals, GaussianPolicy, PolicySample};
use super::replay::Batch;
use crate::error::{Error, Result};
use crate::parallel::Execution;

const CHECKPOINT_MAGIC: &[u8; 8] = b"DLOSACCK";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SacConfig {
    /// Width of every hidden layer.
    pub hidden: usize,
    pub hidden_layers: usize,
    pub gamma: f64,
    /// Polyak rate for the target critics.
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Uniform random actions before learning starts.
    pub warmup_steps: u64,
    pub total_steps: u64,
    pub eval_every: u64,
    pub init_alpha: f64,
    pub auto_alpha: bool,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    /// Per-component observation multipliers. Empty means identity.
    pub obs_scale: Vec<f64>,
    pub seed: u64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            hidden: 256,
            hidden_layers: 2,
            gamma: 0.99,
            tau: 0.005,
            lr: 1e-3,
            batch_size: 128,
            replay_capacity: 100_000,
            warmup_steps: 1000,
            total_steps: 20_000,
            eval_every: 200,
            init_alpha: 0.1,
            auto_alpha: true,
            target_entropy: None,
            obs_scale: Vec::new(),
            seed: 0,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.hidden == 0 || self.hidden_layers == 0 {
            return bad("hidden width and depth must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("gamma must lie in [0, 1] and tau in (0, 1]");
        }
        if !(self.lr > 0.0) || !(self.init_alpha > 0.0) {
            return bad("learning rate and initial temperature must be positive");
        }
        if self.batch_size == 0 || self.replay_capacity == 0 || self.eval_every == 0 {
            return bad("batch size, replay capacity and eval interval must be positive");
        }
        Ok(())
    }
}

/// Losses from one gradient step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sac<T> {
    cfg: SacConfig,
    obs_dim: usize,
    act_dim: usize,
    pub actor: GaussianPolicy<T>,
    pub q1: DenseNet<T>,
    pub q2: DenseNet<T>,
    pub q1_target: DenseNet<T>,
    pub q2_target: DenseNet<T>,
    actor_opt: Adam<T>,
    q1_opt: Adam<T>,
    q2_opt: Adam<T>,
    log_alpha: T,
    alpha_opt: Adam<T>,
    rng: ChaCha8Rng,
    /// Environment steps taken so far.
    pub step: u64,
}

/// Single-precision agent used for training.
pub type SacAgent = Sac<f32>;

impl<T: Real> Sac<T> {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: SacConfig) -> Result<Self> {
        cfg.validate()?;
        if obs_dim == 0 || act_dim == 0 {
            return Err(Error::Config("observation and action dims must be positive".into()));
        }
        if !cfg.obs_scale.is_empty() && cfg.obs_scale.len() != obs_dim {
            return Err(Error::Config(format!(
                "obs_scale has {} entries for {obs_dim} observations",
                cfg.obs_scale.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let hidden = vec![cfg.hidden; cfg.hidden_layers];
        let actor = GaussianPolicy::new(obs_dim, act_dim, &hidden, &mut rng)?;
        let mut qdims = vec![obs_dim + act_dim];
        qdims.extend_from_slice(&hidden);
        qdims.push(1);
        let q1 = DenseNet::new(&qdims, &mut rng)?;
        let q2 = DenseNet::new(&qdims, &mut rng)?;
        let lr = cfg.lr;
        Ok(Self {
            obs_dim,
            act_dim,
            actor_opt: Adam::new(actor.net.n_params(), lr),
            q1_opt: Adam::new(q1.n_params(), lr),
            q2_opt: Adam::new(q2.n_params(), lr),
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            actor,
            q1,
            q2,
            log_alpha: T::lit(cfg.init_alpha.ln()),
            alpha_opt: Adam::new(1, lr),
            rng,
            step: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp().to_f64().unwrap_or(f64::NAN)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn set_execution(&mut self, exec: Execution) {
        for net in [
            &mut self.actor.net,
            &mut self.q1,
            &mut self.q2,
            &mut self.q1_target,
            &mut self.q2_target,
        ] {
            net.set_execution(exec);
        }
    }

    fn target_entropy(&self) -> f64 {
        self.cfg.target_entropy.unwrap_or(-(self.act_dim as f64))
    }

    /// Applies the observation scaling to a `batch x obs_dim` slice.
    pub fn scale_obs(&self, obs: &[T]) -> Vec<T> {
        if self.cfg.obs_scale.is_empty() {
            return obs.to_vec();
        }
        obs.chunks_exact(self.obs_dim)
            .flat_map(|row| row.iter().zip(&self.cfg.obs_scale).map(|(&v, &s)| v * T::lit(s)))
            .collect()
    }

    fn critic_input(&self, scaled_obs: &[T], act: &[T], batch: usize) -> Vec<T> {
        let (o, a) = (self.obs_dim, self.act_dim);
        let mut x = Vec::with_capacity(batch * (o + a));
        for r in 0..batch {
            x.extend_from_slice(&scaled_obs[r * o..(r + 1) * o]);
            x.extend_from_slice(&act[r * a..(r + 1) * a]);
        }
        x
    }

    /// Deterministic action `tanh(mean)` for one raw observation.
    pub fn act_deterministic(&self, obs: &[T]) -> Result<Vec<T>> {
        self.actor.act_deterministic(&self.scale_obs(obs), 1)
    }

    /// Stochastic action for one raw observation, drawn from the agent's rng.
    pub fn sample_action(&mut self, obs: &[T]) -> Result<(Vec<T>, T)> {
        let s = self.scale_obs(obs);
        let eps = standard_normals(&mut self.rng, self.act_dim);
        let (sample, _) = self.actor.sample_with(&s, 1, eps)?;
        Ok((sample.action, sample.log_prob[0]))
    }

    /// Uniform action in `[-1, 1]^act_dim`.
    pub fn random_action(&mut self) -> Vec<T> {
        (0..self.act_dim)
            .map(|_| T::lit(self.rng.random_range(-1.0..=1.0)))
            .collect()
    }

    /// Bootstrapped critic targets `r + gamma (1 - d) (min Q' - alpha log pi)`
    /// with next actions drawn using `eps`.
    pub fn critic_targets_with(&self, batch: &Batch<T>, eps: Vec<T>) -> Result<Vec<T>> {
        let b = batch.size;
        let s2 = self.scale_obs(&batch.next_obs);
        let (next, _) = self.actor.sample_with(&s2, b, eps)?;
        let x = self.critic_input(&s2, &next.action, b);
        let t1 = self.q1_target.forward(&x, b)?;
        let t2 = self.q2_target.forward(&x, b)?;
        let alpha = self.log_alpha.exp();
        let gamma = T::lit(self.cfg.gamma);
        Ok((0..b)
            .map(|r| {
                let soft = t1[r].min(t2[r]) - alpha * next.log_prob[r];
                batch.rew[r] + gamma * (T::one() - batch.done[r]) * soft
            })
            .collect())
    }

    /// Mean squared error of `net` against `y` and its parameter gradient.
    pub fn critic_loss_grad(net: &DenseNet<T>, x: &[T], y: &[T]) -> Result<(T, Vec<T>)> {
        let b = y.len();
        let (q, tape) = net.forward_tape(x, b)?;
        let inv = T::lit(1.0 / b as f64);
        let two = T::lit(2.0);
        let mut loss = T::zero();
        let dq: Vec<T> = q
            .iter()
            .zip(y)
            .map(|(&q, &y)| {
                let e = q - y;
                loss = loss + e * e * inv;
                two * e * inv
            })
            .collect();
        let mut g = vec![T::zero(); net.n_params()];
        net.backward(&tape, &dq, Some(&mut g), false)?;
        Ok((loss, g))
    }

    /// Actor objective `mean(alpha log pi - min(Q1, Q2))` at reparameterised
    /// samples with noise `eps`, plus its gradient w.r.t. actor parameters.
    pub fn actor_loss_grad(&self, scaled_obs: &[T], batch: usize, eps: Vec<T>) -> Result<(T, Vec<T>, PolicySample<T>)> {
        let (o, a) = (self.obs_dim, self.act_dim);
        let (s, tape) = self.actor.sample_with(scaled_obs, batch, eps)?;
        let x = self.critic_input(scaled_obs, &s.action, batch);
        let (v1, t1) = self.q1.forward_tape(&x, batch)?;
        let (v2, t2) = self.q2.forward_tape(&x, batch)?;
        let alpha = self.log_alpha.exp();
        let inv = T::lit(1.0 / batch as f64);

        let mut loss = T::zero();
        let mut up1 = vec![T::zero(); batch];
        let mut up2 = vec![T::zero(); batch];
        for r in 0..batch {
            let q = if v1[r] <= v2[r] {
                up1[r] = -inv;
                v1[r]
            } else {
                up2[r] = -inv;
                v2[r]
            };
            loss = loss + (alpha * s.log_prob[r] - q) * inv;
        }
        let dx1 = self.q1.backward(&t1, &up1, None, true)?.unwrap_or_default();
        let dx2 = self.q2.backward(&t2, &up2, None, true)?.unwrap_or_default();

        let se = T::lit(super::policy::SQUASH_EPS);
        let two = T::lit(2.0);
        let mut dout = vec![T::zero(); batch * 2 * a];
        for r in 0..batch {
            for j in 0..a {
                let k = r * a + j;
                let t = s.action[k];
                let one_m = T::one() - t * t;
                let dl_da = dx1[r * (o + a) + o + j] + dx2[r * (o + a) + o + j];
                // d/du of -ln(1 - tanh(u)^2 + eps)
                let g = two * t * one_m / (one_m + se);
                let dl_du = alpha * g * inv + dl_da * one_m;
                dout[r * 2 * a + j] = dl_du;
                if !s.clipped[k] {
                    let sigma = s.log_std[k].exp();
                    dout[r * 2 * a + a + j] = -alpha * inv + dl_du * sigma * s.eps[k];
                }
            }
        }
        let mut grad = vec![T::zero(); self.actor.net.n_params()];
        self.actor.net.backward(&tape, &dout, Some(&mut grad), false)?;
        Ok((loss, grad, s))
    }

    /// One gradient step on critics, actor and temperature, then a target
    /// update.
    pub fn update(&mut self, batch: &Batch<T>) -> Result<UpdateStats> {
        let b = batch.size;
        let eps_next = standard_normals(&mut self.rng, b * self.act_dim);
        let y = self.critic_targets_with(batch, eps_next)?;
        let s = self.scale_obs(&batch.obs);
        let x = self.critic_input(&s, &batch.act, b);

        let (l1, g1) = Self::critic_loss_grad(&self.q1, &x, &y)?;
        self.q1_opt.step(self.q1.params_mut(), &g1);
        let (l2, g2) = Self::critic_loss_grad(&self.q2, &x, &y)?;
        self.q2_opt.step(self.q2.params_mut(), &g2);

        let eps = standard_normals(&mut self.rng, b * self.act_dim);
        let (actor_loss, ga, sample) = self.actor_loss_grad(&s, b, eps)?;
        self.actor_opt.step(self.actor.net.params_mut(), &ga);

        let mean_logp = sample.log_prob.iter().copied().sum::<T>() * T::lit(1.0 / b as f64);
        if self.cfg.auto_alpha {
            // d/d(log alpha) of -log alpha * (log pi + H)
            let g = -(mean_logp + T::lit(self.target_entropy()));
            let mut la = [self.log_alpha];
            self.alpha_opt.step(&mut la, &[g]);
            self.log_alpha = la[0];
        }

        let tau = T::lit(self.cfg.tau);
        self.q1_target.soft_update_from(&self.q1, tau)?;
        self.q2_target.soft_update_from(&self.q2, tau)?;

        let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
        let stats = UpdateStats {
            critic_loss: 0.5 * (f(l1) + f(l2)),
            actor_loss: f(actor_loss),
            alpha: self.alpha(),
            entropy: -f(mean_logp),
        };
        if !(stats.critic_loss.is_finite() && stats.actor_loss.is_finite() && stats.alpha.is_finite()) {
            return Err(Error::NonFinite { index: self.step as usize });
        }
        Ok(stats)
    }

    /// Serialises the complete learner state.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = CHECKPOINT_MAGIC.to_vec();
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        bincode::serialize_into(&mut out, self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let head = CHECKPOINT_MAGIC.len() + 4;
        if bytes.len() < head || &bytes[..CHECKPOINT_MAGIC.len()] != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version = u32::from_le_bytes(bytes[CHECKPOINT_MAGIC.len()..head].try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
        }
        let agent: Self = bincode::deserialize(&bytes[head..]).map_err(|e| Error::Checkpoint(e.to_string()))?;
        agent.cfg.validate()?;
        Ok(agent)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
