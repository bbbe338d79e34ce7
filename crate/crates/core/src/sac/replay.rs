//! Fixed-capacity ring buffer of transitions.

use rand::Rng;

use super::net::Real;
use crate::error::{Error, Result};

/// A sampled minibatch, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch<T> {
    pub size: usize,
    pub obs: Vec<T>,
    pub act: Vec<T>,
    pub rew: Vec<T>,
    pub next_obs: Vec<T>,
    /// 1 when the transition ended the episode without bootstrapping.
    pub done: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    obs_dim: usize,
    act_dim: usize,
    obs: Vec<T>,
    act: Vec<T>,
    rew: Vec<T>,
    next_obs: Vec<T>,
    done: Vec<T>,
    len: usize,
    head: usize,
}

impl<T: Real> ReplayBuffer<T> {
    pub fn new(capacity: usize, obs_dim: usize, act_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            obs_dim,
            act_dim,
            obs: vec![T::zero(); capacity * obs_dim],
            act: vec![T::zero(); capacity * act_dim],
            rew: vec![T::zero(); capacity],
            next_obs: vec![T::zero(); capacity * obs_dim],
            done: vec![T::zero(); capacity],
            len: 0,
            head: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Stores a transition, overwriting the oldest once full.
    pub fn push(&mut self, obs: &[T], act: &[T], rew: T, next_obs: &[T], done: bool) -> Result<()> {
        if obs.len() != self.obs_dim || next_obs.len() != self.obs_dim || act.len() != self.act_dim {
            return Err(Error::Usage("transition has the wrong shape".into()));
        }
        let (o, a, i) = (self.obs_dim, self.act_dim, self.head);
        self.obs[i * o..(i + 1) * o].copy_from_slice(obs);
        self.next_obs[i * o..(i + 1) * o].copy_from_slice(next_obs);
        self.act[i * a..(i + 1) * a].copy_from_slice(act);
        self.rew[i] = rew;
        self.done[i] = if done { T::one() } else { T::zero() };
        self.head = (self.head + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        Ok(())
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch<T>> {
        if self.len == 0 || n == 0 {
            return Err(Error::Usage("cannot sample from an empty replay buffer".into()));
        }
        let (o, a) = (self.obs_dim, self.act_dim);
        let mut b = Batch {
            size: n,
            obs: Vec::with_capacity(n * o),
            act: Vec::with_capacity(n * a),
            rew: Vec::with_capacity(n),
            next_obs: Vec::with_capacity(n * o),
            done: Vec::with_capacity(n),
        };
        for _ in 0..n {
            let i = rng.random_range(0..self.len);
            b.obs.extend_from_slice(&self.obs[i * o..(i + 1) * o]);
            b.next_obs.extend_from_slice(&self.next_obs[i * o..(i + 1) * o]);
            b.act.extend_from_slice(&self.act[i * a..(i + 1) * a]);
            b.rew.push(self.rew[i]);
            b.done.push(self.done[i]);
        }
        Ok(b)
    }
}
