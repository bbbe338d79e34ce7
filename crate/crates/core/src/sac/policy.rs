//! Tanh-squashed diagonal Gaussian policy.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::net::{DenseNet, Real, Tape};
use crate::error::Result;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Keeps the squash correction finite when `tanh(u)` saturates.
pub const SQUASH_EPS: f64 = 1e-6;

const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-density of a squashed sample, per action dimension summed.
///
/// `u` is the pre-squash sample; the action is `tanh(u)`.
pub fn squashed_log_prob(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(u)
        .map(|((&m, &ls), &u)| {
            let z = (u - m) / ls.exp();
            let a = u.tanh();
            -0.5 * z * z - ls - HALF_LOG_2PI - (1.0 - a * a + SQUASH_EPS).ln()
        })
        .sum()
}

/// Same density evaluated at a squashed action `a` in (-1, 1).
pub fn action_log_prob(mean: &[f64], log_std: &[f64], a: &[f64]) -> f64 {
    let u: Vec<f64> = a.iter().map(|v| v.atanh()).collect();
    squashed_log_prob(mean, log_std, &u)
}

/// Actor network head: outputs `[mean | log_std]` per row.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GaussianPolicy<T> {
    pub net: DenseNet<T>,
    act_dim: usize,
}

/// Reparameterised batch sample with everything the actor gradient needs.
#[derive(Clone, Debug)]
pub struct PolicySample<T> {
    pub batch: usize,
    pub mean: Vec<T>,
    pub log_std: Vec<T>,
    /// Whether `log_std` was clipped (no gradient flows through it).
    pub clipped: Vec<bool>,
    pub eps: Vec<T>,
    pub action: Vec<T>,
    /// Summed log-probability per row.
    pub log_prob: Vec<T>,
}

impl<T: Real> GaussianPolicy<T> {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(hidden);
        dims.push(2 * act_dim);
        Ok(Self {
            net: DenseNet::new(&dims, rng)?,
            act_dim,
        })
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    /// Splits raw network output into mean and clipped log-std.
    fn heads(&self, out: &[T], batch: usize) -> (Vec<T>, Vec<T>, Vec<bool>) {
        let a = self.act_dim;
        let (lo, hi) = (T::lit(LOG_STD_MIN), T::lit(LOG_STD_MAX));
        let mut mean = Vec::with_capacity(batch * a);
        let mut log_std = Vec::with_capacity(batch * a);
        let mut clipped = Vec::with_capacity(batch * a);
        for row in out.chunks_exact(2 * a) {
            mean.extend_from_slice(&row[..a]);
            for &ls in &row[a..] {
                clipped.push(ls < lo || ls > hi);
                log_std.push(ls.max(lo).min(hi));
            }
        }
        (mean, log_std, clipped)
    }

    /// `tanh(mean)` for each row.
    pub fn act_deterministic(&self, obs: &[T], batch: usize) -> Result<Vec<T>> {
        let out = self.net.forward(obs, batch)?;
        let (mean, _, _) = self.heads(&out, batch);
        Ok(mean.into_iter().map(|m| m.tanh()).collect())
    }

    /// Squashed sample given standard-normal noise `eps`.
    pub fn sample_with(&self, obs: &[T], batch: usize, eps: Vec<T>) -> Result<(PolicySample<T>, Tape<T>)> {
        let (out, tape) = self.net.forward_tape(obs, batch)?;
        let (mean, log_std, clipped) = self.heads(&out, batch);
        let a = self.act_dim;
        let mut action = Vec::with_capacity(batch * a);
        let mut log_prob = Vec::with_capacity(batch);
        let half = T::lit(0.5);
        let c = T::lit(HALF_LOG_2PI);
        let se = T::lit(SQUASH_EPS);
        for r in 0..batch {
            let mut lp = T::zero();
            for j in r * a..(r + 1) * a {
                let u = mean[j] + log_std[j].exp() * eps[j];
                let t = u.tanh();
                action.push(t);
                lp = lp - half * eps[j] * eps[j] - log_std[j] - c - (T::one() - t * t + se).ln();
            }
            log_prob.push(lp);
        }
        Ok((
            PolicySample {
                batch,
                mean,
                log_std,
                clipped,
                eps,
                action,
                log_prob,
            },
            tape,
        ))
    }

    /// Draws a reparameterised sample.
    pub fn sample<R: Rng + ?Sized>(&self, obs: &[T], batch: usize, rng: &mut R) -> Result<(PolicySample<T>, Tape<T>)> {
        let eps = standard_normals(rng, batch * self.act_dim);
        self.sample_with(obs, batch, eps)
    }
}

pub(crate) fn standard_normals<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<T> {
    (0..n)
        .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_prob_at_origin() {
        // Three standard normals at 0, squash derivative 1.
        let lp = squashed_log_prob(&[0.0; 3], &[0.0; 3], &[0.0; 3]);
        let expected = -3.0 * 0.5 * (2.0 * std::f64::consts::PI).ln() - 3.0 * (1.0f64 + 1e-6).ln();
        assert!((lp - expected).abs() < 1e-12);
        assert!((lp + 2.7568).abs() < 1e-4);
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        for &(m, ls) in &[(0.0, 0.0), (0.7, -1.0), (-1.5, 0.5)] {
            let n = 200_000;
            let h = 2.0 / n as f64;
            let total: f64 = (0..n)
                .map(|i| {
                    let a = -1.0 + (i as f64 + 0.5) * h;
                    action_log_prob(&[m], &[ls], &[a]).exp() * h
                })
                .sum();
            assert!((total - 1.0).abs() < 0.01, "mean {m} log_std {ls}: {total}");
        }
    }

    #[test]
    fn actions_stay_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut pi = GaussianPolicy::<f64>::new(4, 3, &[16], &mut rng).unwrap();
        for p in pi.net.params_mut() {
            *p *= 50.0;
        }
        let obs: Vec<f64> = (0..40).map(|i| (i as f64).sin() * 5.0).collect();
        let (s, _) = pi.sample(&obs, 10, &mut rng).unwrap();
        assert!(s.action.iter().all(|a| a.abs() <= 1.0));
        assert!(s.log_std.iter().all(|l| (LOG_STD_MIN..=LOG_STD_MAX).contains(l)));
        assert!(s.log_prob.iter().all(|l| l.is_finite()));
        let det = pi.act_deterministic(&obs, 10).unwrap();
        assert!(det.iter().all(|a| a.abs() <= 1.0));
    }

    #[test]
    fn sample_matches_scalar_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pi = GaussianPolicy::<f64>::new(2, 2, &[8], &mut rng).unwrap();
        let (s, _) = pi.sample(&[0.3, -0.2], 1, &mut rng).unwrap();
        let u: Vec<f64> = (0..2).map(|j| s.mean[j] + s.log_std[j].exp() * s.eps[j]).collect();
        let lp = squashed_log_prob(&s.mean, &s.log_std, &u);
        assert!((lp - s.log_prob[0]).abs() < 1e-12);
    }
}
