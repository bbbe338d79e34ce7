//! Planar position-based dynamics for an anchored rope.
//!
//! The rope is a chain of particles joined by stretch constraints between
//! neighbours and bend constraints between particles two apart. Particle 0 has
//! zero inverse mass and acts as the fixed anchor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Gravitational acceleration used as the normal-force proxy for ground friction.
pub const G_EFF: f64 = 9.81;

/// Particles closer than this are treated as coincident and their constraint
/// is skipped for the pass.
const COINCIDENT_EPS: f64 = 1e-12;

/// Relative constraint violation treated as satisfied. Keeps a rope built at
/// rest lengths an exact fixed point despite rounding in `length / (n - 1)`.
const REST_TOLERANCE: f64 = 1e-12;

/// Physical rope description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RopeParams {
    pub n_particles: usize,
    /// Total rest length in metres.
    pub length: f64,
    pub k_stretch: f64,
    pub k_bend: f64,
    /// Ground friction coefficient.
    pub friction: f64,
    /// Nominal particle inverse mass (1/kg).
    pub inv_mass_nominal: f64,
}

impl RopeParams {
    /// Rest length of one segment, `length / (n - 1)`.
    pub fn rest_seg(&self) -> f64 {
        self.length / (self.n_particles - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("rope: {msg}")));
        if self.n_particles < 2 {
            return bad("need at least 2 particles");
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad("length must be positive");
        }
        if !(self.inv_mass_nominal > 0.0 && self.inv_mass_nominal.is_finite()) {
            return bad("nominal inverse mass must be positive");
        }
        if !(self.k_stretch >= 0.0 && self.k_bend >= 0.0 && self.friction >= 0.0) {
            return bad("stiffness and friction must be non-negative");
        }
        Ok(())
    }
}

/// Integrator settings shared by every rope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub solver_iterations: usize,
    /// Fraction of velocity removed every step.
    pub damping: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            solver_iterations: 20,
            damping: 0.02,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.solver_iterations == 0 || !(0.0..=1.0).contains(&self.damping) {
            return Err(Error::Config(format!("invalid sim config {self:?}")));
        }
        Ok(())
    }
}

/// Rope state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParticleChain {
    pub positions: Vec<Vec2>,
    pub velocities: Vec<Vec2>,
    pub inv_mass: Vec<f64>,
    pub params: RopeParams,
    /// Constraints skipped because their particles coincided.
    #[serde(default)]
    pub skipped_constraints: u64,
    #[serde(skip)]
    prev: Vec<Vec2>,
}

impl PartialEq for ParticleChain {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions
            && self.velocities == other.velocities
            && self.inv_mass == other.inv_mass
            && self.params == other.params
    }
}

/// Builds a straight rope from `anchor` along +x.
pub fn build_rope(params: RopeParams, anchor: Vec2) -> Result<ParticleChain> {
    params.validate()?;
    let n = params.n_particles;
    let seg = params.rest_seg();
    let positions = (0..n)
        .map(|i| Vec2::new(anchor.x + i as f64 * seg, anchor.y))
        .collect();
    let mut inv_mass = vec![params.inv_mass_nominal; n];
    inv_mass[0] = 0.0;
    Ok(ParticleChain {
        positions,
        velocities: vec![Vec2::ZERO; n],
        inv_mass,
        params,
        skipped_constraints: 0,
        prev: Vec::with_capacity(n),
    })
}

/// Moves `p[i]` and `p[j]` toward distance `rest`, splitting the correction
/// by inverse mass. Returns false when the constraint had to be skipped.
#[inline]
fn project_distance(p: &mut [Vec2], w: &[f64], i: usize, j: usize, rest: f64, k: f64) -> bool {
    let w_sum = w[i] + w[j];
    if w_sum == 0.0 {
        return true;
    }
    let d = p[i] - p[j];
    let len = d.norm();
    if len < COINCIDENT_EPS {
        return false;
    }
    let err = len - rest;
    if err.abs() <= REST_TOLERANCE * rest {
        return true;
    }
    let corr = d * (k * err / (w_sum * len));
    p[i] -= corr * w[i];
    p[j] += corr * w[j];
    true
}

fn distance_pass(p: &mut [Vec2], w: &[f64], stride: usize, rest: f64, k: f64) -> u64 {
    let mut skipped = 0;
    for i in 0..p.len().saturating_sub(stride) {
        if !project_distance(p, w, i, i + stride, rest, k) {
            skipped += 1;
        }
    }
    skipped
}

impl ParticleChain {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn rest_seg(&self) -> f64 {
        self.params.rest_seg()
    }

    /// Projects neighbour distance constraints `iterations` times with the
    /// stiffness clamped to at most 1 per pass.
    pub fn solve_stretch(&mut self, k_stretch: f64, iterations: usize) {
        let rest = self.rest_seg();
        let k = k_stretch.clamp(0.0, 1.0);
        for _ in 0..iterations {
            self.skipped_constraints += distance_pass(&mut self.positions, &self.inv_mass, 1, rest, k);
        }
    }

    /// Projects the (i, i+2) straightness constraints. No-op below 3 particles.
    pub fn solve_bend(&mut self, k_bend: f64, iterations: usize) {
        if self.len() < 3 {
            return;
        }
        let rest = 2.0 * self.rest_seg();
        let k = k_bend.clamp(0.0, 1.0);
        for _ in 0..iterations {
            self.skipped_constraints += distance_pass(&mut self.positions, &self.inv_mass, 2, rest, k);
        }
    }

    /// Advances the rope by one time step.
    pub fn sim_step(&mut self, cfg: &SimConfig) -> Result<()> {
        let dt = cfg.dt;
        self.prev.clear();
        self.prev.extend_from_slice(&self.positions);

        for ((p, v), &w) in self
            .positions
            .iter_mut()
            .zip(self.velocities.iter_mut())
            .zip(&self.inv_mass)
        {
            if w > 0.0 {
                *p += *v * dt;
            } else {
                *v = Vec2::ZERO;
            }
        }

        let seg = self.rest_seg();
        let ks = self.params.k_stretch.clamp(0.0, 1.0);
        let kb = self.params.k_bend.clamp(0.0, 1.0);
        let bend = self.len() >= 3;
        for _ in 0..cfg.solver_iterations {
            self.skipped_constraints += distance_pass(&mut self.positions, &self.inv_mass, 1, seg, ks);
            if bend {
                self.skipped_constraints +=
                    distance_pass(&mut self.positions, &self.inv_mass, 2, 2.0 * seg, kb);
            }
        }

        let friction_dv = self.params.friction * G_EFF * dt;
        let keep = 1.0 - cfg.damping;
        for (i, (v, (p, q))) in self
            .velocities
            .iter_mut()
            .zip(self.positions.iter().zip(&self.prev))
            .enumerate()
        {
            let mut nv = (*p - *q) * (1.0 / dt);
            let speed = nv.norm();
            if speed > 0.0 {
                nv = nv * (1.0 - friction_dv / speed).max(0.0);
            }
            *v = nv * keep;
            if !(p.is_finite() && v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }
        Ok(())
    }

    /// Kinetic energy of the movable particles.
    pub fn kinetic_energy(&self) -> f64 {
        self.velocities
            .iter()
            .zip(&self.inv_mass)
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, &w)| 0.5 * v.norm_sq() / w)
            .sum()
    }

    /// Largest relative deviation of a segment from its rest length.
    pub fn max_stretch_deviation(&self) -> f64 {
        let rest = self.rest_seg();
        self.positions
            .windows(2)
            .map(|s| ((s[1] - s[0]).norm() - rest).abs() / rest)
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().all(|p| p.is_finite()) && self.velocities.iter().all(|v| v.is_finite())
    }
}
