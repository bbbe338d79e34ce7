//! The rope-following MDP.
//!
//! An episode starts with a freshly randomized rope lying on the table and
//! the gripper closed over particle 2. Each action moves the gripper by at
//! most 2.5 mm per axis and sets its closure; the rope is then simulated for
//! eight physics steps. The episode ends when nothing is held or the horizon
//! is reached.

mod reward;
mod trace;
mod trajectory;

pub use reward::{compute_distance, compute_reward, end_reward, RewardBreakdown, RewardParams};
pub use trace::{
    classify_episode, episode_metrics, EpisodeMetrics, EpisodeOutcome, EpisodeTrace, TerminalCause,
    TraceStep,
};
pub use trajectory::{StepRecord, Trajectory, TrajectoryHeader, TRAJECTORY_VERSION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::gripper::{apply_grip, held_particles, move_gripper, FingerGeometry, GripperState, HeldSet};
use crate::perception::{
    assemble_observation, kinematic_obs, tactile_obs, visual_obs, ModalityMask, NoiseConfig,
    ObservationVector,
};
use crate::rope::{build_rope, ParticleChain, RopeParams, SimConfig};

/// Attempts before rope generation gives up.
const GENERATION_ATTEMPTS: usize = 10;

/// How the rope is scattered before each episode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    /// Pick-and-place operations per reset.
    pub ops: usize,
    /// Simulation steps after each placement.
    pub relax_steps: usize,
    /// Half-range of the drag along the rope's rest direction (+x) (m).
    pub drag_along: f64,
    /// Half-range of the drag across it (m).
    pub drag_across: f64,
    /// Width, in particles, of the Gaussian neighbourhood moved with the
    /// picked particle.
    pub neighbourhood: f64,
    /// Half side of the square workspace centred at the anchor (m).
    pub workspace_half: f64,
    /// Extra steps allowed for the rope to come to rest.
    pub settle_steps: usize,
    /// Kinetic energy below which the rope counts as settled.
    pub settle_energy: f64,
    /// Relative segment stretch below which the rope counts as settled.
    pub settle_stretch: f64,
    /// Largest relative segment stretch accepted after settling.
    pub max_stretch: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            ops: 4,
            relax_steps: 100,
            drag_along: 0.02,
            drag_across: 0.1,
            neighbourhood: 10.0,
            workspace_half: 0.5,
            settle_steps: 1000,
            settle_energy: 1e-9,
            settle_stretch: 0.02,
            max_stretch: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub horizon: usize,
    /// Physics steps per action.
    pub action_repeat: usize,
    pub sim: SimConfig,
    /// Metres per unit of raw action.
    pub action_scale: f64,
    /// Inclusive particle-count range.
    pub particles: (usize, usize),
    /// Rest spacing between particles (m).
    pub segment_length: f64,
    pub k_stretch: (f64, f64),
    pub k_bend: (f64, f64),
    pub friction: (f64, f64),
    pub inv_mass_nominal: f64,
    pub scatter: ScatterConfig,
    pub start_index: usize,
    pub start_closure: f64,
    pub geometry: FingerGeometry,
    pub mask: ModalityMask,
    pub noise: NoiseConfig,
    pub reward: RewardParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            horizon: 150,
            action_repeat: 8,
            sim: SimConfig::default(),
            action_scale: 0.0025,
            particles: (30, 60),
            segment_length: 0.005,
            k_stretch: (0.8, 1.4),
            k_bend: (0.8, 2.4),
            friction: (0.04, 0.3),
            inv_mass_nominal: 1.0,
            scatter: ScatterConfig::default(),
            start_index: 2,
            start_closure: 0.9,
            geometry: FingerGeometry::default(),
            mask: ModalityMask::ALL,
            noise: NoiseConfig::default(),
            reward: RewardParams::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        let (lo, hi) = self.particles;
        if self.horizon == 0 || self.action_repeat == 0 {
            return Err(Error::Config("horizon and action_repeat must be at least 1".into()));
        }
        if lo < 3 || lo > hi || self.start_index >= lo {
            return Err(Error::Config(format!("bad particle range {lo}..={hi}")));
        }
        if !(self.segment_length > 0.0) || !(self.action_scale > 0.0) {
            return Err(Error::Config("segment length and action scale must be positive".into()));
        }
        let p = &self.reward;
        if !(p.end_window > p.hold_window && p.hold_window > 0) {
            return Err(Error::Config("need end_window > hold_window > 0".into()));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Samples rope parameters from the configured ranges.
pub fn sample_rope_params<R: Rng + ?Sized>(rng: &mut R, cfg: &EnvConfig) -> RopeParams {
    let n = rng.random_range(cfg.particles.0..=cfg.particles.1);
    RopeParams {
        n_particles: n,
        length: cfg.segment_length * (n - 1) as f64,
        k_stretch: uniform(rng, cfg.k_stretch),
        k_bend: uniform(rng, cfg.k_bend),
        friction: uniform(rng, cfg.friction),
        inv_mass_nominal: cfg.inv_mass_nominal,
    }
}

/// Drags particle `k` and its index neighbourhood by `d`, spread in equal
/// increments over the relaxation steps. One large jump stretches the chain
/// and it buckles into a tight snake when released.
fn drag(chain: &mut ParticleChain, k: usize, d: Vec2, cfg: &EnvConfig) -> Result<()> {
    let sc = &cfg.scatter;
    let steps = sc.relax_steps.max(1);
    let inc = d * (1.0 / steps as f64);
    let width = sc.neighbourhood.max(1e-6);
    let weights: Vec<f64> = (0..chain.len())
        .map(|j| {
            let s = (j as f64 - k as f64) / width;
            let w = (-0.5 * s * s).exp();
            if j == 0 || w < 1e-4 {
                0.0
            } else {
                w
            }
        })
        .collect();
    for _ in 0..steps {
        for (p, &w) in chain.positions.iter_mut().zip(&weights) {
            *p += inc * w;
        }
        chain.sim_step(&cfg.sim)?;
    }
    Ok(())
}

fn generate<R: Rng + ?Sized>(rng: &mut R, cfg: &EnvConfig) -> Result<ParticleChain> {
    let params = sample_rope_params(rng, cfg);
    let mut chain = build_rope(params, Vec2::ZERO)?;
    let sc = &cfg.scatter;
    let h = sc.workspace_half;
    for _ in 0..sc.ops {
        let k = rng.random_range(1..chain.len());
        // Mostly sideways drags keep the rope running to the right of the
        // anchor, which is the direction the camera looks.
        let p = chain.positions[k];
        let target = Vec2::new(
            (p.x + uniform(rng, (-sc.drag_along, sc.drag_along))).clamp(-h, h),
            (p.y + uniform(rng, (-sc.drag_across, sc.drag_across))).clamp(-h, h),
        );
        drag(&mut chain, k, target - p, cfg)?;
    }
    // Friction zeroes the velocity of a slowly creeping rope, so rest alone
    // does not mean the stretch constraints have converged.
    let at_rest = |c: &ParticleChain| {
        c.kinetic_energy() < sc.settle_energy && c.max_stretch_deviation() <= sc.settle_stretch
    };
    let mut settled = at_rest(&chain);
    for _ in 0..sc.settle_steps {
        if settled {
            break;
        }
        chain.sim_step(&cfg.sim)?;
        settled = at_rest(&chain);
    }
    if !settled || chain.max_stretch_deviation() > sc.max_stretch {
        return Err(Error::EnvGeneration { attempts: 1 });
    }
    chain.velocities.iter_mut().for_each(|v| *v = Vec2::ZERO);
    chain.skipped_constraints = 0;
    Ok(chain)
}

/// Samples rope parameters and a scattered, settled rope anchored at the
/// origin. Failed attempts are retried with fresh sub-seeds.
pub fn randomize_env<R: Rng + ?Sized>(rng: &mut R, cfg: &EnvConfig) -> Result<ParticleChain> {
    for _ in 0..GENERATION_ATTEMPTS {
        let mut sub = ChaCha8Rng::seed_from_u64(rng.random());
        match generate(&mut sub, cfg) {
            Ok(chain) => return Ok(chain),
            Err(Error::EnvGeneration { .. } | Error::NonFinite { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::EnvGeneration {
        attempts: GENERATION_ATTEMPTS,
    })
}

/// Maps a raw action in [-1, 1]^3 to a displacement and closure.
pub fn scale_action(raw: [f64; 3], action_scale: f64) -> (f64, f64, f64) {
    let r = raw.map(|v| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) });
    (action_scale * r[0], action_scale * r[1], 0.5 * (r[2] + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub n_h: usize,
    pub mean_index: Option<f64>,
    pub distance: Option<f64>,
    pub t: usize,
    pub terminal: Option<TerminalCause>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub obs: ObservationVector,
    pub reward: RewardBreakdown,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Clone, Debug)]
struct Episode {
    chain: ParticleChain,
    gripper: GripperState,
    held: HeldSet,
    t: usize,
    distance: f64,
    done: bool,
    noise_rng: ChaCha8Rng,
    trace: EpisodeTrace,
    seed: Option<u64>,
    record: Option<Vec<StepRecord>>,
}

/// One rope-following environment instance.
#[derive(Clone, Debug)]
pub struct DloEnv {
    cfg: EnvConfig,
    record: bool,
    episode: Option<Episode>,
}

impl DloEnv {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            record: false,
            episode: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Keep full per-step records for [`DloEnv::trajectory`].
    pub fn set_recording(&mut self, on: bool) {
        self.record = on;
    }

    pub fn set_mask(&mut self, mask: ModalityMask) {
        self.cfg.mask = mask;
    }

    pub fn chain(&self) -> Option<&ParticleChain> {
        self.episode.as_ref().map(|e| &e.chain)
    }

    pub fn gripper(&self) -> Option<&GripperState> {
        self.episode.as_ref().map(|e| &e.gripper)
    }

    pub fn held(&self) -> Option<&HeldSet> {
        self.episode.as_ref().map(|e| &e.held)
    }

    pub fn trace(&self) -> Option<&EpisodeTrace> {
        self.episode.as_ref().map(|e| &e.trace)
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_none_or(|e| e.done)
    }

    /// Starts an episode on a new random rope drawn from `rng`.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ObservationVector> {
        let chain = randomize_env(rng, &self.cfg)?;
        let noise_seed: u64 = rng.random();
        self.start(chain, noise_seed, None)
    }

    /// Starts an episode whose randomness is fully determined by `seed`.
    pub fn reset_seeded(&mut self, seed: u64) -> Result<ObservationVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = randomize_env(&mut rng, &self.cfg)?;
        let noise_seed: u64 = rng.random();
        self.start(chain, noise_seed, Some(seed))
    }

    /// Starts an episode on a given rope with the gripper over the start index.
    pub fn start(
        &mut self,
        mut chain: ParticleChain,
        noise_seed: u64,
        seed: Option<u64>,
    ) -> Result<ObservationVector> {
        if chain.len() <= self.cfg.start_index {
            return Err(Error::Config("rope shorter than the start index".into()));
        }
        let gripper = GripperState::new(
            chain.positions[self.cfg.start_index],
            self.cfg.start_closure,
            self.cfg.geometry,
        );
        let held = held_particles(&chain, &gripper);
        apply_grip(&mut chain, &held, gripper.closure, Vec2::ZERO);
        let distance = compute_distance(held.mean_index(), chain.params.length, chain.len())?;
        let trace = EpisodeTrace::new(chain.len(), self.cfg.reward.hold_window, held.max_index());
        let mut ep = Episode {
            chain,
            gripper,
            held,
            t: 0,
            distance,
            done: false,
            noise_rng: ChaCha8Rng::seed_from_u64(noise_seed),
            trace,
            seed,
            record: self.record.then(Vec::new),
        };
        let obs = observe(&self.cfg, &mut ep);
        self.episode = Some(ep);
        Ok(obs)
    }

    /// Applies one action.
    pub fn step(&mut self, raw: [f64; 3]) -> Result<StepResult> {
        let cfg = &self.cfg;
        let ep = match self.episode.as_mut() {
            Some(ep) if !ep.done => ep,
            _ => return Err(Error::Usage("step called without an active episode".into())),
        };
        let (dx, dy, closure) = scale_action(raw, cfg.action_scale);
        let moved = move_gripper(&ep.gripper, dx, dy, closure);
        let delta = moved.center - ep.gripper.center;
        ep.gripper = moved;
        apply_grip(&mut ep.chain, &ep.held, moved.closure, delta);
        for _ in 0..cfg.action_repeat {
            ep.chain.sim_step(&cfg.sim)?;
        }
        ep.held = held_particles(&ep.chain, &ep.gripper);
        ep.t += 1;

        let n = ep.chain.len();
        let (reward, distance) =
            compute_reward(ep.distance, &ep.held, ep.chain.params.length, n, &cfg.reward);
        if let Some(d) = distance {
            ep.distance = d;
        }
        let terminal = if ep.held.is_empty() {
            Some(TerminalCause::Dropped)
        } else if ep.t >= cfg.horizon {
            Some(TerminalCause::Horizon)
        } else {
            None
        };
        ep.done = terminal.is_some();

        let max_index = ep.held.max_index();
        ep.trace.steps.push(TraceStep {
            t: ep.t,
            gripper: ep.gripper.center,
            closure: ep.gripper.closure,
            n_h: ep.held.n_h(),
            mean_index: ep.held.mean_index(),
            max_index,
            at_end: max_index.is_some_and(|i| ep.trace.is_end_index(i)),
            reward,
        });
        if let Some(cause) = terminal {
            ep.trace.finish(cause);
        }

        let obs = observe(cfg, ep);
        if let Some(rec) = ep.record.as_mut() {
            rec.push(StepRecord {
                t: ep.t,
                gripper: [ep.gripper.center.x, ep.gripper.center.y],
                closure: ep.gripper.closure,
                n_h: ep.held.n_h(),
                p_i: ep.held.mean_index(),
                reward,
                obs: obs.values,
                mask: obs.mask.to_string(),
                done: ep.done,
                rope: ep.chain.positions.iter().map(|p| [p.x, p.y]).collect(),
            });
        }
        Ok(StepResult {
            obs,
            reward,
            done: ep.done,
            info: StepInfo {
                n_h: ep.held.n_h(),
                mean_index: ep.held.mean_index(),
                distance,
                t: ep.t,
                terminal,
            },
        })
    }

    /// The recorded episode, when recording was on at reset.
    pub fn trajectory(&self) -> Option<Trajectory> {
        let ep = self.episode.as_ref()?;
        let steps = ep.record.clone()?;
        Some(Trajectory {
            header: TrajectoryHeader {
                version: TRAJECTORY_VERSION,
                seed: ep.seed,
                rope: ep.chain.params.clone(),
                mask: self.cfg.mask.to_string(),
                noise: self.cfg.noise.preset.to_string(),
                horizon: self.cfg.horizon,
            },
            steps,
        })
    }
}

fn observe(cfg: &EnvConfig, ep: &mut Episode) -> ObservationVector {
    let tac = tactile_obs(&ep.chain, &ep.gripper, &ep.held, &cfg.noise, &mut ep.noise_rng);
    let vis = visual_obs(&ep.chain, &ep.gripper);
    assemble_observation(cfg.mask, kinematic_obs(&ep.gripper), tac, vis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_action_examples() {
        assert_eq!(scale_action([1.0, -1.0, 1.0], 0.0025), (0.0025, -0.0025, 1.0));
        assert_eq!(scale_action([0.0, 0.0, -1.0], 0.0025), (0.0, 0.0, 0.0));
        assert_eq!(scale_action([2.0, 0.0, 0.0], 0.0025), (0.0025, 0.0, 0.5));
    }

    #[test]
    fn randomize_is_deterministic() {
        let cfg = EnvConfig::default();
        let a = randomize_env(&mut ChaCha8Rng::seed_from_u64(3), &cfg).unwrap();
        let b = randomize_env(&mut ChaCha8Rng::seed_from_u64(3), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.max_stretch_deviation() < 0.05);
        assert_eq!(a.positions[0], Vec2::ZERO);
        assert!((30..=60).contains(&a.len()));
    }

    #[test]
    fn reset_places_gripper_on_rope() {
        let mut env = DloEnv::new(EnvConfig::default()).unwrap();
        let obs = env.reset_seeded(11).unwrap();
        assert!(env.held().unwrap().n_h() >= 1);
        let g = env.gripper().unwrap();
        assert_eq!(obs.values[..3], [g.center.x, g.center.y, 0.9]);
        let mut env2 = DloEnv::new(EnvConfig::default()).unwrap();
        assert_eq!(env2.reset_seeded(11).unwrap(), obs);
    }

    #[test]
    fn step_requires_reset() {
        let mut env = DloEnv::new(EnvConfig::default()).unwrap();
        assert!(matches!(env.step([0.0; 3]), Err(Error::Usage(_))));
    }

    #[test]
    fn opening_drops_immediately() {
        let mut env = DloEnv::new(EnvConfig::default()).unwrap();
        env.reset_seeded(5).unwrap();
        let r = env.step([0.0, 0.0, -1.0]).unwrap();
        assert!(r.done);
        assert_eq!(r.reward.total, -0.5);
        assert_eq!(r.info.terminal, Some(TerminalCause::Dropped));
        assert!(matches!(env.step([0.0; 3]), Err(Error::Usage(_))));
    }

    #[test]
    fn idle_grip_holds_to_horizon() {
        let mut env = DloEnv::new(EnvConfig::default()).unwrap();
        env.reset_seeded(8).unwrap();
        let n0 = env.held().unwrap().n_h();
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let r = env.step([0.0; 3]).unwrap();
            total += r.reward.total;
            steps += 1;
            assert_eq!(r.info.n_h, n0);
            if r.done {
                assert_eq!(r.info.terminal, Some(TerminalCause::Horizon));
                break;
            }
        }
        assert_eq!(steps, 150);
        assert!(total.abs() < 1e-9);
        let tr = env.trace().unwrap();
        assert_eq!(classify_episode(tr).unwrap(), EpisodeOutcome::StopBefore);
    }
}
