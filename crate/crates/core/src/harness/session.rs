//! Training sessions and whole experiments.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate, aggregate_records, export_csv, AggregateCurve};
use super::eval::{eval_seeds, evaluate, mix_seed, run_episode, EvalRecord, ROPE_OBS_SCALE};
use super::plot::export_plots;
use super::pointmass::{pointmass_benchmark, PointMassConfig};
use super::spec::{ExperimentSpec, RunPlan, Study};
use crate::env::{DloEnv, EnvConfig};
use crate::error::{Error, Result};
use crate::parallel::{with_threads, Execution};
use crate::perception::OBS_DIM;
use crate::sac::{train, SacAgent};

/// Evaluation curve of one agent under one mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskCurve {
    pub eval_mask: String,
    pub records: Vec<EvalRecord>,
}

/// Everything one (plan, seed) training run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub study: String,
    pub train_mask: String,
    pub noise: String,
    pub seed: u64,
    pub curves: Vec<MaskCurve>,
}

/// Environment configuration for a plan.
pub fn env_config(plan: &RunPlan) -> EnvConfig {
    EnvConfig {
        mask: plan.train_mask,
        noise: plan.noise.config(),
        ..EnvConfig::default()
    }
}

/// Fresh agent for the rope task.
pub fn rope_agent(spec: &ExperimentSpec, seed: u64) -> Result<SacAgent> {
    let mut cfg = spec.sac_config(seed);
    if cfg.obs_scale.is_empty() {
        cfg.obs_scale = ROPE_OBS_SCALE.to_vec();
    }
    SacAgent::new(OBS_DIM, 3, cfg)
}

/// Where a session keeps its files.
pub fn session_dir(out: &Path, study: Study, plan: &RunPlan, seed: u64) -> PathBuf {
    out.join(study.name()).join(plan.label()).join(format!("seed_{seed}"))
}

/// Trains one agent and evaluates it under every eval mask of the plan at
/// each evaluation point. With `out` set, writes the checkpoint, curves and
/// a recorded evaluation episode.
pub fn run_session(
    spec: &ExperimentSpec,
    plan: &RunPlan,
    seed: u64,
    out: Option<&Path>,
    exec: Execution,
) -> Result<(SessionResult, SacAgent)> {
    let cfg = env_config(plan);
    let mut env = DloEnv::new(cfg.clone())?;
    let mut agent = rope_agent(spec, seed)?;
    agent.set_execution(exec);
    let mut env_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x7A1E));
    let every = spec.eval_every;
    let n = spec.eval_envs;
    let report = train(&mut agent, &mut env, &mut env_rng, |step, a| {
        let seeds = eval_seeds(seed, step / every, n);
        plan.eval_masks
            .iter()
            .map(|&m| evaluate(a, &cfg, m, &seeds, step, exec))
            .collect::<Result<Vec<_>>>()
    })?;
    let curves = plan
        .eval_masks
        .iter()
        .enumerate()
        .map(|(i, m)| MaskCurve {
            eval_mask: m.to_string(),
            records: report.evals.iter().map(|(_, recs)| recs[i].clone()).collect(),
        })
        .collect();
    let result = SessionResult {
        study: spec.study.name().into(),
        train_mask: plan.train_mask.to_string(),
        noise: plan.noise.to_string(),
        seed,
        curves,
    };
    if let Some(out) = out {
        let dir = session_dir(out, spec.study, plan, seed);
        write_session(&dir, &result, &agent, &cfg)?;
    }
    Ok((result, agent))
}

fn write_session(dir: &Path, result: &SessionResult, agent: &SacAgent, cfg: &EnvConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    agent.save(&dir.join("agent.ckpt"))?;
    let path = dir.join("curves.json");
    let json = serde_json::to_string_pretty(result).map_err(|e| Error::Usage(e.to_string()))?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    let demo_seed = eval_seeds(result.seed, u64::MAX, 1)[0];
    if let (_, Some(traj)) = run_episode(agent, cfg, demo_seed, true)? {
        traj.write(&dir.join("trajectory.jsonl"))?;
    }
    Ok(())
}

/// Reads a `curves.json` written by a session.
pub fn load_session(path: &Path) -> Result<SessionResult> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.into(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Aggregates completed sessions of one study into per-mask curves. For
/// ablations the curve is labelled with the eval mask, otherwise with the
/// training mask.
pub fn aggregate_sessions(study: Study, sessions: &[SessionResult]) -> Result<Vec<AggregateCurve>> {
    let mut groups: Vec<((String, String, String), Vec<Vec<EvalRecord>>)> = Vec::new();
    for s in sessions {
        for c in &s.curves {
            let key = (s.train_mask.clone(), s.noise.clone(), c.eval_mask.clone());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(c.records.clone()),
                None => groups.push((key, vec![c.records.clone()])),
            }
        }
    }
    let mut out = Vec::new();
    for ((train, noise, eval), per_seed) in groups {
        let label = if train == eval {
            train
        } else {
            format!("{train}>{eval}")
        };
        out.extend(aggregate_records(study.name(), &label, &noise, &per_seed)?);
    }
    Ok(out)
}

/// Outcome of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub sessions: Vec<SessionResult>,
    pub curves: Vec<AggregateCurve>,
    pub csv: Option<PathBuf>,
    pub plots: Vec<PathBuf>,
}

/// Runs every (plan, seed) session, aggregates, and exports CSV and plots.
/// Sessions run `jobs` at a time; the result does not depend on `jobs`.
pub fn run_experiment(spec: &ExperimentSpec, out: Option<&Path>, jobs: usize) -> Result<ExperimentResult> {
    spec.validate()?;
    let exec = Execution::Parallel;
    let (sessions, curves) = if spec.study == Study::Pointmass {
        (Vec::new(), pointmass_curves(spec, jobs)?)
    } else {
        let tasks: Vec<(RunPlan, u64)> = spec
            .plans()?
            .into_iter()
            .flat_map(|p| spec.seeds.iter().map(move |&s| (p.clone(), s)))
            .collect();
        let results = with_threads(jobs, || {
            exec.map_slice(&tasks, |(plan, seed)| run_session(spec, plan, *seed, out, exec).map(|r| r.0))
        });
        let sessions = results.into_iter().collect::<Result<Vec<_>>>()?;
        let curves = aggregate_sessions(spec.study, &sessions)?;
        (sessions, curves)
    };
    let (mut csv, mut plots) = (None, Vec::new());
    if let Some(out) = out {
        let dir = out.join(spec.study.name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(format!("{}.csv", spec.study.name()));
        export_csv(&curves, &path)?;
        csv = Some(path);
        plots = export_plots(&curves, &dir.join("plots"), spec.study.name())?;
    }
    Ok(ExperimentResult {
        sessions,
        curves,
        csv,
        plots,
    })
}

fn pointmass_curves(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<AggregateCurve>> {
    let pm = PointMassConfig::default();
    let runs = with_threads(jobs, || {
        Execution::Parallel.map_slice(&spec.seeds, |&seed| pointmass_benchmark(&pm, &spec.sac_config(seed)))
    });
    let series = runs
        .into_iter()
        .map(|r| r.map(|c| c.into_iter().map(|p| (p.step, p.score)).collect()))
        .collect::<Result<Vec<Vec<(u64, f64)>>>>()?;
    let (points, ci_undefined) = aggregate(&series)?;
    Ok(vec![AggregateCurve {
        study: Study::Pointmass.name().into(),
        mask: "-".into(),
        noise: "-".into(),
        metric: "score".into(),
        seed_count: series.len(),
        ci_undefined,
        points,
    }])
}
