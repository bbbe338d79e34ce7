//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criteria 1 to 6 run on every build. Criteria 7 to 10 train a few dozen
//! agents (hours on one core) and only run when asked:
//!
//! ```text
//! cargo test --release -p dlo-core --test acceptance -- --ignored
//! ```
//!
//! Learning-suite artefacts land in `$DLO_OUT_DIR/acceptance`, or in cargo's
//! per-target scratch directory when the variable is unset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use dlo_core::env::{compute_reward, end_reward, sample_rope_params, DloEnv, EnvConfig, RewardParams};
use dlo_core::gripper::{
    apply_grip, grip_inverse_mass, held_particles, move_gripper, FingerGeometry, GripperState, HeldSet, MAX_STEP,
};
use dlo_core::harness::{
    aggregate_records, csv_rows, export_csv, parse_csv, pointmass_benchmark, run_experiment, AggregateCurve,
    EvalRecord, ExperimentSpec, PointMassConfig, Study,
};
use dlo_core::parallel::Execution;
use dlo_core::perception::{tactile_obs, ModalityMask, NoisePreset};
use dlo_core::rope::{build_rope, ParticleChain, RopeParams, SimConfig};
use dlo_core::sac::{DenseNet, ReplayBuffer, SacAgent, SacConfig};
use dlo_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. gradients

fn fd_grad(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    const H: f64 = 1e-5;
    let mut p = x.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + H;
            let up = f(&p);
            p[i] = orig - H;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * H)
        })
        .collect()
}

/// Error relative to the largest gradient component, so components that are
/// numerically zero do not blow up the ratio.
fn rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(1e-8f64, |m, v| m.max(v.abs()));
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / scale)
        .fold(0.0, f64::max)
}

fn gradient_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let depth = rng.random_range(2..=4);
        let dims: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=16)).collect();
        let batch = rng.random_range(1..=4);
        let net = DenseNet::<f64>::new(&dims, &mut rng).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..batch * dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..batch * dims[depth - 1]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |n: &DenseNet<f64>, x: &[f64]| -> f64 {
            n.forward(x, batch).unwrap().iter().zip(&w).map(|(y, c)| y * c).sum()
        };
        let (_, tape) = net.forward_tape(&x, batch).map_err(|e| e.to_string())?;
        let mut g = vec![0.0; net.n_params()];
        let dx = net
            .backward(&tape, &w, Some(&mut g), true)
            .map_err(|e| e.to_string())?
            .ok_or("no input gradient")?;
        let mut probe = net.clone();
        let num_p = fd_grad(net.params(), |p| {
            probe.params_mut().copy_from_slice(p);
            loss(&probe, &x)
        });
        let num_x = fd_grad(&x, |xx| loss(&net, xx));
        worst = worst.max(rel_err(&g, &num_p)).max(rel_err(&dx, &num_x));
    }
    ensure(worst < 1e-4, format!("20 nets, max relative error {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 2. grip table

fn grip_table() -> Check {
    let table = [
        (0.0, 1.0),
        (0.3, 1.0),
        (0.5, 1.0),
        (0.6, 0.75),
        (0.7, 0.5),
        (0.8, 0.25),
        (0.9, 0.0),
        (1.0, 0.0),
    ];
    let mut bad = Vec::new();
    for w_nom in [1.0, 0.5, 4.0] {
        for (c, want) in table {
            let got = grip_inverse_mass(c, w_nom) / w_nom;
            if got != want {
                bad.push(format!("c={c} w_nom={w_nom}: {got}"));
            }
        }
    }
    ensure(bad.is_empty(), if bad.is_empty() { "8 closures x 3 nominal masses exact".into() } else { bad.join(", ") })
}

// ---------------------------------------------------------------------------
// 3. reward

fn reward_oracles() -> Check {
    let p = RewardParams::default();
    let (fall, d) = compute_reward(0.3, &HeldSet::default(), 0.25, 50, &p);
    if fall.total != -0.5 || d.is_some() {
        return Err(format!("fall branch gave {fall:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(30..=60usize);
        let len = n as f64 * 0.005;
        let lo = rng.random_range(0..n - 3);
        let held = HeldSet {
            indices: (lo..lo + 3).collect(),
        };
        let prev = rng.random_range(0.0..len);
        let (r, _) = compute_reward(prev, &held, len, n, &p);
        let d = (lo + 1) as f64 * len / n as f64;
        worst = worst.max((r.r_move - 10.0 * (d - prev)).abs());
    }
    if worst > 1e-12 {
        return Err(format!("R_move off by {worst:e}"));
    }
    for n in [30usize, 45, 60] {
        let at_edge = end_reward(n as f64 - 20.0, n, &p);
        let at_tail = end_reward(n as f64, n, &p);
        if at_edge != 0.0 || (at_tail - 1.0).abs() > 1e-12 {
            return Err(format!("n={n}: R_end {at_edge} / {at_tail}"));
        }
    }
    Ok("fall -0.5, R_move = 10 dd over 200 cases, R_end 0 -> 1".into())
}

// ---------------------------------------------------------------------------
// 4. physics

fn random_action_run(seed: u64, steps: usize) -> Result<ParticleChain, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = EnvConfig::default();
    let params = sample_rope_params(&mut rng, &cfg);
    let mut chain = build_rope(params, Vec2::ZERO).map_err(|e| e.to_string())?;
    let sim = SimConfig::default();
    let anchor = chain.positions[0];
    let mut g = GripperState::new(chain.positions[2], 0.9, FingerGeometry::default());
    let mut held = held_particles(&chain, &g);
    for t in 0..steps {
        let dx = rng.random_range(-MAX_STEP..=MAX_STEP);
        let dy = rng.random_range(-MAX_STEP..=MAX_STEP);
        let c = rng.random_range(0.0..=1.0);
        let next = move_gripper(&g, dx, dy, c);
        apply_grip(&mut chain, &held, next.closure, next.center - g.center);
        g = next;
        chain.sim_step(&sim).map_err(|e| format!("seed {seed} step {t}: {e}"))?;
        held = held_particles(&chain, &g);
        if !chain.is_finite() {
            return Err(format!("seed {seed} step {t}: non-finite state"));
        }
        if chain.positions[0] != anchor {
            return Err(format!("seed {seed} step {t}: anchor moved"));
        }
    }
    Ok(chain)
}

fn physics_properties() -> Check {
    let runs = Execution::Parallel.map_range(100, |i| random_action_run(i as u64, 10_000));
    let finals = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    let again = random_action_run(7, 10_000)?;
    if again != finals[7] {
        return Err("random-action run not reproducible".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut stretch = 0.0f64;
    let sim = SimConfig::default();
    // Scattered ropes from the generator are not used here: their settle
    // gate is this same 2% bound.
    for k in 0..30 {
        // Jitter of up to 30% and 100% of a segment.
        let amp = [0.3, 1.0][k % 2];
        let params = RopeParams {
            n_particles: rng.random_range(30..=60),
            length: 0.25,
            k_stretch: 1.0,
            k_bend: rng.random_range(0.8..=2.4),
            friction: rng.random_range(0.04..=0.3),
            inv_mass_nominal: 1.0,
        };
        let mut chain = build_rope(params, Vec2::ZERO).map_err(|e| e.to_string())?;
        let seg = chain.rest_seg();
        for p in chain.positions.iter_mut().skip(1) {
            *p += Vec2::new(rng.random_range(-amp..amp) * seg, rng.random_range(-amp..amp) * seg);
        }
        for _ in 0..200 {
            chain.sim_step(&sim).map_err(|e| e.to_string())?;
        }
        stretch = stretch.max(chain.max_stretch_deviation());
    }
    if stretch >= 0.02 {
        return Err(format!("stretch deviation {stretch:.4} after settle"));
    }

    let episode = |seed: u64| -> Result<Vec<[f64; 9]>, String> {
        let mut env = DloEnv::new(EnvConfig::default()).map_err(|e| e.to_string())?;
        let mut obs = vec![env.reset_seeded(seed).map_err(|e| e.to_string())?.values];
        let mut act_rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5);
        while !env.is_done() {
            let a = [act_rng.random_range(-1.0..=1.0), act_rng.random_range(-1.0..=1.0), 0.6];
            obs.push(env.step(a).map_err(|e| e.to_string())?.obs.values);
        }
        Ok(obs)
    };
    for seed in [0, 1, 2] {
        let (a, b) = (episode(seed)?, episode(seed)?);
        if a.iter().flatten().map(|v| v.to_bits()).ne(b.iter().flatten().map(|v| v.to_bits())) {
            return Err(format!("episode seed {seed} not bit-identical"));
        }
    }
    Ok(format!(
        "100 configs x 10k steps finite, anchor fixed, max settled stretch {:.2}%, deterministic",
        stretch * 100.0
    ))
}

// ---------------------------------------------------------------------------
// 5. perception

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn perception_contracts() -> Check {
    let params = RopeParams {
        n_particles: 40,
        length: 0.195,
        k_stretch: 1.0,
        k_bend: 1.0,
        friction: 0.1,
        inv_mass_nominal: 1.0,
    };
    let chain = build_rope(params, Vec2::ZERO).map_err(|e| e.to_string())?;
    let full = NoisePreset::Full.config();
    let off = NoisePreset::Off.config();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let closed = GripperState::new(chain.positions[10], 1.0, FingerGeometry::default());
    let held = held_particles(&chain, &closed);
    let clean = tactile_obs(&chain, &closed, &held, &off, &mut rng);
    for _ in 0..1000 {
        if tactile_obs(&chain, &closed, &held, &full, &mut rng) != clean {
            return Err("noise present at full closure".into());
        }
    }

    let mut worst = 0.0f64;
    for c in [0.5, 0.7] {
        let g = GripperState::new(chain.positions[10], c, FingerGeometry::default());
        let held = held_particles(&chain, &g);
        if held.n_h() < 2 {
            return Err(format!("only {} held at c={c}", held.n_h()));
        }
        let base = tactile_obs(&chain, &g, &held, &off, &mut rng);
        let (mut th, mut y) = (Vec::new(), Vec::new());
        for _ in 0..10_000 {
            let o = tactile_obs(&chain, &g, &held, &full, &mut rng);
            th.push(o.theta - base.theta);
            y.push(o.y - base.y);
        }
        let open = 1.0 - c;
        worst = worst
            .max((std_dev(&th) / (open * full.sigma_theta) - 1.0).abs())
            .max((std_dev(&y) / (open * full.sigma_y) - 1.0).abs());
    }
    if worst > 0.05 {
        return Err(format!("noise std off by {:.1}%", worst * 100.0));
    }

    let masks = ["T", "K", "V", "T+K", "V+K", "T+V", "all"];
    let mut steps = 0usize;
    for (i, name) in masks.iter().enumerate() {
        let mask: ModalityMask = name.parse().map_err(|e: dlo_core::Error| e.to_string())?;
        let cfg = EnvConfig {
            mask,
            noise: full,
            ..EnvConfig::default()
        };
        let mut env = DloEnv::new(cfg).map_err(|e| e.to_string())?;
        let mut act_rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        for ep in 0..4 {
            let mut obs = env.reset_seeded(ep).map_err(|e| e.to_string())?.values;
            loop {
                for (v, keep) in obs.iter().zip(mask.slots()) {
                    if !keep && v.to_bits() != 0 {
                        return Err(format!("mask {name}: masked slot is {v}"));
                    }
                }
                if obs[5] == 0.0 && obs[6..].iter().any(|v| v.to_bits() != 0) {
                    return Err(format!("mask {name}: visual slots set while not visible"));
                }
                if env.is_done() {
                    break;
                }
                let a = [
                    act_rng.random_range(0.0..=1.0),
                    act_rng.random_range(-0.3..=0.3),
                    act_rng.random_range(-0.05..=1.0),
                ];
                obs = env.step(a).map_err(|e| e.to_string())?.obs.values;
                steps += 1;
            }
        }
    }
    Ok(format!(
        "zero noise when closed, std within {:.1}%, masks clean over {steps} steps",
        worst * 100.0
    ))
}

// ---------------------------------------------------------------------------
// 6. persistence

fn round_trips() -> Check {
    let cfg = SacConfig {
        hidden: 32,
        batch_size: 16,
        ..SacConfig::default()
    };
    let mut agent = SacAgent::new(9, 3, cfg).map_err(|e| e.to_string())?;
    let mut buf = ReplayBuffer::<f32>::new(256, 9, 3).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..64 {
        let o: Vec<f32> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<f32> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n: Vec<f32> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        buf.push(&o, &a, rng.random_range(-1.0..1.0), &n, false).map_err(|e| e.to_string())?;
    }
    for _ in 0..5 {
        let b = buf.sample(16, &mut rng).map_err(|e| e.to_string())?;
        agent.update(&b).map_err(|e| e.to_string())?;
    }
    let bytes = agent.to_bytes().map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("agent.ckpt");
    agent.save(&path).map_err(|e| e.to_string())?;
    let loaded = SacAgent::load(&path).map_err(|e| e.to_string())?;
    if loaded.to_bytes().map_err(|e| e.to_string())? != bytes {
        return Err("checkpoint bytes differ after reload".into());
    }
    let probe = [0.1f32, -0.2, 0.9, 0.0, 0.3, 1.0, 0.5, -0.1, 0.2];
    let (a, b) = (agent.act_deterministic(&probe), loaded.act_deterministic(&probe));
    if a.map_err(|e| e.to_string())? != b.map_err(|e| e.to_string())? {
        return Err("reloaded policy acts differently".into());
    }

    let per_seed: Vec<Vec<EvalRecord>> = (0..3)
        .map(|s| {
            (0..12)
                .map(|k| EvalRecord {
                    step: k * 200,
                    mean_reward: rng.random_range(-1.0..3.0) + s as f64 / 7.0,
                    outcome_freq: [0.1, 0.2, 0.3, 0.4],
                    time_at_end: rng.random_range(0.0..50.0),
                    reach: rng.random_range(0.0..1.0) / 3.0,
                })
                .collect()
        })
        .collect();
    let curves: Vec<AggregateCurve> = aggregate_records("single", "T+K", "off", &per_seed).map_err(|e| e.to_string())?;
    let csv = dir.path().join("curves.csv");
    export_csv(&curves, &csv).map_err(|e| e.to_string())?;
    let parsed = parse_csv(&csv).map_err(|e| e.to_string())?;
    let want = csv_rows(&curves);
    if parsed.len() != want.len() {
        return Err(format!("{} rows parsed, {} written", parsed.len(), want.len()));
    }
    let mut worst = 0.0f64;
    for (p, w) in parsed.iter().zip(&want) {
        if (&p.study, &p.mask, &p.noise_preset, p.seed_count, p.step, &p.metric)
            != (&w.study, &w.mask, &w.noise_preset, w.seed_count, w.step, &w.metric)
        {
            return Err(format!("row mismatch {p:?} vs {w:?}"));
        }
        worst = worst
            .max((p.mean - w.mean).abs())
            .max((p.ci95 - w.ci95).abs())
            .max((p.smoothed - w.smoothed).abs());
    }
    ensure(
        worst <= 1e-9,
        format!("{} checkpoint bytes identical, {} csv rows within {worst:.1e}", bytes.len(), want.len()),
    )
}

// ---------------------------------------------------------------------------
// learning suite

fn out_root() -> PathBuf {
    std::env::var_os("DLO_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")))
        .join("acceptance")
}

fn pointmass_suite() -> Check {
    let cfg = PointMassConfig::default();
    let mut finals = Vec::new();
    for seed in 0..3 {
        let sac = SacConfig {
            hidden: 256,
            total_steps: 20_000,
            seed,
            ..SacConfig::default()
        };
        let curve = pointmass_benchmark(&cfg, &sac).map_err(|e| e.to_string())?;
        finals.push(curve.last().map_or(f64::NAN, |p| p.score));
    }
    let shown: Vec<String> = finals.iter().map(|s| format!("{s:.3}")).collect();
    ensure(
        finals.iter().all(|&s| s >= 0.9),
        format!("final fraction of optimum per seed [{}]", shown.join(", ")),
    )
}

/// Trained-agent curves shared by criteria 8 to 10.
struct Studies {
    curves: Vec<AggregateCurve>,
}

impl Studies {
    fn run() -> Result<Self, String> {
        let out = out_root();
        let mut curves = Vec::new();
        let mut go = |study: Study, masks: &[&str], noise: &[&str]| -> Result<(), String> {
            let mut spec = ExperimentSpec::new(study);
            spec.seeds = (0..3).collect();
            spec.masks = masks.iter().map(|s| s.to_string()).collect();
            spec.noise = noise.iter().map(|s| s.to_string()).collect();
            let res = run_experiment(&spec, Some(&out), 0).map_err(|e| e.to_string())?;
            curves.extend(res.curves);
            Ok(())
        };
        go(Study::Single, &["T", "K", "V"], &[])?;
        go(Study::Dual, &["T+K", "V+K", "T+V"], &[])?;
        go(Study::Ablation, &[], &[])?;
        go(Study::Sensitivity, &["T+K"], &["full"])?;
        Ok(Self { curves })
    }

    fn curve(&self, mask: &str, noise: &str, metric: &str) -> Result<&AggregateCurve, String> {
        self.curves
            .iter()
            .find(|c| c.mask == mask && c.noise == noise && c.metric == metric)
            .ok_or_else(|| format!("no curve {mask}/{noise}/{metric}"))
    }

    /// Best trailing-smoothed mean over training.
    fn peak(&self, mask: &str, metric: &str) -> Result<f64, String> {
        self.curve(mask, "off", metric)?
            .best_smoothed()
            .ok_or_else(|| format!("{mask}: empty curve"))
    }

    /// Smoothed mean and raw CI at the last evaluation.
    fn last(&self, mask: &str, noise: &str, metric: &str) -> Result<(f64, f64), String> {
        let p = self
            .curve(mask, noise, metric)?
            .last()
            .ok_or_else(|| format!("{mask}: empty curve"))?;
        Ok((p.smoothed, p.ci95))
    }
}

fn modality_ordering(s: &Studies) -> Check {
    let h = |m: &str| s.peak(m, "hold_the_end");
    let (all, t, k, v) = (h("all")?, h("T")?, h("K")?, h("V")?);
    let (tk, vk, tv) = (h("T+K")?, h("V+K")?, h("T+V")?);
    let ok = all >= v && v > t.max(k) && all >= 0.4 && v >= 0.4 && t <= 0.25 && k <= 0.25;
    ensure(
        ok,
        format!(
            "hold-the-end all {all:.2} V {v:.2} T {t:.2} K {k:.2} | T+K {tk:.2} V+K {vk:.2} T+V {tv:.2}"
        ),
    )
}

fn ablation_property(s: &Studies) -> Check {
    let (all, _) = s.last("all", "off", "reward")?;
    let (no_v, _) = s.last("all>T+K", "off", "reward")?;
    let (no_t, _) = s.last("all>V+K", "off", "reward")?;
    let (drop_v, drop_t) = (all - no_v, all - no_t);
    ensure(
        drop_v > drop_t,
        format!("reward all {all:.3}, drop without V {drop_v:.3}, without T {drop_t:.3}"),
    )
}

fn sensitivity_property(s: &Studies) -> Check {
    let (full, _) = s.last("T+K", "full", "reward")?;
    let (k, k_ci) = s.last("K", "off", "reward")?;
    let (clean, _) = s.last("T+K", "off", "reward")?;
    let ok = (full - k).abs() <= k_ci && clean > k;
    ensure(
        ok,
        format!("T+K full {full:.3} vs K {k:.3} +/- {k_ci:.3}; T+K off {clean:.3}"),
    )
}

// ---------------------------------------------------------------------------

fn guarded(f: impl FnOnce() -> Check) -> Check {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Err(msg)
    })
}

fn report(id: u32, name: &str, result: &Check) -> bool {
    let (tag, detail, ok) = match result {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    println!("criterion {id:>2} {tag} {name}: {detail}");
    ok
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let learning = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }

    let quick: [(u32, &str, fn() -> Check); 6] = [
        (1, "gradient oracle", gradient_oracle),
        (2, "grip golden table", grip_table),
        (3, "reward oracles", reward_oracles),
        (4, "physics properties", physics_properties),
        (5, "perception contracts", perception_contracts),
        (6, "round trips", round_trips),
    ];
    let mut all_ok = true;
    for (id, name, f) in quick {
        all_ok &= report(id, name, &guarded(f));
    }

    if learning {
        all_ok &= report(7, "point-mass sanity", &guarded(pointmass_suite));
        let studies = catch_unwind(Studies::run).unwrap_or_else(|_| Err("training panicked".into()));
        match studies {
            Ok(s) => {
                all_ok &= report(8, "modality ordering", &guarded(|| modality_ordering(&s)));
                all_ok &= report(9, "ablation", &guarded(|| ablation_property(&s)));
                all_ok &= report(10, "tactile noise sensitivity", &guarded(|| sensitivity_property(&s)));
            }
            Err(e) => {
                for (id, name) in [(8, "modality ordering"), (9, "ablation"), (10, "tactile noise sensitivity")] {
                    all_ok &= report(id, name, &Err(format!("training failed: {e}")));
                }
            }
        }
    } else {
        for (id, name) in [
            (7, "point-mass sanity"),
            (8, "modality ordering"),
            (9, "ablation"),
            (10, "tactile noise sensitivity"),
        ] {
            println!("criterion {id:>2} SKIP {name}: learning suite, run with `-- --ignored`");
        }
    }

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
