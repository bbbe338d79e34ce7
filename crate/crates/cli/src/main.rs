//! `dlo`: train, evaluate and replay rope-following agents.
//!
//! Exit status is 0 on success, 1 for usage or configuration mistakes and 2
//! for failures while running.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dlo_core::env::{EnvConfig, Trajectory};
use dlo_core::harness::{
    eval_seeds, evaluate, render_frames, render_text, run_experiment, AggregateCurve, EvalRecord, ExperimentResult,
    ExperimentSpec, Study,
};
use dlo_core::parallel::Execution;
use dlo_core::perception::{ModalityMask, NoisePreset};
use dlo_core::sac::SacAgent;
use dlo_core::{Error, Result};

/// Environment variable naming the default output root.
const OUT_ENV: &str = "DLO_OUT_DIR";
const DEFAULT_OUT: &str = "runs";

#[derive(Parser, Debug)]
#[command(name = "dlo", version, about = "Visual-tactile rope following benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train agents for one study at a single seed.
    Train {
        #[arg(long)]
        study: Study,
        /// Train on this mask only, e.g. `T+K`.
        #[arg(long)]
        mask: Option<ModalityMask>,
        #[arg(long)]
        noise: Option<NoisePreset>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        steps: u64,
        #[arg(long, default_value_t = 256)]
        width: usize,
        /// Output root; defaults to $DLO_OUT_DIR or `runs`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Evaluate a saved agent on fresh ropes.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "all")]
        mask: ModalityMask,
        #[arg(long, default_value = "off")]
        noise: NoisePreset,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a whole study described by a TOML file.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        /// Concurrent sessions; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Width 1024, ten seeds, 50k steps. Hours to days on a desktop.
        #[arg(long)]
        full_scale: bool,
    },
    /// Render a recorded episode without re-simulating it.
    Replay {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, value_enum, default_value_t = ReplayFormat::Text)]
        format: ReplayFormat,
        /// Frame directory; defaults to `frames` next to the trajectory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sanity benchmark: SAC on a 2-D point-mass reaching task.
    Pointmass {
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value_t = 5_000)]
        steps: u64,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReplayFormat {
    Frames,
    Text,
}

fn out_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn summarize(res: &ExperimentResult) {
    for c in &res.curves {
        if c.metric == "reward" || c.metric == "hold_the_end" || c.metric == "score" {
            print_curve(c);
        }
    }
    if let Some(csv) = &res.csv {
        println!("csv: {}", csv.display());
    }
    for p in &res.plots {
        println!("plot: {}", p.display());
    }
}

fn print_curve(c: &AggregateCurve) {
    let Some(last) = c.last() else { return };
    let ci = if c.ci_undefined {
        "n/a".to_string()
    } else {
        format!("{:.4}", last.ci95)
    };
    println!(
        "{:<12} {:<10} {:<8} {:<13} seeds={:<2} final={:+.4} ci95={ci} smoothed={:+.4}",
        c.study, c.mask, c.noise, c.metric, c.seed_count, last.mean, last.smoothed
    );
}

fn train(
    study: Study,
    mask: Option<ModalityMask>,
    noise: Option<NoisePreset>,
    seed: u64,
    steps: u64,
    width: usize,
    out: &Path,
    jobs: usize,
) -> Result<()> {
    let mut spec = ExperimentSpec::new(study);
    spec.seeds = vec![seed];
    spec.max_steps = steps;
    spec.width = width;
    if let Some(m) = mask {
        spec.masks = vec![m.to_string()];
    }
    if let Some(n) = noise {
        spec.noise = vec![n.to_string()];
    }
    summarize(&run_experiment(&spec, Some(out), jobs)?);
    Ok(())
}

fn eval(checkpoint: &Path, mask: ModalityMask, noise: NoisePreset, episodes: usize, seed: u64) -> Result<()> {
    if episodes == 0 {
        return Err(Error::Usage("--episodes must be positive".into()));
    }
    let agent = SacAgent::load(checkpoint)?;
    let cfg = EnvConfig {
        noise: noise.config(),
        ..EnvConfig::default()
    };
    let seeds = eval_seeds(seed, 0, episodes);
    let rec = evaluate(&agent, &cfg, mask, &seeds, agent.step, Execution::Parallel)?;
    print_record(&rec);
    Ok(())
}

fn print_record(rec: &EvalRecord) {
    let fields: Vec<String> = EvalRecord::METRICS
        .iter()
        .map(|m| format!("\"{m}\": {}", rec.metric(m).unwrap_or(f64::NAN)))
        .collect();
    println!("{{\"step\": {}, {}}}", rec.step, fields.join(", "));
}

fn replay(path: &Path, format: ReplayFormat, out: Option<PathBuf>) -> Result<()> {
    let traj = Trajectory::read(path)?;
    match format {
        ReplayFormat::Text => print!("{}", render_text(&traj)),
        ReplayFormat::Frames => {
            let dir = out.unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).join("frames"));
            let frames = render_frames(&traj, &dir)?;
            println!("wrote {} frames to {}", frames.len(), dir.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            study,
            mask,
            noise,
            seed,
            steps,
            width,
            out,
            jobs,
        } => train(study, mask, noise, seed, steps, width, &out_root(out), jobs),
        Command::Eval {
            checkpoint,
            mask,
            noise,
            episodes,
            seed,
        } => eval(&checkpoint, mask, noise, episodes, seed),
        Command::Experiment {
            spec,
            jobs,
            out,
            full_scale,
        } => {
            let mut spec = ExperimentSpec::load(&spec)?;
            if full_scale {
                spec = spec.full_scale();
            }
            summarize(&run_experiment(&spec, Some(&out_root(out)), jobs)?);
            Ok(())
        }
        Command::Replay { trajectory, format, out } => replay(&trajectory, format, out),
        Command::Pointmass {
            seeds,
            steps,
            width,
            out,
            jobs,
        } => {
            if seeds == 0 {
                return Err(Error::Usage("--seeds must be positive".into()));
            }
            let mut spec = ExperimentSpec::new(Study::Pointmass);
            spec.seeds = (0..seeds).collect();
            spec.max_steps = steps;
            spec.width = width;
            summarize(&run_experiment(&spec, Some(&out_root(out)), jobs)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
