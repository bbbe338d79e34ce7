//! Experiment orchestration: evaluation protocol, study matrices, cross-seed
//! aggregation, CSV and SVG export, and offline replay.

mod aggregate;
mod eval;
mod plot;
mod pointmass;
mod replay;
mod session;
mod spec;

pub use aggregate::{
    aggregate, aggregate_records, csv_rows, export_csv, mean_ci, parse_csv, smooth_trailing, AggregateCurve,
    CsvRow, CurvePoint, CSV_HEADER, SMOOTH_WINDOW, Z95,
};
pub use eval::{evaluate, eval_seeds, mix_seed, run_episode, EpisodeResult, EvalRecord, Policy, ROPE_OBS_SCALE};
pub use plot::{export_plots, render_svg};
pub use pointmass::{
    eval_starts, idle_return, optimal_return, pointmass_benchmark, score_policy, PointMassConfig, PointMassEnv,
    PointMassPoint,
};
pub use replay::{render_frame, render_frames, render_text};
pub use session::{
    aggregate_sessions, env_config, load_session, rope_agent, run_experiment, run_session, session_dir,
    ExperimentResult, MaskCurve, SessionResult,
};
pub use spec::{ExperimentSpec, RunPlan, Study};
