//! Offline rendering of recorded episodes. Nothing is re-simulated.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::env::{StepRecord, Trajectory};
use crate::error::{Error, Result};
use crate::gripper::FingerGeometry;

const SIZE: f64 = 480.0;
/// Pixels per metre.
const SCALE: f64 = 1200.0;

/// One summary line per step.
pub fn render_text(traj: &Trajectory) -> String {
    let h = &traj.header;
    let mut s = format!(
        "# seed {} | {} particles | mask {} | noise {} | horizon {}\n",
        h.seed.map_or("-".into(), |v| v.to_string()),
        h.rope.n_particles,
        h.mask,
        h.noise,
        h.horizon
    );
    for r in &traj.steps {
        let _ = writeln!(
            s,
            "t={:3} gripper=({:+.4},{:+.4}) c={:.3} n_h={} p_i={} reward={:+.5}{}",
            r.t,
            r.gripper[0],
            r.gripper[1],
            r.closure,
            r.n_h,
            r.p_i.map_or("-".into(), |p| format!("{p:.2}")),
            r.reward.total,
            if r.done { " done" } else { "" }
        );
    }
    s
}

/// SVG of one step, centred on the gripper.
pub fn render_frame(traj: &Trajectory, step: &StepRecord, geom: &FingerGeometry) -> String {
    let (cx, cy) = (step.gripper[0], step.gripper[1]);
    let px = |x: f64| SIZE / 2.0 + (x - cx) * SCALE;
    let py = |y: f64| SIZE / 2.0 - (y - cy) * SCALE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect width="{SIZE}" height="{SIZE}" fill="#f4f1ea"/>"##);
    let rope: Vec<String> = step
        .rope
        .iter()
        .map(|p| format!("{:.1},{:.1}", px(p[0]), py(p[1])))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#8a5a2b" stroke-width="6" stroke-linecap="round" stroke-linejoin="round"/>"##,
        rope.join(" ")
    );
    if let Some(a) = step.rope.first() {
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="5" fill="#333"/>"##, px(a[0]), py(a[1]));
    }
    let (w, h) = (2.0 * geom.finger_radius * SCALE, geom.finger_len * SCALE);
    let opacity = 0.25 + 0.5 * step.closure;
    let _ = writeln!(
        s,
        r##"<rect x="{:.1}" y="{:.1}" width="{w:.1}" height="{h:.1}" rx="{:.1}" fill="#3465a4" fill-opacity="{opacity:.2}" stroke="#204a87"/>"##,
        SIZE / 2.0 - w / 2.0,
        SIZE / 2.0 - h / 2.0,
        w / 2.0
    );
    let _ = writeln!(
        s,
        r#"<text x="8" y="18">t={} / {}  c={:.2}  n_h={}  r={:+.4}</text>"#,
        step.t, traj.header.horizon, step.closure, step.n_h, step.reward.total
    );
    s.push_str("</svg>\n");
    s
}

/// Writes `frame_<t>.svg` for every recorded step.
pub fn render_frames(traj: &Trajectory, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let geom = FingerGeometry::default();
    traj.steps
        .iter()
        .map(|st| {
            let path = dir.join(format!("frame_{:04}.svg", st.t));
            fs::write(&path, render_frame(traj, st, &geom)).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
