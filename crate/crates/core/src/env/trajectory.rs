//! Line-delimited JSON trajectory dumps.
//!
//! The first line is a header record; every following line is one step:
//!
//! ```text
//! {"kind":"header","version":1,"seed":7,"rope":{..},"mask":"all","noise":"off","horizon":150}
//! {"kind":"step","t":1,"gripper":[x,y],"closure":0.9,"n_h":3,"p_i":2.0,
//!  "reward":{"r_move":..,"r_end":..,"fell":false,"total":..},
//!  "obs":[9 values],"mask":"all","done":false,"rope":[[x,y],..]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::reward::RewardBreakdown;
use crate::error::{Error, Result};
use crate::perception::OBS_DIM;
use crate::rope::RopeParams;

pub const TRAJECTORY_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub version: u32,
    pub seed: Option<u64>,
    pub rope: RopeParams,
    pub mask: String,
    pub noise: String,
    pub horizon: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub gripper: [f64; 2],
    pub closure: f64,
    pub n_h: usize,
    pub p_i: Option<f64>,
    pub reward: RewardBreakdown,
    pub obs: [f64; OBS_DIM],
    pub mask: String,
    pub done: bool,
    pub rope: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Header(TrajectoryHeader),
    Step(StepRecord),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub header: TrajectoryHeader,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut line = |r: &Record| -> Result<()> {
            let s = serde_json::to_string(r).map_err(|e| Error::Checkpoint(e.to_string()))?;
            writeln!(w, "{s}").map_err(|e| Error::io(path, e))
        };
        line(&Record::Header(self.header.clone()))?;
        for s in &self.steps {
            line(&Record::Step(s.clone()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Trajectory> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut header = None;
        let mut steps = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let n = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record =
                serde_json::from_str(&line).map_err(|e| parse_err(n, format!("malformed record: {e}")))?;
            match rec {
                Record::Header(h) if header.is_none() => {
                    if h.version != TRAJECTORY_VERSION {
                        return Err(parse_err(n, format!("unsupported version {}", h.version)));
                    }
                    header = Some(h);
                }
                Record::Header(_) => return Err(parse_err(n, "duplicate header".into())),
                Record::Step(_) if header.is_none() => {
                    return Err(parse_err(n, "step record before header".into()))
                }
                Record::Step(s) => steps.push(s),
            }
        }
        let header = header.ok_or_else(|| parse_err(1, "missing header".into()))?;
        Ok(Trajectory { header, steps })
    }
}
