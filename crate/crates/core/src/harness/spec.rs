//! Experiment specifications and their expansion into training runs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::{ModalityMask, NoisePreset};
use crate::sac::SacConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Single,
    Dual,
    All,
    Ablation,
    Sensitivity,
    Pointmass,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Single => "single",
            Study::Dual => "dual",
            Study::All => "all",
            Study::Ablation => "ablation",
            Study::Sensitivity => "sensitivity",
            Study::Pointmass => "pointmass",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "single" => Study::Single,
            "dual" => Study::Dual,
            "all" => Study::All,
            "ablation" => Study::Ablation,
            "sensitivity" => Study::Sensitivity,
            "pointmass" => Study::Pointmass,
            _ => return Err(Error::Usage(format!("unknown study `{s}`"))),
        })
    }
}

/// One training configuration: what the agent sees while learning and which
/// masks it is evaluated under.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RunPlan {
    pub train_mask: ModalityMask,
    pub noise: NoisePreset,
    /// The training mask comes first.
    pub eval_masks: Vec<ModalityMask>,
}

impl RunPlan {
    fn plain(mask: ModalityMask, noise: NoisePreset) -> Self {
        Self {
            train_mask: mask,
            noise,
            eval_masks: vec![mask],
        }
    }

    /// Directory-safe label such as `T+K_partial`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.train_mask, self.noise)
    }
}

fn m(s: &str) -> ModalityMask {
    s.parse().expect("built-in mask")
}

/// Experiment description, usually read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub study: Study,
    /// Overrides the study's training masks.
    #[serde(default)]
    pub masks: Vec<String>,
    /// Extra masks evaluated alongside each training mask.
    #[serde(default)]
    pub eval_masks: Vec<String>,
    /// Overrides the study's noise presets.
    #[serde(default)]
    pub noise: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default = "default_eval_every")]
    pub eval_every: u64,
    #[serde(default = "default_eval_envs")]
    pub eval_envs: usize,
    #[serde(default = "default_width")]
    pub width: usize,
    /// Further learner settings; `hidden`, `total_steps`, `eval_every` and
    /// `seed` are always taken from the fields above.
    #[serde(default)]
    pub sac: Option<SacConfig>,
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn default_max_steps() -> u64 {
    20_000
}
fn default_eval_every() -> u64 {
    200
}
fn default_eval_envs() -> usize {
    10
}
fn default_width() -> usize {
    256
}

impl ExperimentSpec {
    pub fn new(study: Study) -> Self {
        Self {
            study,
            masks: Vec::new(),
            eval_masks: Vec::new(),
            noise: Vec::new(),
            seeds: default_seeds(),
            max_steps: default_max_steps(),
            eval_every: default_eval_every(),
            eval_envs: default_eval_envs(),
            width: default_width(),
            sac: None,
        }
    }

    /// Switches to the large configuration: width 1024, ten seeds and 50k
    /// steps.
    pub fn full_scale(mut self) -> Self {
        self.width = 1024;
        self.seeds = (0..10).collect();
        self.max_steps = 50_000;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if self.eval_every == 0 || self.eval_envs == 0 || self.width == 0 {
            return Err(Error::Config("eval_every, eval_envs and width must be positive".into()));
        }
        self.plans()?;
        Ok(())
    }

    /// Learner settings for one seed.
    pub fn sac_config(&self, seed: u64) -> SacConfig {
        let mut c = self.sac.clone().unwrap_or_default();
        c.hidden = self.width;
        c.total_steps = self.max_steps;
        c.eval_every = self.eval_every;
        c.seed = seed;
        c
    }

    /// Training runs implied by the study and any overrides.
    pub fn plans(&self) -> Result<Vec<RunPlan>> {
        let parse_masks = |v: &[String]| v.iter().map(|s| s.parse()).collect::<Result<Vec<ModalityMask>>>();
        let extra = parse_masks(&self.eval_masks)?;
        let noise = self
            .noise
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<NoisePreset>>>()?;
        let mut plans = if !self.masks.is_empty() {
            let presets = if noise.is_empty() { vec![NoisePreset::Off] } else { noise };
            parse_masks(&self.masks)?
                .into_iter()
                .flat_map(|mk| presets.iter().map(move |&n| RunPlan::plain(mk, n)))
                .collect()
        } else {
            let off = NoisePreset::Off;
            match self.study {
                Study::Single => ["T", "K", "V", "all"].map(|s| RunPlan::plain(m(s), off)).to_vec(),
                Study::Dual => ["T+K", "V+K", "T+V", "all"].map(|s| RunPlan::plain(m(s), off)).to_vec(),
                Study::All => vec![RunPlan::plain(ModalityMask::ALL, off)],
                Study::Ablation => vec![RunPlan {
                    train_mask: ModalityMask::ALL,
                    noise: off,
                    eval_masks: vec![ModalityMask::ALL, m("V+K"), m("T+K")],
                }],
                Study::Sensitivity => {
                    let presets = if noise.is_empty() {
                        vec![NoisePreset::Off, NoisePreset::Partial, NoisePreset::Full]
                    } else {
                        noise
                    };
                    let mut p: Vec<RunPlan> = presets.into_iter().map(|n| RunPlan::plain(m("T+K"), n)).collect();
                    p.push(RunPlan::plain(ModalityMask::K, off));
                    p
                }
                Study::Pointmass => Vec::new(),
            }
        };
        for p in &mut plans {
            for &e in &extra {
                if !p.eval_masks.contains(&e) {
                    p.eval_masks.push(e);
                }
            }
        }
        Ok(plans)
    }
}
