//! Distilled observations: kinematic, tactile and visual.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::gripper::{GripperState, HeldSet};
use crate::rope::ParticleChain;

/// Visible run length that counts as full confidence.
pub const K_CONF: usize = 10;

/// Reported rope intercepts are clipped to this magnitude (m). Near-vertical
/// fits otherwise produce intercepts far outside the sensor's view.
pub const INTERCEPT_LIMIT: f64 = 0.05;

pub const OBS_DIM: usize = 9;

/// Wraps an angle onto (-pi/2, pi/2], the range of an undirected line.
pub fn wrap_line_angle(theta: f64) -> f64 {
    let mut t = theta % PI;
    if t > FRAC_PI_2 {
        t -= PI;
    } else if t <= -FRAC_PI_2 {
        t += PI;
    }
    t
}

/// Total-least-squares line through `points`, in the frame translated to
/// `origin`. Returns the line angle and its y at local x = 0.
pub fn fit_line(points: &[Vec2], origin: Vec2) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Degenerate(format!(
            "line fit needs 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let local: Vec<Vec2> = points.iter().map(|&p| p - origin).collect();
    let c = local.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in &local {
        let d = *p - c;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    if sxx == 0.0 && syy == 0.0 {
        return Ok((0.0, c.y));
    }
    let theta = wrap_line_angle(0.5 * (2.0 * sxy).atan2(sxx - syy));
    let cos = theta.cos();
    let intercept = if cos.abs() < 1e-12 {
        c.y
    } else {
        c.y - theta.tan() * c.x
    };
    Ok((theta, intercept))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoisePreset {
    Off,
    Partial,
    Full,
}

impl NoisePreset {
    pub fn config(self) -> NoiseConfig {
        let (sigma_theta, sigma_y) = match self {
            NoisePreset::Off => (0.0, 0.0),
            NoisePreset::Partial => (0.1, 0.0005),
            NoisePreset::Full => (0.5, 0.002),
        };
        NoiseConfig {
            sigma_theta,
            sigma_y,
            preset: self,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoisePreset::Off => "off",
            NoisePreset::Partial => "partial",
            NoisePreset::Full => "full",
        }
    }
}

impl fmt::Display for NoisePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoisePreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(NoisePreset::Off),
            "partial" => Ok(NoisePreset::Partial),
            "full" => Ok(NoisePreset::Full),
            _ => Err(Error::Usage(format!("unknown noise preset `{s}`"))),
        }
    }
}

/// Tactile noise standard deviations at a fully open gripper.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma_theta: f64,
    pub sigma_y: f64,
    pub preset: NoisePreset,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoisePreset::Off.config()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TactileObs {
    pub theta: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisualObs {
    pub visible: f64,
    pub confidence: f64,
    pub theta: f64,
    pub y: f64,
}

/// Rope angle and finger-axis position from the held particle centres, with
/// Gaussian noise scaled by how open the gripper is. Fewer than two held
/// particles yields zeros.
///
/// Two normal samples are drawn on every call so the noise stream does not
/// depend on the rope state.
pub fn tactile_obs<R: Rng + ?Sized>(
    chain: &ParticleChain,
    gripper: &GripperState,
    held: &HeldSet,
    noise: &NoiseConfig,
    rng: &mut R,
) -> TactileObs {
    let n_theta: f64 = rng.sample(StandardNormal);
    let n_y: f64 = rng.sample(StandardNormal);
    if held.n_h() < 2 {
        return TactileObs::default();
    }
    let points: Vec<Vec2> = held.indices.iter().map(|&i| chain.positions[i]).collect();
    let (theta_nom, y_nom) = match fit_line(&points, gripper.center) {
        Ok(v) => v,
        Err(_) => return TactileObs::default(),
    };
    let y_nom = y_nom.clamp(-INTERCEPT_LIMIT, INTERCEPT_LIMIT);
    let open = 1.0 - gripper.closure;
    if open == 0.0 {
        return TactileObs {
            theta: theta_nom,
            y: y_nom,
        };
    }
    TactileObs {
        theta: wrap_line_angle(theta_nom + open * noise.sigma_theta * n_theta),
        y: y_nom + open * noise.sigma_y * n_y,
    }
}

/// Top-view camera observation of the rope to the right of the gripper.
///
/// Particles within the finger footprint grown by one finger radius are
/// occluded. The visible run starts at the lowest-index particle that leaves
/// the occluded region going forward along the rope; it only counts when that
/// particle lies to the right of the fingers.
pub fn visual_obs(chain: &ParticleChain, gripper: &GripperState) -> VisualObs {
    let r_f = gripper.geometry.finger_radius;
    let occluded: Vec<bool> = chain
        .positions
        .iter()
        .map(|&p| gripper.footprint_contains(p, r_f))
        .collect();
    let is_candidate = |i: usize| !occluded[i] && gripper.to_local(chain.positions[i]).x > r_f;

    let Some(start) = (1..chain.len()).find(|&j| occluded[j - 1] && !occluded[j]) else {
        return VisualObs::default();
    };
    if !is_candidate(start) {
        return VisualObs::default();
    }
    let run = (start..chain.len()).take_while(|&j| is_candidate(j)).count();
    let used: Vec<Vec2> = chain.positions[start..start + run.min(K_CONF)].to_vec();
    let (theta, y) = match fit_line(&used, gripper.center) {
        Ok(v) => v,
        Err(_) => (0.0, gripper.to_local(used[0]).y),
    };
    VisualObs {
        visible: 1.0,
        confidence: (run as f64 / K_CONF as f64).min(1.0),
        theta,
        y: y.clamp(-INTERCEPT_LIMIT, INTERCEPT_LIMIT),
    }
}

pub fn kinematic_obs(gripper: &GripperState) -> [f64; 3] {
    [gripper.center.x, gripper.center.y, gripper.closure]
}

/// Which observation blocks reach the agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModalityMask {
    pub kinematic: bool,
    pub tactile: bool,
    pub visual: bool,
}

impl ModalityMask {
    pub const ALL: ModalityMask = ModalityMask {
        kinematic: true,
        tactile: true,
        visual: true,
    };
    pub const K: ModalityMask = ModalityMask {
        kinematic: true,
        tactile: false,
        visual: false,
    };
    pub const T: ModalityMask = ModalityMask {
        kinematic: false,
        tactile: true,
        visual: false,
    };
    pub const V: ModalityMask = ModalityMask {
        kinematic: false,
        tactile: false,
        visual: true,
    };

    pub fn union(self, o: ModalityMask) -> ModalityMask {
        ModalityMask {
            kinematic: self.kinematic || o.kinematic,
            tactile: self.tactile || o.tactile,
            visual: self.visual || o.visual,
        }
    }

    pub fn without(self, o: ModalityMask) -> ModalityMask {
        ModalityMask {
            kinematic: self.kinematic && !o.kinematic,
            tactile: self.tactile && !o.tactile,
            visual: self.visual && !o.visual,
        }
    }

    /// Per-slot keep flags in observation order.
    pub fn slots(self) -> [bool; OBS_DIM] {
        let (k, t, v) = (self.kinematic, self.tactile, self.visual);
        [k, k, k, t, t, v, v, v, v]
    }
}

impl fmt::Display for ModalityMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == ModalityMask::ALL {
            return f.write_str("all");
        }
        let mut parts = Vec::new();
        if self.tactile {
            parts.push("T");
        }
        if self.visual {
            parts.push("V");
        }
        if self.kinematic {
            parts.push("K");
        }
        if parts.is_empty() {
            return f.write_str("none");
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for ModalityMask {
    type Err = Error;

    /// Accepts `all`, `none`, or `+`-joined letters such as `T+K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "all" => return Ok(ModalityMask::ALL),
            "none" => {
                return Ok(ModalityMask {
                    kinematic: false,
                    tactile: false,
                    visual: false,
                })
            }
            _ => {}
        }
        let mut m = ModalityMask {
            kinematic: false,
            tactile: false,
            visual: false,
        };
        for part in s.split('+') {
            match part.trim().to_ascii_uppercase().as_str() {
                "K" => m.kinematic = true,
                "T" => m.tactile = true,
                "V" => m.visual = true,
                _ => return Err(Error::Usage(format!("unknown modality mask `{s}`"))),
            }
        }
        Ok(m)
    }
}

/// Fixed-length observation `[x_G, y_G, c_G, θ_T, y_T, v_V, q_V, θ_V, y_V]`
/// with masked-out blocks zeroed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationVector {
    pub values: [f64; OBS_DIM],
    pub mask: ModalityMask,
}

pub fn assemble_observation(
    mask: ModalityMask,
    kin: [f64; 3],
    tac: TactileObs,
    vis: VisualObs,
) -> ObservationVector {
    let raw = [
        kin[0],
        kin[1],
        kin[2],
        tac.theta,
        tac.y,
        vis.visible,
        vis.confidence,
        vis.theta,
        vis.y,
    ];
    let mut values = [0.0; OBS_DIM];
    for ((v, r), keep) in values.iter_mut().zip(raw).zip(mask.slots()) {
        if keep {
            *v = r;
        }
    }
    ObservationVector { values, mask }
}

impl ObservationVector {
    /// Re-applies a mask to an existing vector.
    pub fn remask(&self, mask: ModalityMask) -> ObservationVector {
        let mut values = self.values;
        for (v, keep) in values.iter_mut().zip(mask.slots()) {
            if !keep {
                *v = 0.0;
            }
        }
        ObservationVector { values, mask }
    }
}
