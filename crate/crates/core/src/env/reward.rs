use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gripper::HeldSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub alpha_move: f64,
    pub alpha_end: f64,
    pub fall_penalty: f64,
    /// `R_end` is paid within this many particles of the tail.
    pub end_window: usize,
    /// Holding one of the last `hold_window` particles counts as "at the end".
    pub hold_window: usize,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            alpha_move: 10.0,
            alpha_end: 1.0 / 20.0,
            fall_penalty: -0.5,
            end_window: 20,
            hold_window: 10,
        }
    }
}

/// Per-step reward with its parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_move: f64,
    pub r_end: f64,
    /// True when the fall branch applied.
    pub fell: bool,
    pub total: f64,
}

/// Arc-length progress `d_t = p_i L_c / n_c` for a 0-based mean held index.
pub fn compute_distance(mean_index: Option<f64>, length: f64, n_particles: usize) -> Result<f64> {
    let p = mean_index.ok_or_else(|| Error::Usage("distance is undefined with nothing held".into()))?;
    Ok(p * length / n_particles as f64)
}

/// Tail bonus, linear in how far `p_i` is inside the end window.
pub fn end_reward(mean_index: f64, n_particles: usize, params: &RewardParams) -> f64 {
    let threshold = n_particles as f64 - params.end_window as f64;
    if mean_index > threshold {
        params.alpha_end * (mean_index - threshold)
    } else {
        0.0
    }
}

/// Reward for the transition into a state holding `held`, given the distance
/// recorded at the previous step. Returns the breakdown and the new distance
/// (None after a fall).
pub fn compute_reward(
    prev_distance: f64,
    held: &HeldSet,
    length: f64,
    n_particles: usize,
    params: &RewardParams,
) -> (RewardBreakdown, Option<f64>) {
    let Some(p_i) = held.mean_index() else {
        return (
            RewardBreakdown {
                r_move: 0.0,
                r_end: 0.0,
                fell: true,
                total: params.fall_penalty,
            },
            None,
        );
    };
    let d = p_i * length / n_particles as f64;
    let r_move = params.alpha_move * (d - prev_distance);
    let r_end = end_reward(p_i, n_particles, params);
    (
        RewardBreakdown {
            r_move,
            r_end,
            fell: false,
            total: r_move + r_end,
        },
        Some(d),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert!((compute_distance(Some(20.0), 0.5, 50).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(compute_distance(Some(0.0), 0.5, 50).unwrap(), 0.0);
        let a = compute_distance(Some(13.0), 0.3, 40).unwrap();
        let b = compute_distance(Some(13.0), 0.6, 40).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert!(compute_distance(None, 0.5, 50).is_err());
    }

    #[test]
    fn fall_branch() {
        let (r, d) = compute_reward(0.1, &HeldSet::default(), 0.3, 40, &RewardParams::default());
        assert_eq!(r.total, -0.5);
        assert!(r.fell);
        assert_eq!(d, None);
    }

    #[test]
    fn move_reward() {
        // p_i = 10, n = 50, L = 0.5: d = 0.1; previous 0.09.
        let held = HeldSet {
            indices: vec![9, 10, 11],
        };
        let (r, d) = compute_reward(0.09, &held, 0.5, 50, &RewardParams::default());
        assert!((r.total - 0.1).abs() < 1e-12);
        assert_eq!(r.r_end, 0.0);
        assert_eq!(d, Some(0.1));
    }

    #[test]
    fn end_reward_boundaries() {
        let p = RewardParams::default();
        assert_eq!(end_reward(30.0, 50, &p), 0.0);
        assert!((end_reward(50.0, 50, &p) - 1.0).abs() < 1e-15);
        assert!((end_reward(45.0, 50, &p) - 0.75).abs() < 1e-15);
    }
}
