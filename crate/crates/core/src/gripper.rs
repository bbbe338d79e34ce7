//! Two-finger gripper with a variable grip.
//!
//! Both capsule fingers run along the gripper-local y axis and sandwich the
//! rope from above and below, so in the top view they share one footprint:
//! `|dx| <= r_f`, `|dy| <= l_f / 2` around the gripper centre. The gripper has
//! no rotation; its frame is the world frame translated to the centre.
//!
//! Grip strength is modelled through the inverse mass of the held particles.
//! Above closure 0.5 the held particles get heavier and are carried along
//! with the gripper. At 0.9 and above they are fully attached.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::rope::ParticleChain;

/// Largest per-action displacement along each axis (m).
pub const MAX_STEP: f64 = 0.0025;

/// Closure at which the gap reaches zero.
pub const FULL_CLOSURE: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerGeometry {
    pub finger_radius: f64,
    pub finger_len: f64,
    /// Finger gap at closure 0.
    pub gap_open: f64,
    /// Widest gap at which the fingers still touch the rope, i.e. the rope
    /// thickness. Wider than this and nothing is held.
    pub contact_gap: f64,
}

impl Default for FingerGeometry {
    fn default() -> Self {
        Self {
            finger_radius: 0.008,
            finger_len: 0.03,
            gap_open: 0.03,
            contact_gap: 0.015,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperState {
    pub center: Vec2,
    /// 0 fully open, 1 fully closed.
    pub closure: f64,
    pub geometry: FingerGeometry,
}

impl GripperState {
    pub fn new(center: Vec2, closure: f64, geometry: FingerGeometry) -> Self {
        Self {
            center,
            closure: closure.clamp(0.0, 1.0),
            geometry,
        }
    }

    /// Finger gap at the current closure.
    pub fn gap(&self) -> f64 {
        self.geometry.gap_open * ((FULL_CLOSURE - self.closure) / FULL_CLOSURE).max(0.0)
    }

    /// Whether the fingers are close enough to touch the rope.
    pub fn in_contact(&self) -> bool {
        self.gap() <= self.geometry.contact_gap
    }

    /// Point expressed in the gripper frame.
    #[inline]
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        p - self.center
    }

    /// Whether `p` lies inside the finger footprint grown by `margin`.
    #[inline]
    pub fn footprint_contains(&self, p: Vec2, margin: f64) -> bool {
        let d = self.to_local(p);
        d.x.abs() <= self.geometry.finger_radius + margin
            && d.y.abs() <= 0.5 * self.geometry.finger_len + margin
    }
}

/// Particles currently between the fingers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HeldSet {
    /// Sorted ascending.
    pub indices: Vec<usize>,
}

impl HeldSet {
    pub fn n_h(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Mean held index `p_i`, defined only when something is held.
    pub fn mean_index(&self) -> Option<f64> {
        if self.indices.is_empty() {
            return None;
        }
        Some(self.indices.iter().sum::<usize>() as f64 / self.indices.len() as f64)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Inverse mass of a held particle at closure `c`:
/// `max(2.25 w - 2.5 w max(c, 0.5), 0)`.
pub fn grip_inverse_mass(closure: f64, w_nom: f64) -> f64 {
    (2.25 * w_nom - 2.5 * w_nom * closure.max(0.5)).max(0.0)
}

/// Fraction of the gripper displacement a held particle follows.
pub fn co_motion(closure: f64) -> f64 {
    1.0 - grip_inverse_mass(closure, 1.0)
}

pub fn held_particles(chain: &ParticleChain, gripper: &GripperState) -> HeldSet {
    if !gripper.in_contact() {
        return HeldSet::default();
    }
    let indices = chain
        .positions
        .iter()
        .enumerate()
        .filter(|(_, &p)| gripper.footprint_contains(p, 0.0))
        .map(|(i, _)| i)
        .collect();
    HeldSet { indices }
}

/// Sets held-particle inverse masses for `closure`, restores everything else
/// to nominal, and drags held particles by `delta` scaled by the co-motion
/// coefficient. The anchor is never touched.
pub fn apply_grip(chain: &mut ParticleChain, held: &HeldSet, closure: f64, delta: Vec2) {
    let w_nom = chain.params.inv_mass_nominal;
    let w_p = grip_inverse_mass(closure, w_nom);
    let carry = delta * (1.0 - w_p / w_nom);
    for i in 1..chain.len() {
        if held.contains(i) {
            chain.inv_mass[i] = w_p;
            chain.positions[i] += carry;
        } else {
            chain.inv_mass[i] = w_nom;
        }
    }
}

/// Applies a clamped displacement and the new closure.
pub fn move_gripper(gripper: &GripperState, dx: f64, dy: f64, closure: f64) -> GripperState {
    let dx = dx.clamp(-MAX_STEP, MAX_STEP);
    let dy = dy.clamp(-MAX_STEP, MAX_STEP);
    GripperState {
        center: gripper.center + Vec2::new(dx, dy),
        closure: closure.clamp(0.0, 1.0),
        geometry: gripper.geometry,
    }
}
