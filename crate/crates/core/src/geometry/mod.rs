//! Cubes, boxes and max-norm geometry.
//!
//! Every cube is closed and axis-aligned, so it is exactly a closed ball of
//! the max norm: `y ∈ Q(x, r)` iff `|y - x|_max <= r / 2`.

mod family;
mod grid;
mod quadrature;

pub use family::{build_family, point_anchors, CubeFamily, FamilyParams, PointAnchors};
pub use grid::{outer_nodes, GridParams, OuterNode};
pub use quadrature::{
    box_radial_integral, radial_integral, radial_integral_cutoff, GaussLegendre, Integral,
    NeumaierSum,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `max_i |x_i|`.
pub fn max_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Closed axis-aligned cube given by its center and sidelength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    center: Vec<f64>,
    side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(invalid("cube needs at least one coordinate"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(invalid(format!("sidelength must be positive and finite, got {side}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("cube center must be finite"));
        }
        Ok(Self { center, side })
    }

    /// `Q(0, side)` in dimension `n`.
    pub fn origin(n: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; n], side)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// `ℓ(Q)^n`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn is_origin_centered(&self) -> bool {
        self.center.iter().all(|&c| c == 0.0)
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        let half = 0.5 * self.side;
        self.center.iter().zip(x).all(|(c, y)| (y - c).abs() <= half)
    }

    pub fn region(&self) -> Region {
        let half = 0.5 * self.side;
        Region {
            lo: self.center.iter().map(|c| c - half).collect(),
            hi: self.center.iter().map(|c| c + half).collect(),
        }
    }
}

/// Closed-cube membership test with dimension checking.
pub fn cube_contains(q: &Cube, x: &[f64]) -> Result<bool> {
    q.contains(x)
}

/// Closed axis-aligned box `[lo_1, hi_1] × … × [lo_n, hi_n]`, possibly empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| !(h > l))
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn intersect(&self, other: &Region) -> Region {
        Region {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    pub fn contains_origin(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(l, h)| *l <= 0.0 && 0.0 <= *h)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }

    /// Volume of the part of the box where `|x|_max <= r`.
    pub(crate) fn volume_within(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h.min(r) - l.max(-r)).max(0.0))
            .product()
    }
}

/// Inner truncation: points with `|x|_max < radius` are excluded.
///
/// Stored as `ln(radius)` so that cutoffs far below the smallest positive
/// `f64` (needed by slowly diverging sweeps) remain representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    ln_radius: f64,
}

impl Cutoff {
    pub const NONE: Cutoff = Cutoff { ln_radius: f64::NEG_INFINITY };

    pub fn radius(eps: f64) -> Self {
        if eps > 0.0 {
            Self { ln_radius: eps.ln() }
        } else {
            Self::NONE
        }
    }

    pub fn from_ln_radius(ln_radius: f64) -> Self {
        Self { ln_radius }
    }

    /// `eps = 2^{-k}`.
    pub fn dyadic(k: f64) -> Self {
        Self { ln_radius: -k * std::f64::consts::LN_2 }
    }

    pub fn ln_radius(&self) -> f64 {
        self.ln_radius
    }

    /// `log(1/eps)`; `+inf` when there is no truncation.
    pub fn ln_inverse(&self) -> f64 {
        -self.ln_radius
    }

    pub fn is_none(&self) -> bool {
        self.ln_radius == f64::NEG_INFINITY
    }

    /// The radius itself (underflows to 0 for extreme cutoffs).
    pub fn value(&self) -> f64 {
        self.ln_radius.exp()
    }

    /// The larger (more restrictive) of two cutoffs.
    pub fn max(self, other: Cutoff) -> Cutoff {
        if other.ln_radius > self.ln_radius {
            other
        } else {
            self
        }
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::NONE
    }
}
