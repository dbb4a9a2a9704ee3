//! Rectangular sensing grid and the RIS interaction codebook built on it.
//!
//! Grid directions come from a pinhole model. Lattice points `(x, 1, z)`
//! are spaced uniformly on the plane `y = 1`. `x` spans `±tan(FoV/2)` and
//! `z` spans `±tan(FoV/2)/A_R`, corners included. Each point is
//! normalized to a direction. Grid row `v` runs from the top (`+z`) down
//! and column `h` from left (`-x`) to right. The 0-based beam index is
//! `m = v·N̄_H + h`.
//!
//! Each codebook entry is the equal-gain conjugate beamformer for its grid
//! direction, `ψ_m = (v(θ_m) ⊙ e^{-j2π(δ-δ_1)/λ})*`. Entries are generated on
//! demand. A full 40×40 codebook would otherwise occupy several hundred MB.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FeedChannel;
use crate::geometry::{
    direction_to_angles, steering_vector, Direction, Position, RisGeometry, UnitVec3,
};
use crate::{Error, Result};

/// The scalar parameters that fully determine a [`SceneGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Full horizontal field of view (rad).
    pub fov: f64,
    /// Width over height.
    pub aspect: f64,
    pub nbar_h: usize,
    pub nbar_v: usize,
}

#[derive(Debug, Clone)]
pub struct SceneGrid {
    spec: GridSpec,
    directions: Vec<Direction>,
    units: Vec<UnitVec3>,
}

/// Lattice coordinates along one image-plane axis.
#[derive(Debug, Clone, Copy)]
struct Axis {
    first: f64,
    step: f64,
    count: usize,
}

impl Axis {
    fn new(half_extent: f64, count: usize) -> Self {
        if count == 1 {
            Axis {
                first: 0.0,
                step: 2.0 * half_extent,
                count,
            }
        } else {
            Axis {
                first: -half_extent,
                step: 2.0 * half_extent / (count - 1) as f64,
                count,
            }
        }
    }

    fn coord(&self, i: usize) -> f64 {
        if self.count == 1 {
            0.0
        } else if i == self.count - 1 {
            // land exactly on the far edge
            -self.first
        } else {
            self.first + i as f64 * self.step
        }
    }

    /// Cell containing `c`; a point on a shared boundary goes to the lower index.
    fn cell(&self, c: f64) -> Option<usize> {
        let f = (c - self.first) / self.step;
        let idx = (f - 0.5).ceil();
        if idx >= 0.0 && idx < self.count as f64 {
            Some(idx as usize)
        } else {
            None
        }
    }
}

/// Builds the sensing grid.
pub fn build_grid(fov: f64, aspect: f64, nbar_h: usize, nbar_v: usize) -> Result<SceneGrid> {
    SceneGrid::new(GridSpec {
        fov,
        aspect,
        nbar_h,
        nbar_v,
    })
}

impl SceneGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.nbar_h == 0 || spec.nbar_v == 0 {
            return Err(Error::DegenerateGrid(format!(
                "grid needs at least one point per axis (got {}x{})",
                spec.nbar_h, spec.nbar_v
            )));
        }
        if !(spec.fov > 0.0 && spec.fov < std::f64::consts::PI) {
            return Err(Error::DegenerateGrid(format!(
                "field of view must lie in (0, π) rad (got {})",
                spec.fov
            )));
        }
        if !(spec.aspect > 0.0 && spec.aspect.is_finite()) {
            return Err(Error::DegenerateGrid(format!(
                "aspect ratio must be positive (got {})",
                spec.aspect
            )));
        }
        let (xa, za) = axes(&spec);
        let mut units = Vec::with_capacity(spec.nbar_h * spec.nbar_v);
        for v in 0..spec.nbar_v {
            // top row first
            let z = -za.coord(v);
            for h in 0..spec.nbar_h {
                let x = xa.coord(h);
                units.push(UnitVec3::normalize([x, 1.0, z]).expect("nonzero lattice point"));
            }
        }
        let directions = units.iter().map(|&u| direction_to_angles(u)).collect();
        Ok(Self {
            spec,
            directions,
            units,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn nbar_h(&self) -> usize {
        self.spec.nbar_h
    }

    pub fn nbar_v(&self) -> usize {
        self.spec.nbar_v
    }

    /// Number of grid directions, `M`.
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn units(&self) -> &[UnitVec3] {
        &self.units
    }

    /// 0-based beam index of grid row `v` and column `h`.
    pub fn index(&self, v: usize, h: usize) -> usize {
        v * self.spec.nbar_h + h
    }

    /// Image-plane point `(x, z)` on `y = 1` for grid row `v`, column `h`.
    pub fn lattice_point(&self, v: usize, h: usize) -> (f64, f64) {
        let (xa, za) = axes(&self.spec);
        (xa.coord(h), -za.coord(v))
    }

    /// Grid cell `(row, col)` whose angular footprint contains `u`, if any.
    pub fn pixel_of(&self, u: UnitVec3) -> Option<(usize, usize)> {
        self.pixel_of_point(u.as_array())
    }

    /// Same as [`pixel_of`](Self::pixel_of) for an arbitrary point in front of the array.
    pub fn pixel_of_point(&self, p: Position) -> Option<(usize, usize)> {
        if p[1].is_nan() || p[1] <= 0.0 {
            return None;
        }
        let (xa, za) = axes(&self.spec);
        let col = xa.cell(p[0] / p[1])?;
        let row = za.cell(-p[2] / p[1])?;
        Some((row, col))
    }
}

/// Horizontal axis and the (sign-flipped) vertical axis. Rows count downward
/// so the vertical axis is stored as `-z`.
fn axes(spec: &GridSpec) -> (Axis, Axis) {
    let half_x = (spec.fov / 2.0).tan();
    let half_z = half_x / spec.aspect;
    (
        Axis::new(half_x, spec.nbar_h),
        Axis::new(half_z, spec.nbar_v),
    )
}

/// Equal-gain conjugate beamformer toward `theta`.
///
/// Maximizes `|(v(θ) ⊙ g)ᵀ ψ|` subject to `|ψ_n| = 1`; the maximum is
/// `Σ_n |g_n|`. The reference entry is exactly 1.
pub fn design_vector(theta: Direction, fc: &FeedChannel, geom: &RisGeometry) -> Vec<Complex64> {
    let v = steering_vector(geom, theta);
    let comp = near_field_compensation(fc, geom);
    v.iter().zip(&comp).map(|(vn, cn)| vn.conj() * cn).collect()
}

/// `e^{+j2π(δ_n-δ_1)/λ}`, the conjugate of the feed-path phase.
fn near_field_compensation(fc: &FeedChannel, geom: &RisGeometry) -> Vec<Complex64> {
    fc.delta
        .iter()
        .map(|&dn| {
            let cycles = (dn - fc.delta1) / geom.wavelength;
            let frac = cycles - cycles.round();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * frac)
        })
        .collect()
}

/// RIS interaction codebook: one equal-gain vector per grid direction, in grid order.
#[derive(Debug, Clone)]
pub struct Codebook {
    grid: SceneGrid,
    geom: RisGeometry,
    compensation: Vec<Complex64>,
}

pub fn build_codebook(grid: &SceneGrid, fc: &FeedChannel, geom: &RisGeometry) -> Codebook {
    Codebook {
        grid: grid.clone(),
        geom: geom.clone(),
        compensation: near_field_compensation(fc, geom),
    }
}

impl Codebook {
    /// Codebook size `|ℱ| = M`.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &SceneGrid {
        &self.grid
    }

    pub fn elements(&self) -> usize {
        self.geom.len()
    }

    /// Interaction vector `ψ_m`.
    pub fn vector(&self, m: usize) -> Vec<Complex64> {
        let v = steering_vector(&self.geom, self.grid.directions[m]);
        v.iter()
            .zip(&self.compensation)
            .map(|(vn, cn)| vn.conj() * cn)
            .collect()
    }

    /// Per-element phases of `ψ_m` in radians.
    pub fn phases(&self, m: usize) -> Vec<f64> {
        self.vector(m).iter().map(|c| c.arg()).collect()
    }

    /// Materializes every vector. Memory is `M·N` complex values.
    pub fn materialize(&self) -> Vec<Vec<Complex64>> {
        (0..self.len())
            .into_par_iter()
            .map(|m| self.vector(m))
            .collect()
    }
}
