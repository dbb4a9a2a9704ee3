//! Coordinate frame and RIS array layout.
//!
//! The RIS lies in the x–z plane with its reference element at the origin;
//! +y is the array normal (boresight) and the depth axis. Directions use
//! azimuth measured from +x inside the x–y plane and zenith measured from +z,
//! so that the x and z direction cosines are `cos(az)·sin(ze)` and `cos(ze)`.
//!
//! Elements are indexed row-major with x fastest:
//! `n = i_z · n_h + i_x` (0-based), matching the Kronecker order `v_z ⊗ v_x`
//! of the array response.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in the RIS frame, in meters.
pub type Position = [f64; 3];

/// Azimuth/zenith pair in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth: f64,
    pub zenith: f64,
}

impl Direction {
    pub fn new(azimuth: f64, zenith: f64) -> Self {
        Self {
            azimuth: wrap_angle(azimuth),
            zenith,
        }
    }

    pub fn from_degrees(azimuth_deg: f64, zenith_deg: f64) -> Self {
        Self::new(azimuth_deg.to_radians(), zenith_deg.to_radians())
    }

    /// Array normal, `(0, 1, 0)`.
    pub fn boresight() -> Self {
        Self {
            azimuth: PI / 2.0,
            zenith: PI / 2.0,
        }
    }

    pub fn to_unit(self) -> UnitVec3 {
        angles_to_direction(self)
    }
}

/// Unit-norm direction in the RIS frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVec3 {
    /// Normalizes `v`. Returns `None` for the zero vector.
    pub fn normalize(v: Position) -> Option<Self> {
        let n = norm(v);
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(Self {
            x: v[0] / n,
            y: v[1] / n,
            z: v[2] / n,
        })
    }

    pub fn as_array(self) -> Position {
        [self.x, self.y, self.z]
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

pub fn norm(v: Position) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn distance(a: Position, b: Position) -> f64 {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// Converts a unit vector to azimuth/zenith. At the poles the azimuth is 0.
pub fn direction_to_angles(u: UnitVec3) -> Direction {
    let zenith = u.z.clamp(-1.0, 1.0).acos();
    let azimuth = if u.x == 0.0 && u.y == 0.0 {
        0.0
    } else {
        wrap_angle(u.y.atan2(u.x))
    };
    Direction { azimuth, zenith }
}

pub fn angles_to_direction(d: Direction) -> UnitVec3 {
    let (sa, ca) = d.azimuth.sin_cos();
    let (sz, cz) = d.zenith.sin_cos();
    UnitVec3 {
        x: ca * sz,
        y: sa * sz,
        z: cz,
    }
}

/// Uniform planar RIS in the x–z plane plus the position of its feeding antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RisGeometry {
    /// Elements along x.
    pub n_h: usize,
    /// Elements along z.
    pub n_v: usize,
    /// Element spacing (m).
    pub spacing: f64,
    /// Carrier wavelength (m).
    pub wavelength: f64,
    /// Feeding antenna position in the RIS frame (m).
    pub feed_position: Position,
}

impl RisGeometry {
    pub fn new(
        n_h: usize,
        n_v: usize,
        spacing: f64,
        wavelength: f64,
        feed_position: Position,
    ) -> Result<Self> {
        let geom = Self {
            n_h,
            n_v,
            spacing,
            wavelength,
            feed_position,
        };
        geom.check()?;
        Ok(geom)
    }

    /// Half-wavelength array at carrier `f0`, fed from `feed_offset` meters in
    /// front of the aperture center.
    pub fn half_wavelength(n_h: usize, n_v: usize, f0: f64, feed_offset: f64) -> Result<Self> {
        let wavelength = crate::SPEED_OF_LIGHT / f0;
        let spacing = wavelength / 2.0;
        let center = [
            (n_h.saturating_sub(1)) as f64 * spacing / 2.0,
            feed_offset,
            (n_v.saturating_sub(1)) as f64 * spacing / 2.0,
        ];
        Self::new(n_h, n_v, spacing, wavelength, center)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.n_h == 0 || self.n_v == 0 {
            return Err(Error::InvalidGeometry(format!(
                "element counts must be at least 1 (got {}x{})",
                self.n_h, self.n_v
            )));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "element spacing must be positive (got {})",
                self.spacing
            )));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "wavelength must be positive (got {})",
                self.wavelength
            )));
        }
        if self.feed_position.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry(
                "feed position must be finite".into(),
            ));
        }
        feed_distances(self).map(|_| ())
    }

    /// Total element count `N`.
    pub fn len(&self) -> usize {
        self.n_h * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Wave number `2π/λ`.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn element_position(&self, n: usize) -> Position {
        let ix = n % self.n_h;
        let iz = n / self.n_h;
        [ix as f64 * self.spacing, 0.0, iz as f64 * self.spacing]
    }
}

pub fn element_positions(geom: &RisGeometry) -> Vec<Position> {
    (0..geom.len()).map(|n| geom.element_position(n)).collect()
}

/// Distances `δ_n` from the feeding antenna to every element.
pub fn feed_distances(geom: &RisGeometry) -> Result<Vec<f64>> {
    (0..geom.len())
        .map(|n| {
            let d = distance(geom.feed_position, geom.element_position(n));
            if d > 0.0 {
                Ok(d)
            } else {
                Err(Error::ZeroDistance { element: n })
            }
        })
        .collect()
}

/// Per-axis response `[1, e^{jκd·u}, …, e^{jκd(count-1)·u}]`.
fn axis_response(count: usize, kd: f64, cosine: f64) -> Vec<Complex64> {
    (0..count)
        .map(|i| Complex64::from_polar(1.0, kd * i as f64 * cosine))
        .collect()
}

/// x-axis factor of the array response.
pub fn steering_x(geom: &RisGeometry, dir: Direction) -> Vec<Complex64> {
    let u = angles_to_direction(dir);
    axis_response(geom.n_h, geom.wave_number() * geom.spacing, u.x)
}

/// z-axis factor of the array response.
pub fn steering_z(geom: &RisGeometry, dir: Direction) -> Vec<Complex64> {
    let u = angles_to_direction(dir);
    axis_response(geom.n_v, geom.wave_number() * geom.spacing, u.z)
}

/// Far-field array response `v(φ) = v_z(φ) ⊗ v_x(φ)`.
pub fn steering_vector(geom: &RisGeometry, dir: Direction) -> Vec<Complex64> {
    let u = angles_to_direction(dir);
    let kd = geom.wave_number() * geom.spacing;
    let mut out = Vec::with_capacity(geom.len());
    for iz in 0..geom.n_v {
        for ix in 0..geom.n_h {
            let phase = kd * (ix as f64 * u.x + iz as f64 * u.z);
            out.push(Complex64::from_polar(1.0, phase));
        }
    }
    out
}
