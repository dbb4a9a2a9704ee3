//! Two-hop RIS channel: radar → RIS → scene → RIS → radar.
//!
//! For a path `(g, ℓ)` and interaction vector `ψ`:
//!
//! ```text
//! h = γ̄ · ((g ⊙ ψ)ᵀ v(θ̄)) · γ̈ · ((g ⊙ ψ)ᵀ v(θ̈))
//! ```
//!
//! `g` is the near-field feed channel normalized to the reference element.
//! `γ̄` and `γ̈` carry the reference-element hop losses and phases.
//!
//! The element pattern is isotropic. Under a directional element pattern
//! the feed channel would depend on the target direction, and a single
//! [`FeedChannel`] could not be shared across paths.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{feed_distances, steering_vector, RisGeometry};
use crate::scene::PropagationPath;
use crate::{Error, Result};

/// Gain of the feeding antenna toward the RIS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntennaPattern {
    Isotropic,
    /// Constant linear gain toward every RIS element.
    FixedGain {
        peak_gain: f64,
    },
}

impl AntennaPattern {
    pub fn from_dbi(dbi: f64) -> Self {
        AntennaPattern::FixedGain {
            peak_gain: 10f64.powf(dbi / 10.0),
        }
    }

    pub fn gain(&self) -> f64 {
        match *self {
            AntennaPattern::Isotropic => 1.0,
            AntennaPattern::FixedGain { peak_gain } => peak_gain,
        }
    }
}

/// Radar cross-section gain `ζ` of one RIS element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementPattern {
    Isotropic { gain: f64 },
}

impl ElementPattern {
    pub fn gain(&self) -> f64 {
        match *self {
            ElementPattern::Isotropic { gain } => gain,
        }
    }
}

impl Default for ElementPattern {
    fn default() -> Self {
        ElementPattern::Isotropic { gain: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patterns {
    pub feed: AntennaPattern,
    pub element: ElementPattern,
}

impl Default for Patterns {
    /// Isotropic feed and elements.
    fn default() -> Self {
        Self {
            feed: AntennaPattern::Isotropic,
            element: ElementPattern::default(),
        }
    }
}

impl Patterns {
    pub fn validate(&self) -> Result<()> {
        let g = self.feed.gain();
        let z = self.element.gain();
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "feed antenna gain must be positive (got {g})"
            )));
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "element gain must be positive (got {z})"
            )));
        }
        Ok(())
    }
}

/// Normalized near-field channel between the feeding antenna and the elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedChannel {
    /// `[g]_n`, with `[g]_1 = 1`.
    pub g: Vec<Complex64>,
    /// Feed-to-element distances `δ_n` (m).
    pub delta: Vec<f64>,
    /// Reference distance `δ_1` (m).
    pub delta1: f64,
}

/// `e^{-j2π·distance/λ}`, reduced to a fractional cycle first so that long
/// distances keep full phase precision.
fn propagation_phasor(distance: f64, wavelength: f64) -> Complex64 {
    let cycles = distance / wavelength;
    let frac = cycles - cycles.round();
    Complex64::from_polar(1.0, -2.0 * PI * frac)
}

pub fn feed_channel(geom: &RisGeometry, patterns: &Patterns) -> Result<FeedChannel> {
    patterns.validate()?;
    let delta = feed_distances(geom)?;
    let delta1 = delta[0];
    // Per-element feed and element gains are direction independent here, so
    // the pattern ratio is exactly one; keep the full expression anyway.
    let gz = patterns.feed.gain() * patterns.element.gain();
    let g = delta
        .iter()
        .map(|&dn| {
            let mag = ((gz * delta1 * delta1) / (gz * dn * dn)).sqrt();
            mag * propagation_phasor(dn - delta1, geom.wavelength)
        })
        .collect();
    Ok(FeedChannel { g, delta, delta1 })
}

/// Forward two-hop gain `γ̄`: feed → reference element → scene.
pub fn forward_gain(
    path: &PropagationPath,
    fc: &FeedChannel,
    geom: &RisGeometry,
    patterns: &Patterns,
) -> Complex64 {
    let d1 = fc.delta1;
    let d = path.fwd_dist;
    let num = patterns.feed.gain() * patterns.element.gain();
    let den = (4.0 * PI).powi(2) * d1 * d1 * d * d * path.fwd_loss;
    (num / den).sqrt() * propagation_phasor(d1 + d, geom.wavelength)
}

/// Backward two-hop gain `γ̈`: scene → reference element → feed.
///
/// Carries the target RCS and the extra `λ²/4π` of the radar equation.
pub fn backward_gain(
    path: &PropagationPath,
    fc: &FeedChannel,
    geom: &RisGeometry,
    patterns: &Patterns,
) -> Complex64 {
    let d1 = fc.delta1;
    let d = path.bwd_dist;
    let lambda = geom.wavelength;
    let num = path.rcs * patterns.element.gain() * patterns.feed.gain() * lambda * lambda;
    let den = (4.0 * PI).powi(3) * d * d * d1 * d1 * path.bwd_loss;
    (num / den).sqrt() * propagation_phasor(d + d1, lambda)
}

/// Precomputed per-path terms, so that evaluating `h[m]` for a new `ψ` is two
/// length-`N` dot products.
#[derive(Debug, Clone)]
pub struct PathResponse {
    gamma_fwd: Complex64,
    gamma_bwd: Complex64,
    /// `g ⊙ v(θ̄)`
    fwd: Vec<Complex64>,
    /// `g ⊙ v(θ̈)`; `None` when the path departs and arrives along the same direction.
    bwd: Option<Vec<Complex64>>,
    total_distance: f64,
}

impl PathResponse {
    pub fn new(
        path: &PropagationPath,
        fc: &FeedChannel,
        geom: &RisGeometry,
        patterns: &Patterns,
    ) -> Self {
        let weight = |v: Vec<Complex64>| -> Vec<Complex64> {
            v.into_iter().zip(&fc.g).map(|(vn, gn)| gn * vn).collect()
        };
        let fwd = weight(steering_vector(geom, path.depart));
        let bwd = (path.arrive != path.depart).then(|| weight(steering_vector(geom, path.arrive)));
        Self {
            gamma_fwd: forward_gain(path, fc, geom, patterns),
            gamma_bwd: backward_gain(path, fc, geom, patterns),
            fwd,
            bwd,
            total_distance: path.total_distance(fc.delta1),
        }
    }

    /// Round-trip propagation distance `R` (m).
    pub fn total_distance(&self) -> f64 {
        self.total_distance
    }

    /// `γ̄·γ̈`
    pub fn hop_gain(&self) -> Complex64 {
        self.gamma_fwd * self.gamma_bwd
    }

    pub fn gain(&self, psi: &[Complex64]) -> Result<Complex64> {
        if psi.len() != self.fwd.len() {
            return Err(Error::DimensionMismatch {
                expected: self.fwd.len(),
                actual: psi.len(),
            });
        }
        let a = dot(psi, &self.fwd);
        let b = match &self.bwd {
            Some(bwd) => dot(psi, bwd),
            None => a,
        };
        Ok(self.gamma_fwd * a * (self.gamma_bwd * b))
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Channel gain `h[m]` of one path under interaction vector `psi`.
pub fn path_gain(
    path: &PropagationPath,
    psi: &[Complex64],
    fc: &FeedChannel,
    geom: &RisGeometry,
    patterns: &Patterns,
) -> Result<Complex64> {
    PathResponse::new(path, fc, geom, patterns).gain(psi)
}

/// All paths of a scene, ready to be evaluated against many interaction vectors.
#[derive(Debug, Clone)]
pub struct ChannelEvaluator {
    paths: Vec<PathResponse>,
    elements: usize,
}

impl ChannelEvaluator {
    pub fn new(
        paths: &[PropagationPath],
        fc: &FeedChannel,
        geom: &RisGeometry,
        patterns: &Patterns,
    ) -> Self {
        Self {
            paths: paths
                .iter()
                .map(|p| PathResponse::new(p, fc, geom, patterns))
                .collect(),
            elements: geom.len(),
        }
    }

    pub fn paths(&self) -> &[PathResponse] {
        &self.paths
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// `h_{g,ℓ}[m]` for every path, in path order.
    pub fn gains(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.paths.iter().map(|p| p.gain(psi)).collect()
    }
}
