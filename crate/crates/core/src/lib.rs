//! Simulation and processing chain for RIS-aided FMCW scene depth sensing.
//!
//! A single-antenna FMCW radar illuminates a reconfigurable intelligent
//! surface (RIS) from the near field. The surface steers each chirp toward
//! one point of a rectangular sensing grid; the returns are range-processed
//! per beam and assembled into a depth image.
//!
//! ```text
//! scene ─► paths ─► channel h[m] ─► IF matrix Z ─► range profile ─► r̂ ─► range map ─► depth map
//!                        ▲
//!              codebook ψ_m (one per grid direction)
//! ```
//!
//! Module map:
//!
//! - [`geometry`]: coordinate frame, element layout, steering vectors.
//! - [`scene`]: targets, propagation paths, ground-truth rasterization.
//! - [`channel`]: two-hop RIS channel gains.
//! - [`waveform`]: radar parameters, IF samples, sensing matrix.
//! - [`codebook`]: sensing grid and equal-gain interaction vectors.
//! - [`depthmap`]: range profile, range/depth maps, interpolation, metrics.
//! - [`io`]: file formats (path CSV, depth PGM/CSV, Z dump, codebook export).
//! - [`pipeline`]: run configuration, validation and end-to-end execution.

pub mod channel;
pub mod codebook;
pub mod depthmap;
pub mod error;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod scene;
pub mod waveform;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/waveform.md")]
    mod waveform {}
    #[doc = include_str!("../../../book/src/codebook.md")]
    mod codebook {}
    #[doc = include_str!("../../../book/src/depthmap.md")]
    mod depthmap {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
