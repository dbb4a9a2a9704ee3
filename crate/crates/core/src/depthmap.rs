//! Post-processing of the sensing matrix into a depth image.
//!
//! 1. Range profile: a unitary DFT of every column of `Z` over the sample index.
//! 2. Scene range: `r̂_m = Δ_R · argmax_s |Z_RP[s, m]|`, ties to the lower bin.
//! 3. Range map: `r̂` reshaped row-major onto the `N̄_V × N̄_H` grid.
//! 4. Depth map: `(r̂ − δ_1)⁺ · u_y(θ_m)`. `r̂` includes the feed leg `δ_1`.
//!    Depth is the boresight (`y`) component of the remaining RIS-to-target
//!    range.
//! 5. Optional upscaling, then RMSE/MAE against a reference map.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::codebook::{GridSpec, SceneGrid};
use crate::waveform::SensingMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rect,
    Hann,
}

impl std::str::FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rect" => Ok(Window::Rect),
            "hann" => Ok(Window::Hann),
            _ => Err(format!("unknown window '{s}' (expected rect or hann)")),
        }
    }
}

impl Window {
    fn coefficients(self, n: usize) -> Option<Vec<f64>> {
        match self {
            Window::Rect => None,
            Window::Hann if n <= 1 => None,
            // periodic Hann
            Window::Hann => Some(
                (0..n)
                    .map(|s| 0.5 * (1.0 - (2.0 * PI * s as f64 / n as f64).cos()))
                    .collect(),
            ),
        }
    }
}

/// Range profile `Z_RP`, `M_sample × M`, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    m_sample: usize,
    m: usize,
    data: Vec<Complex64>,
}

impl RangeProfile {
    pub fn m_sample(&self) -> usize {
        self.m_sample
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.m_sample..(m + 1) * self.m_sample]
    }
}

/// Column-wise DFT of `Z`, scaled by `1/√M_sample`.
pub fn range_profile(z: &SensingMatrix, window: Window) -> RangeProfile {
    let n = z.m_sample();
    let mut data = z.as_column_major().to_vec();
    if n > 0 {
        let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
        let coeffs = window.coefficients(n);
        let scale = 1.0 / (n as f64).sqrt();
        data.par_chunks_mut(n).for_each(|col| {
            if let Some(w) = &coeffs {
                col.iter_mut().zip(w).for_each(|(x, w)| *x *= w);
            }
            fft.process(col);
            col.iter_mut().for_each(|x| *x *= scale);
        });
    }
    RangeProfile {
        m_sample: n,
        m: z.m(),
        data,
    }
}

/// Index of the largest magnitude; the first one wins on ties.
pub fn peak_bin(column: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (s, x) in column.iter().enumerate() {
        let mag = x.norm_sqr();
        if mag > best_mag {
            best = s;
            best_mag = mag;
        }
    }
    best
}

/// Per-beam range estimate `r̂` (m).
pub fn scene_range(rp: &RangeProfile, delta_r: f64) -> Vec<f64> {
    (0..rp.m())
        .into_par_iter()
        .map(|m| delta_r * peak_bin(rp.column(m)) as f64)
        .collect()
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl RangeMap {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Inverse of [`range_map`].
    pub fn flatten(&self) -> Vec<f64> {
        self.values.clone()
    }
}

/// 1-based `(v, h)` subscripts of the 1-based linear index `m`,
/// where `m = (v − 1)·N̄_H + h`.
pub fn subscripts(m: usize, nbar_h: usize) -> (usize, usize) {
    ((m - 1) / nbar_h + 1, (m - 1) % nbar_h + 1)
}

/// Arranges `r̂` on the `N̄_V × N̄_H` grid.
pub fn range_map(rhat: &[f64], nbar_h: usize, nbar_v: usize) -> Result<RangeMap> {
    if rhat.len() != nbar_h * nbar_v {
        return Err(Error::DimensionMismatch {
            expected: nbar_h * nbar_v,
            actual: rhat.len(),
        });
    }
    Ok(RangeMap {
        rows: nbar_v,
        cols: nbar_h,
        values: rhat.to_vec(),
    })
}

/// Depth image in meters, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    grid: Option<GridSpec>,
}

impl DepthMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: values.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            grid: None,
        })
    }

    pub(crate) fn with_grid(rows: usize, cols: usize, values: Vec<f64>, grid: GridSpec) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self {
            rows,
            cols,
            values,
            grid: Some(grid),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Option<GridSpec> {
        self.grid
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Projects a range map onto scene depth.
pub fn range_to_depth(rmap: &RangeMap, grid: &SceneGrid, delta1: f64) -> Result<DepthMap> {
    if rmap.rows != grid.nbar_v() || rmap.cols != grid.nbar_h() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: rmap.rows * rmap.cols,
        });
    }
    let values = rmap
        .values
        .iter()
        .zip(grid.units())
        .map(|(&r, u)| (r - delta1).max(0.0) * u.y)
        .collect();
    Ok(DepthMap::with_grid(
        rmap.rows,
        rmap.cols,
        values,
        grid.spec(),
    ))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    #[default]
    Nearest,
    Bilinear,
}

impl std::str::FromStr for Interp {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nearest" => Ok(Interp::Nearest),
            "bilinear" => Ok(Interp::Bilinear),
            _ => Err(format!(
                "unknown interpolation '{s}' (expected nearest or bilinear)"
            )),
        }
    }
}

/// Source coordinate of output sample `i`, pixel-center aligned.
fn source_coord(i: usize, n_in: usize, n_out: usize) -> f64 {
    ((i as f64 + 0.5) * n_in as f64 / n_out as f64 - 0.5).clamp(0.0, (n_in - 1) as f64)
}

/// Resamples a depth map to `out_w × out_h`. Axes scale independently.
pub fn upscale(dm: &DepthMap, out_w: usize, out_h: usize, interp: Interp) -> Result<DepthMap> {
    if out_w < dm.cols || out_h < dm.rows || dm.values.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: dm.cols * dm.rows,
            actual: out_w * out_h,
        });
    }
    let mut values = Vec::with_capacity(out_w * out_h);
    match interp {
        Interp::Nearest => {
            let cols: Vec<usize> = (0..out_w).map(|j| j * dm.cols / out_w).collect();
            for i in 0..out_h {
                let r = i * dm.rows / out_h;
                values.extend(cols.iter().map(|&c| dm.get(r, c)));
            }
        }
        Interp::Bilinear => {
            for i in 0..out_h {
                let y = source_coord(i, dm.rows, out_h);
                let r0 = y.floor() as usize;
                let r1 = (r0 + 1).min(dm.rows - 1);
                let fy = y - r0 as f64;
                for j in 0..out_w {
                    let x = source_coord(j, dm.cols, out_w);
                    let c0 = x.floor() as usize;
                    let c1 = (c0 + 1).min(dm.cols - 1);
                    let fx = x - c0 as f64;
                    let top = dm.get(r0, c0) * (1.0 - fx) + dm.get(r0, c1) * fx;
                    let bottom = dm.get(r1, c0) * (1.0 - fx) + dm.get(r1, c1) * fx;
                    values.push(top * (1.0 - fy) + bottom * fy);
                }
            }
        }
    }
    Ok(DepthMap {
        rows: out_h,
        cols: out_w,
        values,
        grid: dm.grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    /// Number of compared pixels.
    pub pixels: usize,
}

/// RMSE and MAE, each averaged over the compared pixels.
pub fn metrics(est: &DepthMap, truth: &DepthMap) -> Result<Metrics> {
    if est.rows != truth.rows || est.cols != truth.cols {
        return Err(Error::DimensionMismatch {
            expected: truth.values.len(),
            actual: est.values.len(),
        });
    }
    let n = est.values.len();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: 0,
        });
    }
    let (sq, abs) = est
        .values
        .iter()
        .zip(&truth.values)
        .fold((0.0, 0.0), |(sq, abs), (a, b)| {
            let d = a - b;
            (sq + d * d, abs + d.abs())
        });
    Ok(Metrics {
        rmse: (sq / n as f64).sqrt(),
        mae: abs / n as f64,
        pixels: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_grid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn column_matrix(col: Vec<Complex64>) -> SensingMatrix {
        SensingMatrix::from_columns(vec![col], 0).unwrap()
    }

    #[test]
    fn zero_column_has_zero_spectrum() {
        let rp = range_profile(&column_matrix(vec![Complex64::default(); 16]), Window::Rect);
        assert!(rp.column(0).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn exponential_maps_to_single_bin() {
        let n = 64;
        let k = 9;
        let col = (0..n)
            .map(|s| Complex64::from_polar(1.0, 2.0 * PI * (k * s) as f64 / n as f64))
            .collect();
        let rp = range_profile(&column_matrix(col), Window::Rect);
        for (bin, x) in rp.column(0).iter().enumerate() {
            if bin == k {
                assert_abs_diff_eq!(x.norm(), (n as f64).sqrt(), epsilon = 1e-10);
            } else {
                assert!(x.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn hann_keeps_peak_location() {
        let n = 128;
        let col: Vec<Complex64> = (0..n)
            .map(|s| Complex64::from_polar(1.0, 2.0 * PI * 20.3 * s as f64 / n as f64))
            .collect();
        let rect = range_profile(&column_matrix(col.clone()), Window::Rect);
        let hann = range_profile(&column_matrix(col), Window::Hann);
        assert_eq!(peak_bin(rect.column(0)), 20);
        assert_eq!(peak_bin(hann.column(0)), 20);
    }

    #[test]
    fn scene_range_examples() {
        let mut col = vec![Complex64::default(); 512];
        col[135] = Complex64::new(1.0, 0.0);
        let rp = RangeProfile {
            m_sample: 512,
            m: 1,
            data: col,
        };
        let r = scene_range(&rp, 0.0371);
        assert_abs_diff_eq!(r[0], 5.0085, epsilon = 1e-12);

        let mut col = vec![Complex64::new(0.01, 0.0); 32];
        col[0] = Complex64::new(3.0, 0.0);
        let rp = RangeProfile {
            m_sample: 32,
            m: 1,
            data: col,
        };
        assert_eq!(scene_range(&rp, 0.0371), vec![0.0]);

        let mut col = vec![Complex64::default(); 32];
        col[10] = Complex64::new(0.0, 2.0);
        col[20] = Complex64::new(-2.0, 0.0);
        let rp = RangeProfile {
            m_sample: 32,
            m: 1,
            data: col,
        };
        assert_eq!(scene_range(&rp, 0.5), vec![5.0]);
    }

    #[test]
    fn subscript_examples() {
        assert_eq!(subscripts(5, 3), (2, 2));
        assert_eq!(subscripts(1, 3), (1, 1));
        assert_eq!(subscripts(3, 3), (1, 3));
        let rhat: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let single_row = range_map(&rhat, 7, 1).unwrap();
        assert_eq!(single_row.flatten(), rhat);
        assert!(matches!(
            range_map(&rhat, 2, 3),
            Err(Error::DimensionMismatch { .. })
        ));
        let m = range_map(&(0..6).map(|i| i as f64).collect::<Vec<_>>(), 3, 2).unwrap();
        // 1-based m = 5 → (2, 2) → value index 4
        assert_eq!(m.get(1, 1), 4.0);
    }

    #[test]
    fn depth_projection() {
        let grid = build_grid(90f64.to_radians(), 1.0, 3, 3).unwrap();
        let mut r = vec![0.0; 9];
        r[4] = 5.0;
        r[3] = 1.0;
        // (row 1, col 0) is x = -tan 45° ≈ -1 → u_y ≈ cos 45°
        r[5] = 5.0;
        let dm = range_to_depth(&range_map(&r, 3, 3).unwrap(), &grid, 1.0).unwrap();
        assert_abs_diff_eq!(dm.get(1, 1), 4.0, epsilon = 1e-15);
        assert_eq!(dm.get(1, 0), 0.0);
        assert_eq!(dm.get(0, 0), 0.0);
        assert_abs_diff_eq!(dm.get(1, 2), 4.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(dm.get(1, 2), 2.828, epsilon = 1e-3);
    }

    #[test]
    fn depth_dimension_mismatch() {
        let grid = build_grid(1.0, 1.0, 3, 3).unwrap();
        let rm = range_map(&[0.0; 6], 3, 2).unwrap();
        assert!(range_to_depth(&rm, &grid, 0.1).is_err());
    }

    #[test]
    fn upscale_examples() {
        let dm = DepthMap::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        for interp in [Interp::Nearest, Interp::Bilinear] {
            assert_eq!(upscale(&dm, 3, 2, interp).unwrap(), dm);
        }
        let c = DepthMap::new(2, 2, vec![2.5; 4]).unwrap();
        for interp in [Interp::Nearest, Interp::Bilinear] {
            let up = upscale(&c, 7, 5, interp).unwrap();
            assert!(up.values().iter().all(|&v| (v - 2.5).abs() < 1e-15));
        }
        let pair = DepthMap::new(1, 2, vec![1.0, 3.0]).unwrap();
        assert_eq!(
            upscale(&pair, 4, 1, Interp::Nearest).unwrap().values(),
            &[1.0, 1.0, 3.0, 3.0]
        );
        assert_eq!(
            upscale(&pair, 4, 1, Interp::Bilinear).unwrap().values(),
            &[1.0, 1.5, 2.5, 3.0]
        );
        assert!(upscale(&pair, 1, 1, Interp::Nearest).is_err());
    }

    #[test]
    fn metric_examples() {
        let truth = DepthMap::new(1, 2, vec![1.0, 2.0]).unwrap();
        let est = DepthMap::new(1, 2, vec![1.0, 4.0]).unwrap();
        let m = metrics(&est, &truth).unwrap();
        assert_abs_diff_eq!(m.rmse, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(m.mae, 1.0, epsilon = 1e-15);
        assert_eq!(metrics(&truth, &truth).unwrap().rmse, 0.0);
        let biased = DepthMap::new(1, 2, vec![0.7, 1.7]).unwrap();
        let b = metrics(&biased, &truth).unwrap();
        assert_abs_diff_eq!(b.rmse, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(b.mae, 0.3, epsilon = 1e-12);
        let other = DepthMap::new(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            metrics(&other, &truth),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn arb_map() -> impl Strategy<Value = DepthMap> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0.0f64..20.0, r * c)
                .prop_map(move |v| DepthMap::new(r, c, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn range_map_round_trip(nh in 1usize..10, nv in 1usize..10, seed in proptest::collection::vec(0.0f64..20.0, 100)) {
            let rhat: Vec<f64> = seed.into_iter().cycle().take(nh * nv).collect();
            prop_assert_eq!(range_map(&rhat, nh, nv).unwrap().flatten(), rhat);
        }

        #[test]
        fn upscale_stays_in_range(dm in arb_map(), ex in 0usize..9, ey in 0usize..9, bilinear in any::<bool>()) {
            let interp = if bilinear { Interp::Bilinear } else { Interp::Nearest };
            let up = upscale(&dm, dm.cols() + ex, dm.rows() + ey, interp).unwrap();
            let (lo, hi) = dm.min_max();
            prop_assert!(up.values().iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
        }

        #[test]
        fn metric_properties(a in arb_map(), noise in proptest::collection::vec(-3.0f64..3.0, 25)) {
            let b = DepthMap::new(a.rows(), a.cols(),
                a.values().iter().zip(noise.iter().cycle()).map(|(x, n)| x + n).collect()).unwrap();
            let ab = metrics(&a, &b).unwrap();
            let ba = metrics(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab.rmse >= ab.mae - 1e-12);
            prop_assert_eq!(metrics(&a, &a).unwrap().rmse, 0.0);
        }

        #[test]
        fn peak_is_within_bins(col in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
            let z: Vec<Complex64> = col.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let n = z.len();
            let rp = range_profile(&column_matrix(z), Window::Rect);
            let r = scene_range(&rp, 0.0371)[0];
            prop_assert!(r >= 0.0 && r <= (n - 1) as f64 * 0.0371 + 1e-12);
        }
    }
}
