//! End-to-end run driven by a JSON configuration file.
//!
//! A run builds the codebook, sweeps it, turns the sensing matrix into a
//! depth map and, when a ground truth is available, scores it. All artifacts
//! are written only after every stage has succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{feed_channel, AntennaPattern, ChannelEvaluator, ElementPattern, Patterns};
use crate::codebook::{build_codebook, build_grid, Codebook, SceneGrid};
use crate::depthmap::{
    metrics, range_map, range_profile, range_to_depth, scene_range, upscale, DepthMap, Interp,
    Metrics, Window,
};
use crate::geometry::{Position, RisGeometry};
use crate::scene::{
    ground_truth_depth, load_paths, synthesize_paths, PathRow, PropagationPath, Scene, Target,
};
use crate::waveform::{
    dbm_to_mw, derived_params, mw_to_dbm, sweep, DerivedParams, RadarConfig, SensingMatrix,
};
use crate::{io, Error, Result, SPEED_OF_LIGHT};

pub const SCHEMA_VERSION: u32 = 1;

/// Feed distance in front of the aperture center when no position is given.
pub const DEFAULT_FEED_OFFSET_M: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub radar: RadarSection,
    pub ris: RisSection,
    #[serde(default)]
    pub antenna: AntennaSection,
    pub grid: GridSection,
    pub scene: SceneSection,
    #[serde(default)]
    pub processing: ProcessingSection,
    #[serde(default)]
    pub outputs: OutputSection,
    #[serde(default)]
    pub seed: u64,
}

/// Radar parameters in file units. Missing fields take the reference values
/// of [`RadarConfig::reference`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarSection {
    pub f0_hz: f64,
    pub slope_hz_per_s: f64,
    pub t_active_s: f64,
    pub t_pri_s: f64,
    pub fs_hz: f64,
    pub m_sample: usize,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub thermal_noise: bool,
}

impl Default for RadarSection {
    fn default() -> Self {
        let t = RadarConfig::reference();
        Self {
            f0_hz: t.f0,
            slope_hz_per_s: t.slope,
            t_active_s: t.t_active,
            t_pri_s: t.t_pri,
            fs_hz: t.fs,
            m_sample: t.m_sample,
            tx_power_dbm: mw_to_dbm(t.tx_power_mw),
            noise_figure_db: t.noise_figure_db,
            thermal_noise: t.thermal_noise,
        }
    }
}

impl RadarSection {
    pub fn to_radar(&self, seed: u64) -> RadarConfig {
        RadarConfig {
            f0: self.f0_hz,
            slope: self.slope_hz_per_s,
            t_active: self.t_active_s,
            t_pri: self.t_pri_s,
            fs: self.fs_hz,
            m_sample: self.m_sample,
            tx_power_mw: dbm_to_mw(self.tx_power_dbm),
            noise_figure_db: self.noise_figure_db,
            thermal_noise: self.thermal_noise,
            rng_seed: seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub n_h: usize,
    pub n_v: usize,
    /// Defaults to half a wavelength.
    #[serde(default)]
    pub spacing_m: Option<f64>,
    /// Explicit feed position; overrides `feed_offset_m`.
    #[serde(default)]
    pub feed_position_m: Option<Position>,
    /// Feed distance in front of the aperture center.
    #[serde(default = "default_feed_offset")]
    pub feed_offset_m: f64,
}

fn default_feed_offset() -> f64 {
    DEFAULT_FEED_OFFSET_M
}

impl RisSection {
    pub fn to_geometry(&self, f0: f64) -> Result<RisGeometry> {
        let wavelength = SPEED_OF_LIGHT / f0;
        let spacing = self.spacing_m.unwrap_or(wavelength / 2.0);
        let feed = self.feed_position_m.unwrap_or([
            self.n_h.saturating_sub(1) as f64 * spacing / 2.0,
            self.feed_offset_m,
            self.n_v.saturating_sub(1) as f64 * spacing / 2.0,
        ]);
        RisGeometry::new(self.n_h, self.n_v, spacing, wavelength, feed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSection {
    pub feed_gain_dbi: f64,
    /// Linear element gain `ζ`.
    pub element_gain: f64,
}

impl Default for AntennaSection {
    fn default() -> Self {
        Self {
            feed_gain_dbi: 0.0,
            element_gain: 1.0,
        }
    }
}

impl AntennaSection {
    pub fn to_patterns(&self) -> Patterns {
        Patterns {
            feed: if self.feed_gain_dbi == 0.0 {
                AntennaPattern::Isotropic
            } else {
                AntennaPattern::from_dbi(self.feed_gain_dbi)
            },
            element: ElementPattern::Isotropic {
                gain: self.element_gain,
            },
        }
    }
}

/// Sensing grid: `N̄_H = os_h · N_H` by `N̄_V = os_v · N_V` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub fov_deg: f64,
    pub aspect: f64,
    pub os_h: usize,
    pub os_v: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub targets: Vec<Target>,
    pub injected_paths: Vec<PathRow>,
    /// Path-trace CSV whose rows are added to the injected paths.
    pub path_file: Option<PathBuf>,
    /// Depth of empty pixels in the ground truth. Metrics are computed only
    /// when this is set.
    pub background_depth_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessingSection {
    pub window: Window,
    pub interp: Interp,
    /// Output size `"WxH"`.
    pub upscale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub depth_pgm: Option<PathBuf>,
    pub depth_csv: Option<PathBuf>,
    pub metrics_json: Option<PathBuf>,
    pub z_dump: Option<PathBuf>,
    pub codebook_csv: Option<PathBuf>,
    pub phase_table: Option<PathBuf>,
    pub meters_per_level: f64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            depth_pgm: None,
            depth_csv: None,
            metrics_json: None,
            z_dump: None,
            codebook_csv: None,
            phase_table: None,
            meters_per_level: io::DEFAULT_METERS_PER_LEVEL,
        }
    }
}

/// Parses `"WxH"`.
pub fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let w: usize = w
        .trim()
        .parse()
        .map_err(|_| format!("bad width in '{s}'"))?;
    let h: usize = h
        .trim()
        .parse()
        .map_err(|_| format!("bad height in '{s}'"))?;
    if w == 0 || h == 0 {
        return Err(format!("size must be positive, got '{s}'"));
    }
    Ok((w, h))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Overrides applied on top of a configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub z_dump: Option<PathBuf>,
    /// Reuse a dumped sensing matrix instead of sweeping.
    pub replay: Option<PathBuf>,
    pub upscale: Option<(usize, usize)>,
    pub window: Option<Window>,
    pub interp: Option<Interp>,
}

/// Everything a run needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct Setup {
    pub radar: RadarConfig,
    pub geometry: RisGeometry,
    pub patterns: Patterns,
    pub grid: SceneGrid,
    pub scene: Scene,
    pub paths: Vec<PropagationPath>,
    pub background: Option<f64>,
    pub window: Window,
    pub interp: Interp,
    pub upscale: Option<(usize, usize)>,
    pub replay: Option<PathBuf>,
    pub outputs: ResolvedOutputs,
}

#[derive(Debug, Clone, Default)]
pub struct ResolvedOutputs {
    pub depth_pgm: Option<PathBuf>,
    pub depth_csv: Option<PathBuf>,
    pub metrics_json: Option<PathBuf>,
    pub z_dump: Option<PathBuf>,
    pub codebook_csv: Option<PathBuf>,
    pub phase_table: Option<PathBuf>,
    pub meters_per_level: f64,
}

/// Every constraint violation in `cfg`; empty when the run can proceed.
/// Relative paths are resolved against `base_dir`.
pub fn validate(cfg: &RunConfig, base_dir: &Path) -> Vec<String> {
    match setup(cfg, base_dir, &RunOptions::default()) {
        Ok(_) => Vec::new(),
        Err(Error::InvalidConfig(v)) => v,
        Err(e) => vec![e.to_string()],
    }
}

/// Resolves `cfg` and `opts` into a [`Setup`], collecting every violation.
pub fn setup(cfg: &RunConfig, base_dir: &Path, opts: &RunOptions) -> Result<Setup> {
    let mut errs = Vec::new();
    if cfg.schema_version != SCHEMA_VERSION {
        errs.push(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            cfg.schema_version
        ));
    }

    let seed = opts.seed.unwrap_or(cfg.seed);
    let radar = cfg.radar.to_radar(seed);
    errs.extend(radar.violations());
    if !cfg.radar.tx_power_dbm.is_finite() {
        errs.push("transmit power must be finite".into());
    }

    let geometry = if cfg.radar.f0_hz > 0.0 && cfg.radar.f0_hz.is_finite() {
        cfg.ris
            .to_geometry(cfg.radar.f0_hz)
            .map_err(|e| errs.push(e.to_string()))
            .ok()
    } else {
        None
    };

    let patterns = cfg.antenna.to_patterns();
    if let Err(e) = patterns.validate() {
        errs.push(e.to_string());
    }

    let g = &cfg.grid;
    if g.os_h == 0 || g.os_v == 0 {
        errs.push(format!(
            "oversampling must be at least 1 (got {}x{})",
            g.os_h, g.os_v
        ));
    }
    let grid = build_grid(
        g.fov_deg.to_radians(),
        g.aspect,
        g.os_h * cfg.ris.n_h,
        g.os_v * cfg.ris.n_v,
    )
    .map_err(|e| {
        if g.os_h > 0 && g.os_v > 0 && cfg.ris.n_h > 0 && cfg.ris.n_v > 0 {
            errs.push(e.to_string());
        }
    })
    .ok();

    let mut injected: Vec<PropagationPath> = cfg
        .scene
        .injected_paths
        .iter()
        .map(PathRow::to_path)
        .collect();
    if let Some(file) = &cfg.scene.path_file {
        match load_paths(&resolve(base_dir, file)) {
            Ok(p) => injected.extend(p),
            Err(e) => errs.push(format!("path_file: {e}")),
        }
    }
    let scene = Scene {
        targets: cfg.scene.targets.clone(),
        injected_paths: injected,
    };
    let paths = synthesize_paths(&scene)
        .map_err(|e| errs.push(e.to_string()))
        .ok();
    if let Some(bg) = cfg.scene.background_depth_m {
        if !(bg > 0.0 && bg.is_finite()) {
            errs.push(format!("background_depth_m must be positive (got {bg})"));
        }
    }

    if let (Some(geom), Some(paths)) = (&geometry, &paths) {
        let delta1 = crate::geometry::distance(geom.feed_position, geom.element_position(0));
        for (i, p) in paths.iter().enumerate() {
            let xi = p.total_distance(delta1) / SPEED_OF_LIGHT;
            if xi.is_nan() || xi >= radar.t_active {
                errs.push(format!(
                    "path {} (target {}) delay {xi:.3e} s exceeds the chirp duration",
                    i + 1,
                    p.target_id
                ));
            }
        }
    }

    let upscale = match (opts.upscale, &cfg.processing.upscale) {
        (Some(s), _) => Some(s),
        (None, Some(s)) => parse_size(s)
            .map_err(|e| errs.push(format!("upscale: {e}")))
            .ok(),
        (None, None) => None,
    };
    if let (Some((w, h)), Some(grid)) = (upscale, &grid) {
        if w < grid.nbar_h() || h < grid.nbar_v() {
            errs.push(format!(
                "upscale {w}x{h} is smaller than the {}x{} sensing grid",
                grid.nbar_h(),
                grid.nbar_v()
            ));
        }
    }

    let o = &cfg.outputs;
    if !(o.meters_per_level > 0.0 && o.meters_per_level.is_finite()) {
        errs.push(format!(
            "meters_per_level must be positive (got {})",
            o.meters_per_level
        ));
    }
    let out = |p: &Option<PathBuf>| p.as_ref().map(|p| resolve(base_dir, p));
    let outputs = ResolvedOutputs {
        depth_pgm: out(&o.depth_pgm),
        depth_csv: out(&o.depth_csv),
        metrics_json: out(&o.metrics_json),
        z_dump: opts.z_dump.clone().or_else(|| out(&o.z_dump)),
        codebook_csv: out(&o.codebook_csv),
        phase_table: out(&o.phase_table),
        meters_per_level: o.meters_per_level,
    };
    if let Some(r) = &opts.replay {
        if !r.is_file() {
            errs.push(format!("replay file {} does not exist", r.display()));
        }
    }
    if opts.workers == Some(0) {
        errs.push("workers must be at least 1".into());
    }

    match (geometry, grid, paths) {
        (Some(geometry), Some(grid), Some(paths)) if errs.is_empty() => Ok(Setup {
            radar,
            geometry,
            patterns,
            grid,
            scene,
            paths,
            background: cfg.scene.background_depth_m,
            window: opts.window.unwrap_or(cfg.processing.window),
            interp: opts.interp.unwrap_or(cfg.processing.interp),
            upscale,
            replay: opts.replay.clone(),
            outputs,
        }),
        _ => Err(Error::InvalidConfig(errs)),
    }
}

/// Estimated and true depth at the pixel owning a target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetReport {
    pub id: u32,
    pub row: usize,
    pub col: usize,
    pub truth_m: f64,
    pub estimate_m: f64,
    pub error_m: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub derived: DerivedParams,
    pub delta1: f64,
    pub seed: u64,
    pub z: SensingMatrix,
    pub codebook: Codebook,
    pub depth: DepthMap,
    pub upscaled: Option<DepthMap>,
    pub metrics: Option<Metrics>,
    pub upscaled_metrics: Option<Metrics>,
    pub targets: Vec<TargetReport>,
    pub warnings: Vec<String>,
}

/// Runs every stage in memory. The only file read is the replay dump.
pub fn execute(s: &Setup) -> Result<Outcome> {
    let fc = feed_channel(&s.geometry, &s.patterns)?;
    let codebook = build_codebook(&s.grid, &fc, &s.geometry);
    let derived = derived_params(&s.radar);

    let mut warnings = Vec::new();
    for (i, p) in s.paths.iter().enumerate() {
        let bin = s.radar.slope * p.total_distance(fc.delta1) / SPEED_OF_LIGHT
            * s.radar.m_sample as f64
            / s.radar.fs;
        if bin.round() >= s.radar.m_sample as f64 {
            warnings.push(format!(
                "path {} (target {}) beats above the sampling rate and will alias",
                i + 1,
                p.target_id
            ));
        }
    }

    let z = match &s.replay {
        Some(path) => {
            let z = io::load_z_dump(path)?;
            if z.m_sample() != s.radar.m_sample || z.m() != codebook.len() {
                return Err(Error::BadDump(format!(
                    "dump is {}x{}, run expects {}x{}",
                    z.m_sample(),
                    z.m(),
                    s.radar.m_sample,
                    codebook.len()
                )));
            }
            z
        }
        None => {
            let channel = ChannelEvaluator::new(&s.paths, &fc, &s.geometry, &s.patterns);
            sweep(&channel, &codebook, &s.radar)?
        }
    };

    let rp = range_profile(&z, s.window);
    let rhat = scene_range(&rp, derived.range_resolution_m);
    let rmap = range_map(&rhat, s.grid.nbar_h(), s.grid.nbar_v())?;
    let depth = range_to_depth(&rmap, &s.grid, fc.delta1)?;
    let upscaled = s
        .upscale
        .map(|(w, h)| upscale(&depth, w, h, s.interp))
        .transpose()?;

    let (metrics_lo, metrics_hi) = match s.background {
        Some(bg) => {
            let truth = ground_truth_depth(&s.scene, &s.grid, bg);
            let lo = metrics(&depth, &truth)?;
            let hi = match (&upscaled, s.upscale) {
                (Some(up), Some((w, h))) => {
                    Some(metrics(up, &upscale(&truth, w, h, Interp::Nearest)?)?)
                }
                _ => None,
            };
            (Some(lo), hi)
        }
        None => (None, None),
    };

    let targets = s
        .scene
        .targets
        .iter()
        .filter_map(|t| {
            let (row, col) = s.grid.pixel_of_point(t.position)?;
            let estimate = depth.get(row, col);
            Some(TargetReport {
                id: t.id,
                row,
                col,
                truth_m: t.position[1],
                estimate_m: estimate,
                error_m: estimate - t.position[1],
            })
        })
        .collect();

    Ok(Outcome {
        derived,
        delta1: fc.delta1,
        seed: z.seed,
        z,
        codebook,
        depth,
        upscaled,
        metrics: metrics_lo,
        upscaled_metrics: metrics_hi,
        targets,
        warnings,
    })
}

#[derive(Debug, Serialize)]
struct UpscaledMetrics {
    width: usize,
    height: usize,
    rmse_m: f64,
    mae_m: f64,
}

#[derive(Debug, Serialize)]
struct MetricsReport<'a> {
    rmse_m: Option<f64>,
    mae_m: Option<f64>,
    m: usize,
    nbar_h: usize,
    nbar_v: usize,
    seed: u64,
    upscaled: Option<UpscaledMetrics>,
    targets: &'a [TargetReport],
    metadata: serde_json::Value,
}

/// Metrics JSON. Only `metadata` may differ between identical runs.
pub fn metrics_json(s: &Setup, o: &Outcome, metadata: serde_json::Value) -> Result<String> {
    let report = MetricsReport {
        rmse_m: o.metrics.map(|m| m.rmse),
        mae_m: o.metrics.map(|m| m.mae),
        m: o.codebook.len(),
        nbar_h: s.grid.nbar_h(),
        nbar_v: s.grid.nbar_v(),
        seed: o.seed,
        upscaled: match (o.upscaled_metrics, s.upscale) {
            (Some(m), Some((width, height))) => Some(UpscaledMetrics {
                width,
                height,
                rmse_m: m.rmse,
                mae_m: m.mae,
            }),
            _ => None,
        },
        targets: &o.targets,
        metadata,
    };
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

fn run_metadata() -> serde_json::Value {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "generated_unix_s": now,
    })
}

/// Writes every requested artifact. On failure, files already written by
/// this call are removed.
pub fn write_artifacts(s: &Setup, o: &Outcome) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let result = write_all(s, o, &mut written);
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result.map(|_| written)
}

fn write_all(s: &Setup, o: &Outcome, written: &mut Vec<PathBuf>) -> Result<()> {
    let out = &s.outputs;
    let image = o.upscaled.as_ref().unwrap_or(&o.depth);
    if let Some(p) = &out.depth_pgm {
        written.push(p.clone());
        io::save_pgm(p, image, out.meters_per_level)?;
    }
    if let Some(p) = &out.depth_csv {
        written.push(p.clone());
        io::save_depth_csv(p, image)?;
    }
    if let Some(p) = &out.z_dump {
        written.push(p.clone());
        io::save_z_dump(p, &o.z)?;
    }
    if let Some(p) = &out.codebook_csv {
        written.push(p.clone());
        io::save_codebook_csv(p, &o.codebook)?;
    }
    if let Some(p) = &out.phase_table {
        written.push(p.clone());
        io::save_phase_table(p, &o.codebook)?;
    }
    if let Some(p) = &out.metrics_json {
        written.push(p.clone());
        let text = metrics_json(s, o, run_metadata())?;
        fs::write(p, text).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub setup: Setup,
    pub outcome: Outcome,
    pub artifacts: Vec<PathBuf>,
}

/// Loads `config`, validates it, runs the pipeline on `opts.workers` threads
/// and writes the artifacts.
pub fn run(config: &Path, opts: &RunOptions) -> Result<RunReport> {
    let cfg = load_config(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    run_config(&cfg, base, opts)
}

/// Like [`run`], for a configuration already in memory.
pub fn run_config(cfg: &RunConfig, base_dir: &Path, opts: &RunOptions) -> Result<RunReport> {
    let setup = setup(cfg, base_dir, opts)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(vec![format!("worker pool: {e}")]))?;
    let outcome = pool.install(|| execute(&setup))?;
    let artifacts = write_artifacts(&setup, &outcome)?;
    Ok(RunReport {
        setup,
        outcome,
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> RunConfig {
        parse_config(json).unwrap()
    }

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "radar": { "thermal_noise": false },
        "ris": { "n_h": 5, "n_v": 5 },
        "grid": { "fov_deg": 60, "aspect": 1.0, "os_h": 1, "os_v": 1 },
        "scene": { "targets": [ { "id": 1, "position": [0.0, 3.0, 0.0], "rcs": 1.0 } ] }
    }"#;

    #[test]
    fn radar_defaults_are_reference() {
        let cfg = config(MINIMAL);
        let r = cfg.radar.to_radar(0);
        let t = RadarConfig::reference();
        assert_eq!(r.f0, t.f0);
        assert_eq!(r.m_sample, 512);
        assert!((r.tx_power_mw - 100.0).abs() < 1e-9);
        assert!(!r.thermal_noise);
        assert!(validate(&cfg, Path::new(".")).is_empty());
    }

    #[test]
    fn violations_are_collected() {
        let mut cfg = config(MINIMAL);
        cfg.radar.t_pri_s = cfg.radar.t_active_s / 2.0;
        cfg.grid.fov_deg = 0.0;
        cfg.schema_version = 7;
        let v = validate(&cfg, Path::new("."));
        assert!(v.iter().any(|m| m.contains("chirp exceeds PRI")), "{v:?}");
        assert!(
            v.iter()
                .any(|m| m.contains("field of view") || m.contains("fov")),
            "{v:?}"
        );
        assert!(v.iter().any(|m| m.contains("schema_version")), "{v:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL
            .replace("\"seed\"", "\"sed\"")
            .replace("\"aspect\"", "\"aspekt\"");
        assert!(matches!(parse_config(&bad), Err(Error::Json(_))));
    }

    #[test]
    fn missing_path_file_is_a_violation() {
        let mut cfg = config(MINIMAL);
        cfg.scene.path_file = Some("no/such/file.csv".into());
        let v = validate(&cfg, Path::new("/nonexistent"));
        assert!(v.iter().any(|m| m.starts_with("path_file")), "{v:?}");
    }

    #[test]
    fn far_target_is_a_violation() {
        let mut cfg = config(MINIMAL);
        cfg.scene.targets[0].position = [0.0, 3000.0, 0.0];
        let v = validate(&cfg, Path::new("."));
        assert!(v.iter().any(|m| m.contains("chirp duration")), "{v:?}");
    }

    #[test]
    fn size_parsing() {
        assert_eq!(parse_size("640x480"), Ok((640, 480)));
        assert_eq!(parse_size("8X4"), Ok((8, 4)));
        assert!(parse_size("640").is_err());
        assert!(parse_size("0x4").is_err());
    }

    #[test]
    fn explicit_feed_position_wins() {
        let mut cfg = config(MINIMAL);
        cfg.ris.feed_position_m = Some([0.0, 0.5, 0.0]);
        let g = cfg.ris.to_geometry(60e9).unwrap();
        assert_eq!(g.feed_position, [0.0, 0.5, 0.0]);
        cfg.ris.feed_position_m = None;
        let g = cfg.ris.to_geometry(60e9).unwrap();
        assert_eq!(g.feed_position[1], DEFAULT_FEED_OFFSET_M);
    }

    #[test]
    fn boresight_run_in_memory() {
        let cfg = config(MINIMAL);
        let s = setup(&cfg, Path::new("."), &RunOptions::default()).unwrap();
        let o = execute(&s).unwrap();
        assert_eq!(o.targets.len(), 1);
        assert!(o.targets[0].error_m.abs() <= o.derived.range_resolution_m);
        assert!(o.metrics.is_none());
    }
}
