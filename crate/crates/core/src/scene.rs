//! Targets, propagation paths and ground-truth depth.
//!
//! Point targets become single-bounce paths: they leave and return along the
//! direction of the target as seen from the reference element. Multi-bounce
//! clutter is given directly as [`PropagationPath`] rows whose departure and
//! arrival directions differ. Those rows come from the scene description or
//! from a path-trace CSV.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codebook::SceneGrid;
use crate::depthmap::DepthMap;
use crate::geometry::{direction_to_angles, norm, Direction, Position, UnitVec3};
use crate::{Error, Result};

/// Point scatterer in the RIS frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: u32,
    /// Meters; `y` is the depth axis and must be positive.
    pub position: Position,
    /// Radar cross-section `σ_g` (m²).
    pub rcs: f64,
}

impl Target {
    pub fn validate(&self) -> Result<()> {
        if self.position.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "target {} has a non-finite position",
                self.id
            )));
        }
        if self.position[1] <= 0.0 {
            return Err(Error::InvalidScene(format!(
                "target {} is not in front of the array (y = {})",
                self.id, self.position[1]
            )));
        }
        if !(self.rcs > 0.0 && self.rcs.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "target {} needs a positive radar cross-section (got {})",
                self.id, self.rcs
            )));
        }
        Ok(())
    }
}

/// One channel path `(g, ℓ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub target_id: u32,
    pub path_id: u32,
    /// Departure direction from the RIS, `θ̄`.
    pub depart: Direction,
    /// Arrival direction at the RIS, `θ̈`.
    pub arrive: Direction,
    /// RIS → scene leg `d̄` (m).
    pub fwd_dist: f64,
    /// Scene → RIS leg `d̈` (m).
    pub bwd_dist: f64,
    /// Extra linear attenuation on each leg, ≥ 1.
    pub fwd_loss: f64,
    pub bwd_loss: f64,
    /// Radar cross-section (m²).
    pub rcs: f64,
}

impl PropagationPath {
    /// Total round-trip distance `R = 2δ_1 + d̄ + d̈`.
    pub fn total_distance(&self, delta1: f64) -> f64 {
        2.0 * delta1 + self.fwd_dist + self.bwd_dist
    }

    pub fn is_single_bounce(&self) -> bool {
        self.depart == self.arrive && self.fwd_dist == self.bwd_dist
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let angles = [
            self.depart.azimuth,
            self.depart.zenith,
            self.arrive.azimuth,
            self.arrive.zenith,
        ];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err("angles must be finite".into());
        }
        if !(self.fwd_dist > 0.0 && self.fwd_dist.is_finite()) {
            return Err(format!(
                "forward distance must be positive (got {})",
                self.fwd_dist
            ));
        }
        if !(self.bwd_dist > 0.0 && self.bwd_dist.is_finite()) {
            return Err(format!(
                "backward distance must be positive (got {})",
                self.bwd_dist
            ));
        }
        if !(self.fwd_loss >= 1.0 && self.fwd_loss.is_finite()) {
            return Err(format!(
                "forward loss must be at least 0 dB (got linear {})",
                self.fwd_loss
            ));
        }
        if !(self.bwd_loss >= 1.0 && self.bwd_loss.is_finite()) {
            return Err(format!(
                "backward loss must be at least 0 dB (got linear {})",
                self.bwd_loss
            ));
        }
        if !(self.rcs > 0.0 && self.rcs.is_finite()) {
            return Err(format!(
                "radar cross-section must be positive (got {})",
                self.rcs
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub targets: Vec<Target>,
    #[serde(default)]
    pub injected_paths: Vec<PropagationPath>,
}

impl Scene {
    pub fn new(targets: Vec<Target>, injected_paths: Vec<PropagationPath>) -> Result<Self> {
        let scene = Self {
            targets,
            injected_paths,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for t in &self.targets {
            t.validate()?;
            if !seen.insert(t.id) {
                return Err(Error::InvalidScene(format!("duplicate target id {}", t.id)));
            }
        }
        for (i, p) in self.injected_paths.iter().enumerate() {
            p.validate()
                .map_err(|m| Error::InvalidScene(format!("injected path {}: {m}", i + 1)))?;
        }
        Ok(())
    }
}

/// Single-bounce path per target, followed by the injected paths unchanged.
pub fn synthesize_paths(scene: &Scene) -> Result<Vec<PropagationPath>> {
    if scene.targets.is_empty() && scene.injected_paths.is_empty() {
        return Err(Error::EmptyScene);
    }
    scene.validate()?;
    let mut paths: Vec<PropagationPath> = scene
        .targets
        .iter()
        .map(|t| {
            let d = norm(t.position);
            let u = UnitVec3::normalize(t.position).expect("validated target is off the origin");
            let dir = direction_to_angles(u);
            PropagationPath {
                target_id: t.id,
                path_id: 0,
                depart: dir,
                arrive: dir,
                fwd_dist: d,
                bwd_dist: d,
                fwd_loss: 1.0,
                bwd_loss: 1.0,
                rcs: t.rcs,
            }
        })
        .collect();
    paths.extend(scene.injected_paths.iter().cloned());
    Ok(paths)
}

/// Column names of the path-trace CSV, in order.
pub const PATH_CSV_HEADER: [&str; 11] = [
    "target_id",
    "path_id",
    "depart_az_deg",
    "depart_ze_deg",
    "arrive_az_deg",
    "arrive_ze_deg",
    "fwd_dist_m",
    "bwd_dist_m",
    "fwd_loss_db",
    "bwd_loss_db",
    "rcs_m2",
];

/// A path in file units: degrees, meters, dB, m².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub target_id: u32,
    pub path_id: u32,
    pub depart_az_deg: f64,
    pub depart_ze_deg: f64,
    pub arrive_az_deg: f64,
    pub arrive_ze_deg: f64,
    pub fwd_dist_m: f64,
    pub bwd_dist_m: f64,
    pub fwd_loss_db: f64,
    pub bwd_loss_db: f64,
    pub rcs_m2: f64,
}

impl PathRow {
    pub fn to_path(&self) -> PropagationPath {
        PropagationPath {
            target_id: self.target_id,
            path_id: self.path_id,
            depart: Direction::from_degrees(self.depart_az_deg, self.depart_ze_deg),
            arrive: Direction::from_degrees(self.arrive_az_deg, self.arrive_ze_deg),
            fwd_dist: self.fwd_dist_m,
            bwd_dist: self.bwd_dist_m,
            fwd_loss: db_to_linear(self.fwd_loss_db),
            bwd_loss: db_to_linear(self.bwd_loss_db),
            rcs: self.rcs_m2,
        }
    }

    pub fn from_path(p: &PropagationPath) -> Self {
        Self {
            target_id: p.target_id,
            path_id: p.path_id,
            depart_az_deg: p.depart.azimuth.to_degrees(),
            depart_ze_deg: p.depart.zenith.to_degrees(),
            arrive_az_deg: p.arrive.azimuth.to_degrees(),
            arrive_ze_deg: p.arrive.zenith.to_degrees(),
            fwd_dist_m: p.fwd_dist,
            bwd_dist_m: p.bwd_dist,
            fwd_loss_db: linear_to_db(p.fwd_loss),
            bwd_loss_db: linear_to_db(p.bwd_loss),
            rcs_m2: p.rcs,
        }
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Reads a path-trace CSV. Row numbers in errors count data rows from 1.
pub fn read_paths<R: Read>(reader: R) -> Result<Vec<PropagationPath>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != PATH_CSV_HEADER {
        return Err(Error::Parse {
            row: 0,
            message: format!("unexpected header {found:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<PathRow>().enumerate() {
        let row = i + 1;
        let r = rec.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let path = r.to_path();
        path.validate()
            .map_err(|message| Error::Validation { row, message })?;
        out.push(path);
    }
    Ok(out)
}

pub fn load_paths(path: &Path) -> Result<Vec<PropagationPath>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_paths(std::io::BufReader::new(f))
}

pub fn write_paths<W: Write>(writer: W, paths: &[PropagationPath]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::Parse {
        row: 0,
        message: e.to_string(),
    };
    for p in paths {
        w.serialize(PathRow::from_path(p)).map_err(to_err)?;
    }
    if paths.is_empty() {
        w.write_record(PATH_CSV_HEADER).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Parse {
        row: 0,
        message: e.to_string(),
    })?;
    Ok(())
}

pub fn save_paths(path: &Path, paths: &[PropagationPath]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_paths(std::io::BufWriter::new(f), paths)
}

/// Rasterizes the targets onto the sensing grid. A pixel holds the
/// smallest target depth (`y`) among targets whose direction falls in its
/// cell, capped at `background`, which also fills empty pixels.
pub fn ground_truth_depth(scene: &Scene, grid: &SceneGrid, background: f64) -> DepthMap {
    let (rows, cols) = (grid.nbar_v(), grid.nbar_h());
    let mut values = vec![background; rows * cols];
    for t in &scene.targets {
        if let Some((r, c)) = grid.pixel_of_point(t.position) {
            let i = r * cols + c;
            values[i] = values[i].min(t.position[1]);
        }
    }
    DepthMap::with_grid(rows, cols, values, grid.spec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::build_grid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn target(id: u32, p: Position) -> Target {
        Target {
            id,
            position: p,
            rcs: 1.0,
        }
    }

    #[test]
    fn boresight_target_path() {
        let scene = Scene::new(vec![target(7, [0.0, 4.0, 0.0])], vec![]).unwrap();
        let paths = synthesize_paths(&scene).unwrap();
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.target_id, 7);
        assert_eq!(p.fwd_dist, 4.0);
        assert_eq!(p.bwd_dist, 4.0);
        assert!(p.is_single_bounce());
        assert_abs_diff_eq!(p.depart.azimuth, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.depart.zenith, PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn three_four_five_target() {
        let scene = Scene::new(vec![target(1, [3.0, 4.0, 0.0])], vec![]).unwrap();
        let p = &synthesize_paths(&scene).unwrap()[0];
        assert_abs_diff_eq!(p.fwd_dist, 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.depart.azimuth.to_degrees(), 53.130_102, epsilon = 1e-6);
    }

    #[test]
    fn two_targets_two_paths() {
        let scene = Scene::new(
            vec![target(1, [0.0, 2.0, 0.0]), target(2, [1.0, 3.0, 0.5])],
            vec![],
        )
        .unwrap();
        let ids: Vec<u32> = synthesize_paths(&scene)
            .unwrap()
            .iter()
            .map(|p| p.target_id)
            .collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn injected_paths_are_appended() {
        let clutter = PropagationPath {
            target_id: 9,
            path_id: 1,
            depart: Direction::from_degrees(80.0, 90.0),
            arrive: Direction::from_degrees(100.0, 85.0),
            fwd_dist: 3.0,
            bwd_dist: 4.0,
            fwd_loss: 2.0,
            bwd_loss: 2.0,
            rcs: 0.5,
        };
        let scene = Scene::new(vec![target(1, [0.0, 2.0, 0.0])], vec![clutter.clone()]).unwrap();
        let paths = synthesize_paths(&scene).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[1], clutter);
    }

    #[test]
    fn empty_scene_is_an_error() {
        assert!(matches!(
            synthesize_paths(&Scene::default()),
            Err(Error::EmptyScene)
        ));
    }

    #[test]
    fn invalid_scenes() {
        assert!(Scene::new(vec![target(1, [0.0, -1.0, 0.0])], vec![]).is_err());
        assert!(Scene::new(
            vec![target(1, [0.0, 1.0, 0.0]), target(1, [0.0, 2.0, 0.0])],
            vec![]
        )
        .is_err());
        let mut t = target(1, [0.0, 1.0, 0.0]);
        t.rcs = 0.0;
        assert!(Scene::new(vec![t], vec![]).is_err());
    }

    const HEADER: &str = "target_id,path_id,depart_az_deg,depart_ze_deg,arrive_az_deg,arrive_ze_deg,fwd_dist_m,bwd_dist_m,fwd_loss_db,bwd_loss_db,rcs_m2\n";

    #[test]
    fn header_only_file_is_empty() {
        assert!(read_paths(HEADER.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn single_row_file() {
        let text = format!("{HEADER}3,0,90,90,90,90,5,5,0,0,1\n");
        let paths = read_paths(text.as_bytes()).unwrap();
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert!(p.is_single_bounce());
        assert_eq!(p.fwd_dist, 5.0);
        assert_eq!(p.fwd_loss, 1.0);
        assert_abs_diff_eq!(p.depart.azimuth, PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_distance_row_is_reported() {
        let text = format!("{HEADER}3,0,90,90,90,90,-1,5,0,0,1\n");
        match read_paths(text.as_bytes()) {
            Err(Error::Validation { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_is_reported() {
        let text = format!("{HEADER}3,0,90,90,90,90,5,5,0,0,1\n4,0,abc,90,90,90,5,5,0,0,1\n");
        match read_paths(text.as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            read_paths("a,b\n".as_bytes()),
            Err(Error::Parse { row: 0, .. })
        ));
    }

    #[test]
    fn loss_db_is_converted() {
        let text = format!("{HEADER}3,0,90,90,90,90,5,5,3.0103,10,1\n");
        let p = &read_paths(text.as_bytes()).unwrap()[0];
        assert_abs_diff_eq!(p.fwd_loss, 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(p.bwd_loss, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn ground_truth_single_boresight() {
        let grid = build_grid(100f64.to_radians(), 1.0, 5, 5).unwrap();
        let scene = Scene::new(vec![target(1, [0.0, 4.0, 0.0])], vec![]).unwrap();
        let dm = ground_truth_depth(&scene, &grid, 18.95);
        for r in 0..5 {
            for c in 0..5 {
                let expect = if (r, c) == (2, 2) { 4.0 } else { 18.95 };
                assert_eq!(dm.get(r, c), expect);
            }
        }
    }

    #[test]
    fn ground_truth_keeps_nearest() {
        let grid = build_grid(100f64.to_radians(), 1.0, 5, 5).unwrap();
        let scene = Scene::new(
            vec![target(1, [0.0, 5.0, 0.0]), target(2, [0.0, 3.0, 0.0])],
            vec![],
        )
        .unwrap();
        assert_eq!(ground_truth_depth(&scene, &grid, 20.0).get(2, 2), 3.0);
    }

    #[test]
    fn ground_truth_boundary_goes_to_lower_index() {
        let grid = build_grid(1.4, 1.0, 3, 3).unwrap();
        let t = (0.7f64).tan();
        // halfway between columns 0 and 1 in image-plane coordinates
        let (x0, _) = grid.lattice_point(1, 0);
        let (x1, _) = grid.lattice_point(1, 1);
        assert_eq!(x0, -t);
        assert_eq!(x1, 0.0);
        let x = -t / 2.0;
        let scene = Scene::new(vec![target(1, [x * 4.0, 4.0, 0.0])], vec![]).unwrap();
        let dm = ground_truth_depth(&scene, &grid, 20.0);
        assert_eq!(dm.get(1, 0), 4.0);
        assert_eq!(dm.get(1, 1), 20.0);
        // the same point nudged right lands in column 1
        let scene = Scene::new(vec![target(1, [x * 4.0 + 1e-9, 4.0, 0.0])], vec![]).unwrap();
        assert_eq!(ground_truth_depth(&scene, &grid, 20.0).get(1, 1), 4.0);
    }

    fn arb_path() -> impl Strategy<Value = PropagationPath> {
        (
            (0u32..100, 0u32..10),
            (
                -179.0f64..180.0,
                0.0f64..180.0,
                -179.0f64..180.0,
                0.0f64..180.0,
            ),
            (
                0.01f64..50.0,
                0.01f64..50.0,
                0.0f64..30.0,
                0.0f64..30.0,
                0.001f64..10.0,
            ),
        )
            .prop_map(|((t, l), (a1, z1, a2, z2), (d1, d2, l1, l2, rcs))| {
                PropagationPath {
                    target_id: t,
                    path_id: l,
                    depart: Direction::from_degrees(a1, z1),
                    arrive: Direction::from_degrees(a2, z2),
                    fwd_dist: d1,
                    bwd_dist: d2,
                    fwd_loss: db_to_linear(l1),
                    bwd_loss: db_to_linear(l2),
                    rcs,
                }
            })
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(1.0)
    }

    proptest! {
        #[test]
        fn path_csv_round_trip(paths in proptest::collection::vec(arb_path(), 0..8)) {
            let mut buf = Vec::new();
            write_paths(&mut buf, &paths).unwrap();
            let back = read_paths(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), paths.len());
            for (a, b) in paths.iter().zip(&back) {
                prop_assert_eq!(a.target_id, b.target_id);
                prop_assert_eq!(a.path_id, b.path_id);
                prop_assert!(close(a.depart.azimuth, b.depart.azimuth));
                prop_assert!(close(a.depart.zenith, b.depart.zenith));
                prop_assert!(close(a.arrive.azimuth, b.arrive.azimuth));
                prop_assert!(close(a.arrive.zenith, b.arrive.zenith));
                prop_assert_eq!(a.fwd_dist, b.fwd_dist);
                prop_assert_eq!(a.bwd_dist, b.bwd_dist);
                prop_assert!(close(a.fwd_loss, b.fwd_loss));
                prop_assert!(close(a.bwd_loss, b.bwd_loss));
                prop_assert_eq!(a.rcs, b.rcs);
            }
        }

        #[test]
        fn synthesized_paths_are_single_bounce(
            x in -5.0f64..5.0, y in 0.1f64..10.0, z in -5.0f64..5.0
        ) {
            let scene = Scene::new(vec![target(1, [x, y, z])], vec![]).unwrap();
            let p = &synthesize_paths(&scene).unwrap()[0];
            let r = (x * x + y * y + z * z).sqrt();
            prop_assert_eq!(p.depart, p.arrive);
            prop_assert!((p.fwd_dist - r).abs() < 1e-12);
            prop_assert_eq!(p.fwd_dist, p.bwd_dist);
            let u = crate::geometry::angles_to_direction(p.depart);
            prop_assert!((u.x - x / r).abs() < 1e-12 && (u.y - y / r).abs() < 1e-12 && (u.z - z / r).abs() < 1e-12);
        }

        #[test]
        fn adding_a_target_never_increases_depth(
            pts in proptest::collection::vec((-6.0f64..6.0, 0.2f64..8.0, -4.0f64..4.0), 1..6),
            extra in (-6.0f64..6.0, 0.2f64..8.0, -4.0f64..4.0),
        ) {
            let grid = build_grid(100f64.to_radians(), 4.0 / 3.0, 8, 6).unwrap();
            let targets: Vec<Target> = pts.iter().enumerate()
                .map(|(i, &(x, y, z))| target(i as u32, [x, y, z])).collect();
            let before = ground_truth_depth(&Scene::new(targets.clone(), vec![]).unwrap(), &grid, 19.0);
            let mut more = targets;
            more.push(target(99, [extra.0, extra.1, extra.2]));
            let after = ground_truth_depth(&Scene::new(more, vec![]).unwrap(), &grid, 19.0);
            for (a, b) in after.values().iter().zip(before.values()) {
                prop_assert!(a <= b);
            }
        }
    }
}
