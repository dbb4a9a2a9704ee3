//! File formats: 16-bit PGM and CSV depth maps, the binary `Z` dump, and
//! codebook exports.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::codebook::Codebook;
use crate::depthmap::DepthMap;
use crate::waveform::SensingMatrix;
use crate::{Error, Result};

pub const DEFAULT_METERS_PER_LEVEL: f64 = 1e-3;

const DUMP_MAGIC: &[u8; 4] = b"RISZ";
const DUMP_HEADER_LEN: usize = 32;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a binary 16-bit PGM. Each level is `meters_per_level` meters;
/// depths beyond the 16-bit range saturate.
pub fn write_pgm<W: Write>(mut w: W, dm: &DepthMap, meters_per_level: f64) -> std::io::Result<()> {
    write!(
        w,
        "P5\n# meters_per_level {meters_per_level}\n{} {}\n65535\n",
        dm.cols(),
        dm.rows()
    )?;
    let mut buf = Vec::with_capacity(dm.values().len() * 2);
    for &d in dm.values() {
        let level = (d / meters_per_level).round().clamp(0.0, 65535.0) as u16;
        buf.extend_from_slice(&level.to_be_bytes());
    }
    w.write_all(&buf)
}

pub fn save_pgm(path: &Path, dm: &DepthMap, meters_per_level: f64) -> Result<()> {
    let mut w = create(path)?;
    write_pgm(&mut w, dm, meters_per_level).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

fn pgm_error(msg: impl Into<String>) -> Error {
    Error::BadDump(format!("PGM: {}", msg.into()))
}

/// Reads a PGM written by [`write_pgm`] and returns depths in meters.
pub fn read_pgm<R: BufRead>(mut r: R) -> Result<DepthMap> {
    let mut meters_per_level = DEFAULT_METERS_PER_LEVEL;
    let mut tokens: Vec<String> = Vec::new();
    let mut line = String::new();
    while tokens.len() < 4 {
        line.clear();
        let n = r
            .read_line(&mut line)
            .map_err(|e| pgm_error(e.to_string()))?;
        if n == 0 {
            return Err(pgm_error("truncated header"));
        }
        if let Some(comment) = line.trim().strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("meters_per_level") {
                meters_per_level = v
                    .trim()
                    .parse()
                    .map_err(|_| pgm_error("bad meters_per_level"))?;
            }
            continue;
        }
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    if tokens[0] != "P5" || tokens[3] != "65535" {
        return Err(pgm_error("expected a 16-bit P5 image"));
    }
    let cols: usize = tokens[1].parse().map_err(|_| pgm_error("bad width"))?;
    let rows: usize = tokens[2].parse().map_err(|_| pgm_error("bad height"))?;
    let mut raw = vec![0u8; rows * cols * 2];
    r.read_exact(&mut raw)
        .map_err(|_| pgm_error("truncated samples"))?;
    let values = raw
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 * meters_per_level)
        .collect();
    DepthMap::new(rows, cols, values)
}

pub fn load_pgm(path: &Path) -> Result<DepthMap> {
    read_pgm(open(path)?)
}

/// One CSV row per image row, no header. Values use the shortest
/// round-tripping decimal form.
pub fn write_depth_csv<W: Write>(mut w: W, dm: &DepthMap) -> std::io::Result<()> {
    for r in 0..dm.rows() {
        let row: Vec<String> = (0..dm.cols()).map(|c| dm.get(r, c).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn save_depth_csv(path: &Path, dm: &DepthMap) -> Result<()> {
    let mut w = create(path)?;
    write_depth_csv(&mut w, dm).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn read_depth_csv<R: BufRead>(r: R) -> Result<DepthMap> {
    let mut values = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            row: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                row: i + 1,
                message: e.to_string(),
            })?;
        if *cols.get_or_insert(row.len()) != row.len() {
            return Err(Error::Parse {
                row: i + 1,
                message: "ragged row".into(),
            });
        }
        values.extend(row);
        rows += 1;
    }
    DepthMap::new(rows, cols.unwrap_or(0), values)
}

pub fn load_depth_csv(path: &Path) -> Result<DepthMap> {
    read_depth_csv(open(path)?)
}

/// Binary dump of `Z`: a 32-byte header (`"RISZ"`, u32 `M_sample`, u32 `M`,
/// u64 seed, zero padding) followed by little-endian `f64` pairs
/// `(re, im)` in column-major order.
pub fn write_z_dump<W: Write>(mut w: W, z: &SensingMatrix) -> std::io::Result<()> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    header[..4].copy_from_slice(DUMP_MAGIC);
    header[4..8].copy_from_slice(&(z.m_sample() as u32).to_le_bytes());
    header[8..12].copy_from_slice(&(z.m() as u32).to_le_bytes());
    header[12..20].copy_from_slice(&z.seed.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(z.as_column_major().len() * 16);
    for c in z.as_column_major() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn save_z_dump(path: &Path, z: &SensingMatrix) -> Result<()> {
    let mut w = create(path)?;
    write_z_dump(&mut w, z).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn read_z_dump<R: Read>(mut r: R) -> Result<SensingMatrix> {
    let mut header = [0u8; DUMP_HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|_| Error::BadDump("truncated header".into()))?;
    if &header[..4] != DUMP_MAGIC {
        return Err(Error::BadDump("missing RISZ magic".into()));
    }
    let m_sample = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let m = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)
        .map_err(|e| Error::BadDump(e.to_string()))?;
    let expected = m_sample * m * 16;
    if raw.len() != expected {
        return Err(Error::BadDump(format!(
            "payload is {} bytes, header implies {expected}",
            raw.len()
        )));
    }
    let data = raw
        .chunks_exact(16)
        .map(|b| {
            Complex64::new(
                f64::from_le_bytes(b[..8].try_into().unwrap()),
                f64::from_le_bytes(b[8..].try_into().unwrap()),
            )
        })
        .collect();
    SensingMatrix::from_column_major(m_sample, m, data, seed)
}

pub fn load_z_dump(path: &Path) -> Result<SensingMatrix> {
    read_z_dump(open(path)?)
}

/// `m,az_deg,ze_deg` per codebook entry (1-based `m`).
pub fn write_codebook_csv<W: Write>(w: W, codebook: &Codebook) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let write_err = |e: csv::Error| Error::BadDump(format!("codebook CSV: {e}"));
    out.write_record(["m", "az_deg", "ze_deg"])
        .map_err(write_err)?;
    for (i, d) in codebook.grid().directions().iter().enumerate() {
        out.write_record([
            (i + 1).to_string(),
            d.azimuth.to_degrees().to_string(),
            d.zenith.to_degrees().to_string(),
        ])
        .map_err(write_err)?;
    }
    out.flush().map_err(|e| Error::BadDump(e.to_string()))
}

pub fn save_codebook_csv(path: &Path, codebook: &Codebook) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_codebook_csv(BufWriter::new(file), codebook)
}

/// Phase table `arg ψ_m[n]` in radians, `N × M` column-major, `f64` LE.
pub fn write_phase_table<W: Write>(mut w: W, codebook: &Codebook) -> std::io::Result<()> {
    for m in 0..codebook.len() {
        let bytes: Vec<u8> = codebook
            .phases(m)
            .iter()
            .flat_map(|p| p.to_le_bytes())
            .collect();
        w.write_all(&bytes)?;
    }
    Ok(())
}

pub fn save_phase_table(path: &Path, codebook: &Codebook) -> Result<()> {
    let mut w = create(path)?;
    write_phase_table(&mut w, codebook).map_err(|e| Error::io(path, e))?;
    finish(w, path)
}
