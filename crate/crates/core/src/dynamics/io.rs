use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::evolve::{Trajectory, TrajectoryMeta};
use super::integrator::IntegratorLog;
use super::WaveState;
use crate::operators::BoxGeometry;
use crate::{Error, Result, C64};

pub const MANIFEST_FILE: &str = "trajectory.json";
pub const AMPLITUDE_FILE: &str = "amplitudes.bin";

/// JSON manifest describing the binary snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub format: String,
    pub geometry: BoxGeometry,
    pub sites: usize,
    pub times: Vec<f64>,
    /// Little-endian `f64` pairs `(re, im)`, snapshot-major then site-major.
    pub binary_file: String,
    pub sha256: String,
    pub meta: TrajectoryMeta,
    pub log: IntegratorLog,
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Exports snapshots as a binary array plus manifest; returns the manifest path.
pub fn export_trajectory(trajectory: &Trajectory, dir: &Path) -> Result<PathBuf> {
    let first = trajectory
        .snapshots
        .first()
        .ok_or_else(|| Error::param("trajectory", "no snapshots to export"))?;
    let mut bytes = Vec::with_capacity(trajectory.snapshots.len() * first.amplitudes.len() * 16);
    for s in &trajectory.snapshots {
        for a in &s.amplitudes {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
    }
    let manifest = TrajectoryManifest {
        format: "latdyn-trajectory-v1".into(),
        geometry: first.geometry,
        sites: first.amplitudes.len(),
        times: trajectory.times(),
        binary_file: AMPLITUDE_FILE.into(),
        sha256: hex(&Sha256::digest(&bytes)),
        meta: trajectory.meta.clone(),
        log: trajectory.log.clone(),
    };
    write_atomic(&dir.join(AMPLITUDE_FILE), &bytes)?;
    let path = dir.join(MANIFEST_FILE);
    write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(path)
}

/// Reads a trajectory written by [`export_trajectory`], verifying the checksum.
pub fn load_trajectory(dir: &Path) -> Result<Trajectory> {
    let manifest: TrajectoryManifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    let bytes = fs::read(dir.join(&manifest.binary_file))?;
    if hex(&Sha256::digest(&bytes)) != manifest.sha256 {
        return Err(Error::validation(manifest.binary_file.clone(), "checksum mismatch"));
    }
    let expected = manifest.times.len() * manifest.sites * 16;
    if bytes.len() != expected {
        return Err(Error::validation(
            manifest.binary_file.clone(),
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let mut values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let snapshots = manifest
        .times
        .iter()
        .map(|&t| {
            let amplitudes = (0..manifest.sites)
                .map(|_| {
                    let re = values.next().expect("length checked");
                    let im = values.next().expect("length checked");
                    C64::new(re, im)
                })
                .collect();
            WaveState {
                geometry: manifest.geometry,
                amplitudes,
                t,
            }
        })
        .collect();
    Ok(Trajectory {
        snapshots,
        steps: None,
        log: manifest.log,
        meta: manifest.meta,
    })
}
