use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::grid::{BoundaryGrid, GridKind, VolumeGrid};
use crate::error::{Error, Result};

/// Directory of grids stored as JSON (nodes, weights, metadata), plus a
/// table of boundary calibration constants.
#[derive(Clone, Debug)]
pub struct GridCache {
    dir: PathBuf,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn file_name(id: &str) -> String {
    let s: String = id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect();
    format!("{s}.json")
}

const CALIBRATIONS: &str = "calibrations.json";

impl GridCache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref()).map_err(io)?;
        Ok(GridCache { dir: dir.as_ref().to_path_buf() })
    }

    fn load_or<T: Serialize + DeserializeOwned>(&self, id: &str, build: impl FnOnce() -> Result<T>) -> Result<T> {
        let path = self.dir.join(file_name(id));
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(v) = serde_json::from_str(&text) {
                return Ok(v);
            }
        }
        let v = build()?;
        fs::write(&path, serde_json::to_string(&v).map_err(io)?).map_err(io)?;
        Ok(v)
    }

    pub fn volume(&self, n: usize, kind: GridKind, resolution: usize) -> Result<VolumeGrid> {
        let build = || match kind {
            GridKind::Full => VolumeGrid::ball(n, resolution),
            GridKind::Meridian => VolumeGrid::meridian(n, resolution),
        };
        let id = build_id_volume(n, kind, resolution);
        self.load_or(&id, build)
    }

    pub fn boundary(&self, n: usize, kind: GridKind, resolution: usize, delta_cap: f64) -> Result<BoundaryGrid> {
        let build = || match kind {
            GridKind::Full => BoundaryGrid::sphere(n, resolution, delta_cap),
            GridKind::Meridian => BoundaryGrid::meridian(n, resolution, delta_cap),
        };
        let id = build_id_boundary(n, kind, resolution, delta_cap);
        let g = self.load_or(&id, build)?;
        self.store_calibration(&g)?;
        Ok(g)
    }

    fn calibrations(&self) -> BTreeMap<String, f64> {
        fs::read_to_string(self.dir.join(CALIBRATIONS))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    /// Records the calibration constant of a boundary grid under
    /// (n, resolution, δ_cap).
    pub fn store_calibration(&self, g: &BoundaryGrid) -> Result<()> {
        let mut table = self.calibrations();
        table.insert(calibration_key(g.n, g.resolution, g.delta_cap), g.calibration);
        let text = serde_json::to_string_pretty(&table).map_err(io)?;
        fs::write(self.dir.join(CALIBRATIONS), text).map_err(io)
    }

    pub fn calibration(&self, n: usize, resolution: usize, delta_cap: f64) -> Option<f64> {
        self.calibrations().get(&calibration_key(n, resolution, delta_cap)).copied()
    }
}

fn calibration_key(n: usize, resolution: usize, delta_cap: f64) -> String {
    format!("n={n},res={resolution},cap={delta_cap}")
}

fn build_id_volume(n: usize, kind: GridKind, resolution: usize) -> String {
    let k = if kind == GridKind::Full { "ball" } else { "ball-meridian" };
    format!("{k}(n={n},res={resolution})")
}

fn build_id_boundary(n: usize, kind: GridKind, resolution: usize, delta_cap: f64) -> String {
    let k = if kind == GridKind::Full { "sphere" } else { "sphere-meridian" };
    format!("{k}(n={n},res={resolution},cap={delta_cap})")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_the_cache() {
        let dir = std::env::temp_dir().join(format!("hpot-cache-{}", std::process::id()));
        let cache = GridCache::open(&dir).unwrap();
        let a = cache.volume(1, GridKind::Meridian, 6).unwrap();
        let b = cache.volume(1, GridKind::Meridian, 6).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.id(), build_id_volume(1, GridKind::Meridian, 6));
        let g = cache.boundary(1, GridKind::Meridian, 8, 0.05).unwrap();
        assert_eq!(g.id(), build_id_boundary(1, GridKind::Meridian, 8, 0.05));
        assert_eq!(cache.calibration(1, 8, 0.05), Some(g.calibration));
        fs::remove_dir_all(dir).unwrap();
    }
}
