//! `<name>.png` (8-bit class index) + `<name>.json` sidecar.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::GrayImage;
use serde::{Deserialize, Serialize};

use super::{TerrainClass, WorldModel};
use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSidecar {
    pub meters_per_cell: f64,
    pub classes: BTreeMap<u8, TerrainClass>,
    pub seed: u64,
    pub safe_fraction: f64,
}

fn pair_paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("png"), base.with_extension("json"))
}

impl WorldModel {
    pub fn sidecar(&self) -> WorldSidecar {
        WorldSidecar {
            meters_per_cell: self.meters_per_cell,
            classes: TerrainClass::ALL.iter().map(|c| (c.index(), *c)).collect(),
            seed: self.seed,
            safe_fraction: self.safe_fraction,
        }
    }

    /// Writes `base.png` and `base.json`; any extension on `base` is replaced.
    pub fn save(&self, base: impl AsRef<Path>) -> Result<()> {
        let (png, json) = pair_paths(base.as_ref());
        let (w, h) = self.labels.dims();
        let raw: Vec<u8> = self.labels.as_slice().iter().map(|c| c.index()).collect();
        let img = GrayImage::from_raw(w as u32, h as u32, raw).expect("buffer sized from grid");
        img.save(&png).map_err(|e| Error::format(&png, e))?;
        let text = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        std::fs::write(&json, text + "\n").map_err(|e| Error::io(&json, e))
    }

    pub fn load(base: impl AsRef<Path>) -> Result<Self> {
        let (png, json) = pair_paths(base.as_ref());
        let text = std::fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let sidecar: WorldSidecar =
            serde_json::from_str(&text).map_err(|e| Error::format(&json, e))?;
        let img = image::open(&png).map_err(|e| Error::format(&png, e))?;
        let img = img
            .as_luma8()
            .ok_or_else(|| Error::format(&png, "expected 8-bit single-channel PNG"))?;
        let (w, h) = img.dimensions();
        let labels = img
            .as_raw()
            .iter()
            .map(|&i| {
                sidecar
                    .classes
                    .get(&i)
                    .copied()
                    .ok_or_else(|| Error::format(&png, format!("class index {i} not in sidecar")))
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = Grid::from_vec(w as usize, h as usize, labels).expect("png buffer matches dims");
        WorldModel::new(labels, sidecar.meters_per_cell, sidecar.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_world, GeneratorParams};

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("demo");
        let w = generate_world(11, 64.0, 48.0, 0.5, &GeneratorParams::default()).unwrap();
        w.save(&base).unwrap();
        let back = WorldModel::load(&base).unwrap();
        assert_eq!(back, w);

        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
                .unwrap();
        for key in ["meters_per_cell", "classes", "seed", "safe_fraction"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json["classes"]["3"], "BUILDING");
    }

    #[test]
    fn unknown_class_index_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("bad");
        let w = WorldModel::uniform(TerrainClass::Grass, 4.0, 4.0, 1.0).unwrap();
        w.save(&base).unwrap();
        GrayImage::from_pixel(4, 4, image::Luma([42]))
            .save(base.with_extension("png"))
            .unwrap();
        assert!(matches!(WorldModel::load(&base), Err(Error::Format { .. })));
    }
}
