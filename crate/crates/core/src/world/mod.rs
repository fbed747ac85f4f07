//! Labeled terrain worlds and the nadir camera that looks at them.
//!
//! World coordinates are meters with the origin at the north-west corner of
//! the raster: `x` grows with columns (east) and `y` grows with rows (south),
//! so image axes and world axes coincide for the north-aligned camera.

mod generate;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{image_center, Grid};

pub use generate::{generate_world, GeneratorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
#[repr(u8)]
pub enum TerrainClass {
    Grass = 0,
    Field = 1,
    Water = 2,
    Building = 3,
    Road = 4,
    Tree = 5,
    Vehicle = 6,
    Person = 7,
}

impl TerrainClass {
    pub const ALL: [TerrainClass; 8] = [
        TerrainClass::Grass,
        TerrainClass::Field,
        TerrainClass::Water,
        TerrainClass::Building,
        TerrainClass::Road,
        TerrainClass::Tree,
        TerrainClass::Vehicle,
        TerrainClass::Person,
    ];

    #[inline]
    pub fn is_safe(self) -> bool {
        matches!(self, TerrainClass::Grass | TerrainClass::Field)
    }

    #[inline]
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }

    pub fn tag(self) -> &'static str {
        match self {
            TerrainClass::Grass => "GRASS",
            TerrainClass::Field => "FIELD",
            TerrainClass::Water => "WATER",
            TerrainClass::Building => "BUILDING",
            TerrainClass::Road => "ROAD",
            TerrainClass::Tree => "TREE",
            TerrainClass::Vehicle => "VEHICLE",
            TerrainClass::Person => "PERSON",
        }
    }

    /// Display color used when a label image has to travel as RGB.
    pub fn rgb(self) -> [u8; 3] {
        match self {
            TerrainClass::Grass => [86, 160, 60],
            TerrainClass::Field => [176, 190, 90],
            TerrainClass::Water => [40, 90, 170],
            TerrainClass::Building => [150, 150, 150],
            TerrainClass::Road => [60, 60, 60],
            TerrainClass::Tree => [20, 90, 30],
            TerrainClass::Vehicle => [200, 40, 40],
            TerrainClass::Person => [240, 200, 40],
        }
    }
}

/// Camera view expressed as terrain classes, one per pixel.
pub type LabelImage = Grid<TerrainClass>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    /// Horizontal field of view in radians.
    pub horizontal_fov: f64,
    pub image_width: usize,
    pub image_height: usize,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            horizontal_fov: std::f64::consts::FRAC_PI_2,
            image_width: 128,
            image_height: 128,
        }
    }
}

impl CameraModel {
    pub fn new(horizontal_fov: f64, image_width: usize, image_height: usize) -> Result<Self> {
        let cam = Self {
            horizontal_fov,
            image_width,
            image_height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizontal_fov > 0.0 && self.horizontal_fov < std::f64::consts::PI) {
            return Err(Error::param(format!(
                "horizontal_fov must lie in (0, pi), got {}",
                self.horizontal_fov
            )));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::param("camera image dimensions must be positive"));
        }
        Ok(())
    }

    /// Ground width covered by the image at altitude `z`.
    pub fn footprint_width(&self, z: f64) -> f64 {
        2.0 * z * (self.horizontal_fov / 2.0).tan()
    }

    /// Ground meters per pixel at altitude `z` (square pixels).
    pub fn meters_per_pixel(&self, z: f64) -> f64 {
        self.footprint_width(z) / self.image_width as f64
    }

    /// Half the image diagonal in pixels; the largest useful focus radius.
    pub fn half_diagonal_px(&self) -> f64 {
        (self.image_width as f64).hypot(self.image_height as f64) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    labels: Grid<TerrainClass>,
    meters_per_cell: f64,
    seed: u64,
    safe_fraction: f64,
}

impl WorldModel {
    pub fn new(labels: Grid<TerrainClass>, meters_per_cell: f64, seed: u64) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::param("world raster must be non-empty"));
        }
        if !(meters_per_cell > 0.0 && meters_per_cell.is_finite()) {
            return Err(Error::param(format!(
                "meters_per_cell must be positive, got {meters_per_cell}"
            )));
        }
        let safe = labels.as_slice().iter().filter(|c| c.is_safe()).count();
        let safe_fraction = safe as f64 / labels.len() as f64;
        Ok(Self {
            labels,
            meters_per_cell,
            seed,
            safe_fraction,
        })
    }

    /// Uniform world of a single class; handy for scenarios and tests.
    pub fn uniform(
        class: TerrainClass,
        width_m: f64,
        height_m: f64,
        meters_per_cell: f64,
    ) -> Result<Self> {
        let (cols, rows) = cells_for(width_m, height_m, meters_per_cell)?;
        Self::new(Grid::filled(cols, rows, class), meters_per_cell, 0)
    }

    pub fn labels(&self) -> &Grid<TerrainClass> {
        &self.labels
    }

    pub fn meters_per_cell(&self) -> f64 {
        self.meters_per_cell
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn safe_fraction(&self) -> f64 {
        self.safe_fraction
    }

    pub fn width_m(&self) -> f64 {
        self.labels.width() as f64 * self.meters_per_cell
    }

    pub fn height_m(&self) -> f64 {
        self.labels.height() as f64 * self.meters_per_cell
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x < self.width_m() && y < self.height_m()
    }

    /// Class at a world point; anything outside the raster reads as water.
    #[inline]
    pub fn class_at(&self, x: f64, y: f64) -> TerrainClass {
        let col = (x / self.meters_per_cell).floor();
        let row = (y / self.meters_per_cell).floor();
        if col < 0.0 || row < 0.0 {
            return TerrainClass::Water;
        }
        let (col, row) = (col as usize, row as usize);
        if col >= self.labels.width() || row >= self.labels.height() {
            return TerrainClass::Water;
        }
        *self.labels.get(col, row)
    }

    /// Nearest-neighbor nadir view centered at `(x, y)` from altitude `z`.
    pub fn render_view(&self, cam: &CameraModel, x: f64, y: f64, z: f64) -> Result<LabelImage> {
        if !(z > 0.0) {
            return Err(Error::param(format!("altitude must be positive, got {z}")));
        }
        cam.validate()?;
        let mpp = cam.meters_per_pixel(z);
        let (cu, cv) = image_center(cam.image_width, cam.image_height);
        let xs: Vec<f64> = (0..cam.image_width)
            .map(|u| x + (u as f64 - cu) * mpp)
            .collect();
        Ok(Grid::from_fn(cam.image_width, cam.image_height, |u, v| {
            let gy = y + (v as f64 - cv) * mpp;
            self.class_at(xs[u], gy)
        }))
    }

    /// True iff every cell whose center lies within `radius` of `(x, y)` is
    /// safe and the disc lies entirely inside the world.
    pub fn ground_truth_safe_disc(&self, x: f64, y: f64, radius: f64) -> bool {
        if !(radius > 0.0) {
            return false;
        }
        if x - radius < 0.0
            || y - radius < 0.0
            || x + radius > self.width_m()
            || y + radius > self.height_m()
        {
            return false;
        }
        let mpc = self.meters_per_cell;
        let c0 = ((x - radius) / mpc - 0.5).floor().max(0.0) as usize;
        let r0 = ((y - radius) / mpc - 0.5).floor().max(0.0) as usize;
        let c1 = (((x + radius) / mpc - 0.5).ceil() as usize).min(self.labels.width() - 1);
        let r1 = (((y + radius) / mpc - 0.5).ceil() as usize).min(self.labels.height() - 1);
        let r2 = radius * radius;
        for row in r0..=r1 {
            let cy = (row as f64 + 0.5) * mpc - y;
            for col in c0..=c1 {
                let cx = (col as f64 + 0.5) * mpc - x;
                if cx * cx + cy * cy <= r2 && !self.labels.get(col, row).is_safe() {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn cells_for(width_m: f64, height_m: f64, meters_per_cell: f64) -> Result<(usize, usize)> {
    if !(meters_per_cell > 0.0 && meters_per_cell.is_finite()) {
        return Err(Error::param(format!(
            "meters_per_cell must be positive, got {meters_per_cell}"
        )));
    }
    if !(width_m > 0.0 && height_m > 0.0 && width_m.is_finite() && height_m.is_finite()) {
        return Err(Error::param(format!(
            "world dimensions must be positive, got {width_m} x {height_m}"
        )));
    }
    let cols = (width_m / meters_per_cell).round() as usize;
    let rows = (height_m / meters_per_cell).round() as usize;
    if cols == 0 || rows == 0 {
        return Err(Error::param("world is smaller than one cell"));
    }
    Ok((cols, rows))
}
