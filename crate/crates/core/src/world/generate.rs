use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cells_for, TerrainClass, WorldModel};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Target area fraction per clutter class. Each value lies in `[0, 1]`;
/// shapes of that class are stamped until roughly that fraction of the
/// world has been painted (overlaps make the final numbers approximate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub building_density: f64,
    pub road_density: f64,
    pub water_density: f64,
    pub tree_density: f64,
    pub vehicle_density: f64,
    pub person_density: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            building_density: 0.24,
            road_density: 0.10,
            water_density: 0.04,
            tree_density: 0.08,
            vehicle_density: 0.01,
            person_density: 0.002,
        }
    }
}

impl GeneratorParams {
    /// No clutter at all: the world is entirely grass and field.
    pub fn none() -> Self {
        Self {
            building_density: 0.0,
            road_density: 0.0,
            water_density: 0.0,
            tree_density: 0.0,
            vehicle_density: 0.0,
            person_density: 0.0,
        }
    }

    fn densities(&self) -> [(&'static str, f64); 6] {
        [
            ("building_density", self.building_density),
            ("road_density", self.road_density),
            ("water_density", self.water_density),
            ("tree_density", self.tree_density),
            ("vehicle_density", self.vehicle_density),
            ("person_density", self.person_density),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, d) in self.densities() {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::param(format!("{name} must lie in [0, 1], got {d}")));
            }
        }
        Ok(())
    }
}

/// Procedural terrain: a safe grass/field base with seeded unsafe clutter.
pub fn generate_world(
    seed: u64,
    width_m: f64,
    height_m: f64,
    meters_per_cell: f64,
    clutter: &GeneratorParams,
) -> Result<WorldModel> {
    clutter.validate()?;
    let (cols, rows) = cells_for(width_m, height_m, meters_per_cell)?;
    let mut painter = Painter {
        grid: Grid::filled(cols, rows, TerrainClass::Grass),
        mpc: meters_per_cell,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let area = width_m * height_m;

    // Field patches only vary the safe base layer.
    let fields = (area / 12_000.0).ceil() as usize;
    for _ in 0..fields {
        let (x, y) = painter.random_point();
        let w = painter.rng.random_range(20.0..90.0);
        let h = painter.rng.random_range(20.0..90.0);
        painter.rect(x, y, w, h, TerrainClass::Field);
    }

    painter.fill_to(clutter.water_density, |p| {
        let (x, y) = p.random_point();
        p.blob(x, y, 6.0, 22.0, TerrainClass::Water)
    });
    painter.fill_to(clutter.tree_density, |p| {
        let (x, y) = p.random_point();
        p.blob(x, y, 3.0, 10.0, TerrainClass::Tree)
    });
    painter.fill_to(clutter.road_density, |p| p.road());
    painter.fill_to(clutter.building_density, |p| {
        p.building_block()
    });
    painter.fill_to(clutter.vehicle_density, |p| {
        let (x, y) = p.random_point();
        let (w, h) = if p.rng.random_bool(0.5) { (2.0, 4.5) } else { (4.5, 2.0) };
        p.rect(x, y, w, h, TerrainClass::Vehicle)
    });
    painter.fill_to(clutter.person_density, |p| {
        let (x, y) = p.random_point();
        p.rect(x, y, 0.5, 0.5, TerrainClass::Person)
    });

    WorldModel::new(painter.grid, meters_per_cell, seed)
}

struct Painter {
    grid: Grid<TerrainClass>,
    mpc: f64,
    rng: ChaCha8Rng,
}

impl Painter {
    fn width_m(&self) -> f64 {
        self.grid.width() as f64 * self.mpc
    }

    fn height_m(&self) -> f64 {
        self.grid.height() as f64 * self.mpc
    }

    fn random_point(&mut self) -> (f64, f64) {
        let x = self.rng.random_range(0.0..self.width_m());
        let y = self.rng.random_range(0.0..self.height_m());
        (x, y)
    }

    /// Repeats `stamp` until roughly `density` of all cells have been
    /// painted. `stamp` returns how many cells it changed.
    fn fill_to(&mut self, density: f64, mut stamp: impl FnMut(&mut Self) -> usize) {
        if density <= 0.0 {
            return;
        }
        let target = (density * self.grid.len() as f64).ceil() as usize;
        let mut painted = 0usize;
        let mut attempts = 0usize;
        // Saturated worlds stop via the attempt cap.
        while painted < target && attempts < 200_000 {
            painted += stamp(self);
            attempts += 1;
        }
    }

    /// Paints cells whose centers satisfy `inside` within a meter-space
    /// bounding box. Returns the number of cells that changed class.
    fn paint_box(
        &mut self,
        bbox: (f64, f64, f64, f64),
        class: TerrainClass,
        inside: impl Fn(f64, f64) -> bool,
    ) -> usize {
        let (x0, y0, x1, y1) = bbox;
        let cols = self.grid.width() as f64;
        let rows = self.grid.height() as f64;
        let c0 = (x0 / self.mpc).floor().clamp(0.0, cols) as usize;
        let c1 = (x1 / self.mpc).ceil().clamp(0.0, cols) as usize;
        let r0 = (y0 / self.mpc).floor().clamp(0.0, rows) as usize;
        let r1 = (y1 / self.mpc).ceil().clamp(0.0, rows) as usize;
        let mut changed = 0;
        for row in r0..r1 {
            let cy = (row as f64 + 0.5) * self.mpc;
            for col in c0..c1 {
                let cx = (col as f64 + 0.5) * self.mpc;
                if inside(cx, cy) {
                    let cell = self.grid.get_mut(col, row);
                    if *cell != class {
                        *cell = class;
                        changed += 1;
                    }
                }
            }
        }
        changed
    }

    /// Axis-aligned rectangle with its north-west corner at `(x, y)`.
    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, class: TerrainClass) -> usize {
        self.paint_box((x, y, x + w, y + h), class, |cx, cy| {
            cx >= x && cx < x + w && cy >= y && cy < y + h
        })
    }

    fn disc(&mut self, x: f64, y: f64, r: f64, class: TerrainClass) -> usize {
        let r2 = r * r;
        self.paint_box((x - r, y - r, x + r, y + r), class, |cx, cy| {
            (cx - x).powi(2) + (cy - y).powi(2) <= r2
        })
    }

    /// Irregular blob: a central disc plus a few overlapping satellites.
    fn blob(&mut self, x: f64, y: f64, r_min: f64, r_max: f64, class: TerrainClass) -> usize {
        let r = self.rng.random_range(r_min..r_max);
        let mut changed = self.disc(x, y, r, class);
        let satellites = self.rng.random_range(0..4);
        for _ in 0..satellites {
            let a = self.rng.random_range(0.0..std::f64::consts::TAU);
            let d = self.rng.random_range(0.3..0.9) * r;
            let rs = self.rng.random_range(0.4..0.8) * r;
            changed += self.disc(x + d * a.cos(), y + d * a.sin(), rs, class);
        }
        changed
    }

    fn segment(&mut self, a: (f64, f64), b: (f64, f64), half_width: f64, class: TerrainClass) -> usize {
        let bbox = (
            a.0.min(b.0) - half_width,
            a.1.min(b.1) - half_width,
            a.0.max(b.0) + half_width,
            a.1.max(b.1) + half_width,
        );
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let hw2 = half_width * half_width;
        self.paint_box(bbox, class, |cx, cy| {
            let t = if len2 > 0.0 {
                (((cx - a.0) * dx + (cy - a.1) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let px = a.0 + t * dx - cx;
            let py = a.1 + t * dy - cy;
            px * px + py * py <= hw2
        })
    }

    /// Polyline road entering from one world edge and wandering across.
    fn road(&mut self) -> usize {
        let (w, h) = (self.width_m(), self.height_m());
        let half_width = self.rng.random_range(3.0..5.0);
        let horizontal = self.rng.random_bool(0.5);
        let (mut p, base_heading) = if horizontal {
            ((0.0, self.rng.random_range(0.0..h)), 0.0)
        } else {
            ((self.rng.random_range(0.0..w), 0.0), std::f64::consts::FRAC_PI_2)
        };
        let legs = self.rng.random_range(2..5);
        let leg_len = w.max(h) / legs as f64 * 1.2;
        let mut changed = 0;
        for _ in 0..legs {
            let heading = base_heading + self.rng.random_range(-0.5..0.5);
            let q = (p.0 + leg_len * heading.cos(), p.1 + leg_len * heading.sin());
            changed += self.segment(p, q, half_width, TerrainClass::Road);
            p = q;
        }
        changed
    }

    /// A cluster of rectangular buildings around a random block center.
    fn building_block(&mut self) -> usize {
        let (bx, by) = self.random_point();
        let count = self.rng.random_range(3..9);
        let mut changed = 0;
        for _ in 0..count {
            let x = bx + self.rng.random_range(-35.0..35.0);
            let y = by + self.rng.random_range(-35.0..35.0);
            let w = self.rng.random_range(8.0..30.0);
            let h = self.rng.random_range(8.0..30.0);
            changed += self.rect(x, y, w, h, TerrainClass::Building);
        }
        changed
    }
}
