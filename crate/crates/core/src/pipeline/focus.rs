//! Dynamic focus: a circular mask centered on the image whose radius
//! relaxes geometrically toward a state-dependent target.

use serde::{Deserialize, Serialize};

use crate::grid::{image_center, BinaryGrid, Grid};

pub const DEFAULT_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusState {
    pub r_focus: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub lambda: f64,
}

impl FocusState {
    /// Fully open focus for a `width` x `height` image.
    pub fn open(width: usize, height: usize, lambda: f64) -> Self {
        let r_max = (width as f64).hypot(height as f64) / 2.0;
        Self {
            r_focus: r_max,
            r_min: 0.0,
            r_max,
            lambda,
        }
    }

    /// One relaxation step: `r <- clamp(r + (target - r) * lambda, r_min, r_max)`.
    #[must_use]
    pub fn step(self, target: f64) -> Self {
        let r = self.r_focus + (target - self.r_focus) * self.lambda;
        Self {
            r_focus: r.clamp(self.r_min, self.r_max),
            ..self
        }
    }
}

#[inline]
fn within(u: usize, v: usize, center: (f64, f64), r2: f64) -> bool {
    let du = u as f64 - center.0;
    let dv = v as f64 - center.1;
    du * du + dv * dv <= r2
}

/// Zeroes every pixel farther than `radius` from the image center.
pub fn apply_focus<T: Clone + Default>(grid: &Grid<T>, radius: f64) -> Grid<T> {
    let center = image_center(grid.width(), grid.height());
    let r2 = radius * radius;
    Grid::from_fn(grid.width(), grid.height(), |u, v| {
        if radius >= 0.0 && within(u, v, center, r2) {
            grid.get(u, v).clone()
        } else {
            T::default()
        }
    })
}

/// Fraction of pixels inside the focus disc that are set in `mask`.
/// An empty disc yields 0.
pub fn safe_fraction_in_focus(mask: &BinaryGrid, radius: f64) -> f64 {
    if radius < 0.0 {
        return 0.0;
    }
    let center = image_center(mask.width(), mask.height());
    let r2 = radius * radius;
    let (mut inside, mut set) = (0usize, 0usize);
    for v in 0..mask.height() {
        for u in 0..mask.width() {
            if within(u, v, center, r2) {
                inside += 1;
                set += usize::from(*mask.get(u, v));
            }
        }
    }
    if inside == 0 {
        0.0
    } else {
        set as f64 / inside as f64
    }
}
