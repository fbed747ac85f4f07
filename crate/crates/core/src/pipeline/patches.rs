//! 8-connected patch labeling and the per-patch area/perimeter statistics
//! consumed by the best-pixel objective.

use crate::grid::{BinaryGrid, Grid};

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Region labels; `0` marks unlabeled pixels and labels start at 1 in
/// row-major order of each region's first pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: Grid<u32>,
    pub count: u32,
}

/// Labels 8-connected regions of equal value. With `include_background`
/// false only `true` pixels are labeled; otherwise both the mask and its
/// complement are split into regions.
pub fn label_regions(mask: &BinaryGrid, include_background: bool) -> Labeling {
    let (w, h) = mask.dims();
    let mut labels = Grid::filled(w, h, 0u32);
    let mut count = 0u32;
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let value = *mask.get(x, y);
            if *labels.get(x, y) != 0 || !(value || include_background) {
                continue;
            }
            count += 1;
            labels.set(x, y, count);
            stack.push((x, y));
            while let Some((px, py)) = stack.pop() {
                for (dx, dy) in NEIGHBORS_8 {
                    let nx = px as isize + dx;
                    let ny = py as isize + dy;
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if *labels.get(nx, ny) == 0 && *mask.get(nx, ny) == value {
                        labels.set(nx, ny, count);
                        stack.push((nx, ny));
                    }
                }
            }
        }
    }
    Labeling { labels, count }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchStats {
    pub patch_id: u32,
    pub area: usize,
    /// Number of patch pixels with a 4-neighbor outside the patch; the image
    /// border counts as outside.
    pub perimeter: usize,
    /// Member coordinates `(u, v)` in row-major order.
    pub pixels: Vec<(usize, usize)>,
}

impl PatchStats {
    pub fn compactness(&self) -> f64 {
        self.area as f64 / self.perimeter as f64
    }
}

/// Boundary test: any 4-neighbor off-image or not set in `mask`.
#[inline]
pub(crate) fn is_boundary(mask: &BinaryGrid, x: usize, y: usize) -> bool {
    let (w, h) = mask.dims();
    x == 0
        || y == 0
        || x + 1 == w
        || y + 1 == h
        || !*mask.get(x - 1, y)
        || !*mask.get(x + 1, y)
        || !*mask.get(x, y - 1)
        || !*mask.get(x, y + 1)
}

pub fn label_and_stats(mask: &BinaryGrid) -> Vec<PatchStats> {
    let Labeling { labels, count } = label_regions(mask, false);
    let mut stats: Vec<PatchStats> = (1..=count)
        .map(|patch_id| PatchStats {
            patch_id,
            area: 0,
            perimeter: 0,
            pixels: Vec::new(),
        })
        .collect();
    let (w, h) = mask.dims();
    for y in 0..h {
        for x in 0..w {
            let id = *labels.get(x, y);
            if id == 0 {
                continue;
            }
            let s = &mut stats[id as usize - 1];
            s.area += 1;
            // Within an 8-connected patch every set 4-neighbor shares the label.
            if is_boundary(mask, x, y) {
                s.perimeter += 1;
            }
            s.pixels.push((x, y));
        }
    }
    stats
}
