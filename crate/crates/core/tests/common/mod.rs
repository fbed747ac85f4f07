//! Brute-force reference implementations shared by the integration tests.
//! Deliberately naive and independent of the library's algorithms.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slz_core::grid::{BinaryGrid, Grid};

/// Random mask with blobs of safe pixels over a noisy background, so masks
/// contain both large patches and speckle.
pub fn random_mask(seed: u64, max_side: usize) -> BinaryGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let density = rng.random_range(0.05..0.95);
    let mut mask = Grid::from_fn(w, h, |_, _| rng.random_bool(density));
    for _ in 0..rng.random_range(0..4) {
        let cx = rng.random_range(0..w) as f64;
        let cy = rng.random_range(0..h) as f64;
        let r = rng.random_range(1.0..(max_side as f64 / 3.0).max(1.5));
        let fill = rng.random_bool(0.7);
        for y in 0..h {
            for x in 0..w {
                if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                    mask.set(x, y, fill);
                }
            }
        }
    }
    mask
}

/// Distance from each pixel to the nearest unset pixel or out-of-image
/// pixel, by scanning every candidate.
pub fn brute_distance(mask: &BinaryGrid) -> Grid<f64> {
    let (w, h) = mask.dims();
    let (wi, hi) = (w as i64, h as i64);
    Grid::from_fn(w, h, |x, y| {
        if !*mask.get(x, y) {
            return 0.0;
        }
        let (x, y) = (x as i64, y as i64);
        let mut best = i64::MAX;
        // The one-pixel ring just outside the image is the nearest outside.
        for by in -1..=hi {
            for bx in -1..=wi {
                let outside = bx < 0 || by < 0 || bx >= wi || by >= hi;
                if outside || !*mask.get(bx as usize, by as usize) {
                    let d = (bx - x).pow(2) + (by - y).pow(2);
                    best = best.min(d);
                }
            }
        }
        (best as f64).sqrt()
    })
}

/// 8-connected components of set pixels via union-find. Returns a label per
/// pixel (`usize::MAX` for unset pixels).
pub fn union_find_labels(mask: &BinaryGrid) -> Vec<usize> {
    let (w, h) = mask.dims();
    let mut parent: Vec<usize> = (0..w * h).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for y in 0..h {
        for x in 0..w {
            if !*mask.get(x, y) {
                continue;
            }
            for (dx, dy) in [(1i64, 0i64), (-1, 1), (0, 1), (1, 1)] {
                let nx = x as i64 + dx;
                let ny = y as i64 + dy;
                if nx < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if *mask.get(nx, ny) {
                    let a = find(&mut parent, y * w + x);
                    let b = find(&mut parent, ny * w + nx);
                    parent[a] = b;
                }
            }
        }
    }
    (0..w * h)
        .map(|i| if mask.as_slice()[i] { find(&mut parent, i) } else { usize::MAX })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteBest {
    pub u: usize,
    pub v: usize,
    pub score: f64,
}

/// Scores every set pixel with `(area / perimeter) / (c_dist + 1)` and
/// returns the maximum; ties go to the smaller center distance, then
/// row-major order.
pub fn brute_best_pixel(mask: &BinaryGrid) -> Option<BruteBest> {
    let (w, h) = mask.dims();
    let labels = union_find_labels(mask);
    let mut area = std::collections::HashMap::<usize, usize>::new();
    let mut perim = std::collections::HashMap::<usize, usize>::new();
    let in_patch = |x: i64, y: i64, l: usize| {
        x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && labels[y as usize * w + x as usize] == l
    };
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == usize::MAX {
                continue;
            }
            *area.entry(l).or_default() += 1;
            let (xi, yi) = (x as i64, y as i64);
            let edge = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !in_patch(xi + dx, yi + dy, l));
            if edge {
                *perim.entry(l).or_default() += 1;
            }
        }
    }
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mut best: Option<(BruteBest, f64)> = None;
    for y in 0..h {
        for x in 0..w {
            let l = labels[y * w + x];
            if l == usize::MAX {
                continue;
            }
            let c = (x as f64 - cx).hypot(y as f64 - cy);
            let score = (area[&l] as f64 / perim[&l] as f64) / (c + 1.0);
            let better = match &best {
                None => true,
                Some((b, bc)) => score > b.score || (score == b.score && c < *bc),
            };
            if better {
                best = Some((BruteBest { u: x, v: y, score }, c));
            }
        }
    }
    best.map(|(b, _)| b)
}

/// Pixels within `radius` of the image center, counted directly.
pub fn brute_disc_count(w: usize, h: usize, radius: f64) -> usize {
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mut n = 0;
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= radius * radius {
                n += 1;
            }
        }
    }
    n
}
