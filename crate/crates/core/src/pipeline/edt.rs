//! Exact Euclidean distance transform (lower envelope of parabolas, one
//! dimension at a time). Distances are kept squared and integral until the
//! final square root so results match a brute-force search bit for bit.

use crate::grid::{BinaryGrid, Grid};

/// Per-pixel Euclidean distance to the nearest background pixel.
/// Out-of-image pixels count as background.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    pub dist: Grid<f64>,
}

impl DistanceMap {
    pub fn max(&self) -> f64 {
        self.dist.as_slice().iter().copied().fold(0.0, f64::max)
    }
}

/// Marker for "no feature pixel anywhere on this line".
const UNREACHED: i64 = i64::MAX;

/// Squared distance from each pixel to the nearest pixel where
/// `feature` is true. Pixels get `None` when there is no feature at all.
pub fn squared_distance_to(features: &BinaryGrid) -> Grid<Option<i64>> {
    let (w, h) = features.dims();
    let mut sq: Vec<i64> = features
        .as_slice()
        .iter()
        .map(|&f| if f { 0 } else { UNREACHED })
        .collect();

    let n = w.max(h);
    let mut scratch = Scratch::new(n);
    let mut line = vec![0i64; n];
    let mut out = vec![0i64; n];

    for x in 0..w {
        for y in 0..h {
            line[y] = sq[y * w + x];
        }
        scratch.envelope(&line[..h], &mut out[..h]);
        for y in 0..h {
            sq[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        let row = &mut sq[y * w..(y + 1) * w];
        line[..w].copy_from_slice(row);
        scratch.envelope(&line[..w], &mut out[..w]);
        row.copy_from_slice(&out[..w]);
    }

    let data = sq
        .into_iter()
        .map(|d| (d != UNREACHED).then_some(d))
        .collect();
    Grid::from_vec(w, h, data).expect("same dims")
}

/// Exact EDT of a mask; the image border is treated as background.
pub fn distance_map(mask: &BinaryGrid) -> DistanceMap {
    let (w, h) = mask.dims();
    // One-pixel background frame realises "outside the image is background".
    let padded = Grid::from_fn(w + 2, h + 2, |x, y| {
        x == 0 || y == 0 || x == w + 1 || y == h + 1 || !*mask.get(x - 1, y - 1)
    });
    let sq = squared_distance_to(&padded);
    let dist = Grid::from_fn(w, h, |x, y| {
        let d = sq.get(x + 1, y + 1).expect("frame guarantees a background pixel");
        (d as f64).sqrt()
    });
    DistanceMap { dist }
}

struct Scratch {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            v: vec![0; n],
            z: vec![0.0; n + 1],
        }
    }

    /// 1-D squared distance transform of sampled function `f`.
    fn envelope(&mut self, f: &[i64], d: &mut [i64]) {
        let n = f.len();
        let mut k: isize = -1;
        for q in 0..n {
            if f[q] == UNREACHED {
                continue;
            }
            let fq = (f[q] + (q * q) as i64) as f64;
            loop {
                if k < 0 {
                    k = 0;
                    self.v[0] = q;
                    self.z[0] = f64::NEG_INFINITY;
                    self.z[1] = f64::INFINITY;
                    break;
                }
                let p = self.v[k as usize];
                let fp = (f[p] + (p * p) as i64) as f64;
                let s = (fq - fp) / (2.0 * (q as f64 - p as f64));
                if s <= self.z[k as usize] {
                    k -= 1;
                } else {
                    k += 1;
                    self.v[k as usize] = q;
                    self.z[k as usize] = s;
                    self.z[k as usize + 1] = f64::INFINITY;
                    break;
                }
            }
        }
        if k < 0 {
            d.fill(UNREACHED);
            return;
        }
        let mut j = 0usize;
        for (q, out) in d.iter_mut().enumerate() {
            while self.z[j + 1] < q as f64 {
                j += 1;
            }
            let p = self.v[j];
            let dq = q as i64 - p as i64;
            *out = dq * dq + f[p];
        }
    }
}
