//! Raw heatmap post-processing: temporal averaging, binarization, distance
//! map, dynamic focus masking, patch statistics and best-pixel selection.

mod edt;
mod focus;
mod patches;

use std::path::Path;

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{image_center, BinaryGrid, Grid};

pub use edt::{distance_map, squared_distance_to, DistanceMap};
pub use focus::{apply_focus, safe_fraction_in_focus, FocusState, DEFAULT_LAMBDA};
pub use patches::{label_and_stats, label_regions, Labeling, PatchStats};

/// Exponential moving average of binary frames, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedHeatmap {
    pub values: Grid<f64>,
    pub alpha: f64,
}

impl AveragedHeatmap {
    pub fn new(width: usize, height: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("EMA alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self {
            values: Grid::filled(width, height, 0.0),
            alpha,
        })
    }

    /// Seeds the average with a first frame instead of zeros.
    pub fn from_frame(raw: &BinaryGrid, alpha: f64) -> Result<Self> {
        let mut avg = Self::new(raw.width(), raw.height(), alpha)?;
        avg.values = raw.map(|&b| if b { 1.0 } else { 0.0 });
        Ok(avg)
    }

    /// `values <- (1 - alpha) * values + alpha * raw`, elementwise.
    pub fn update(&mut self, raw: &BinaryGrid) -> Result<()> {
        if !self.values.same_dims(raw) {
            return Err(Error::DimensionMismatch {
                expected: self.values.dims(),
                actual: raw.dims(),
            });
        }
        let keep = 1.0 - self.alpha;
        for (v, &r) in self.values.as_mut_slice().iter_mut().zip(raw.as_slice()) {
            *v = keep * *v + if r { self.alpha } else { 0.0 };
        }
        Ok(())
    }
}

/// `value >= threshold` (inclusive).
pub fn binarize(values: &Grid<f64>, threshold: f64) -> BinaryGrid {
    values.map(|&v| v >= threshold)
}

/// Candidate pixels: distance to the nearest unsafe pixel at least
/// `max(s_px, 1)`.
pub fn safe_interior(mask: &BinaryGrid, s_px: f64) -> BinaryGrid {
    threshold_distance(&distance_map(mask), s_px)
}

fn threshold_distance(dist: &DistanceMap, s_px: f64) -> BinaryGrid {
    let min = s_px.max(1.0);
    dist.dist.map(|&d| d >= min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestPixel {
    pub u: usize,
    pub v: usize,
    pub score: f64,
    pub c_dist: f64,
}

#[inline]
pub fn center_distance(u: usize, v: usize, center: (f64, f64)) -> f64 {
    let du = u as f64 - center.0;
    let dv = v as f64 - center.1;
    (du * du + dv * dv).sqrt()
}

/// Landing objective: patch compactness discounted by distance to center.
#[inline]
pub fn landing_score(area: usize, perimeter: usize, c_dist: f64) -> f64 {
    (area as f64 / perimeter as f64) / (c_dist + 1.0)
}

/// Argmax of the landing objective over every pixel of every patch.
///
/// Compactness is constant inside a patch, so only each patch's member
/// nearest the center needs scoring. Ties go to the smaller center distance,
/// then to row-major order.
pub fn select_best_pixel(mask: &BinaryGrid, stats: &[PatchStats]) -> Option<BestPixel> {
    let center = image_center(mask.width(), mask.height());
    let mut best: Option<BestPixel> = None;
    for patch in stats {
        let Some((u, v, c_dist)) = patch
            .pixels
            .iter()
            .map(|&(u, v)| (u, v, center_distance(u, v, center)))
            .min_by(|a, b| a.2.total_cmp(&b.2).then((a.1, a.0).cmp(&(b.1, b.0))))
        else {
            continue;
        };
        let cand = BestPixel {
            u,
            v,
            score: landing_score(patch.area, patch.perimeter, c_dist),
            c_dist,
        };
        if best.is_none_or(|b| beats(&cand, &b)) {
            best = Some(cand);
        }
    }
    best
}

fn beats(a: &BestPixel, b: &BestPixel) -> bool {
    a.score
        .total_cmp(&b.score)
        .then(b.c_dist.total_cmp(&a.c_dist))
        .then((b.v, b.u).cmp(&(a.v, a.u)))
        .is_gt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub ema_alpha: f64,
    pub binarize_threshold: f64,
    pub focus_lambda: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            ema_alpha: 0.2,
            binarize_threshold: 0.5,
            focus_lambda: DEFAULT_LAMBDA,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ema_alpha > 0.0 && self.ema_alpha <= 1.0) {
            return Err(Error::param("ema_alpha must lie in (0, 1]"));
        }
        if !(self.binarize_threshold > 0.0 && self.binarize_threshold < 1.0) {
            return Err(Error::param("binarize_threshold must lie in (0, 1)"));
        }
        if !(self.focus_lambda > 0.0 && self.focus_lambda <= 1.0) {
            return Err(Error::param("focus_lambda must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Intermediate grids of one processed frame, kept for debug dumps.
#[derive(Debug, Clone)]
pub struct PipelineTrace {
    pub raw: BinaryGrid,
    pub averaged: Grid<f64>,
    pub mask: BinaryGrid,
    pub distance: DistanceMap,
    pub candidates: BinaryGrid,
}

#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub best: Option<BestPixel>,
    pub safe_fraction_in_focus: f64,
    pub r_focus: f64,
    pub trace: Option<PipelineTrace>,
}

/// Per-episode pipeline state: the running average and the focus radius.
#[derive(Debug, Clone)]
pub struct HeatmapPipeline {
    params: PipelineParams,
    avg: Option<AveragedHeatmap>,
    focus: FocusState,
    focus_enabled: bool,
}

impl HeatmapPipeline {
    pub fn new(width: usize, height: usize, params: PipelineParams, focus_enabled: bool) -> Result<Self> {
        params.validate()?;
        let focus = FocusState::open(width, height, params.focus_lambda);
        Ok(Self {
            params,
            avg: None,
            focus,
            focus_enabled,
        })
    }

    pub fn focus(&self) -> &FocusState {
        &self.focus
    }

    pub fn focus_enabled(&self) -> bool {
        self.focus_enabled
    }

    pub fn process(&mut self, raw: &BinaryGrid, s_px: f64, keep_trace: bool) -> Result<FrameOutput> {
        match &mut self.avg {
            Some(avg) => avg.update(raw)?,
            None => self.avg = Some(AveragedHeatmap::from_frame(raw, self.params.ema_alpha)?),
        }
        let averaged = &self.avg.as_ref().expect("initialized above").values;
        let mask = binarize(averaged, self.params.binarize_threshold);
        let distance = distance_map(&mask);
        let interior = threshold_distance(&distance, s_px);
        let r_focus = self.focus.r_focus;
        let candidates = apply_focus(&interior, r_focus);
        let stats = label_and_stats(&candidates);
        let best = select_best_pixel(&candidates, &stats);
        let safe_fraction_in_focus = safe_fraction_in_focus(&mask, r_focus);
        let trace = keep_trace.then(|| PipelineTrace {
            raw: raw.clone(),
            averaged: averaged.clone(),
            mask,
            distance,
            candidates,
        });
        Ok(FrameOutput {
            best,
            safe_fraction_in_focus,
            r_focus,
            trace,
        })
    }

    /// Moves the focus radius toward `target`; a no-op with focus disabled,
    /// which keeps the radius pinned at the half diagonal.
    pub fn advance_focus(&mut self, target: f64) {
        if self.focus_enabled {
            self.focus = self.focus.step(target);
        }
    }
}

fn save_gray(path: &Path, grid: &Grid<u8>) -> Result<()> {
    let img = GrayImage::from_raw(grid.width() as u32, grid.height() as u32, grid.as_slice().to_vec())
        .expect("buffer sized from grid");
    img.save(path).map_err(|e| Error::format(path, e))
}

impl PipelineTrace {
    /// Writes `<prefix>_{raw,avg,mask,dist,cand}.png` as 8-bit images.
    pub fn dump(&self, dir: &Path, prefix: &str) -> Result<()> {
        let bin = |g: &BinaryGrid| g.map(|&b| if b { 255u8 } else { 0 });
        let max = self.distance.max().max(1.0);
        save_gray(&dir.join(format!("{prefix}_raw.png")), &bin(&self.raw))?;
        save_gray(
            &dir.join(format!("{prefix}_avg.png")),
            &self.averaged.map(|&v| (v * 255.0).round() as u8),
        )?;
        save_gray(&dir.join(format!("{prefix}_mask.png")), &bin(&self.mask))?;
        save_gray(
            &dir.join(format!("{prefix}_dist.png")),
            &self.distance.dist.map(|&d| (d / max * 255.0).round() as u8),
        )?;
        save_gray(&dir.join(format!("{prefix}_cand.png")), &bin(&self.candidates))
    }
}
