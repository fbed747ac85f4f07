//! Raw binary landing heatmaps: a ground-truth oracle with configurable
//! segmentation noise, and a client for a remote open-vocabulary service.

mod remote;
mod wire;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::BinaryGrid;
use crate::pipeline::{label_regions, squared_distance_to};
use crate::world::LabelImage;

pub use remote::{label_image_to_rgb, remote_segment, RemoteBackend, ServiceClient, DEFAULT_PROMPTS};
pub use wire::{decode_png, encode_png, SegmentationRequest, SegmentationResponse};

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("segmentation backend unavailable: {0}")]
    Unavailable(String),
    #[error("segmentation service rejected the request (400): {0}")]
    BadRequest(String),
    #[error("segmentation model not ready (503)")]
    NotReady,
    #[error("segmentation service returned HTTP {0}")]
    Http(u16),
    #[error("segmentation protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawHeatmap {
    /// `true` = good to land.
    pub mask: BinaryGrid,
    pub frame_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Per connected component (of the safe mask and of its complement), per frame.
    pub component_flip_prob: f64,
    /// Per pixel, per frame.
    pub salt_pepper_prob: f64,
    /// Maximum dilation/erosion amplitude in pixels.
    pub boundary_jitter_px: u32,
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            component_flip_prob: 0.1,
            salt_pepper_prob: 0.02,
            boundary_jitter_px: 2,
            seed: 0,
        }
    }
}

impl NoiseParams {
    pub fn none() -> Self {
        Self {
            component_flip_prob: 0.0,
            salt_pepper_prob: 0.0,
            boundary_jitter_px: 0,
            seed: 0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.component_flip_prob == 0.0 && self.salt_pepper_prob == 0.0 && self.boundary_jitter_px == 0
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, p) in [
            ("component_flip_prob", self.component_flip_prob),
            ("salt_pepper_prob", self.salt_pepper_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(crate::Error::param(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Per-pixel safety of a label image.
pub fn ground_truth_mask(view: &LabelImage) -> BinaryGrid {
    view.map(|c| c.is_safe())
}

/// Oracle segmentation with noise drawn deterministically from
/// `(noise.seed, frame_index)`.
///
/// Noise is applied in three stages: whole-component flips, independent
/// pixel flips, then a uniform dilation (positive) or erosion (negative)
/// of the mask boundary by up to `boundary_jitter_px` pixels.
pub fn oracle_segment(view: &LabelImage, noise: &NoiseParams, frame_index: u64) -> RawHeatmap {
    let mut mask = ground_truth_mask(view);
    if noise.is_noiseless() {
        return RawHeatmap { mask, frame_index };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(frame_index);

    if noise.component_flip_prob > 0.0 {
        let regions = label_regions(&mask, true);
        let flips: Vec<bool> = (0..regions.count)
            .map(|_| rng.random_bool(noise.component_flip_prob))
            .collect();
        for (m, &label) in mask.as_mut_slice().iter_mut().zip(regions.labels.as_slice()) {
            *m ^= flips[label as usize - 1];
        }
    }

    if noise.salt_pepper_prob > 0.0 {
        for m in mask.as_mut_slice() {
            *m ^= rng.random_bool(noise.salt_pepper_prob);
        }
    }

    if noise.boundary_jitter_px > 0 {
        let j = noise.boundary_jitter_px as i64;
        let k = rng.random_range(-j..=j);
        mask = morph(&mask, k);
    }

    RawHeatmap { mask, frame_index }
}

/// Euclidean dilation (`k > 0`) or erosion (`k < 0`) by `|k|` pixels.
/// Off-image pixels take no part in either operation.
fn morph(mask: &BinaryGrid, k: i64) -> BinaryGrid {
    let k2 = k * k;
    if k > 0 {
        let sq = squared_distance_to(mask);
        sq.map(|d| d.is_some_and(|d| d <= k2))
    } else if k < 0 {
        let complement = mask.map(|&b| !b);
        let sq = squared_distance_to(&complement);
        sq.map(|d| d.is_none_or(|d| d > k2))
    } else {
        mask.clone()
    }
}

/// Anything that turns a camera view into a raw heatmap.
pub trait SegmentationBackend {
    fn segment(&mut self, view: &LabelImage, frame_index: u64) -> Result<RawHeatmap, SegmentationError>;
}

#[derive(Debug, Clone)]
pub struct OracleBackend {
    pub noise: NoiseParams,
}

impl OracleBackend {
    pub fn new(noise: NoiseParams) -> Self {
        Self { noise }
    }
}

impl SegmentationBackend for OracleBackend {
    fn segment(&mut self, view: &LabelImage, frame_index: u64) -> Result<RawHeatmap, SegmentationError> {
        if view.is_empty() {
            return Err(SegmentationError::Protocol("empty view".into()));
        }
        Ok(oracle_segment(view, &self.noise, frame_index))
    }
}

impl<B: SegmentationBackend + ?Sized> SegmentationBackend for Box<B> {
    fn segment(&mut self, view: &LabelImage, frame_index: u64) -> Result<RawHeatmap, SegmentationError> {
        (**self).segment(view, frame_index)
    }
}
