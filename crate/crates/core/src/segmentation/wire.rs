//! JSON bodies of `POST /v1/segment`.

use std::io::Cursor;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use super::SegmentationError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationRequest {
    /// Base64 PNG (RGB or 8-bit label rendering).
    pub image: String,
    pub prompts: Vec<String>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResponse {
    /// Base64 8-bit grayscale PNG with the request image's dimensions.
    pub heatmap: String,
    pub model: String,
    pub latency_ms: f64,
}

/// PNG-encodes and base64-wraps an image.
pub fn encode_png(img: &DynamicImage) -> String {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .expect("in-memory PNG encoding does not fail");
    STANDARD.encode(buf.into_inner())
}

pub fn decode_png(b64: &str) -> Result<DynamicImage, SegmentationError> {
    let bytes = STANDARD
        .decode(b64.trim())
        .map_err(|e| SegmentationError::Protocol(format!("bad base64: {e}")))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map_err(|e| SegmentationError::Protocol(format!("bad PNG: {e}")))
}
