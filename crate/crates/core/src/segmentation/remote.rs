use std::time::Duration;

use image::{DynamicImage, RgbImage};

use super::wire::{decode_png, encode_png, SegmentationRequest, SegmentationResponse};
use super::{RawHeatmap, SegmentationBackend, SegmentationError};
use crate::grid::Grid;
use crate::world::LabelImage;

/// Default prompt list. Not canonical; tune per deployment.
pub const DEFAULT_PROMPTS: &[&str] = &["grass", "field", "lawn", "park", "open area"];

/// Synchronous client for `POST /v1/segment`. One request in flight at a time.
#[derive(Debug)]
pub struct ServiceClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl ServiceClient {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: format!("{}/v1/segment", base_url.trim_end_matches('/')),
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn call(&self, req: &SegmentationRequest) -> Result<SegmentationResponse, SegmentationError> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(req)
            .map_err(transport_error)?;
        let status = resp.status().as_u16();
        match status {
            200 => resp
                .body_mut()
                .read_json::<SegmentationResponse>()
                .map_err(|e| match e {
                    ureq::Error::Timeout(_) => transport_error(e),
                    other => SegmentationError::Protocol(format!("bad response body: {other}")),
                }),
            400 => {
                let body = resp.body_mut().read_to_string().unwrap_or_default();
                Err(SegmentationError::BadRequest(body))
            }
            503 => Err(SegmentationError::NotReady),
            other => Err(SegmentationError::Http(other)),
        }
    }
}

fn transport_error(e: ureq::Error) -> SegmentationError {
    SegmentationError::Unavailable(e.to_string())
}

/// Sends `image` with `prompts` and binarizes the returned heatmap at
/// `threshold * 255` (inclusive).
pub fn remote_segment(
    client: &ServiceClient,
    image: &RgbImage,
    prompts: &[String],
    threshold: f64,
) -> Result<RawHeatmap, SegmentationError> {
    let req = SegmentationRequest {
        image: encode_png(&DynamicImage::ImageRgb8(image.clone())),
        prompts: prompts.to_vec(),
        threshold,
    };
    let resp = client.call(&req)?;
    let heat = decode_png(&resp.heatmap)?.to_luma8();
    if heat.dimensions() != image.dimensions() {
        return Err(SegmentationError::Protocol(format!(
            "heatmap is {:?}, request image was {:?}",
            heat.dimensions(),
            image.dimensions()
        )));
    }
    let cut = threshold * 255.0;
    let (w, h) = heat.dimensions();
    let mask = heat.as_raw().iter().map(|&p| p as f64 >= cut).collect();
    Ok(RawHeatmap {
        mask: Grid::from_vec(w as usize, h as usize, mask).expect("dims checked"),
        frame_index: 0,
    })
}

/// Renders a label image with each class's display color.
pub fn label_image_to_rgb(view: &LabelImage) -> RgbImage {
    RgbImage::from_fn(view.width() as u32, view.height() as u32, |x, y| {
        image::Rgb(view.get(x as usize, y as usize).rgb())
    })
}

#[derive(Debug)]
pub struct RemoteBackend {
    pub client: ServiceClient,
    pub prompts: Vec<String>,
    pub threshold: f64,
}

impl RemoteBackend {
    pub fn new(client: ServiceClient) -> Self {
        Self {
            client,
            prompts: DEFAULT_PROMPTS.iter().map(|s| s.to_string()).collect(),
            threshold: 0.5,
        }
    }
}

impl SegmentationBackend for RemoteBackend {
    fn segment(&mut self, view: &LabelImage, frame_index: u64) -> Result<RawHeatmap, SegmentationError> {
        let rgb = label_image_to_rgb(view);
        let mut raw = remote_segment(&self.client, &rgb, &self.prompts, self.threshold)?;
        raw.frame_index = frame_index;
        Ok(raw)
    }
}
