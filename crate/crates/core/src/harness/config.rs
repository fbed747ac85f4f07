use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::ControllerParams;
use crate::error::{Error, Result};
use crate::pipeline::PipelineParams;
use crate::segmentation::{NoiseParams, OracleBackend, RemoteBackend, SegmentationBackend, ServiceClient};
use crate::sim::EpisodeConfig;
use crate::world::{generate_world, CameraModel, GeneratorParams, WorldModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub name: String,
    pub focus_enabled: bool,
}

impl Arm {
    pub fn focus() -> Self {
        Self {
            name: "focus".into(),
            focus_enabled: true,
        }
    }

    pub fn no_focus() -> Self {
        Self {
            name: "no_focus".into(),
            focus_enabled: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorldSource {
    /// Procedural worlds. Without a fixed `seed`, episode `i` gets its own
    /// world seeded with `base_seed + i`.
    Generate {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_world_extent")]
        width_m: f64,
        #[serde(default = "default_world_extent")]
        height_m: f64,
        #[serde(default = "default_meters_per_cell")]
        meters_per_cell: f64,
        #[serde(default)]
        clutter: GeneratorParams,
    },
    /// A saved world pair, `<path>.png` + `<path>.json`.
    File { path: PathBuf },
}

fn default_world_extent() -> f64 {
    512.0
}

fn default_meters_per_cell() -> f64 {
    0.25
}

impl Default for WorldSource {
    fn default() -> Self {
        WorldSource::Generate {
            seed: None,
            width_m: default_world_extent(),
            height_m: default_world_extent(),
            meters_per_cell: default_meters_per_cell(),
            clutter: GeneratorParams::default(),
        }
    }
}

impl WorldSource {
    /// True when every episode sees the same world.
    pub fn is_shared(&self) -> bool {
        !matches!(self, WorldSource::Generate { seed: None, .. })
    }

    pub fn build(&self, episode_seed: u64) -> Result<WorldModel> {
        match self {
            WorldSource::Generate {
                seed,
                width_m,
                height_m,
                meters_per_cell,
                clutter,
            } => generate_world(
                seed.unwrap_or(episode_seed),
                *width_m,
                *height_m,
                *meters_per_cell,
                clutter,
            ),
            WorldSource::File { path } => WorldModel::load(path),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    #[default]
    Oracle,
    Remote {
        url: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        #[serde(default)]
        prompts: Option<Vec<String>>,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
}

fn default_timeout_ms() -> u64 {
    5_000
}

fn default_threshold() -> f64 {
    0.5
}

impl BackendConfig {
    /// A fresh backend per episode; remote clients are never shared.
    pub fn build(&self, noise: &NoiseParams) -> Box<dyn SegmentationBackend> {
        match self {
            BackendConfig::Oracle => Box::new(OracleBackend::new(noise.clone())),
            BackendConfig::Remote {
                url,
                timeout_ms,
                prompts,
                threshold,
            } => {
                let mut b = RemoteBackend::new(ServiceClient::new(url, Duration::from_millis(*timeout_ms)));
                if let Some(p) = prompts {
                    b.prompts = p.clone();
                }
                b.threshold = *threshold;
                Box::new(b)
            }
        }
    }
}

/// Everything an episode needs besides its seed and start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeDefaults {
    pub start_z: f64,
    pub max_time: f64,
    pub dt: f64,
    /// `seed` here is a salt mixed with each episode's seed.
    pub noise: NoiseParams,
    pub controller: ControllerParams,
    pub camera: CameraModel,
    pub pipeline: PipelineParams,
}

impl Default for EpisodeDefaults {
    fn default() -> Self {
        Self {
            start_z: EpisodeConfig::DEFAULT_START_Z,
            max_time: EpisodeConfig::DEFAULT_MAX_TIME,
            dt: EpisodeConfig::DEFAULT_DT,
            noise: NoiseParams::default(),
            controller: ControllerParams::default(),
            camera: CameraModel::default(),
            pipeline: PipelineParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub episodes: u32,
    pub base_seed: u64,
    pub world: WorldSource,
    pub arms: Vec<Arm>,
    pub output_dir: PathBuf,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    pub jobs: usize,
    pub write_trajectories: bool,
    pub backend: BackendConfig,
    pub defaults: EpisodeDefaults,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            episodes: 50,
            base_seed: 1,
            world: WorldSource::default(),
            arms: vec![Arm::focus(), Arm::no_focus()],
            output_dir: PathBuf::from("out"),
            jobs: 1,
            write_trajectories: true,
            backend: BackendConfig::Oracle,
            defaults: EpisodeDefaults::default(),
        }
    }
}

impl BatchConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::param("episodes must be positive"));
        }
        if self.arms.is_empty() {
            return Err(Error::param("at least one arm is required"));
        }
        let mut names: Vec<&str> = self.arms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("arm names must be unique"));
        }
        if self
            .arms
            .iter()
            .any(|a| a.name.is_empty() || a.name.contains([',', '/', '\\', '"', '\n']))
        {
            return Err(Error::param("arm names must be non-empty and free of , / \\ \" and newlines"));
        }
        self.defaults.noise.validate()?;
        self.defaults.controller.validate()?;
        self.defaults.camera.validate()?;
        self.defaults.pipeline.validate()?;
        if let WorldSource::Generate { clutter, .. } = &self.world {
            clutter.validate()?;
        }
        Ok(())
    }

    pub fn episode_seed(&self, index: u32) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    /// Episode configuration for one arm; identical across arms except for
    /// `focus_enabled`.
    pub fn episode_config(&self, world: &WorldModel, seed: u64, arm: &Arm) -> EpisodeConfig {
        let d = &self.defaults;
        let (start_x, start_y) = sample_start(world, &d.camera, d.start_z, seed);
        EpisodeConfig {
            seed,
            start_x,
            start_y,
            start_z: d.start_z,
            max_time: d.max_time,
            dt: d.dt,
            focus_enabled: arm.focus_enabled,
            noise: NoiseParams {
                seed: mix_seed(d.noise.seed, seed),
                ..d.noise.clone()
            },
            controller: d.controller.clone(),
            camera: d.camera,
            pipeline: d.pipeline.clone(),
        }
    }
}

/// Uniform start over the world interior inset by the footprint half-width
/// at the start altitude. Worlds narrower than a footprint start centered.
pub fn sample_start(world: &WorldModel, cam: &CameraModel, z: f64, seed: u64) -> (f64, f64) {
    let inset = cam.footprint_width(z) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axis = |extent: f64| {
        if extent > 2.0 * inset {
            rng.random_range(inset..extent - inset)
        } else {
            extent / 2.0
        }
    };
    let x = axis(world.width_m());
    let y = axis(world.height_m());
    (x, y)
}

/// SplitMix64-style mixing of a salt with an episode seed.
pub fn mix_seed(salt: u64, seed: u64) -> u64 {
    let mut z = salt ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
