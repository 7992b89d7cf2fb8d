//! Synthesis of paired nighttime-hazy / daytime-clear training data from
//! daytime images and depth maps, with brightness labels, the
//! brightness-weighted fusion and loss arithmetic used to train on them, and
//! brightness statistics for comparing image sets.
//!
//! The per-image chain lives in [`pipeline::synthesize_pair`]; directory
//! runs with manifests in [`pipeline::run_pipeline`].

pub mod brightness;
pub mod config;
pub mod degradation;
pub mod error;
pub mod io;
pub mod light;
pub mod params;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod stats;
pub mod training;

pub use error::{Error, Result};
pub use params::{IlluminationSource, LightPlacement, SynthesisParams};
pub use raster::{DepthMap, Image, SkyMask};
pub use rng::RngStream;
