//! Reactive safe-landing simulation for a nadir-camera UAV.
//!
//! A labeled terrain [`world`] is rendered from the UAV's pose, turned into a
//! raw "good to land" mask by a [`segmentation`] backend, cleaned up and
//! scored by the heatmap [`pipeline`] (temporal averaging, distance map,
//! dynamic focus, best-pixel objective), and finally consumed by the
//! landing [`controller`] state machine that emits velocity commands. The
//! [`sim`] module closes the loop per episode and [`harness`] runs paired
//! batches of episodes.

// `!(x > 0.0)` checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod error;
pub mod grid;
pub mod harness;
pub mod pipeline;
pub mod segmentation;
pub mod sim;
pub mod world;

pub use error::{Error, Result};
