//! Camera conditioning and geometric-consistency building blocks for
//! camera-controlled video diffusion.
//!
//! The crate is organised bottom-up:
//!
//! * [`camera`] holds poses, intrinsics, trajectories and ray generation.
//! * [`plucker`] turns a posed camera into a per-pixel 6-channel ray embedding.
//! * [`epipolar`] builds fundamental matrices and resampled epipolar lines.
//! * [`eca`] gathers features along those lines and runs epipolar constraint
//!   attention, together with a dense masked-attention reference.
//! * [`conditioning`] is the zero-initialised 1×1 control adapter.
//! * [`diffusion`] contains the probability-flow sampler and frame-varying
//!   classifier-free guidance, verified against an analytic Gaussian denoiser.
//! * [`metrics`] and [`curation`] cover evaluation and dataset filtering.
//!
//! Pose convention everywhere is camera-to-world (`x_world = R·x_cam + T`),
//! with OpenCV-style camera axes (x right, y down, z forward) and continuous
//! pixel coordinates whose origin is the centre of the top-left pixel.

// `!(x > y)` is used on purpose to reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod conditioning;
pub mod curation;
pub mod diffusion;
pub mod eca;
pub mod epipolar;
mod error;
pub mod io;
pub mod metrics;
pub mod plucker;
pub mod preset;
pub mod viz;

pub use error::{Error, Result};
