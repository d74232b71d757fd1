//! Browser bindings for the interactive demo page in `www/`.
//!
//! The exported functions are thin wrappers over [`demo`], which is plain Rust
//! and tested natively.

use wasm_bindgen::prelude::*;

pub mod demo {
    use std::f64::consts::PI;

    use epicam_core::camera::{Intrinsics, Trajectory};
    use epicam_core::diffusion::{sample, ConditionalGaussianDenoiser, GuidanceSchedule, SamplerConfig};
    use epicam_core::plucker::plucker_embed;
    use epicam_core::preset::{generate_preset, PresetKind, TrajectoryPreset};
    use epicam_core::viz::{plucker_to_rgb, render_epipolar, PluckerPart};
    use epicam_core::{Error, Result};
    use serde_json::json;

    pub const FRAMES: usize = 14;

    /// 14-frame preset at a square resolution; pan stays unnormalised.
    pub fn trajectory(kind: &str, magnitude: f64, size: u32) -> Result<Trajectory> {
        let preset = TrajectoryPreset {
            kind: kind.parse::<PresetKind>()?,
            n: FRAMES,
            magnitude,
            intrinsics: Intrinsics::from_fov(size, size, PI / 3.0),
        };
        match generate_preset(&preset) {
            Err(Error::DegenerateScale) => preset.raw_trajectory(),
            other => other,
        }
    }

    fn frame_index(traj: &Trajectory, frame: u32) -> Result<usize> {
        let i = (frame as usize).wrapping_sub(1);
        if i >= traj.len() {
            return Err(Error::Domain(format!("frame {frame} outside 1..={}", traj.len())));
        }
        Ok(i)
    }

    /// RGBA pixels (`size`×`size`) of one half of the frame's Plücker map.
    pub fn plucker_rgba(kind: &str, magnitude: f64, frame: u32, size: u32, moment: bool) -> Result<Vec<u8>> {
        let traj = trajectory(kind, magnitude, size)?;
        let i = frame_index(&traj, frame)?;
        let map = plucker_embed(traj.pose(i), traj.intrinsics(), size as usize, size as usize);
        let part = if moment { PluckerPart::Moment } else { PluckerPart::Direction };
        Ok(plucker_to_rgb(&map, part).to_rgba())
    }

    /// Width of the side-by-side epipolar image for a given frame size.
    pub fn epipolar_width(size: u32) -> u32 {
        2 * size + 4
    }

    /// RGBA side-by-side view: `frame` with the query pixel on the left, the
    /// first frame with that pixel's sampled epipolar line on the right.
    pub fn epipolar_rgba(kind: &str, magnitude: f64, frame: u32, size: u32, x: u32, y: u32) -> Result<Vec<u8>> {
        let traj = trajectory(kind, magnitude, size)?;
        let i = frame_index(&traj, frame)?;
        if i == 0 {
            return Err(Error::Domain("frame 1 is the reference frame".into()));
        }
        let s = size as usize;
        let img = render_epipolar(&traj, i, s, s, s, &[(x as usize, y as usize)])?;
        Ok(img.to_rgba())
    }

    /// Guided toy sampler: per-frame mean of the final state against the
    /// `ω·μ` the guidance should produce, as JSON.
    pub fn guidance_json(omega_start: f64, omega_end: f64, runs: u32, seed: u64) -> Result<String> {
        let guidance = GuidanceSchedule::linear(FRAMES, omega_start, omega_end)?;
        let den = ConditionalGaussianDenoiser { std: 0.5 };
        let dim = 4;
        let cond = vec![1.0; FRAMES * dim];
        let config = SamplerConfig::default();
        let mut sums = vec![0.0; FRAMES];
        for r in 0..runs as u64 {
            let x = sample(&den, &cond, FRAMES * dim, &guidance, &config, seed.wrapping_add(r))?;
            for (f, chunk) in x.chunks(dim).enumerate() {
                sums[f] += chunk.iter().sum::<f64>();
            }
        }
        let n = (runs as usize * dim).max(1) as f64;
        let frames: Vec<_> = guidance
            .weights()
            .iter()
            .zip(&sums)
            .map(|(w, s)| json!({ "omega": w, "mean": s / n }))
            .collect();
        Ok(json!({ "frames": frames }).to_string())
    }
}

fn js(e: epicam_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = pluckerRgba)]
pub fn plucker_rgba(kind: &str, magnitude: f64, frame: u32, size: u32, moment: bool) -> Result<Vec<u8>, JsError> {
    demo::plucker_rgba(kind, magnitude, frame, size, moment).map_err(js)
}

#[wasm_bindgen(js_name = epipolarWidth)]
pub fn epipolar_width(size: u32) -> u32 {
    demo::epipolar_width(size)
}

#[wasm_bindgen(js_name = epipolarRgba)]
pub fn epipolar_rgba(kind: &str, magnitude: f64, frame: u32, size: u32, x: u32, y: u32) -> Result<Vec<u8>, JsError> {
    demo::epipolar_rgba(kind, magnitude, frame, size, x, y).map_err(js)
}

#[wasm_bindgen(js_name = guidanceJson)]
pub fn guidance_json(omega_start: f64, omega_end: f64, runs: u32, seed: u32) -> Result<String, JsError> {
    demo::guidance_json(omega_start, omega_end, runs, seed as u64).map_err(js)
}
