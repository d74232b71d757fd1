//! Closed-form camera paths for demos and tests.

use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::camera::{axis_angle, look_at, make_relative, normalize_scale, Intrinsics, Pose, Trajectory};
use crate::{Error, Result};

pub const DEFAULT_FRAMES: usize = 14;
pub const DEFAULT_RESOLUTION: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    /// Arc of a quarter circle around a point `magnitude` in front of the first camera.
    Orbit,
    /// Forward motion along the optical axis.
    Dolly,
    /// Rotation about the vertical axis by `magnitude` radians, no translation.
    Pan,
    /// Sideways motion along the camera x axis.
    Truck,
    /// Forward motion with a circular wobble of radius `magnitude / 4`.
    Spiral,
}

impl PresetKind {
    pub const ALL: [PresetKind; 5] = [Self::Orbit, Self::Dolly, Self::Pan, Self::Truck, Self::Spiral];

    pub fn name(self) -> &'static str {
        match self {
            Self::Orbit => "orbit",
            Self::Dolly => "dolly",
            Self::Pan => "pan",
            Self::Truck => "truck",
            Self::Spiral => "spiral",
        }
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown trajectory kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPreset {
    pub kind: PresetKind,
    pub n: usize,
    pub magnitude: f64,
    pub intrinsics: Intrinsics,
}

impl TrajectoryPreset {
    pub fn new(kind: PresetKind) -> Self {
        Self {
            kind,
            n: DEFAULT_FRAMES,
            magnitude: 1.0,
            intrinsics: Intrinsics::from_fov(DEFAULT_RESOLUTION, DEFAULT_RESOLUTION, PI / 3.0),
        }
    }

    /// The path before scale normalisation, already relative to its first frame.
    pub fn raw_trajectory(&self) -> Result<Trajectory> {
        if self.n < 2 || !(self.magnitude > 0.0) {
            return Err(Error::Domain(format!(
                "preset needs n ≥ 2 and magnitude > 0 (n={}, magnitude={})",
                self.n, self.magnitude
            )));
        }
        let m = self.magnitude;
        let poses = (0..self.n)
            .map(|i| {
                let s = i as f64 / (self.n - 1) as f64;
                match self.kind {
                    PresetKind::Dolly => Pose::from_translation(Vector3::new(0.0, 0.0, m * s)),
                    PresetKind::Truck => Pose::from_translation(Vector3::new(m * s, 0.0, 0.0)),
                    PresetKind::Pan => Pose {
                        rotation: axis_angle(Vector3::y(), m * s),
                        translation: Vector3::zeros(),
                    },
                    PresetKind::Orbit => {
                        let target = Vector3::new(0.0, 0.0, m);
                        let theta = FRAC_PI_2 * s;
                        let eye = target + m * Vector3::new(-theta.sin(), 0.0, -theta.cos());
                        Pose {
                            rotation: look_at(&eye, &target, &Vector3::y()),
                            translation: eye,
                        }
                    }
                    PresetKind::Spiral => {
                        let phi = 2.0 * PI * s;
                        let rho = 0.25 * m;
                        Pose {
                            rotation: Matrix3::identity(),
                            translation: Vector3::new(rho * (phi.cos() - 1.0), rho * phi.sin(), m * s),
                        }
                    }
                }
            })
            .collect();
        make_relative(&Trajectory::new(poses, self.intrinsics)?)
    }
}

/// Canonical, unit-scale trajectory of the preset. Pure rotations (pan) have
/// no scale and return [`Error::DegenerateScale`]; use
/// [`TrajectoryPreset::raw_trajectory`] for those.
pub fn generate_preset(preset: &TrajectoryPreset) -> Result<Trajectory> {
    normalize_scale(&preset.raw_trajectory()?)
}
