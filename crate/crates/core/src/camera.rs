//! Camera poses, shared intrinsics and trajectories.
//!
//! Poses are stored camera-to-world: a point `x` in camera coordinates lands at
//! `R·x + T` in the world, so the camera centre is simply `T`. World-to-camera
//! extrinsics (as found in most annotation files) are converted at the parsing
//! boundary with [`Pose::from_world_to_camera`].

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance used when validating rotation matrices.
pub const ROTATION_TOL: f64 = 1e-9;

/// Pinhole intrinsics shared by every frame of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    /// Symmetric intrinsics with the principal point at the image centre and
    /// the given horizontal field of view (radians).
    pub fn from_fov(width: u32, height: u32, fov_x: f64) -> Self {
        let fx = 0.5 * width as f64 / (0.5 * fov_x).tan();
        Self {
            fx,
            fy: fx,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
            width,
            height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if !(0.0..=self.width as f64).contains(&self.cx)
            || !(0.0..=self.height as f64).contains(&self.cy)
        {
            return Err(Error::InvalidIntrinsics(format!(
                "principal point ({}, {}) outside {}x{}",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Rescales the intrinsics to a `w`×`h` grid covering the same field of view.
    ///
    /// Pixel centres are aligned: sensor coordinate `u` maps to
    /// `(u + 0.5)·w/width − 0.5` on the new grid.
    pub fn scaled(&self, w: u32, h: u32) -> Self {
        if w == self.width && h == self.height {
            return *self;
        }
        let sx = w as f64 / self.width as f64;
        let sy = h as f64 / self.height as f64;
        Self {
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: (self.cx + 0.5) * sx - 0.5,
            cy: (self.cy + 0.5) * sy - 0.5,
            width: w,
            height: h,
        }
    }

    /// `K⁻¹·(u, v, 1)ᵀ`, the camera-frame direction through pixel `(u, v)`.
    pub fn unproject(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Projects a point given in camera coordinates. Returns `None` behind the camera.
    pub fn project(&self, p_cam: &Vector3<f64>) -> Option<[f64; 2]> {
        if p_cam.z <= 0.0 {
            return None;
        }
        Some([
            self.fx * p_cam.x / p_cam.z + self.cx,
            self.fy * p_cam.y / p_cam.z + self.cy,
        ])
    }
}

/// Rigid camera-to-world transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    /// Builds a pose after checking that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let pose = Self { rotation, translation };
        pose.validate()?;
        Ok(pose)
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Converts a world-to-camera extrinsic `[R_wc | t_wc]` into the
    /// camera-to-world convention used throughout the crate.
    pub fn from_world_to_camera(r_wc: Matrix3<f64>, t_wc: Vector3<f64>) -> Result<Self> {
        let r = r_wc.transpose();
        Self::new(r, -(r * t_wc))
    }

    /// The world-to-camera extrinsic `(R_wc, t_wc)` of this pose.
    pub fn to_world_to_camera(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let r_wc = self.rotation.transpose();
        (r_wc, -(r_wc * self.translation))
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        if r.iter().chain(self.translation.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPose("non-finite entry".into()));
        }
        let gram = r.transpose() * r - Matrix3::identity();
        let off = gram.amax();
        if off > ROTATION_TOL {
            return Err(Error::InvalidPose(format!(
                "rotation is not orthonormal (max |RᵀR − I| = {off:e})"
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidPose(format!("rotation determinant is {det}")));
        }
        Ok(())
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Maps a world point into this camera's coordinate frame.
    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (p - self.translation)
    }
}

/// Camera centre in world coordinates.
pub fn camera_center(pose: &Pose) -> Vector3<f64> {
    pose.translation
}

/// `src⁻¹ ∘ tgt`: the target camera expressed in the source camera's frame.
pub fn relative_pose(src: &Pose, tgt: &Pose) -> Pose {
    src.inverse().compose(tgt)
}

/// Unit-direction ray through continuous pixel `(u, v)`.
///
/// Returns `(origin, direction)`; the origin is the camera centre.
pub fn pixel_ray(pose: &Pose, k: &Intrinsics, u: f64, v: f64) -> (Vector3<f64>, Vector3<f64>) {
    let d = pose.rotation * k.unproject(u, v);
    (pose.translation, d / d.norm())
}

/// An ordered sequence of poses sharing one set of intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    poses: Vec<Pose>,
    intrinsics: Intrinsics,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>, intrinsics: Intrinsics) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::Domain("trajectory needs at least one pose".into()));
        }
        for (i, p) in poses.iter().enumerate() {
            p.validate()
                .map_err(|e| Error::InvalidPose(format!("frame {i}: {e}")))?;
        }
        intrinsics.validate()?;
        Ok(Self { poses, intrinsics })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn intrinsics(&self) -> &Intrinsics {
        &self.intrinsics
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn pose(&self, i: usize) -> &Pose {
        &self.poses[i]
    }

    /// Applies `f` to every pose, keeping the intrinsics.
    pub fn map_poses(&self, f: impl Fn(&Pose) -> Pose) -> Trajectory {
        Trajectory {
            poses: self.poses.iter().map(f).collect(),
            intrinsics: self.intrinsics,
        }
    }

    /// Returns the sub-trajectory at the given frame indices.
    pub fn select(&self, indices: &[usize]) -> Result<Trajectory> {
        let poses = indices
            .iter()
            .map(|&i| {
                self.poses.get(i).copied().ok_or_else(|| {
                    Error::Shape(format!("frame {i} out of range for {} poses", self.len()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(poses, self.intrinsics)
    }

    /// Maximum camera-centre distance from the world origin.
    pub fn max_center_distance(&self) -> f64 {
        self.poses
            .iter()
            .map(|p| camera_center(p).norm())
            .fold(0.0, f64::max)
    }
}

/// Re-expresses every pose relative to the first camera, which becomes identity.
pub fn make_relative(traj: &Trajectory) -> Result<Trajectory> {
    for (i, p) in traj.poses.iter().enumerate() {
        p.validate()
            .map_err(|e| Error::InvalidPose(format!("frame {i}: {e}")))?;
    }
    let first_inv = traj.poses[0].inverse();
    let mut poses: Vec<Pose> = traj.poses.iter().map(|p| first_inv.compose(p)).collect();
    poses[0] = Pose::identity();
    Ok(Trajectory {
        poses,
        intrinsics: traj.intrinsics,
    })
}

/// Divides every translation by the largest camera-centre distance so the
/// furthest camera ends up at unit distance from the origin.
pub fn normalize_scale(traj: &Trajectory) -> Result<Trajectory> {
    let max = traj.max_center_distance();
    if max == 0.0 || !max.is_finite() {
        return Err(Error::DegenerateScale);
    }
    Ok(traj.map_poses(|p| Pose {
        rotation: p.rotation,
        translation: p.translation / max,
    }))
}

/// Rotation by `angle` radians about the (not necessarily unit) `axis`.
pub fn axis_angle(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let axis = nalgebra::Unit::new_normalize(axis);
    *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix()
}

/// Rotation whose camera z axis points from `eye` towards `target`, with the
/// camera y axis as close as possible to `down`.
pub fn look_at(eye: &Vector3<f64>, target: &Vector3<f64>, down: &Vector3<f64>) -> Matrix3<f64> {
    let z = (target - eye).normalize();
    let x = down.cross(&z).normalize();
    let y = z.cross(&x);
    Matrix3::from_columns(&[x, y, z])
}
