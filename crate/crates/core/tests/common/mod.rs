#![allow(dead_code)]

use epicam_core::camera::{axis_angle, Intrinsics, Pose, Trajectory};
use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n < 1.0 {
            return v / n;
        }
    }
}

pub fn rotation(rng: &mut impl Rng, max_angle: f64) -> Matrix3<f64> {
    axis_angle(unit_vector(rng), rng.random_range(0.0..max_angle))
}

pub fn pose(rng: &mut impl Rng) -> Pose {
    let t = Vector3::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
    );
    Pose::new(rotation(rng, std::f64::consts::PI), t).unwrap()
}

pub fn intrinsics(rng: &mut impl Rng) -> Intrinsics {
    let w = rng.random_range(32..128u32);
    let h = rng.random_range(32..128u32);
    Intrinsics::new(
        rng.random_range(0.6..1.5) * w as f64,
        rng.random_range(0.6..1.5) * w as f64,
        rng.random_range(0.3..0.7) * w as f64,
        rng.random_range(0.3..0.7) * h as f64,
        w,
        h,
    )
    .unwrap()
}

pub fn trajectory(rng: &mut impl Rng, n: usize) -> Trajectory {
    let k = intrinsics(rng);
    Trajectory::new((0..n).map(|_| pose(rng)).collect(), k).unwrap()
}

pub fn homogeneous(p: &Pose) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    for r in 0..3 {
        for c in 0..3 {
            m[(r, c)] = p.rotation[(r, c)];
        }
        m[(r, 3)] = p.translation[r];
    }
    m
}

pub fn max_pose_diff(a: &Pose, b: &Pose) -> f64 {
    (a.rotation - b.rotation)
        .amax()
        .max((a.translation - b.translation).amax())
}

pub fn max_traj_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.poses()
        .iter()
        .zip(b.poses())
        .map(|(p, q)| max_pose_diff(p, q))
        .fold(0.0, f64::max)
}

/// Pinhole projection written out by hand: world point → pixel.
pub fn project(pose: &Pose, k: &Intrinsics, x: &Vector3<f64>) -> Option<[f64; 2]> {
    let rel = x - pose.translation;
    let c = pose.rotation.transpose() * rel;
    if c.z <= 1e-9 {
        return None;
    }
    Some([k.fx * c.x / c.z + k.cx, k.fy * c.y / c.z + k.cy])
}
