//! Pose-accuracy metrics between a predicted and a reference trajectory.

use nalgebra::Vector3;
use serde::Serialize;

use crate::camera::{make_relative, normalize_scale, Trajectory};
use crate::{Error, Result};

/// Summed rotation (radians) and translation errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoseErrors {
    pub r_err: f64,
    pub t_err: f64,
    /// `(rotation, translation)` error of every frame.
    pub per_frame: Vec<(f64, f64)>,
}

/// First camera at the origin with identity rotation, furthest camera at
/// unit distance.
pub fn canonicalize_for_eval(traj: &Trajectory) -> Result<Trajectory> {
    if traj.len() < 2 {
        return Err(Error::Domain("evaluation needs at least 2 frames".into()));
    }
    normalize_scale(&make_relative(traj)?)
}

fn check_lengths(out: &Trajectory, gt: &Trajectory) -> Result<()> {
    if out.len() != gt.len() {
        return Err(Error::Shape(format!(
            "predicted trajectory has {} frames, reference {}",
            out.len(),
            gt.len()
        )));
    }
    Ok(())
}

fn frame_rotation_errors<'a>(out: &'a Trajectory, gt: &'a Trajectory) -> impl Iterator<Item = f64> + 'a {
    out.poses().iter().zip(gt.poses()).map(|(a, b)| {
        // arccos((tr R − 1)/2) written as atan2 so it cannot leave its domain
        // and stays exact for identical inputs, where R is exactly symmetric
        let r = a.rotation.transpose() * b.rotation;
        let cos = (r.trace() - 1.0) / 2.0;
        let skew = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
        (skew.norm() / 2.0).atan2(cos)
    })
}

fn frame_translation_errors<'a>(out: &'a Trajectory, gt: &'a Trajectory) -> impl Iterator<Item = f64> + 'a {
    out.poses()
        .iter()
        .zip(gt.poses())
        .map(|(a, b)| (a.translation - b.translation).norm())
}

/// `Σ arccos((tr(R_outᵀ R_gt) − 1) / 2)`.
pub fn rotation_error(out: &Trajectory, gt: &Trajectory) -> Result<f64> {
    check_lengths(out, gt)?;
    Ok(frame_rotation_errors(out, gt).sum())
}

/// `Σ ‖T_out − T_gt‖₂`.
pub fn translation_error(out: &Trajectory, gt: &Trajectory) -> Result<f64> {
    check_lengths(out, gt)?;
    Ok(frame_translation_errors(out, gt).sum())
}

/// Canonicalises both trajectories and reports both metrics with a per-frame
/// breakdown.
pub fn evaluate(pred: &Trajectory, gt: &Trajectory) -> Result<PoseErrors> {
    check_lengths(pred, gt)?;
    let pred = canonicalize_for_eval(pred)?;
    let gt = canonicalize_for_eval(gt)?;
    let per_frame: Vec<(f64, f64)> = frame_rotation_errors(&pred, &gt)
        .zip(frame_translation_errors(&pred, &gt))
        .collect();
    Ok(PoseErrors {
        r_err: per_frame.iter().map(|f| f.0).sum(),
        t_err: per_frame.iter().map(|f| f.1).sum(),
        per_frame,
    })
}
