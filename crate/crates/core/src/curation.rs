//! Filtering of SfM-annotated videos and frame-stride sampling.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{make_relative, Trajectory};
use crate::io::read_trajectory;
use crate::{Error, Result};

pub const DEFAULT_MIN_DISPLACEMENT: f64 = 0.05;
pub const DEFAULT_MIN_POINTS: u64 = 100;
pub const DEFAULT_SAMPLE_COUNT: usize = 32;
pub const DEFAULT_CLIP_LEN: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct VideoAnnotation {
    pub video_id: String,
    pub n_frames: usize,
    pub traj: Trajectory,
    pub point_count: u64,
    pub source: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurationPolicy {
    pub displacement_min: f64,
    pub point_count_min: u64,
    pub sample_count: usize,
}

impl Default for CurationPolicy {
    fn default() -> Self {
        Self {
            displacement_min: DEFAULT_MIN_DISPLACEMENT,
            point_count_min: DEFAULT_MIN_POINTS,
            sample_count: DEFAULT_SAMPLE_COUNT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    LowDisplacement,
    LowPointCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub video_id: String,
    pub reasons: Vec<RejectReason>,
    pub displacement: f64,
    pub point_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurationOutcome {
    /// Indices into the input, in input order.
    pub accepted: Vec<usize>,
    pub rejected: Vec<Rejection>,
}

/// Evenly spaced frame indices with a random stride and start offset.
///
/// The stride is uniform on `[1, ⌊(n_frames − 1)/(count − 1)⌋]` and the start
/// uniform over every offset that keeps the last index in range.
pub fn sample_frames<R: Rng + ?Sized>(n_frames: usize, count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if count < 2 {
        return Err(Error::Domain(format!("need at least 2 frames per clip, got {count}")));
    }
    if n_frames < count {
        return Err(Error::InsufficientFrames { n_frames, count });
    }
    let max_stride = (n_frames - 1) / (count - 1);
    let stride = rng.random_range(1..=max_stride);
    let span = stride * (count - 1);
    let start = rng.random_range(0..=(n_frames - 1 - span));
    Ok((0..count).map(|i| start + i * stride).collect())
}

/// Training-time speed augmentation: [`sample_frames`] with clip length `clip_len`.
pub fn stride_augment<R: Rng + ?Sized>(n_frames: usize, clip_len: usize, rng: &mut R) -> Result<Vec<usize>> {
    sample_frames(n_frames, clip_len, rng)
}

/// Largest camera-centre distance from the first camera.
pub fn displacement(traj: &Trajectory) -> f64 {
    traj.max_center_distance()
}

/// Keeps annotations whose relative trajectory moves at least
/// `displacement_min` and whose reconstruction has at least
/// `point_count_min` points.
pub fn curate(annotations: &[VideoAnnotation], policy: &CurationPolicy) -> Result<CurationOutcome> {
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (i, ann) in annotations.iter().enumerate() {
        let disp = displacement(&make_relative(&ann.traj)?);
        let mut reasons = Vec::new();
        if !(disp >= policy.displacement_min) {
            reasons.push(RejectReason::LowDisplacement);
        }
        if ann.point_count < policy.point_count_min {
            reasons.push(RejectReason::LowPointCount);
        }
        if reasons.is_empty() {
            accepted.push(i);
        } else {
            rejected.push(Rejection {
                video_id: ann.video_id.clone(),
                reasons,
                displacement: disp,
                point_count: ann.point_count,
            });
        }
    }
    Ok(CurationOutcome { accepted, rejected })
}

/// One line of a curation manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    pub n_frames: usize,
    pub point_count: u64,
    pub trajectory_file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl ManifestEntry {
    /// Loads the referenced trajectory, resolving relative paths against `base`.
    pub fn load(&self, base: &Path) -> Result<VideoAnnotation> {
        let path = if self.trajectory_file.is_absolute() {
            self.trajectory_file.clone()
        } else {
            base.join(&self.trajectory_file)
        };
        let traj = read_trajectory(&path)?;
        if traj.len() > self.n_frames {
            return Err(Error::Shape(format!(
                "{}: trajectory has {} poses but the video only {} frames",
                self.video_id,
                traj.len(),
                self.n_frames
            )));
        }
        Ok(VideoAnnotation {
            video_id: self.video_id.clone(),
            n_frames: self.n_frames,
            traj,
            point_count: self.point_count,
            source: self.source.clone(),
        })
    }
}

/// Parses JSON-lines manifest text; blank lines are skipped.
pub fn parse_manifest(src: &str) -> Result<Vec<ManifestEntry>> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}
