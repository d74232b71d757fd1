//! Trajectory file formats.
//!
//! Text form, one frame per line:
//!
//! ```text
//! # width 256 height 256
//! frame_index fx fy cx cy r11 r12 r13 t1 r21 r22 r23 t2 r31 r32 r33 t3
//! ```
//!
//! Rotations and translations are stored world-to-camera. The optional
//! `# width W height H` comment carries the image size; without it the size is
//! inferred as `2·c + 1` rounded, the principal point being the image centre
//! under the pixel-centre convention. The JSON form is an object
//! `{"width", "height", "frames": [...]}` (or a bare array of frames) whose
//! frame objects carry the same field names.

use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{Intrinsics, Pose, Trajectory};
use crate::{Error, Result};

/// Rotations further than this from orthonormal are rejected at parse time.
/// Closer ones are projected onto SO(3), since annotation files usually carry
/// limited precision.
const PARSE_ROTATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame_index: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub r11: f64,
    pub r12: f64,
    pub r13: f64,
    pub t1: f64,
    pub r21: f64,
    pub r22: f64,
    pub r23: f64,
    pub t2: f64,
    pub r31: f64,
    pub r32: f64,
    pub r33: f64,
    pub t3: f64,
}

impl FrameRecord {
    fn from_values(v: &[f64]) -> Self {
        Self {
            frame_index: v[0] as usize,
            fx: v[1],
            fy: v[2],
            cx: v[3],
            cy: v[4],
            r11: v[5],
            r12: v[6],
            r13: v[7],
            t1: v[8],
            r21: v[9],
            r22: v[10],
            r23: v[11],
            t2: v[12],
            r31: v[13],
            r32: v[14],
            r33: v[15],
            t3: v[16],
        }
    }

    fn from_pose(frame_index: usize, pose: &Pose, k: &Intrinsics) -> Self {
        let (r, t) = pose.to_world_to_camera();
        Self {
            frame_index,
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            r11: r[(0, 0)],
            r12: r[(0, 1)],
            r13: r[(0, 2)],
            t1: t[0],
            r21: r[(1, 0)],
            r22: r[(1, 1)],
            r23: r[(1, 2)],
            t2: t[1],
            r31: r[(2, 0)],
            r32: r[(2, 1)],
            r33: r[(2, 2)],
            t3: t[2],
        }
    }

    fn world_to_camera(&self) -> (Matrix3<f64>, Vector3<f64>) {
        let r = Matrix3::new(
            self.r11, self.r12, self.r13, self.r21, self.r22, self.r23, self.r31, self.r32,
            self.r33,
        );
        (r, Vector3::new(self.t1, self.t2, self.t3))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<u32>,
    frames: Vec<FrameRecord>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonInput {
    Doc(TrajectoryDoc),
    Frames(Vec<FrameRecord>),
}

fn nearest_rotation(r: &Matrix3<f64>, line: usize) -> Result<Matrix3<f64>> {
    let off = (r.transpose() * r - Matrix3::identity()).amax();
    if off > PARSE_ROTATION_TOL || r.determinant() <= 0.0 {
        return Err(Error::InvalidPose(format!(
            "frame on line {line}: rotation is not orthonormal (max |RᵀR − I| = {off:e})"
        )));
    }
    let svd = r.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut out = u * v_t;
    if out.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        out = u * v_t;
    }
    Ok(out)
}

fn build(frames: &[FrameRecord], size: Option<(u32, u32)>) -> Result<Trajectory> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Parse { line: 0, msg: "no frames".into() })?;
    for (i, f) in frames.iter().enumerate() {
        if (f.fx, f.fy, f.cx, f.cy) != (first.fx, first.fy, first.cx, first.cy) {
            return Err(Error::Parse {
                line: i + 1,
                msg: "per-frame intrinsics differ; a trajectory shares one camera".into(),
            });
        }
    }
    let (width, height) = size.unwrap_or_else(|| {
        (
            (2.0 * first.cx + 1.0).round().max(1.0) as u32,
            (2.0 * first.cy + 1.0).round().max(1.0) as u32,
        )
    });
    let k = Intrinsics::new(first.fx, first.fy, first.cx, first.cy, width, height)?;
    let mut poses = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        let (r, t) = f.world_to_camera();
        let r = if Pose::new(r, Vector3::zeros()).is_ok() {
            r
        } else {
            nearest_rotation(&r, i + 1)?
        };
        poses.push(Pose::from_world_to_camera(r, t)?);
    }
    Trajectory::new(poses, k)
}

fn parse_size_comment(line: &str) -> Option<(u32, u32)> {
    let toks: Vec<&str> = line.trim_start_matches('#').split_whitespace().collect();
    match toks.as_slice() {
        ["width", w, "height", h] => Some((w.parse().ok()?, h.parse().ok()?)),
        _ => None,
    }
}

/// Parses either the text or the JSON trajectory format.
pub fn parse_trajectory(src: &str) -> Result<Trajectory> {
    let trimmed = src.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return match serde_json::from_str::<JsonInput>(trimmed)? {
            JsonInput::Doc(doc) => build(&doc.frames, doc.width.zip(doc.height)),
            JsonInput::Frames(frames) => build(&frames, None),
        };
    }
    let mut size = None;
    let mut frames = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            size = size.or_else(|| parse_size_comment(line));
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: format!("bad number {tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 17 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 17 fields, found {}", values.len()),
            });
        }
        frames.push(FrameRecord::from_values(&values));
    }
    build(&frames, size)
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    parse_trajectory(&std::fs::read_to_string(path)?)
}

/// Serialises to the text format. Values use shortest round-trip notation.
pub fn format_trajectory(traj: &Trajectory) -> String {
    let k = traj.intrinsics();
    let mut out = format!("# width {} height {}\n", k.width, k.height);
    for (i, p) in traj.poses().iter().enumerate() {
        let f = FrameRecord::from_pose(i, p, k);
        let vals = [
            f.fx, f.fy, f.cx, f.cy, f.r11, f.r12, f.r13, f.t1, f.r21, f.r22, f.r23, f.t2, f.r31,
            f.r32, f.r33, f.t3,
        ];
        out.push_str(&i.to_string());
        for v in vals {
            out.push(' ');
            // + 0.0 turns -0 into 0
            out.push_str(&(v + 0.0).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn format_trajectory_json(traj: &Trajectory) -> Result<String> {
    let k = traj.intrinsics();
    let doc = TrajectoryDoc {
        width: Some(k.width),
        height: Some(k.height),
        frames: traj
            .poses()
            .iter()
            .enumerate()
            .map(|(i, p)| FrameRecord::from_pose(i, p, k))
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn write_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, format_trajectory(traj))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::axis_angle;

    fn sample() -> Trajectory {
        let k = Intrinsics::new(200.0, 210.0, 127.5, 95.5, 256, 192).unwrap();
        let poses = (0..4)
            .map(|i| {
                let a = 0.1 * i as f64;
                Pose::new(
                    axis_angle(Vector3::new(0.3, 1.0, -0.2), a),
                    Vector3::new(a, -2.0 * a, 0.5 + a),
                )
                .unwrap()
            })
            .collect();
        Trajectory::new(poses, k).unwrap()
    }

    fn max_diff(a: &Trajectory, b: &Trajectory) -> f64 {
        a.poses()
            .iter()
            .zip(b.poses())
            .map(|(p, q)| {
                (p.rotation - q.rotation)
                    .amax()
                    .max((p.translation - q.translation).amax())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn text_round_trip() {
        let t = sample();
        let back = parse_trajectory(&format_trajectory(&t)).unwrap();
        assert_eq!(back.intrinsics(), t.intrinsics());
        assert!(max_diff(&t, &back) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let back = parse_trajectory(&format_trajectory_json(&t).unwrap()).unwrap();
        assert_eq!(back.intrinsics(), t.intrinsics());
        assert!(max_diff(&t, &back) < 1e-12);
    }

    #[test]
    fn size_inferred_without_header() {
        let line = "0 100 100 63.5 47.5 1 0 0 0 0 1 0 0 0 0 1 0\n";
        let t = parse_trajectory(line).unwrap();
        assert_eq!((t.intrinsics().width, t.intrinsics().height), (128, 96));
    }

    #[test]
    fn world_to_camera_is_converted() {
        // camera sits at world (0, 0, -2): t_wc = -R_wc·C = (0, 0, 2)
        let line = "0 100 100 63.5 47.5 1 0 0 0 0 1 0 0 0 0 1 2\n";
        let t = parse_trajectory(line).unwrap();
        assert_eq!(t.pose(0).translation, Vector3::new(0.0, 0.0, -2.0));
    }

    #[test]
    fn low_precision_rotation_is_projected() {
        let line = "0 100 100 63.5 47.5 0.7071 -0.7071 0 0 0.7071 0.7071 0 0 0 0 1 0\n";
        let t = parse_trajectory(line).unwrap();
        assert!(t.pose(0).validate().is_ok());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_trajectory("0 1 2 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_trajectory("0 100 100 63.5 47.5 2 0 0 0 0 1 0 0 0 0 1 0\n"),
            Err(Error::InvalidPose(_))
        ));
        assert!(parse_trajectory("").is_err());
        let mixed = "0 100 100 63.5 47.5 1 0 0 0 0 1 0 0 0 0 1 0\n\
                     1 101 100 63.5 47.5 1 0 0 0 0 1 0 0 0 0 1 0\n";
        assert!(matches!(parse_trajectory(mixed), Err(Error::Parse { line: 2, .. })));
    }
}
