//! Epipolar geometry between a target frame and the source (first) frame.
//!
//! For every target pixel the matching source pixels lie on one line. That
//! line is clipped to the source image and resampled to a fixed number of
//! points so all pixels can be attended to in one batch.

use nalgebra::{Matrix3, Vector3};

use crate::camera::{relative_pose, Intrinsics, Pose, Trajectory};
use crate::{Error, Result};

/// Relative translations at or below this norm are treated as pure rotation.
pub const MIN_BASELINE: f64 = 1e-9;

fn skew(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

/// Unit-Frobenius-norm fundamental matrix mapping target pixels to source lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    f: Matrix3<f64>,
    /// Homogeneous source-image epipole (projection of the target centre).
    epipole: Vector3<f64>,
}

impl FundamentalMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.f
    }

    /// Ratio of the smallest to the largest singular value.
    pub fn rank_ratio(&self) -> f64 {
        let s = self.f.singular_values();
        s.min() / s.max()
    }

    pub fn epipole_homogeneous(&self) -> Vector3<f64> {
        self.epipole
    }

    /// Source-image epipole, or `None` when it lies at infinity.
    pub fn epipole(&self) -> Option<[f64; 2]> {
        let e = self.epipole;
        if e.z.abs() <= 1e-12 * e.norm() {
            None
        } else {
            Some([e.x / e.z, e.y / e.z])
        }
    }
}

/// Builds `F = K_src⁻ᵀ [t]ₓ R K_tgt⁻¹` from the target camera's pose in the
/// source camera frame (as returned by [`relative_pose`]).
pub fn fundamental_matrix(
    rel: &Pose,
    k_src: &Intrinsics,
    k_tgt: &Intrinsics,
) -> Result<FundamentalMatrix> {
    let t = rel.translation;
    if t.norm() <= MIN_BASELINE {
        return Err(Error::DegenerateGeometry);
    }
    let f = k_src.inverse_matrix().transpose() * skew(&t) * rel.rotation * k_tgt.inverse_matrix();
    Ok(FundamentalMatrix {
        f: f / f.norm(),
        epipole: k_src.matrix() * t,
    })
}

/// Line `a·x + b·y + c = 0` with `a² + b² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Line {
    /// Signed distance from `p` to the line.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        self.a * p[0] + self.b * p[1] + self.c
    }
}

/// Epipolar line in the source image of target pixel `(x, y)`.
pub fn epipolar_line(f: &FundamentalMatrix, x: f64, y: f64) -> Result<Line> {
    let l = f.f * Vector3::new(x, y, 1.0);
    let n = l.x.hypot(l.y);
    if !(n > 1e-12 * (1.0 + x.abs() + y.abs())) {
        return Err(Error::DegenerateLine);
    }
    Ok(Line {
        a: l.x / n,
        b: l.y / n,
        c: l.z / n,
    })
}

/// Ordered pair of endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub p0: [f64; 2],
    pub p1: [f64; 2],
}

impl Segment {
    /// Puts the endpoint nearest to `epipole` first.
    pub fn oriented_from(self, epipole: [f64; 2]) -> Segment {
        let d = |p: [f64; 2]| (p[0] - epipole[0]).hypot(p[1] - epipole[1]);
        if d(self.p1) < d(self.p0) {
            Segment { p0: self.p1, p1: self.p0 }
        } else {
            self
        }
    }

    pub fn length(&self) -> f64 {
        (self.p1[0] - self.p0[0]).hypot(self.p1[1] - self.p0[1])
    }
}

/// Intersection of `line` with the pixel-centre rectangle `[0, w−1]×[0, h−1]`,
/// left (then top) endpoint first. `None` when the line misses the image.
pub fn clip_to_image(line: &Line, w: usize, h: usize) -> Option<Segment> {
    let hi = [w as f64 - 1.0, h as f64 - 1.0];
    // foot of the perpendicular from the origin, and the line direction
    let p = [-line.a * line.c, -line.b * line.c];
    let dir = [-line.b, line.a];
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for axis in 0..2 {
        if dir[axis].abs() < 1e-15 {
            if p[axis] < -1e-12 || p[axis] > hi[axis] + 1e-12 {
                return None;
            }
            continue;
        }
        let a = (0.0 - p[axis]) / dir[axis];
        let b = (hi[axis] - p[axis]) / dir[axis];
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    if t0 > t1 + 1e-12 {
        return None;
    }
    let at = |t: f64| {
        [
            (p[0] + t * dir[0]).clamp(0.0, hi[0]),
            (p[1] + t * dir[1]).clamp(0.0, hi[1]),
        ]
    };
    let (a, b) = (at(t0), at(t1.max(t0)));
    if (b[0], b[1]) < (a[0], a[1]) {
        Some(Segment { p0: b, p1: a })
    } else {
        Some(Segment { p0: a, p1: b })
    }
}

/// Fixed-length resampling of one epipolar line.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEpipolarLine {
    pub points: Vec<[f64; 2]>,
    pub valid: Vec<bool>,
}

impl SampledEpipolarLine {
    /// `l` placeholder samples, all invalid.
    pub fn invalid(l: usize) -> Self {
        Self {
            points: vec![[0.0, 0.0]; l],
            valid: vec![false; l],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn any_valid(&self) -> bool {
        self.valid.iter().any(|&v| v)
    }
}

/// `l` points evenly spaced from `seg.p0` to `seg.p1` inclusive.
pub fn sample_line(seg: &Segment, l: usize) -> Result<SampledEpipolarLine> {
    if l < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {l}")));
    }
    let denom = (l - 1) as f64;
    let points = (0..l)
        .map(|i| {
            let s = i as f64 / denom;
            [
                seg.p0[0] + s * (seg.p1[0] - seg.p0[0]),
                seg.p0[1] + s * (seg.p1[1] - seg.p0[1]),
            ]
        })
        .collect();
    Ok(SampledEpipolarLine {
        points,
        valid: vec![true; l],
    })
}

/// Default sample count: the longer image side.
pub fn default_samples(h: usize, w: usize) -> usize {
    h.max(w).max(2)
}

/// Sampled epipolar lines in the source frame for every pixel of a target frame.
#[derive(Debug, Clone)]
pub struct EpipolarGeometry {
    pub h: usize,
    pub w: usize,
    pub l: usize,
    /// Set when the relative pose is a pure rotation; each "line" is then the
    /// single rotation-warped point repeated `l` times.
    pub degenerate: bool,
    /// Row-major over target pixels.
    pub lines: Vec<SampledEpipolarLine>,
    /// Line coefficients per target pixel, `None` when undefined.
    pub line_coeffs: Vec<Option<Line>>,
    pub fundamental: Option<FundamentalMatrix>,
}

fn inside(p: [f64; 2], w: usize, h: usize) -> bool {
    let slack = 1e-9;
    p[0] >= -slack && p[1] >= -slack && p[0] <= w as f64 - 1.0 + slack && p[1] <= h as f64 - 1.0 + slack
}

/// Computes sampled epipolar lines from target frame `frame` (0-based, ≥ 1)
/// into frame 0 on an `h`×`w` grid.
pub fn build_epipolar_geometry(
    traj: &Trajectory,
    frame: usize,
    h: usize,
    w: usize,
    l: usize,
) -> Result<EpipolarGeometry> {
    if frame == 0 || frame >= traj.len() {
        return Err(Error::Domain(format!(
            "target frame must be in 1..{}, got {frame}",
            traj.len()
        )));
    }
    if l < 2 || h == 0 || w == 0 {
        return Err(Error::Domain(format!("invalid grid {h}x{w} with {l} samples")));
    }
    let k = traj.intrinsics().scaled(w as u32, h as u32);
    let rel = relative_pose(traj.pose(0), traj.pose(frame));
    let n = h * w;
    match fundamental_matrix(&rel, &k, &k) {
        Ok(f) => {
            let epipole = f.epipole();
            let mut lines = Vec::with_capacity(n);
            let mut coeffs = Vec::with_capacity(n);
            for y in 0..h {
                for x in 0..w {
                    let line = epipolar_line(&f, x as f64, y as f64).ok();
                    let seg = line.and_then(|ln| clip_to_image(&ln, w, h));
                    let sampled = match seg {
                        Some(seg) => {
                            let seg = match epipole {
                                Some(e) => seg.oriented_from(e),
                                None => seg,
                            };
                            sample_line(&seg, l)?
                        }
                        None => SampledEpipolarLine::invalid(l),
                    };
                    lines.push(sampled);
                    coeffs.push(line);
                }
            }
            Ok(EpipolarGeometry {
                h,
                w,
                l,
                degenerate: false,
                lines,
                line_coeffs: coeffs,
                fundamental: Some(f),
            })
        }
        Err(Error::DegenerateGeometry) => {
            let warp = k.matrix() * rel.rotation * k.inverse_matrix();
            let mut lines = Vec::with_capacity(n);
            for y in 0..h {
                for x in 0..w {
                    let q = warp * Vector3::new(x as f64, y as f64, 1.0);
                    let p = [q.x / q.z, q.y / q.z];
                    let ok = q.z > 0.0 && inside(p, w, h);
                    lines.push(if ok {
                        SampledEpipolarLine {
                            points: vec![p; l],
                            valid: vec![true; l],
                        }
                    } else {
                        SampledEpipolarLine::invalid(l)
                    });
                }
            }
            Ok(EpipolarGeometry {
                h,
                w,
                l,
                degenerate: true,
                lines,
                line_coeffs: vec![None; n],
                fundamental: None,
            })
        }
        Err(e) => Err(e),
    }
}
