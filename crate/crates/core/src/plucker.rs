//! Per-pixel Plücker ray embeddings.
//!
//! Every pixel's viewing ray is stored as the pair `(o × d, d)` where `o` is
//! the camera centre and `d` the unit direction. The moment does not depend on
//! which point of the ray is used as origin, so the embedding describes the
//! ray itself rather than one parametrisation of it.

use std::io::{Read, Write};

use nalgebra::Vector3;

use crate::camera::{pixel_ray, Intrinsics, Pose};
use crate::{Error, Result};

pub const CHANNELS: usize = 6;
const MAGIC: &str = "PLK1";

/// `h`×`w`×6 row-major grid; channels 0..3 are the moment, 3..6 the direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PluckerMap {
    h: usize,
    w: usize,
    data: Vec<f64>,
}

impl PluckerMap {
    pub fn from_raw(h: usize, w: usize, data: Vec<f64>) -> Result<Self> {
        if h == 0 || w == 0 || data.len() != h * w * CHANNELS {
            return Err(Error::Shape(format!(
                "plücker map {h}x{w} needs {} values, got {}",
                h * w * CHANNELS,
                data.len()
            )));
        }
        Ok(Self { h, w, data })
    }

    /// A map whose every pixel holds `value`.
    pub fn constant(h: usize, w: usize, value: [f64; CHANNELS]) -> Self {
        Self {
            h,
            w,
            data: value.iter().copied().cycle().take(h * w * CHANNELS).collect(),
        }
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, y: usize, x: usize) -> &[f64] {
        let i = (y * self.w + x) * CHANNELS;
        &self.data[i..i + CHANNELS]
    }

    pub fn moment(&self, y: usize, x: usize) -> Vector3<f64> {
        Vector3::from_column_slice(&self.pixel(y, x)[..3])
    }

    pub fn direction(&self, y: usize, x: usize) -> Vector3<f64> {
        Vector3::from_column_slice(&self.pixel(y, x)[3..])
    }

    /// Writes the `PLK1 h w\n` header followed by little-endian f32 values.
    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{MAGIC} {} {}", self.h, self.w)?;
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = std::str::from_utf8(&bytes[..nl])
            .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
        if toks.len() != 3 || toks[0] != MAGIC {
            return Err(bad("expected `PLK1 h w` header"));
        }
        let h: usize = toks[1].parse().map_err(|_| bad("bad height"))?;
        let w: usize = toks[2].parse().map_err(|_| bad("bad width"))?;
        let body = &bytes[nl + 1..];
        if body.len() != h * w * CHANNELS * 4 {
            return Err(bad("payload length does not match header"));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        Self::from_raw(h, w, data)
    }
}

/// Plücker embedding of `pose` on an `h`×`w` grid.
///
/// Intrinsics are rescaled to the grid when it differs from the sensor size.
pub fn plucker_embed(pose: &Pose, k: &Intrinsics, h: usize, w: usize) -> PluckerMap {
    let kg = k.scaled(w as u32, h as u32);
    let mut data = Vec::with_capacity(h * w * CHANNELS);
    for y in 0..h {
        for x in 0..w {
            let (o, d) = pixel_ray(pose, &kg, x as f64, y as f64);
            let m = o.cross(&d);
            data.extend_from_slice(&[m.x, m.y, m.z, d.x, d.y, d.z]);
        }
    }
    PluckerMap { h, w, data }
}

/// Source coordinate and neighbour indices for align-corners-false resizing.
fn resize_taps(dst: usize, dst_len: usize, src_len: usize) -> (usize, usize, f64) {
    let scale = src_len as f64 / dst_len as f64;
    let s = ((dst as f64 + 0.5) * scale - 0.5).max(0.0);
    let i0 = (s.floor() as usize).min(src_len - 1);
    let i1 = (i0 + 1).min(src_len - 1);
    (i0, i1, s - i0 as f64)
}

/// Bilinear resize to `h2`×`w2`, then restores unit directions and moment
/// orthogonality.
pub fn downsample(map: &PluckerMap, h2: usize, w2: usize) -> Result<PluckerMap> {
    if h2 == 0 || w2 == 0 || h2 > map.h || w2 > map.w {
        return Err(Error::Shape(format!(
            "cannot downsample {}x{} to {h2}x{w2}",
            map.h, map.w
        )));
    }
    let mut data = Vec::with_capacity(h2 * w2 * CHANNELS);
    for y in 0..h2 {
        let (y0, y1, fy) = resize_taps(y, h2, map.h);
        for x in 0..w2 {
            let (x0, x1, fx) = resize_taps(x, w2, map.w);
            let mut v = [0.0; CHANNELS];
            for (c, out) in v.iter_mut().enumerate() {
                let top = map.pixel(y0, x0)[c] * (1.0 - fx) + map.pixel(y0, x1)[c] * fx;
                let bottom = map.pixel(y1, x0)[c] * (1.0 - fx) + map.pixel(y1, x1)[c] * fx;
                *out = top * (1.0 - fy) + bottom * fy;
            }
            let d = Vector3::new(v[3], v[4], v[5]);
            let norm = d.norm();
            if !(norm > 1e-12) {
                return Err(Error::Numeric(format!(
                    "interpolated direction vanishes at ({y}, {x})"
                )));
            }
            let d = d / norm;
            let m = Vector3::new(v[0], v[1], v[2]);
            let m = m - d * m.dot(&d);
            data.extend_from_slice(&[m.x, m.y, m.z, d.x, d.y, d.z]);
        }
    }
    Ok(PluckerMap { h: h2, w: w2, data })
}
