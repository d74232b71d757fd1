//! Raster helpers: epipolar-line overlays, Plücker false-colour images and
//! binary PPM encoding.

use std::io::Write;

use crate::camera::Trajectory;
use crate::epipolar::build_epipolar_geometry;
use crate::plucker::PluckerMap;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples.
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![0; width * height * 3] }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: i64, y: i64, rgb: [u8; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    fn checkerboard(&mut self, x0: usize, w: usize, h: usize, cell: usize) {
        for y in 0..h {
            for x in 0..w {
                let v = if (x / cell + y / cell).is_multiple_of(2) { 200 } else { 150 };
                self.put((x0 + x) as i64, y as i64, [v, v, v]);
            }
        }
    }

    fn marker(&mut self, x: f64, y: f64, radius: i64, rgb: [u8; 3]) {
        let (cx, cy) = (x.round() as i64, y.round() as i64);
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                self.put(cx + dx, cy + dy, rgb);
            }
        }
    }

    /// RGBA copy with opaque alpha, as canvas `ImageData` expects.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.data
            .chunks_exact(3)
            .flat_map(|px| [px[0], px[1], px[2], 255])
            .collect()
    }

    /// Binary `P6` encoding with maxval 255.
    pub fn write_ppm(&self, mut out: impl Write) -> Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.data)?;
        Ok(())
    }

    /// Decodes a binary `P6` image with maxval 255, allowing comments.
    pub fn read_ppm(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 0, msg: format!("ppm: {msg}") };
        let mut pos = 0;
        let mut token = || -> Result<String> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P6" {
            return Err(bad("not a P6 image"));
        }
        let width: usize = token()?.parse().map_err(|_| bad("bad width"))?;
        let height: usize = token()?.parse().map_err(|_| bad("bad height"))?;
        if token()? != "255" {
            return Err(bad("only maxval 255 is supported"));
        }
        // exactly one whitespace byte separates the header from the raster
        let body = &bytes[pos + 1..];
        if body.len() != width * height * 3 {
            return Err(bad("raster size does not match header"));
        }
        Ok(Self { width, height, data: body.to_vec() })
    }
}

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [128, 128, 0],
];

/// `k`×`k` grid of query pixels spread evenly over a `w`×`h` image.
pub fn grid_queries(w: usize, h: usize, k: usize) -> Vec<(usize, usize)> {
    let at = |i: usize, n: usize| ((2 * i + 1) * n / (2 * k)).min(n - 1);
    (0..k)
        .flat_map(|r| (0..k).map(move |c| (c, r)))
        .map(|(c, r)| (at(c, w), at(r, h)))
        .collect()
}

/// Side-by-side overlay: target frame `frame` on the left with query markers,
/// the first frame on the right with each query's sampled epipolar points in
/// the matching colour.
pub fn render_epipolar(
    traj: &Trajectory,
    frame: usize,
    h: usize,
    w: usize,
    l: usize,
    queries: &[(usize, usize)],
) -> Result<RgbImage> {
    let geo = build_epipolar_geometry(traj, frame, h, w, l)?;
    let gap = 4;
    let mut img = RgbImage::new(2 * w + gap, h);
    img.checkerboard(0, w, h, 16);
    img.checkerboard(w + gap, w, h, 16);
    let off = (w + gap) as f64;
    for (qi, &(x, y)) in queries.iter().enumerate() {
        if x >= w || y >= h {
            return Err(Error::Domain(format!("query ({x}, {y}) outside {w}x{h}")));
        }
        let color = PALETTE[qi % PALETTE.len()];
        img.marker(x as f64, y as f64, 2, color);
        let line = &geo.lines[y * w + x];
        for (p, _) in line.points.iter().zip(&line.valid).filter(|(_, &v)| v) {
            img.marker(off + p[0], p[1], 0, color);
        }
    }
    if let Some(e) = geo.fundamental.and_then(|f| f.epipole()) {
        img.marker(off + e[0], e[1], 3, [0, 0, 0]);
    }
    Ok(img)
}

/// Which half of a Plücker map to visualise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PluckerPart {
    Moment,
    Direction,
}

/// Maps three channels to colour: directions from [−1, 1], moments scaled by
/// the largest magnitude in the map.
pub fn plucker_to_rgb(map: &PluckerMap, part: PluckerPart) -> RgbImage {
    let base = match part {
        PluckerPart::Moment => 0,
        PluckerPart::Direction => 3,
    };
    let scale = match part {
        PluckerPart::Direction => 1.0,
        PluckerPart::Moment => map
            .data()
            .chunks(6)
            .flat_map(|px| px[..3].iter().map(|v| v.abs()))
            .fold(0.0, f64::max),
    };
    let mut img = RgbImage::new(map.width(), map.height());
    for y in 0..map.height() {
        for x in 0..map.width() {
            let px = &map.pixel(y, x)[base..base + 3];
            let rgb = [0, 1, 2].map(|c| {
                let v = if scale > 0.0 { px[c] / scale } else { 0.0 };
                ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8
            });
            img.put(x as i64, y as i64, rgb);
        }
    }
    img
}
