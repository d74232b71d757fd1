//! Epipolar constraint attention.
//!
//! Each target-frame pixel attends only to the `l` source-frame features
//! sampled along its epipolar line, so the score matrix has `h·w·l` entries
//! instead of the `(h·w)²` of dense cross-attention.
//!
//! Projections use the row-vector convention: `q = z·W_q`. The block is
//! residual, `out = z + attn·W_out`, and `W_out` starts at zero so a freshly
//! initialised block is the identity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::epipolar::{EpipolarGeometry, SampledEpipolarLine};
use crate::{Error, Result};

/// Additive score bias for masked-out keys. `exp(MASK_BIAS − max)` underflows
/// to exactly zero for any finite score above `MASK_BIAS / 2`.
pub const MASK_BIAS: f64 = -1e9;

/// `h`×`w`×`d` latent grid of one frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub frame: usize,
    h: usize,
    w: usize,
    d: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(frame: usize, h: usize, w: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != h * w * d {
            return Err(Error::Shape(format!(
                "feature map {h}x{w}x{d} needs {} values, got {}",
                h * w * d,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("feature map contains non-finite values".into()));
        }
        Ok(Self { frame, h, w, d, data })
    }

    pub fn zeros(frame: usize, h: usize, w: usize, d: usize) -> Self {
        Self { frame, h, w, d, data: vec![0.0; h * w * d] }
    }

    /// Standard-normal entries drawn from a seeded generator.
    pub fn random(frame: usize, h: usize, w: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let data = (0..h * w * d).map(|_| normal.sample(&mut rng)).collect();
        Self { frame, h, w, d, data }
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn channels(&self) -> usize {
        self.d
    }

    pub fn pixels(&self) -> usize {
        self.h * self.w
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, p: usize) -> &[f64] {
        &self.data[p * self.d..(p + 1) * self.d]
    }

    pub fn pixel_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.data[p * self.d..(p + 1) * self.d]
    }

    /// Bilinear sample at continuous pixel-centre coordinates into `out`.
    pub fn sample_bilinear(&self, x: f64, y: f64, out: &mut [f64]) {
        let xc = x.clamp(0.0, (self.w - 1) as f64);
        let yc = y.clamp(0.0, (self.h - 1) as f64);
        let x0 = xc.floor() as usize;
        let y0 = yc.floor() as usize;
        let x1 = (x0 + 1).min(self.w - 1);
        let y1 = (y0 + 1).min(self.h - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let taps = [
            (y0 * self.w + x0, (1.0 - fx) * (1.0 - fy)),
            (y0 * self.w + x1, fx * (1.0 - fy)),
            (y1 * self.w + x0, (1.0 - fx) * fy),
            (y1 * self.w + x1, fx * fy),
        ];
        out.fill(0.0);
        for (p, wgt) in taps {
            if wgt == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.pixel(p)) {
                *o += wgt * v;
            }
        }
    }
}

/// Source features gathered along every pixel's sampled epipolar line.
#[derive(Debug, Clone, PartialEq)]
pub struct EpipolarFeatures {
    n: usize,
    l: usize,
    d: usize,
    data: Vec<f64>,
    valid: Vec<bool>,
}

impl EpipolarFeatures {
    pub fn from_raw(n: usize, l: usize, d: usize, data: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if data.len() != n * l * d || valid.len() != n * l {
            return Err(Error::Shape(format!(
                "epipolar features {n}x{l}x{d}: got {} values and {} mask entries",
                data.len(),
                valid.len()
            )));
        }
        Ok(Self { n, l, d, data, valid })
    }

    pub fn pixels(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> usize {
        self.l
    }

    pub fn channels(&self) -> usize {
        self.d
    }

    /// The `l`×`d` features and `l` mask entries of pixel `p`.
    pub fn row(&self, p: usize) -> (&[f64], &[bool]) {
        let s = p * self.l;
        (&self.data[s * self.d..(s + self.l) * self.d], &self.valid[s..s + self.l])
    }

    /// Whether pixel `p` has at least one valid sample. Pixels without any
    /// pass through attention unchanged.
    pub fn has_valid(&self, p: usize) -> bool {
        self.row(p).1.iter().any(|&v| v)
    }
}

/// Gathers source features at every valid sample by bilinear interpolation.
pub fn gather_epipolar_features(
    source: &FeatureMap,
    lines: &[SampledEpipolarLine],
) -> Result<EpipolarFeatures> {
    if lines.len() != source.pixels() {
        return Err(Error::Shape(format!(
            "{} epipolar lines for {} pixels",
            lines.len(),
            source.pixels()
        )));
    }
    let l = lines.first().map_or(0, |ln| ln.len());
    if l == 0 || lines.iter().any(|ln| ln.len() != l || ln.valid.len() != l) {
        return Err(Error::Shape("epipolar lines must share one non-zero sample count".into()));
    }
    let d = source.d;
    let mut data = vec![0.0; lines.len() * l * d];
    let mut valid = Vec::with_capacity(lines.len() * l);
    for (p, line) in lines.iter().enumerate() {
        for (j, (pt, &ok)) in line.points.iter().zip(&line.valid).enumerate() {
            valid.push(ok);
            if ok {
                let off = (p * l + j) * d;
                source.sample_bilinear(pt[0], pt[1], &mut data[off..off + d]);
            }
        }
    }
    Ok(EpipolarFeatures { n: lines.len(), l, d, data, valid })
}

/// Row-major `rows`×`cols` matrix used for the attention projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Weight {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} weight needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut w = Self::zeros(n, n);
        for i in 0..n {
            w.data[i * n + i] = 1.0;
        }
        w
    }

    pub fn random(rows: usize, cols: usize, std: f64, rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(0.0, std).unwrap();
        Self {
            rows,
            cols,
            data: (0..rows * cols).map(|_| normal.sample(rng)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `out = x·W`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (r, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (o, wv) in out.iter_mut().zip(row) {
                *o += xv * wv;
            }
        }
    }
}

/// Projection weights of one attention block.
#[derive(Debug, Clone, PartialEq)]
pub struct EcaWeights {
    d: usize,
    heads: usize,
    pub w_q: Weight,
    pub w_k: Weight,
    pub w_v: Weight,
    pub w_out: Weight,
}

impl EcaWeights {
    pub fn new(heads: usize, w_q: Weight, w_k: Weight, w_v: Weight, w_out: Weight) -> Result<Self> {
        let d = w_q.rows;
        for w in [&w_q, &w_k, &w_v, &w_out] {
            if w.rows != d || w.cols != d {
                return Err(Error::Shape(format!(
                    "projection is {}x{}, expected {d}x{d}",
                    w.rows, w.cols
                )));
            }
        }
        if heads == 0 || !d.is_multiple_of(heads) {
            return Err(Error::Shape(format!("{d} channels do not split into {heads} heads")));
        }
        Ok(Self { d, heads, w_q, w_k, w_v, w_out })
    }

    /// Gaussian `W_q, W_k, W_v` with std `1/√d`, zero `W_out`.
    pub fn init(d: usize, heads: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = 1.0 / (d as f64).sqrt();
        let w_q = Weight::random(d, d, std, &mut rng);
        let w_k = Weight::random(d, d, std, &mut rng);
        let w_v = Weight::random(d, d, std, &mut rng);
        Self::new(heads, w_q, w_k, w_v, Weight::zeros(d, d))
    }

    /// Same as [`EcaWeights::init`] but with a random output projection, as a
    /// trained block would have.
    pub fn random(d: usize, heads: usize, seed: u64) -> Result<Self> {
        let mut wts = Self::init(d, heads, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        wts.w_out = Weight::random(d, d, 1.0 / (d as f64).sqrt(), &mut rng);
        Ok(wts)
    }

    pub fn channels(&self) -> usize {
        self.d
    }

    fn check(&self) -> Result<()> {
        for w in [&self.w_q, &self.w_k, &self.w_v, &self.w_out] {
            if w.rows != self.d || w.cols != self.d {
                return Err(Error::Shape(format!(
                    "projection is {}x{}, expected {d}x{d}",
                    w.rows,
                    w.cols,
                    d = self.d
                )));
            }
        }
        Ok(())
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn head_dim(&self) -> usize {
        self.d / self.heads
    }
}

/// In-place softmax of `scores` (already biased for masked entries).
fn softmax(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

/// Epipolar constraint attention over pre-gathered line features.
///
/// Scores are evaluated as `(q·W_kᵀ)·e` and values as `(Σ a·e)·W_v`, which
/// keeps the per-pixel cost at `O(d² + l·d)` per head.
pub fn eca_forward(z: &FeatureMap, e: &EpipolarFeatures, wts: &EcaWeights) -> Result<FeatureMap> {
    wts.check()?;
    let d = wts.d;
    if z.d != d || e.d != d {
        return Err(Error::Shape(format!(
            "weights have {d} channels, query {} and keys {}",
            z.d, e.d
        )));
    }
    if z.pixels() != e.n {
        return Err(Error::Shape(format!(
            "{} query pixels but {} epipolar rows",
            z.pixels(),
            e.n
        )));
    }
    let (heads, dh, l) = (wts.heads, wts.head_dim(), e.l);
    let scale = 1.0 / (dh as f64).sqrt();
    let mut out = z.clone();
    let mut q = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut pooled = vec![0.0; d];
    let mut attended = vec![0.0; d];
    let mut residual = vec![0.0; d];
    let mut scores = vec![0.0; l];
    for p in 0..z.pixels() {
        let (feats, valid) = e.row(p);
        if !valid.iter().any(|&v| v) {
            continue;
        }
        wts.w_q.apply(z.pixel(p), &mut q);
        for h in 0..heads {
            let cols = h * dh..(h + 1) * dh;
            // g = W_k[:, head] · q[head]
            for (i, gi) in g.iter_mut().enumerate() {
                let row = &wts.w_k.data[i * d..(i + 1) * d];
                *gi = row[cols.clone()].iter().zip(&q[cols.clone()]).map(|(a, b)| a * b).sum();
            }
            for (j, s) in scores.iter_mut().enumerate() {
                *s = if valid[j] {
                    let ej = &feats[j * d..(j + 1) * d];
                    scale * ej.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
                } else {
                    MASK_BIAS
                };
            }
            softmax(&mut scores);
            pooled.fill(0.0);
            for (j, &a) in scores.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (pv, ev) in pooled.iter_mut().zip(&feats[j * d..(j + 1) * d]) {
                    *pv += a * ev;
                }
            }
            for c in cols {
                attended[c] = (0..d).map(|i| pooled[i] * wts.w_v.data[i * d + c]).sum();
            }
        }
        wts.w_out.apply(&attended, &mut residual);
        for (o, r) in out.pixel_mut(p).iter_mut().zip(&residual) {
            *o += r;
        }
    }
    Ok(out)
}

/// Softmax weights of pixel `p` over its `l` samples, one row per head.
/// Rows of pixels without valid samples are empty.
pub fn attention_weights(
    z: &FeatureMap,
    e: &EpipolarFeatures,
    wts: &EcaWeights,
    p: usize,
) -> Result<Vec<Vec<f64>>> {
    wts.check()?;
    let d = wts.d;
    if z.d != d || e.d != d || p >= e.n || z.pixels() != e.n {
        return Err(Error::Shape(format!("pixel {p} of {}x{d} attention", e.n)));
    }
    let (feats, valid) = e.row(p);
    if !valid.iter().any(|&v| v) {
        return Ok(Vec::new());
    }
    let mut q = vec![0.0; d];
    wts.w_q.apply(z.pixel(p), &mut q);
    let mut k = vec![0.0; d];
    let dh = wts.head_dim();
    let scale = 1.0 / (dh as f64).sqrt();
    let mut rows = vec![vec![0.0; e.l]; wts.heads];
    for j in 0..e.l {
        wts.w_k.apply(&feats[j * d..(j + 1) * d], &mut k);
        for (h, row) in rows.iter_mut().enumerate() {
            row[j] = if valid[j] {
                scale * (h * dh..(h + 1) * dh).map(|c| q[c] * k[c]).sum::<f64>()
            } else {
                MASK_BIAS
            };
        }
    }
    rows.iter_mut().for_each(|r| softmax(r));
    Ok(rows)
}

/// Dense cross-attention from `z_i` to every pixel of `z_1`, restricted by
/// `band_mask` (row-major `[target pixel][source pixel]`). Reference for
/// [`eca_forward`]; costs `O((h·w)²·d)`.
pub fn masked_dense_attention_oracle(
    z_i: &FeatureMap,
    z_1: &FeatureMap,
    band_mask: &[bool],
    wts: &EcaWeights,
) -> Result<FeatureMap> {
    wts.check()?;
    let d = wts.d;
    if z_i.d != d || z_1.d != d {
        return Err(Error::Shape(format!(
            "weights have {d} channels, features {} and {}",
            z_i.d, z_1.d
        )));
    }
    let (n_t, n_s) = (z_i.pixels(), z_1.pixels());
    if band_mask.len() != n_t * n_s {
        return Err(Error::Shape(format!(
            "band mask has {} entries, expected {}",
            band_mask.len(),
            n_t * n_s
        )));
    }
    let project = |w: &Weight| {
        let mut all = vec![0.0; n_s * d];
        for s in 0..n_s {
            w.apply(z_1.pixel(s), &mut all[s * d..(s + 1) * d]);
        }
        all
    };
    let keys = project(&wts.w_k);
    let values = project(&wts.w_v);
    let (heads, dh) = (wts.heads, wts.head_dim());
    let scale = 1.0 / (dh as f64).sqrt();
    let mut out = z_i.clone();
    let mut q = vec![0.0; d];
    let mut attended = vec![0.0; d];
    let mut residual = vec![0.0; d];
    let mut scores = vec![0.0; n_s];
    for p in 0..n_t {
        let mask = &band_mask[p * n_s..(p + 1) * n_s];
        if !mask.iter().any(|&m| m) {
            continue;
        }
        wts.w_q.apply(z_i.pixel(p), &mut q);
        for h in 0..heads {
            let cols = h * dh..(h + 1) * dh;
            for (s, sc) in scores.iter_mut().enumerate() {
                *sc = if mask[s] {
                    let k = &keys[s * d..(s + 1) * d];
                    scale * cols.clone().map(|c| q[c] * k[c]).sum::<f64>()
                } else {
                    MASK_BIAS
                };
            }
            softmax(&mut scores);
            for c in cols {
                attended[c] = scores
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a != 0.0)
                    .map(|(s, &a)| a * values[s * d + c])
                    .sum();
            }
        }
        wts.w_out.apply(&attended, &mut residual);
        for (o, r) in out.pixel_mut(p).iter_mut().zip(&residual) {
            *o += r;
        }
    }
    Ok(out)
}

/// Marks source pixels within `threshold` pixels of each target pixel's
/// epipolar line. Pixels without a defined line get an empty row.
pub fn epipolar_band_mask(geo: &EpipolarGeometry, threshold: f64) -> Vec<bool> {
    let n = geo.h * geo.w;
    let mut mask = vec![false; n * n];
    for (p, line) in geo.line_coeffs.iter().enumerate() {
        let Some(line) = line else { continue };
        for y in 0..geo.h {
            for x in 0..geo.w {
                if line.distance([x as f64, y as f64]).abs() <= threshold {
                    mask[p * n + y * geo.w + x] = true;
                }
            }
        }
    }
    mask
}

/// Score-matrix operation counts of epipolar versus dense attention.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EcaCost {
    pub eca_score_ops: u64,
    pub dense_score_ops: u64,
    /// `dense / eca = h·w / l`.
    pub ratio: f64,
}

pub fn eca_cost(h: u64, w: u64, l: u64, d: u64) -> Result<EcaCost> {
    if h == 0 || w == 0 || l == 0 || d == 0 {
        return Err(Error::Domain("attention dimensions must be positive".into()));
    }
    let eca_score_ops = h * w * l * d;
    let dense_score_ops = (h * w) * (h * w) * d;
    Ok(EcaCost {
        eca_score_ops,
        dense_score_ops,
        ratio: dense_score_ops as f64 / eca_score_ops as f64,
    })
}
