//! Camera-control adapter: a 1×1 convolution over features concatenated with
//! their Plücker embedding.
//!
//! The convolution is split into a feature block and a camera block. At
//! initialisation the feature block is the identity and the camera block and
//! bias are zero, so inserting the adapter leaves a pretrained network's
//! activations untouched.

use nalgebra::{DMatrix, DVector};

use crate::eca::FeatureMap;
use crate::plucker::{PluckerMap, CHANNELS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ControlAdapter {
    /// `d`×`d`, applied to feature channels.
    pub w_feat: DMatrix<f64>,
    /// `d`×6, applied to Plücker channels.
    pub w_cam: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl ControlAdapter {
    pub fn init(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("adapter needs at least one channel".into()));
        }
        Ok(Self {
            w_feat: DMatrix::identity(d, d),
            w_cam: DMatrix::zeros(d, CHANNELS),
            bias: DVector::zeros(d),
        })
    }

    pub fn channels(&self) -> usize {
        self.w_feat.nrows()
    }

    fn check(&self) -> Result<()> {
        let d = self.channels();
        if self.w_feat.ncols() != d
            || self.w_cam.shape() != (d, CHANNELS)
            || self.bias.len() != d
        {
            return Err(Error::Shape(format!(
                "adapter blocks {:?}, {:?}, {} are inconsistent",
                self.w_feat.shape(),
                self.w_cam.shape(),
                self.bias.len()
            )));
        }
        Ok(())
    }
}

/// Per pixel: `W_feat·f + W_cam·p + bias`.
///
/// The Plücker map must already match the feature resolution; use
/// [`crate::plucker::downsample`] first when it does not.
pub fn adapter_forward(
    adapter: &ControlAdapter,
    features: &FeatureMap,
    plucker: &PluckerMap,
) -> Result<FeatureMap> {
    adapter.check()?;
    let d = adapter.channels();
    if features.channels() != d {
        return Err(Error::Shape(format!(
            "adapter expects {d} channels, features have {}",
            features.channels()
        )));
    }
    if (plucker.height(), plucker.width()) != (features.height(), features.width()) {
        return Err(Error::Shape(format!(
            "plücker map is {}x{} but features are {}x{}; downsample the embedding first",
            plucker.height(),
            plucker.width(),
            features.height(),
            features.width()
        )));
    }
    let mut data = Vec::with_capacity(features.data().len());
    for y in 0..features.height() {
        for x in 0..features.width() {
            let f = features.pixel(y * features.width() + x);
            let p = plucker.pixel(y, x);
            for i in 0..d {
                let mut acc = 0.0;
                for (j, fj) in f.iter().enumerate() {
                    acc += adapter.w_feat[(i, j)] * fj;
                }
                let mut cam = 0.0;
                for (c, pc) in p.iter().enumerate() {
                    cam += adapter.w_cam[(i, c)] * pc;
                }
                data.push(acc + cam + adapter.bias[i]);
            }
        }
    }
    FeatureMap::new(features.frame, features.height(), features.width(), d, data)
}
