//! A small convolutional chart-type classifier trained from scratch.
//!
//! Everything is generic over the float type so the same code trains in
//! `f32` and can be checked against finite differences in `f64`.

mod io;
mod net;
mod train;

use std::fmt::Debug;

use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use net::{argmax, default_architecture, softmax, Grads, Layer, LayerSpec, Network};
pub use train::{train, train_samples, train_with, EpochStats, HyperParams, TrainReport};

use crate::chart::ChartClass;
use crate::error::{Error, Result};
use crate::raster::RasterImage;

pub const INPUT_SIZE: usize = 64;
pub const MIN_WIDTH: u32 = 64;
pub const MIN_HEIGHT: u32 = 48;

pub trait Scalar: Float + Default + Debug + Send + Sync + 'static {}
impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::InvalidInput(format!(
                "tensor shape {shape:?} does not hold {} values",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![T::zero(); n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Grayscale in [0, 1], box-averaged to 64x64, shaped `[1, 64, 64]`.
/// Not yet standardized; see [`CnnModel::standardize`].
pub fn preprocess(img: &RasterImage) -> Result<Tensor<f32>> {
    let (w, h) = (img.width(), img.height());
    if w < MIN_WIDTH || h < MIN_HEIGHT {
        return Err(Error::InvalidInput(format!(
            "image {w}x{h} is smaller than {MIN_WIDTH}x{MIN_HEIGHT}"
        )));
    }
    // Luminance in thousandths keeps the arithmetic exact until the final
    // division, so constant images map to exact constants.
    let mut lum = Vec::with_capacity(w as usize * h as usize);
    let px = img.pixels();
    let ch = img.channels() as usize;
    for i in 0..(w as usize * h as usize) {
        let p = &px[i * ch..];
        lum.push(if ch >= 3 {
            299 * p[0] as u64 + 587 * p[1] as u64 + 114 * p[2] as u64
        } else {
            1000 * p[0] as u64
        });
    }
    let span = |i: usize, n: u32| {
        let a = i * n as usize / INPUT_SIZE;
        let b = ((i + 1) * n as usize / INPUT_SIZE).max(a + 1);
        a..b
    };
    let mut out = Vec::with_capacity(INPUT_SIZE * INPUT_SIZE);
    for oy in 0..INPUT_SIZE {
        let ys = span(oy, h);
        for ox in 0..INPUT_SIZE {
            let xs = span(ox, w);
            let mut sum = 0u64;
            for y in ys.clone() {
                for x in xs.clone() {
                    sum += lum[y * w as usize + x];
                }
            }
            let count = (ys.len() * xs.len()) as f64;
            out.push((sum as f64 / (count * 255_000.0)) as f32);
        }
    }
    Tensor::new(vec![1, INPUT_SIZE, INPUT_SIZE], out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNorm {
    pub mean: f32,
    pub std: f32,
}

impl InputNorm {
    pub const IDENTITY: InputNorm = InputNorm { mean: 0.0, std: 1.0 };

    /// Mean and standard deviation over every value of every tensor.
    pub fn fit<'a>(tensors: impl IntoIterator<Item = &'a Tensor<f32>>) -> Self {
        let (mut n, mut s, mut s2) = (0f64, 0f64, 0f64);
        for t in tensors {
            for &v in t.data() {
                n += 1.0;
                s += v as f64;
                s2 += v as f64 * v as f64;
            }
        }
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        let std = var.sqrt();
        InputNorm {
            mean: mean as f32,
            std: if std > 1e-6 { std as f32 } else { 1.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: ChartClass,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub classes: Vec<ChartClass>,
    pub input_norm: InputNorm,
    pub net: Network<f32>,
}

impl CnnModel {
    /// Checks the class list against the network output.
    pub fn new(classes: Vec<ChartClass>, input_norm: InputNorm, net: Network<f32>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Model("class list is empty".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].contains(c) {
                return Err(Error::Model(format!("class {c} listed twice")));
            }
        }
        if net.output_len() != classes.len() {
            return Err(Error::Model(format!(
                "{} classes but the network has {} outputs",
                classes.len(),
                net.output_len()
            )));
        }
        if !(input_norm.mean.is_finite() && input_norm.std.is_finite() && input_norm.std > 0.0) {
            return Err(Error::Model("input_norm must be finite with positive std".into()));
        }
        Ok(CnnModel {
            classes,
            input_norm,
            net,
        })
    }

    pub fn standardize(&self, t: &Tensor<f32>) -> Tensor<f32> {
        let InputNorm { mean, std } = self.input_norm;
        t.map(|v| (v - mean) / std)
    }

    /// Class probabilities for a preprocessed, standardized input.
    pub fn forward(&self, input: &Tensor<f32>) -> Result<Vec<f32>> {
        let p = self.net.forward(input)?;
        net::ensure_finite(&p, "probabilities")?;
        Ok(p)
    }

    pub fn loss_and_grad(&self, batch: &[(&Tensor<f32>, usize)]) -> Result<(f32, Grads<f32>)> {
        self.net.loss_and_grad(batch)
    }

    pub fn probabilities(&self, img: &RasterImage) -> Result<Vec<f32>> {
        let t = self.standardize(&preprocess(img)?);
        self.forward(&t)
    }

    pub fn predict(&self, img: &RasterImage) -> Result<Prediction> {
        let p = self.probabilities(img)?;
        let i = argmax(&p);
        Ok(Prediction {
            class: self.classes[i],
            confidence: p[i] as f64,
        })
    }
}
