#![allow(dead_code)]

use std::path::Path;

use g2l_core::cnn::{default_architecture, save_model, CnnModel, InputNorm, Network, INPUT_SIZE};
use g2l_core::corpus::{render, sample_spec};
use g2l_core::raster::encode_png;
use g2l_core::ChartClass;

/// All-zero weights: every image gets the uniform distribution.
pub fn zero_model() -> CnnModel {
    let shape = [1, INPUT_SIZE, INPUT_SIZE];
    let net = Network::zeros(&shape, &default_architecture(ChartClass::ALL.len())).unwrap();
    CnnModel::new(ChartClass::ALL.to_vec(), InputNorm::IDENTITY, net).unwrap()
}

pub fn write_zero_model(path: &Path) {
    save_model(&zero_model(), path).unwrap();
}

pub fn chart_png(class: ChartClass, seed: u64) -> Vec<u8> {
    let (img, _) = render(&sample_spec(class, seed)).unwrap();
    encode_png(&img).unwrap()
}
