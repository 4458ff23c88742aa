//! Fixtures shared by the benchmarks.

use g2l_core::corpus::{render, sample_spec};
use g2l_core::raster::RasterImage;
use g2l_core::ChartClass;

/// One rendered chart per class, fixed seeds.
pub fn charts() -> Vec<(ChartClass, RasterImage)> {
    ChartClass::ALL
        .iter()
        .map(|&c| (c, render(&sample_spec(c, 1)).expect("render").0))
        .collect()
}
