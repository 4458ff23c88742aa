//! Chart image to plotting code.
//!
//! The pipeline classifies a chart image with a small CNN ([`cnn`]), reads
//! its text with a glyph-template OCR engine ([`ocr`]), infers title, axis
//! labels, legend and tick count from text layout ([`semantics`]), and fills
//! a per-class plotting template ([`codegen`]). [`corpus`] synthesizes the
//! labeled charts used both for training and as ground truth.

pub mod chart;
pub mod cnn;
pub mod codegen;
pub mod corpus;
pub mod error;
pub mod ocr;
pub mod pipeline;
pub mod raster;
pub mod semantics;

pub use chart::{ChartClass, ChartSpec};
pub use error::{Error, Result, Stage};
