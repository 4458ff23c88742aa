//! Glyph-template OCR over the embedded bitmap font.
//!
//! `binarize` -> `extract_components` -> `recognize_glyphs` -> `group_words`
//! -> `group_phrases`. Only horizontal and 90-degree counterclockwise text is
//! read. Lines, bars, markers and other chart ink are dropped either by the
//! size filter or because they match no glyph.

mod glyphs;
mod words;

use serde::{Deserialize, Serialize};

pub use glyphs::{recognize_glyphs, GlyphMatch, MATCH_THRESHOLD, MAX_SCALE};
pub use words::{group_phrases, group_words, Phrase, Word};

use crate::raster::{BBox, BitmapFont, RasterImage, GLYPH_HEIGHT};

pub const DEFAULT_THRESHOLD: u8 = 128;

/// Components whose width or height exceeds three times the tallest glyph
/// at the largest supported scale are never text.
pub const MAX_TEXT_EXTENT: i32 = 3 * GLYPH_HEIGHT as i32 * MAX_SCALE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// A pixel is ink iff its luminance is strictly below `threshold`.
pub fn binarize(img: &RasterImage, threshold: u8) -> Mask {
    let (w, h) = (img.width(), img.height());
    let mut bits = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            bits.push(img.luma(x, y) < threshold as f32);
        }
    }
    Mask { width: w, height: h, bits }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub pixels: Vec<(i32, i32)>,
    pub bbox: BBox,
}

impl Component {
    /// Row-major occupancy over the bounding box.
    pub fn bitmap(&self) -> Vec<bool> {
        let b = self.bbox;
        let mut v = vec![false; (b.w * b.h) as usize];
        for &(x, y) in &self.pixels {
            v[((y - b.y) * b.w + (x - b.x)) as usize] = true;
        }
        v
    }
}

/// 8-connected ink components in raster-scan order of their first pixel,
/// minus the ones too large to be text.
pub fn extract_components(mask: &Mask) -> Vec<Component> {
    let (w, h) = (mask.width as i32, mask.height as i32);
    let mut seen = vec![false; mask.bits.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for y0 in 0..h {
        for x0 in 0..w {
            let i0 = (y0 * w + x0) as usize;
            if !mask.bits[i0] || seen[i0] {
                continue;
            }
            seen[i0] = true;
            stack.push((x0, y0));
            let mut pixels = Vec::new();
            let (mut xa, mut ya, mut xb, mut yb) = (x0, y0, x0, y0);
            while let Some((x, y)) = stack.pop() {
                pixels.push((x, y));
                xa = xa.min(x);
                xb = xb.max(x);
                ya = ya.min(y);
                yb = yb.max(y);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let j = (ny * w + nx) as usize;
                        if mask.bits[j] && !seen[j] {
                            seen[j] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            let bbox = BBox::new(xa, ya, xb - xa + 1, yb - ya + 1);
            if bbox.w > MAX_TEXT_EXTENT || bbox.h > MAX_TEXT_EXTENT {
                continue;
            }
            pixels.sort_unstable_by_key(|&(x, y)| (y, x));
            out.push(Component { pixels, bbox });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub w: u32,
    pub h: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrResult {
    pub words: Vec<Word>,
    pub phrases: Vec<Phrase>,
    pub image_dims: ImageDims,
}

impl OcrResult {
    pub fn empty(w: u32, h: u32) -> Self {
        OcrResult {
            words: Vec::new(),
            phrases: Vec::new(),
            image_dims: ImageDims { w, h },
        }
    }

    /// Builds a result from words, grouping them into phrases.
    pub fn from_words(mut words: Vec<Word>, dims: ImageDims) -> Self {
        words.sort_by_key(|w| (w.bbox.y, w.bbox.x));
        let phrases = group_phrases(&words, dims);
        OcrResult {
            words,
            phrases,
            image_dims: dims,
        }
    }
}

pub fn ocr_image(img: &RasterImage, font: &BitmapFont) -> OcrResult {
    let mask = binarize(img, DEFAULT_THRESHOLD);
    let components = extract_components(&mask);
    let matches = recognize_glyphs(&components, font);
    let words = group_words(&matches);
    OcrResult::from_words(
        words,
        ImageDims {
            w: img.width(),
            h: img.height(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Rgb, Shape, TextOrientation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn white(w: u32, h: u32) -> RasterImage {
        RasterImage::new(w, h, 3, 255).unwrap()
    }

    #[test]
    fn binarize_edges() {
        let img = white(8, 8);
        assert_eq!(binarize(&img, 128).count(), 0);
        let img = RasterImage::new(8, 8, 1, 0).unwrap();
        assert_eq!(binarize(&img, 128).count(), 64);
        assert_eq!(binarize(&img, 0).count(), 0);
    }

    #[test]
    fn components_basic() {
        assert!(extract_components(&binarize(&white(30, 30), 128)).is_empty());
        let mut img = white(60, 30);
        img.draw(Shape::Disc { cx: 10, cy: 15, r: 5 }, Rgb::BLACK);
        img.draw(Shape::Disc { cx: 31, cy: 15, r: 5 }, Rgb::BLACK);
        let comps = extract_components(&binarize(&img, 128));
        assert_eq!(comps.len(), 2);
        assert!(comps[0].bbox.x < comps[1].bbox.x);
    }

    #[test]
    fn diagonal_pixels_connect() {
        let mut img = white(5, 5);
        img.put(1, 1, Rgb::BLACK);
        img.put(2, 2, Rgb::BLACK);
        assert_eq!(extract_components(&binarize(&img, 128)).len(), 1);
    }

    #[test]
    fn axis_line_is_not_text() {
        let mut img = white(640, 480);
        img.draw(Shape::Line { x0: 0, y0: 420, x1: 639, y1: 420 }, Rgb::BLACK);
        assert!(extract_components(&binarize(&img, 128)).is_empty());
    }

    #[test]
    fn single_glyph_self_test() {
        let font = BitmapFont::embedded();
        let mut img = white(40, 40);
        let b = img
            .draw_text(font, (5, 6), "A", 2, TextOrientation::Horizontal, Rgb::BLACK)
            .unwrap();
        let comps = extract_components(&binarize(&img, 128));
        let m = recognize_glyphs(&comps, font);
        let h: Vec<_> = m.iter().filter(|g| g.orientation == TextOrientation::Horizontal).collect();
        assert_eq!(h.len(), 1);
        assert_eq!((h[0].ch, h[0].score, h[0].bbox), ('A', 1.0, b));
    }

    #[test]
    fn rotated_glyph_self_test() {
        let font = BitmapFont::embedded();
        let mut img = white(40, 40);
        let b = img
            .draw_text(font, (5, 6), "A", 2, TextOrientation::Vertical, Rgb::BLACK)
            .unwrap();
        let comps = extract_components(&binarize(&img, 128));
        let m = recognize_glyphs(&comps, font);
        let v: Vec<_> = m.iter().filter(|g| g.orientation == TextOrientation::Vertical).collect();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].ch, v[0].bbox), ('A', b));
        assert!(m.iter().all(|g| g.orientation == TextOrientation::Vertical));
    }

    #[test]
    fn noise_blob_is_dropped() {
        let font = BitmapFont::embedded();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..50 {
            let mut img = white(20, 20);
            for y in 0..7 {
                for x in 0..7 {
                    if rng.gen_bool(0.5) {
                        img.put(7 + x, 7 + y, Rgb::BLACK);
                    }
                }
            }
            // a square outline makes the blob one 7x7 component, a size no
            // glyph has at any scale
            for (x0, y0, x1, y1) in [(7, 7, 13, 7), (7, 13, 13, 13), (7, 7, 7, 13), (13, 7, 13, 13)] {
                img.draw(Shape::Rect { x0, y0, x1, y1 }, Rgb::BLACK);
            }
            let comps = extract_components(&binarize(&img, 128));
            let blob = comps.iter().position(|c| c.bbox == BBox::new(7, 7, 7, 7)).unwrap();
            assert!(recognize_glyphs(&comps, font).iter().all(|m| !m.components.contains(&blob)));
        }
    }

    #[test]
    fn multi_part_glyphs_merge() {
        let font = BitmapFont::embedded();
        for text in ["i", "j", "=", ":", ";", "!", "?"] {
            for o in [TextOrientation::Horizontal, TextOrientation::Vertical] {
                let mut img = white(40, 40);
                img.draw_text(font, (4, 4), text, 1, o, Rgb::BLACK).unwrap();
                let r = ocr_image(&img, font);
                assert_eq!(r.words.len(), 1, "{text:?} {o:?}");
                assert_eq!(r.words[0].text, text, "{o:?}");
            }
        }
    }

    #[test]
    fn blank_image_reads_nothing() {
        let r = ocr_image(&white(64, 48), BitmapFont::embedded());
        assert!(r.words.is_empty() && r.phrases.is_empty());
        assert_eq!(r.image_dims, ImageDims { w: 64, h: 48 });
    }

    #[test]
    fn shapes_only_read_nothing() {
        let mut img = white(640, 480);
        img.draw(Shape::Line { x0: 80, y0: 60, x1: 80, y1: 420 }, Rgb::BLACK);
        img.draw(Shape::Line { x0: 80, y0: 420, x1: 560, y1: 420 }, Rgb::BLACK);
        for i in 0..5 {
            let x = 120 + i * 90;
            img.draw(Shape::Rect { x0: x, y0: 200 + i * 20, x1: x + 40, y1: 419 }, Rgb(31, 119, 180));
            img.draw(Shape::Disc { cx: x + 20, cy: 120, r: 4 }, Rgb(214, 39, 40));
        }
        img.draw(Shape::Rect { x0: 500, y0: 70, x1: 508, y1: 78 }, Rgb(44, 60, 44));
        let r = ocr_image(&img, BitmapFont::embedded());
        assert!(r.words.is_empty(), "{:?}", r.words);
    }
}
