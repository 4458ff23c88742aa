//! Pixel images, drawing primitives and the embedded bitmap font.
//!
//! Everything rasterizes on an integer grid with no anti-aliasing so that
//! renders are bit-for-bit reproducible. Coordinates may fall outside the
//! image; drawing clips per pixel.

mod codec;
mod font;

pub use codec::{decode_image, encode_png, read_image, write_image, ImageFormat};
pub use font::{BitmapFont, Glyph, GLYPH_HEIGHT, GLYPH_SPACING, GLYPH_WIDTH, WORD_SPACING};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An RGB color. On single-channel images it is written as its luminance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);

    pub const fn gray(v: u8) -> Rgb {
        Rgb(v, v, v)
    }

    /// ITU-R BT.601 luma in the 0..=255 range.
    pub fn luminance(self) -> f32 {
        luminance(self.0, self.1, self.2)
    }
}

#[inline]
pub fn luminance(r: u8, g: u8, b: u8) -> f32 {
    0.299 * r as f32 + 0.587 * g as f32 + 0.114 * b as f32
}

/// Axis-aligned pixel rectangle, origin top-left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl BBox {
    pub const fn new(x: i32, y: i32, w: i32, h: i32) -> Self {
        BBox { x, y, w, h }
    }

    pub fn right(&self) -> i32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> i32 {
        self.y + self.h
    }

    pub fn center_x(&self) -> f64 {
        self.x as f64 + self.w as f64 / 2.0
    }

    pub fn center_y(&self) -> f64 {
        self.y as f64 + self.h as f64 / 2.0
    }

    pub fn area(&self) -> i64 {
        self.w.max(0) as i64 * self.h.max(0) as i64
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        BBox {
            x,
            y,
            w: self.right().max(other.right()) - x,
            h: self.bottom().max(other.bottom()) - y,
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> i64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0 || h <= 0 {
            0
        } else {
            w as i64 * h as i64
        }
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextOrientation {
    Horizontal,
    /// Rotated 90 degrees counterclockwise; reads bottom to top.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Inclusive corners.
    Rect { x0: i32, y0: i32, x1: i32, y1: i32 },
    Disc { cx: i32, cy: i32, r: i32 },
    Line { x0: i32, y0: i32, x1: i32, y1: i32 },
    /// Pie slice swept counterclockwise from `start_deg` to `end_deg`,
    /// angles measured from +x with y pointing up.
    Wedge {
        cx: i32,
        cy: i32,
        r: i32,
        start_deg: f64,
        end_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, channels: u8, fill: u8) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let len = width as usize * height as usize * channels as usize;
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels: vec![fill; len],
        })
    }

    /// Wraps an existing buffer, checking its length.
    pub fn from_raw(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        let mut img = RasterImage::new(width, height, channels, 0)?;
        if pixels.len() != img.pixels.len() {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer has {} bytes, expected {}",
                pixels.len(),
                img.pixels.len()
            )));
        }
        img.pixels = pixels;
        Ok(img)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    /// Pixel value as RGB (gray images replicate the channel).
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        let o = self.offset(x, y);
        if self.channels == 1 {
            Rgb::gray(self.pixels[o])
        } else {
            Rgb(self.pixels[o], self.pixels[o + 1], self.pixels[o + 2])
        }
    }

    pub fn luma(&self, x: u32, y: u32) -> f32 {
        let o = self.offset(x, y);
        if self.channels == 1 {
            self.pixels[o] as f32
        } else {
            luminance(self.pixels[o], self.pixels[o + 1], self.pixels[o + 2])
        }
    }

    /// Sets one pixel; out-of-bounds coordinates are ignored.
    pub fn put(&mut self, x: i32, y: i32, color: Rgb) {
        if !self.in_bounds(x, y) {
            return;
        }
        let o = self.offset(x as u32, y as u32);
        if self.channels == 1 {
            self.pixels[o] = color.luminance().round() as u8;
        } else {
            self.pixels[o] = color.0;
            self.pixels[o + 1] = color.1;
            self.pixels[o + 2] = color.2;
        }
    }

    pub fn to_grayscale(&self) -> RasterImage {
        if self.channels == 1 {
            return self.clone();
        }
        let pixels = self
            .pixels
            .chunks_exact(3)
            .map(|p| luminance(p[0], p[1], p[2]).round() as u8)
            .collect();
        RasterImage {
            width: self.width,
            height: self.height,
            channels: 1,
            pixels,
        }
    }

    pub fn draw(&mut self, shape: Shape, color: Rgb) {
        match shape {
            Shape::Rect { x0, y0, x1, y1 } => self.fill_rect(x0, y0, x1, y1, color),
            Shape::Disc { cx, cy, r } => self.fill_wedge(cx, cy, r, None, color),
            Shape::Line { x0, y0, x1, y1 } => self.draw_line(x0, y0, x1, y1, color),
            Shape::Wedge {
                cx,
                cy,
                r,
                start_deg,
                end_deg,
            } => {
                let sweep = end_deg - start_deg;
                let range = if sweep >= 360.0 {
                    None
                } else if sweep <= 0.0 {
                    // Empty sweep: only the apex.
                    Some((0.0, 0.0))
                } else {
                    Some((start_deg.rem_euclid(360.0), sweep))
                };
                self.fill_wedge(cx, cy, r, range, color)
            }
        }
    }

    fn fill_rect(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, color: Rgb) {
        let (xa, xb) = (x0.min(x1).max(0), x0.max(x1).min(self.width as i32 - 1));
        let (ya, yb) = (y0.min(y1).max(0), y0.max(y1).min(self.height as i32 - 1));
        for y in ya..=yb {
            for x in xa..=xb {
                self.put(x, y, color);
            }
        }
    }

    /// Disc membership follows the midpoint rule `dx² + dy² <= r² + r`.
    /// `range` is (start, sweep) in degrees; `None` means the full circle.
    fn fill_wedge(&mut self, cx: i32, cy: i32, r: i32, range: Option<(f64, f64)>, color: Rgb) {
        if r < 0 {
            return;
        }
        let limit = r as i64 * r as i64 + r as i64;
        let ya = (cy - r).max(0);
        let yb = (cy + r).min(self.height as i32 - 1);
        let xa = (cx - r).max(0);
        let xb = (cx + r).min(self.width as i32 - 1);
        for y in ya..=yb {
            for x in xa..=xb {
                let dx = (x - cx) as i64;
                let dy = (y - cy) as i64;
                if dx * dx + dy * dy > limit {
                    continue;
                }
                if let Some((start, sweep)) = range {
                    if dx != 0 || dy != 0 {
                        let angle = (-(dy as f64)).atan2(dx as f64).to_degrees();
                        let rel = (angle - start).rem_euclid(360.0);
                        if rel > sweep {
                            continue;
                        }
                    }
                }
                self.put(x, y, color);
            }
        }
    }

    fn draw_line(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, color: Rgb) {
        let (w, h) = (self.width as i32, self.height as i32);
        if (x0 < 0 && x1 < 0) || (y0 < 0 && y1 < 0) || (x0 >= w && x1 >= w) || (y0 >= h && y1 >= h)
        {
            return;
        }
        // Bresenham; per-pixel clipping in `put`.
        let dx = (x1 as i64 - x0 as i64).abs();
        let dy = -(y1 as i64 - y0 as i64).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let (mut x, mut y) = (x0, y0);
        let mut err = dx + dy;
        loop {
            self.put(x, y, color);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Renders `text` with its top-left at `anchor` and returns the text box.
    ///
    /// For `n` glyphs at scale `s` the box is `5ns + (n-1)s` by `7s`;
    /// vertical text swaps the two and stacks glyphs upward.
    pub fn draw_text(
        &mut self,
        font: &BitmapFont,
        anchor: (i32, i32),
        text: &str,
        scale: u32,
        orientation: TextOrientation,
        color: Rgb,
    ) -> Result<BBox> {
        let bbox = text_bbox(anchor, text, scale, orientation)?;
        let s = scale as i32;
        let advance = (GLYPH_WIDTH + GLYPH_SPACING) as i32 * s;
        let run_w = match orientation {
            TextOrientation::Horizontal => bbox.w,
            TextOrientation::Vertical => bbox.h,
        };
        for (i, ch) in text.bytes().enumerate() {
            let glyph = font.glyph(ch as char).expect("validated ASCII");
            for (gy, row) in glyph.rows().iter().enumerate() {
                for (gx, _) in row.iter().enumerate().filter(|(_, &on)| on) {
                    // Position in the unrotated run.
                    let hx = i as i32 * advance + gx as i32 * s;
                    let hy = gy as i32 * s;
                    for dy in 0..s {
                        for dx in 0..s {
                            let (px, py) = (hx + dx, hy + dy);
                            let (x, y) = match orientation {
                                TextOrientation::Horizontal => (px, py),
                                TextOrientation::Vertical => (py, run_w - 1 - px),
                            };
                            self.put(anchor.0 + x, anchor.1 + y, color);
                        }
                    }
                }
            }
        }
        Ok(bbox)
    }
}

/// Box that `draw_text` would return, without drawing.
pub fn text_bbox(
    anchor: (i32, i32),
    text: &str,
    scale: u32,
    orientation: TextOrientation,
) -> Result<BBox> {
    if text.is_empty() {
        return Err(Error::InvalidArgument("text must be non-empty".into()));
    }
    if let Some(bad) = text.chars().find(|c| !(' '..='~').contains(c)) {
        return Err(Error::InvalidArgument(format!(
            "character {bad:?} is outside printable ASCII"
        )));
    }
    if scale == 0 {
        return Err(Error::InvalidArgument("text scale must be >= 1".into()));
    }
    let n = text.len() as i32;
    let s = scale as i32;
    let run = GLYPH_WIDTH as i32 * n * s + (n - 1) * GLYPH_SPACING as i32 * s;
    let thick = GLYPH_HEIGHT as i32 * s;
    Ok(match orientation {
        TextOrientation::Horizontal => BBox::new(anchor.0, anchor.1, run, thick),
        TextOrientation::Vertical => BBox::new(anchor.0, anchor.1, thick, run),
    })
}
