//! PNG (8-bit, non-interlaced) and binary PGM/PPM codecs.

use std::io::Cursor;
use std::path::Path;

use super::RasterImage;
use crate::error::{Error, Result};

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    /// Binary PGM (P5) or PPM (P6), chosen by channel count.
    Pnm,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<ImageFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(ImageFormat::Png),
            "pgm" | "ppm" | "pnm" => Some(ImageFormat::Pnm),
            _ => None,
        }
    }
}

pub fn write_image(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format =
        ImageFormat::from_path(path).ok_or_else(|| Error::UnsupportedFormat(Some(path.into())))?;
    let bytes = match format {
        ImageFormat::Png => encode_png(img)?,
        ImageFormat::Pnm => encode_pnm(img),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decodes PNG or PNM bytes, sniffing the format from the magic number.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(bytes)
    } else {
        Err(Error::Decode {
            offset: 0,
            message: "unrecognized magic number (expected PNG, P5 or P6)".into(),
        })
    }
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width(), img.height());
        enc.set_color(if img.channels() == 1 {
            png::ColorType::Grayscale
        } else {
            png::ColorType::Rgb
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Internal(format!("png header: {e}")))?;
        writer
            .write_image_data(img.pixels())
            .map_err(|e| Error::Internal(format!("png encode: {e}")))?;
        writer
            .finish()
            .map_err(|e| Error::Internal(format!("png finish: {e}")))?;
    }
    Ok(out)
}

fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let cursor = Cursor::new(bytes);
    let png_err = |stage: &str, e: png::DecodingError, pos: usize| Error::Decode {
        offset: pos,
        message: format!("png {stage}: {e} ({} bytes in file)", bytes.len()),
    };
    let mut decoder = png::Decoder::new(cursor);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(|e| png_err("header", e, 0))?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::Decode {
        offset: 0,
        message: "png image too large".into(),
    })?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| png_err("data", e, bytes.len()))?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width, info.height);
    let white_over = |c: u8, a: u8| -> u8 {
        ((c as u32 * a as u32 + 255 * (255 - a as u32) + 127) / 255) as u8
    };
    let (channels, pixels) = match info.color_type {
        png::ColorType::Grayscale => (1, buf),
        png::ColorType::Rgb => (3, buf),
        png::ColorType::GrayscaleAlpha => (
            1,
            buf.chunks_exact(2).map(|p| white_over(p[0], p[1])).collect(),
        ),
        png::ColorType::Rgba => (
            3,
            buf.chunks_exact(4)
                .flat_map(|p| [white_over(p[0], p[3]), white_over(p[1], p[3]), white_over(p[2], p[3])])
                .collect(),
        ),
        png::ColorType::Indexed => {
            return Err(Error::Decode {
                offset: 0,
                message: "indexed png was not expanded".into(),
            })
        }
    };
    RasterImage::from_raw(w, h, channels, pixels)
}

fn encode_pnm(img: &RasterImage) -> Vec<u8> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

fn decode_pnm(bytes: &[u8]) -> Result<RasterImage> {
    let channels = if bytes[1] == b'5' { 1 } else { 3 };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Decode {
                offset: pos,
                message: "expected a decimal header field".into(),
            });
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(Error::Decode {
                offset: start,
                message: "header field out of range".into(),
            })?;
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Decode {
            offset: pos,
            message: format!("only 8-bit maxval 255 is supported, got {maxval}"),
        });
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Decode {
            offset: pos,
            message: "missing whitespace after header".into(),
        });
    }
    pos += 1;
    let need = w as usize * h as usize * channels as usize;
    let data = &bytes[pos..];
    if data.len() < need {
        return Err(Error::Decode {
            offset: bytes.len(),
            message: format!("truncated pixel data: {} of {need} bytes", data.len()),
        });
    }
    RasterImage::from_raw(w, h, channels, data[..need].to_vec()).map_err(|e| Error::Decode {
        offset: 0,
        message: e.to_string(),
    })
}
