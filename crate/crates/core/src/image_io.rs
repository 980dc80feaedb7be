//! Binary PGM (P5) and PPM (P6) reading and writing, 8-bit only, plus the
//! conversions between interleaved byte images and normalized planes.

use crate::transform::{rgb_to_ycbcr, ycbcr_to_rgb, Plane};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImageError {
    #[error("not a binary PGM/PPM file (offset {offset}): {what}")]
    Malformed { offset: usize, what: &'static str },
    #[error("only 8-bit images are supported, maxval {0}")]
    UnsupportedDepth(u32),
    #[error("pixel data truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("io: {0}")]
    Io(String),
}

/// Interleaved 8-bit image, 1 (gray) or 3 (RGB) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Self {
        assert!(channels == 1 || channels == 3);
        assert_eq!(data.len(), width * height * channels);
        Self { width, height, channels, data }
    }
}

fn skip_space(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_number(bytes: &[u8], pos: usize) -> Result<(u32, usize), ImageError> {
    let start = skip_space(bytes, pos);
    let mut end = start;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end == start {
        return Err(ImageError::Malformed { offset: start, what: "expected a decimal number" });
    }
    let mut v: u32 = 0;
    for &b in &bytes[start..end] {
        v = v.saturating_mul(10).saturating_add((b - b'0') as u32);
    }
    Ok((v, end))
}

/// Parse a binary PGM/PPM byte stream.
pub fn read_pnm(bytes: &[u8]) -> Result<Image, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::Malformed { offset: 0, what: "file shorter than a magic number" });
    }
    let channels = match &bytes[0..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(ImageError::Malformed { offset: 0, what: "magic is not P5 or P6" }),
    };
    let (width, pos) = read_number(bytes, 2)?;
    let (height, pos) = read_number(bytes, pos)?;
    let (maxval, pos) = read_number(bytes, pos)?;
    if maxval != 255 {
        return Err(ImageError::UnsupportedDepth(maxval));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(ImageError::Malformed { offset: pos, what: "missing whitespace after maxval" });
    }
    if width == 0 || height == 0 {
        return Err(ImageError::Malformed { offset: 2, what: "zero image dimension" });
    }
    let data_start = pos + 1;
    let need = width as usize * height as usize * channels;
    let have = bytes.len() - data_start;
    if have < need {
        return Err(ImageError::Truncated { need, have });
    }
    Ok(Image::new(
        width as usize,
        height as usize,
        channels,
        bytes[data_start..data_start + need].to_vec(),
    ))
}

/// Serialize to binary PGM/PPM.
pub fn write_pnm(img: &Image) -> Vec<u8> {
    let magic = if img.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn load_pnm(path: &Path) -> Result<Image, ImageError> {
    let bytes = std::fs::read(path).map_err(|e| ImageError::Io(e.to_string()))?;
    read_pnm(&bytes)
}

pub fn save_pnm(path: &Path, img: &Image) -> Result<(), ImageError> {
    std::fs::write(path, write_pnm(img)).map_err(|e| ImageError::Io(e.to_string()))
}

/// Split into normalized [0,1] planes, optionally rotating RGB → YCbCr.
pub fn to_planes(img: &Image, ycbcr: bool) -> Vec<Plane> {
    let n = img.width * img.height;
    let mut planes: Vec<Vec<f64>> = vec![Vec::with_capacity(n); img.channels];
    for px in 0..n {
        if img.channels == 1 {
            planes[0].push(img.data[px] as f64 / 255.0);
        } else {
            let r = img.data[3 * px] as f64 / 255.0;
            let g = img.data[3 * px + 1] as f64 / 255.0;
            let b = img.data[3 * px + 2] as f64 / 255.0;
            let (c0, c1, c2) = if ycbcr { rgb_to_ycbcr(r, g, b) } else { (r, g, b) };
            planes[0].push(c0);
            planes[1].push(c1);
            planes[2].push(c2);
        }
    }
    planes.into_iter().map(|d| Plane::new(img.width, img.height, d)).collect()
}

/// Reassemble an 8-bit image from planes, inverting the color rotation.
pub fn from_planes(planes: &[Plane], ycbcr: bool) -> Image {
    let (w, h) = (planes[0].width, planes[0].height);
    let channels = planes.len();
    let mut data = Vec::with_capacity(w * h * channels);
    let to_u8 = |v: f64| (v * 255.0).round().clamp(0.0, 255.0) as u8;
    for px in 0..w * h {
        if channels == 1 {
            data.push(to_u8(planes[0].data[px]));
        } else {
            let (c0, c1, c2) = (planes[0].data[px], planes[1].data[px], planes[2].data[px]);
            let (r, g, b) = if ycbcr { ycbcr_to_rgb(c0, c1, c2) } else { (c0, c1, c2) };
            data.push(to_u8(r));
            data.push(to_u8(g));
            data.push(to_u8(b));
        }
    }
    Image::new(w, h, channels, data)
}
