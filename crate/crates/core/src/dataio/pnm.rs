//! Binary 8-bit PGM/PPM input and the resize + [0, 1] normalization applied
//! before images are treated as points.

use std::path::Path;

use serde::Serialize;

use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ImageDims {
    pub height: usize,
    pub width: usize,
    /// 1 for PGM, 3 for PPM.
    pub channels: usize,
}

impl ImageDims {
    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedImage(format!("missing {what}")))
    }
}

/// Decodes a P5 (grayscale) or P6 (RGB) image into a single row of floats in
/// `[0, 255]`, row-major with interleaved channels.
pub fn decode_pnm(bytes: &[u8]) -> Result<(Matrix, ImageDims)> {
    let magic = bytes.get(..2).ok_or_else(|| Error::MalformedImage("empty file".into()))?;
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        [b'P', _] => return Err(Error::UnsupportedVariant(String::from_utf8_lossy(magic).into_owned())),
        _ => return Err(Error::MalformedImage("not a PNM file".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval as u32));
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedImage("zero image dimension".into()));
    }
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::MalformedImage("no separator before raster".into()));
    }
    let raster = &bytes[cur.pos + 1..];
    let dims = ImageDims { height, width, channels };
    if raster.len() < dims.len() {
        return Err(Error::Truncated { expected: dims.len() as u64, found: raster.len() as u64 });
    }
    let row = raster[..dims.len()].iter().map(|&b| f64::from(b)).collect();
    Ok((Matrix::new(1, dims.len(), row)?, dims))
}

pub fn read_image_pnm(path: impl AsRef<Path>) -> Result<(Matrix, ImageDims)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes)
}

/// Area weights for resampling `src` pixels onto `dst` pixels. Positions are
/// measured in units of `1 / (src * dst)` of the axis, so every overlap is an
/// integer and the weights of one output pixel sum to `src`.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    (0..dst)
        .map(|o| {
            let (lo, hi) = (o * src, (o + 1) * src);
            let first = lo / dst;
            let last = (hi - 1) / dst;
            (first..=last)
                .filter_map(|s| {
                    let overlap = hi.min((s + 1) * dst).saturating_sub(lo.max(s * dst));
                    (overlap > 0).then_some((s, overlap as f64))
                })
                .collect()
        })
        .collect()
}

/// Box-filter (area-averaging) resize of an interleaved image to
/// `target_h x target_w`, channel by channel.
///
/// For integer pixel values the result is exact: weighted sums are
/// accumulated in integer-valued floats and divided once at the end, so a
/// constant image stays exactly constant.
pub fn resize_box(image: &[f64], dims: ImageDims, target_h: usize, target_w: usize) -> Result<Vec<f64>> {
    if target_h == 0 || target_w == 0 {
        return Err(Error::InvalidTarget { height: target_h, width: target_w });
    }
    if image.len() != dims.len() || dims.is_empty() {
        return Err(Error::ImageSizeMismatch { expected: dims.len(), found: image.len() });
    }
    let c = dims.channels;
    let wx = area_weights(dims.width, target_w);
    let wy = area_weights(dims.height, target_h);

    let mut across = vec![0.0; dims.height * target_w * c];
    for y in 0..dims.height {
        for (ox, taps) in wx.iter().enumerate() {
            for ch in 0..c {
                across[(y * target_w + ox) * c + ch] =
                    taps.iter().map(|&(sx, w)| w * image[(y * dims.width + sx) * c + ch]).sum();
            }
        }
    }
    let scale = (dims.height * dims.width) as f64;
    let mut out = vec![0.0; target_h * target_w * c];
    for (oy, taps) in wy.iter().enumerate() {
        for ox in 0..target_w {
            for ch in 0..c {
                let s: f64 = taps.iter().map(|&(sy, w)| w * across[(sy * target_w + ox) * c + ch]).sum();
                out[(oy * target_w + ox) * c + ch] = s / scale;
            }
        }
    }
    Ok(out)
}

/// [`resize_box`] followed by a linear map of the image's own minimum to 0
/// and maximum to 1. A constant result maps to all zeros.
pub fn preprocess(image: &[f64], dims: ImageDims, target_h: usize, target_w: usize) -> Result<Matrix> {
    let mut out = resize_box(image, dims, target_h, target_w)?;
    let (lo, hi) = out.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi > lo {
        let span = hi - lo;
        out.iter_mut().for_each(|v| *v = (*v - lo) / span);
    } else {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
    Matrix::new(1, out.len(), out)
}
