use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-channel standardization applied after scaling pixels to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Default for Normalization {
    fn default() -> Self {
        Self {
            mean: [0.485, 0.456, 0.406],
            std: [0.229, 0.224, 0.225],
        }
    }
}

/// Normalized `H x W x 3` image, row-major HWC.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    data: Vec<f64>,
    height: usize,
    width: usize,
}

impl ImageTensor {
    pub const CHANNELS: usize = 3;

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.height, self.width, Self::CHANNELS]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

/// Decode an encoded raster image and preprocess it to `target = (H, W)`.
pub fn preprocess(raw: &[u8], target: (usize, usize), norm: &Normalization) -> Result<ImageTensor> {
    let img = image::load_from_memory(raw).map_err(|e| Error::Image(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let color = img.color();
    let (pixels, channels) = if color.has_color() {
        (img.into_rgb8().into_raw(), 3)
    } else {
        (img.into_luma8().into_raw(), 1)
    };
    preprocess_pixels(&pixels, h, w, channels, target, norm)
}

/// Preprocess 8-bit interleaved pixels with 1 or 3 channels.
///
/// Bilinear resize (half-pixel centres, edge clamped), grayscale replicated
/// to three channels, then `(v / 255 - mean) / std` per channel.
pub fn preprocess_pixels(
    pixels: &[u8],
    height: usize,
    width: usize,
    channels: usize,
    target: (usize, usize),
    norm: &Normalization,
) -> Result<ImageTensor> {
    if height == 0 || width == 0 {
        return Err(Error::Image("zero-size image".into()));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Image(format!("unsupported channel count {channels}")));
    }
    if pixels.len() != height * width * channels {
        return Err(Error::Image(format!(
            "pixel buffer has {} bytes, expected {}",
            pixels.len(),
            height * width * channels
        )));
    }
    let (th, tw) = target;
    if th == 0 || tw == 0 {
        return Err(Error::InvalidArgument("zero-size target".into()));
    }
    if norm.std.iter().any(|s| *s <= 0.0 || !s.is_finite()) {
        return Err(Error::InvalidArgument("normalization std must be positive".into()));
    }

    let sample = |y: usize, x: usize, c: usize| -> f64 {
        let c = if channels == 1 { 0 } else { c };
        f64::from(pixels[(y * width + x) * channels + c])
    };

    let ys = axis_taps(height, th);
    let xs = axis_taps(width, tw);
    let mut data = Vec::with_capacity(th * tw * 3);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            for c in 0..3 {
                let v = if fx == 0.0 && fy == 0.0 {
                    sample(y0, x0, c)
                } else {
                    let top = sample(y0, x0, c) * (1.0 - fx) + sample(y0, x1, c) * fx;
                    let bot = sample(y1, x0, c) * (1.0 - fx) + sample(y1, x1, c) * fx;
                    top * (1.0 - fy) + bot * fy
                };
                data.push((v / 255.0 - norm.mean[c]) / norm.std[c]);
            }
        }
    }
    Ok(ImageTensor {
        data,
        height: th,
        width: tw,
    })
}

/// Source index pair and interpolation weight for each output coordinate.
fn axis_taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    if src == dst {
        return (0..dst).map(|i| (i, i, 0.0)).collect();
    }
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = pos.floor() as usize;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}
