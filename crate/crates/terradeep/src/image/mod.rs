//! Image preprocessing (grayscale conversion, bilinear resize) and the
//! gradient-histogram descriptor used by the classical image branch.

mod hog;

pub use hog::{hog_dataset, hog_descriptor, HogConfig};

use crate::error::{Error, Result};
use crate::math::Tensor;

/// Single-channel image with intensities in `[0, 255]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width {
            return Err(Error::Shape(format!(
                "{height}x{width} image with {} pixels",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !(0.0..=255.0).contains(p)) {
            return Err(Error::Parameter(
                "pixel intensity outside [0, 255]".into(),
            ));
        }
        Ok(GrayImage {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn at(&self, y: usize, x: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// `[1, height, width]` tensor with intensities scaled to `[0, 1]`.
    pub fn to_unit_tensor(&self) -> Tensor {
        Tensor::new(
            vec![1, self.height, self.width],
            self.pixels.iter().map(|p| p / 255.0).collect(),
        )
        .expect("pixel count matches dims by construction")
    }
}

/// Weighted RGB-to-luma conversion (`0.299 R + 0.587 G + 0.114 B`), clamped
/// to the valid intensity range. The three channels are row-major planes of
/// the same `height x width`.
pub fn to_grayscale(
    r: &[f64],
    g: &[f64],
    b: &[f64],
    height: usize,
    width: usize,
) -> Result<GrayImage> {
    let n = height * width;
    if r.len() != n || g.len() != n || b.len() != n {
        return Err(Error::Shape(format!(
            "channel lengths {}/{}/{} for {height}x{width}",
            r.len(),
            g.len(),
            b.len()
        )));
    }
    let pixels = (0..n)
        .map(|i| (0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]).clamp(0.0, 255.0))
        .collect();
    GrayImage::new(height, width, pixels)
}

/// Bilinear resize with corner samples pinned to the source corners (sample
/// `i` of `m` maps to source coordinate `i * (n-1) / (m-1)`).
pub fn resize_bilinear(img: &GrayImage, out_h: usize, out_w: usize) -> Result<GrayImage> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Parameter("resize target must be non-empty".into()));
    }
    let scale = |out: usize, src: usize| -> f64 {
        if out > 1 {
            (src - 1) as f64 / (out - 1) as f64
        } else {
            0.0
        }
    };
    let sy = scale(out_h, img.height);
    let sx = scale(out_w, img.width);
    let mut pixels = Vec::with_capacity(out_h * out_w);
    for oy in 0..out_h {
        let fy = oy as f64 * sy;
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let wy = fy - y0 as f64;
        for ox in 0..out_w {
            let fx = ox as f64 * sx;
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let wx = fx - x0 as f64;
            let top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
            let bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
            pixels.push((top * (1.0 - wy) + bot * wy).clamp(0.0, 255.0));
        }
    }
    GrayImage::new(out_h, out_w, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grayscale_extremes_and_weights() {
        let white = to_grayscale(&[255.], &[255.], &[255.], 1, 1).unwrap();
        assert_eq!(white.at(0, 0), 255.0);
        let black = to_grayscale(&[0.], &[0.], &[0.], 1, 1).unwrap();
        assert_eq!(black.at(0, 0), 0.0);
        let mixed = to_grayscale(&[100.], &[150.], &[200.], 1, 1).unwrap();
        assert!((mixed.at(0, 0) - 140.75).abs() < 1e-12);
    }

    #[test]
    fn grayscale_rejects_ragged_channels() {
        assert!(to_grayscale(&[0., 0.], &[0.], &[0.], 1, 1).is_err());
    }

    #[test]
    fn resize_identity_when_same_size() {
        let img = GrayImage::new(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let out = resize_bilinear(&img, 2, 3).unwrap();
        assert_eq!(out.pixels(), img.pixels());
    }

    #[test]
    fn resize_constant_stays_constant() {
        let img = GrayImage::new(3, 3, vec![7.0; 9]).unwrap();
        let out = resize_bilinear(&img, 10, 5).unwrap();
        assert!(out.pixels().iter().all(|&p| (p - 7.0).abs() < 1e-12));
    }

    #[test]
    fn resize_interpolates_a_column_ramp() {
        // Two rows [0, 255] stretched to four: sample y-coords 0, 1/3, 2/3,
        // 1 over the source rows 0..=1 give 0, 85, 170, 255.
        let img = GrayImage::new(2, 1, vec![0., 255.]).unwrap();
        let out = resize_bilinear(&img, 4, 1).unwrap();
        let want = [0.0, 85.0, 170.0, 255.0];
        for (got, want) in out.pixels().iter().zip(&want) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn resize_rejects_empty_target() {
        let img = GrayImage::new(1, 1, vec![0.]).unwrap();
        assert!(resize_bilinear(&img, 0, 4).is_err());
    }

    #[test]
    fn unit_tensor_scales_to_01() {
        let img = GrayImage::new(1, 2, vec![0., 255.]).unwrap();
        let t = img.to_unit_tensor();
        assert_eq!(t.shape(), &[1, 1, 2]);
        assert_eq!(t.values(), &[0.0, 1.0]);
    }
}
