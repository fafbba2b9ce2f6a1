use super::GrayImage;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::math::Tensor;

/// Parameters of the gradient-histogram descriptor. Defaults are the
/// classic pedestrian-detector settings: 8-pixel cells, 9 unsigned
/// orientation bins over [0°, 180°), 2x2-cell blocks sliding by one cell,
/// and plain L2 block normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct HogConfig {
    pub cell_size: usize,
    pub bins: usize,
    pub block: usize,
    pub block_stride: usize,
    pub norm_epsilon: f64,
}

impl Default for HogConfig {
    fn default() -> Self {
        HogConfig {
            cell_size: 8,
            bins: 9,
            block: 2,
            block_stride: 1,
            norm_epsilon: 1e-6,
        }
    }
}

impl HogConfig {
    fn validate(&self) -> Result<()> {
        if self.cell_size < 2 || self.bins < 2 || self.block < 1 || self.block_stride < 1 {
            return Err(Error::Parameter(format!(
                "descriptor config out of range: cell {}, bins {}, block {}, stride {}",
                self.cell_size, self.bins, self.block, self.block_stride
            )));
        }
        Ok(())
    }

    /// Descriptor length for an image of the given size, or an error if the
    /// image cannot hold a single cell.
    pub fn descriptor_len(&self, height: usize, width: usize) -> Result<usize> {
        self.validate()?;
        let cells_y = height / self.cell_size;
        let cells_x = width / self.cell_size;
        if cells_y == 0 || cells_x == 0 {
            return Err(Error::Shape(format!(
                "{height}x{width} image smaller than one {0}x{0} cell",
                self.cell_size
            )));
        }
        if cells_y < self.block || cells_x < self.block {
            return Err(Error::Shape(format!(
                "{cells_y}x{cells_x} cell grid smaller than one {0}x{0} block",
                self.block
            )));
        }
        let blocks_y = (cells_y - self.block) / self.block_stride + 1;
        let blocks_x = (cells_x - self.block) / self.block_stride + 1;
        Ok(blocks_y * blocks_x * self.block * self.block * self.bins)
    }
}

/// Histogram-of-oriented-gradients descriptor.
///
/// Gradients are central differences with replicated borders; orientations
/// are unsigned (mod 180°); each pixel votes its gradient magnitude into the
/// two nearest orientation bins with linear interpolation (wrapping across
/// the 0°/180° seam); cell histograms are grouped into blocks, each block
/// vector scaled by `1 / (‖v‖₂ + ε)`, and the block vectors concatenated in
/// row-major block order.
pub fn hog_descriptor(img: &GrayImage, cfg: &HogConfig) -> Result<Vec<f64>> {
    descriptor_from_plane(img.pixels(), img.height(), img.width(), cfg)
}

fn descriptor_from_plane(
    pixels: &[f64],
    height: usize,
    width: usize,
    cfg: &HogConfig,
) -> Result<Vec<f64>> {
    cfg.descriptor_len(height, width)?;
    let cells_y = height / cfg.cell_size;
    let cells_x = width / cfg.cell_size;
    let bins = cfg.bins;
    let bin_width = 180.0 / bins as f64;

    // Cell histograms: magnitude-weighted orientation votes. Pixels outside
    // the full-cell region (bottom/right remainders) do not vote.
    let mut hist = vec![0.0; cells_y * cells_x * bins];
    let at = |y: usize, x: usize| pixels[y * width + x];
    for y in 0..cells_y * cfg.cell_size {
        let cy = y / cfg.cell_size;
        let y_up = y.saturating_sub(1);
        let y_dn = (y + 1).min(height - 1);
        for x in 0..cells_x * cfg.cell_size {
            let gx = at(y, (x + 1).min(width - 1)) - at(y, x.saturating_sub(1));
            let gy = at(y_dn, x) - at(y_up, x);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx).to_degrees();
            if theta < 0.0 {
                theta += 180.0;
            }
            if theta >= 180.0 {
                theta -= 180.0;
            }
            // Continuous bin coordinate; votes split between the straddled
            // bin centers, wrapping across the unsigned-orientation seam.
            let pos = theta / bin_width - 0.5;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo_bin = ((lo as isize).rem_euclid(bins as isize)) as usize;
            let hi_bin = (lo_bin + 1) % bins;
            let cx = x / cfg.cell_size;
            let base = (cy * cells_x + cx) * bins;
            hist[base + lo_bin] += mag * (1.0 - frac);
            hist[base + hi_bin] += mag * frac;
        }
    }

    // Block grouping with L2 normalization.
    let blocks_y = (cells_y - cfg.block) / cfg.block_stride + 1;
    let blocks_x = (cells_x - cfg.block) / cfg.block_stride + 1;
    let block_len = cfg.block * cfg.block * bins;
    let mut out = Vec::with_capacity(blocks_y * blocks_x * block_len);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let start = out.len();
            for dy in 0..cfg.block {
                for dx in 0..cfg.block {
                    let cy = by * cfg.block_stride + dy;
                    let cx = bx * cfg.block_stride + dx;
                    let base = (cy * cells_x + cx) * bins;
                    out.extend_from_slice(&hist[base..base + bins]);
                }
            }
            let norm = out[start..]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            let scale = 1.0 / (norm + cfg.norm_epsilon);
            for v in &mut out[start..] {
                *v *= scale;
            }
        }
    }
    Ok(out)
}

/// Replace each `[1, h, w]` pixel plane of a dataset with its descriptor,
/// yielding an `[n, d]` feature matrix with the labels and class table
/// carried over.
pub fn hog_dataset(raw: &LabeledDataset, cfg: &HogConfig) -> Result<LabeledDataset> {
    let shape = raw.features().shape();
    if shape.len() != 4 || shape[1] != 1 {
        return Err(Error::Shape(format!(
            "descriptor extraction expects [n, 1, h, w] pixel data, got {shape:?}"
        )));
    }
    let (h, w) = (shape[2], shape[3]);
    let d = cfg.descriptor_len(h, w)?;
    let mut values = Vec::with_capacity(raw.len() * d);
    for i in 0..raw.len() {
        let plane = raw.sample(i);
        values.extend(descriptor_from_plane(plane, h, w, cfg)?);
    }
    LabeledDataset::new(
        Tensor::new(vec![raw.len(), d], values)?,
        raw.labels().to_vec(),
        raw.class_names().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> GrayImage {
        let mut px = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                px.push(f(y, x));
            }
        }
        GrayImage::new(h, w, px).unwrap()
    }

    #[test]
    fn descriptor_length_at_default_settings() {
        let cfg = HogConfig::default();
        // 16x16 cells -> 15x15 blocks of 2x2 cells x 9 bins.
        assert_eq!(cfg.descriptor_len(128, 128).unwrap(), 8100);
        assert_eq!(cfg.descriptor_len(64, 64).unwrap(), 7 * 7 * 4 * 9);
    }

    #[test]
    fn uniform_image_gives_all_zero_descriptor() {
        let img = image(32, 32, |_, _| 128.0);
        let d = hog_descriptor(&img, &HogConfig::default()).unwrap();
        assert_eq!(d.len(), 3 * 3 * 4 * 9);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_small_image_is_rejected() {
        let img = image(7, 12, |_, _| 0.0);
        assert!(hog_descriptor(&img, &HogConfig::default()).is_err());
    }

    #[test]
    fn vertical_edge_mass_lands_in_horizontal_gradient_bins() {
        // Step from dark to bright halfway across: gradient is horizontal
        // (theta = 0), whose vote splits evenly between the two bins
        // adjacent to 0 degrees (bin centers sit at 10, 30, ..., 170).
        let img = image(16, 16, |_, x| if x < 8 { 0.0 } else { 200.0 });
        let cfg = HogConfig::default();
        let d = hog_descriptor(&img, &cfg).unwrap();
        // One block of 2x2 cells; every cell sees the same column pattern.
        let per_cell: Vec<&[f64]> = d.chunks(9).collect();
        for cell in per_cell {
            let total: f64 = cell.iter().sum();
            if total == 0.0 {
                continue;
            }
            let seam_mass = cell[0] + cell[8];
            assert!(
                seam_mass / total > 0.99,
                "expected mass at the 0-degree seam, got {cell:?}"
            );
            // Exact wraparound split: theta=0 sits half a bin below center.
            assert!((cell[0] - cell[8]).abs() / total < 1e-9);
        }
    }

    #[test]
    fn block_norms_are_bounded_by_one() {
        let img = image(24, 40, |y, x| ((x * 7 + y * 13) % 255) as f64);
        let cfg = HogConfig::default();
        let d = hog_descriptor(&img, &cfg).unwrap();
        let block_len = cfg.block * cfg.block * cfg.bins;
        for block in d.chunks(block_len) {
            let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn descriptor_ignores_constant_intensity_offset() {
        let base = image(32, 32, |y, x| ((x * 3 + y * 5) % 200) as f64);
        let shifted = image(32, 32, |y, x| ((x * 3 + y * 5) % 200) as f64 + 55.0);
        let cfg = HogConfig::default();
        let a = hog_descriptor(&base, &cfg).unwrap();
        let b = hog_descriptor(&shifted, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn quarter_turn_permutes_dominant_orientation() {
        // Horizontal stripes have vertical gradients (theta = 90, bin 4);
        // rotating the pattern 90 degrees moves the gradient to horizontal
        // (theta = 0, split across bins 0 and 8).
        let stripes_h = image(16, 16, |y, _| if y % 2 == 0 { 0.0 } else { 180.0 });
        let stripes_v = image(16, 16, |_, x| if x % 2 == 0 { 0.0 } else { 180.0 });
        let cfg = HogConfig::default();
        let dominant = |d: &[f64]| {
            let mut sums = [0.0; 9];
            for cell in d.chunks(9) {
                for (s, v) in sums.iter_mut().zip(cell) {
                    *s += v;
                }
            }
            (0..9).max_by(|&a, &b| sums[a].total_cmp(&sums[b])).unwrap()
        };
        let dh = hog_descriptor(&stripes_h, &cfg).unwrap();
        let dv = hog_descriptor(&stripes_v, &cfg).unwrap();
        assert_eq!(dominant(&dh), 4);
        let rotated = dominant(&dv);
        assert!(rotated == 0 || rotated == 8, "got bin {rotated}");
    }
}
