use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::math::rng::{streams, SeededRng};
use crate::math::Tensor;

/// Terrain texture families the generator can synthesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TerrainClass {
    Asphalt,
    Boulders,
    Flat,
    Grass,
    Gravel,
    Pavement,
    Rocks,
    Sand,
}

pub const ALL_TERRAIN_CLASSES: [TerrainClass; 8] = [
    TerrainClass::Asphalt,
    TerrainClass::Boulders,
    TerrainClass::Flat,
    TerrainClass::Grass,
    TerrainClass::Gravel,
    TerrainClass::Pavement,
    TerrainClass::Rocks,
    TerrainClass::Sand,
];

/// Default composition of the synthetic corpus: the six natural-terrain
/// classes. The two paved variants stay available for custom corpora.
pub const DEFAULT_TERRAIN_CLASSES: [TerrainClass; 6] = [
    TerrainClass::Boulders,
    TerrainClass::Flat,
    TerrainClass::Grass,
    TerrainClass::Gravel,
    TerrainClass::Rocks,
    TerrainClass::Sand,
];

impl TerrainClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerrainClass::Asphalt => "asphalt",
            TerrainClass::Boulders => "boulders",
            TerrainClass::Flat => "flat",
            TerrainClass::Grass => "grass",
            TerrainClass::Gravel => "gravel",
            TerrainClass::Pavement => "pavement",
            TerrainClass::Rocks => "rocks",
            TerrainClass::Sand => "sand",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ALL_TERRAIN_CLASSES
            .iter()
            .find(|c| c.as_str() == name)
            .copied()
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown terrain class '{name}' (valid: {})",
                    ALL_TERRAIN_CLASSES.map(|c| c.as_str()).join(", ")
                ))
            })
    }
}

/// Procedural grayscale texture corpus with class-distinct statistics.
///
/// Classes are sorted by name before labelling, matching the directory
/// loader's convention. Every image carries a random brightness offset and
/// contrast jitter so absolute intensity alone cannot identify a class.
/// Features are `[n, 1, size, size]` unit-scaled pixels.
pub fn synth_terrain(
    classes: &[TerrainClass],
    images_per_class: usize,
    size: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if !(size == 64 || size == 128) {
        return Err(Error::Parameter(format!(
            "image size {size} unsupported (use 64 or 128)"
        )));
    }
    if classes.is_empty() || images_per_class == 0 {
        return Err(Error::Parameter(
            "need at least one class and one image per class".into(),
        ));
    }
    let mut sorted = classes.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != classes.len() {
        return Err(Error::Parameter("duplicate terrain class requested".into()));
    }

    let n = sorted.len() * images_per_class;
    let mut values = Vec::with_capacity(n * size * size);
    let mut labels = Vec::with_capacity(n);
    for (label, class) in sorted.iter().enumerate() {
        for img_idx in 0..images_per_class {
            // Per-image sub-stream: texture synthesis is independent of
            // corpus composition, so adding classes or images never
            // perturbs other images.
            let stream =
                (streams::DATA << 56) | ((*class as u64) << 32) | img_idx as u64;
            let mut rng = SeededRng::new(seed, stream);
            let img = render(*class, size, &mut rng);
            values.extend(img.iter().map(|p| p / 255.0));
            labels.push(label);
        }
    }
    LabeledDataset::new(
        Tensor::new(vec![n, 1, size, size], values)?,
        labels,
        sorted.iter().map(|c| c.as_str().to_string()).collect(),
    )
}

fn render(class: TerrainClass, size: usize, rng: &mut SeededRng) -> Vec<f64> {
    let mut px = match class {
        TerrainClass::Flat => flat(size, rng),
        TerrainClass::Rocks => ellipse_field(size, rng, false),
        TerrainClass::Boulders => ellipse_field(size, rng, true),
        TerrainClass::Gravel => gravel(size, rng),
        TerrainClass::Sand => sand(size, rng),
        TerrainClass::Grass => grass(size, rng),
        TerrainClass::Pavement => pavement(size, rng),
        TerrainClass::Asphalt => asphalt(size, rng),
    };
    // Photometric jitter shared by all classes.
    let contrast = rng.uniform_range(0.85, 1.15);
    let brightness = rng.uniform_range(-20.0, 20.0);
    for p in &mut px {
        *p = ((*p - 128.0) * contrast + 128.0 + brightness).clamp(0.0, 255.0);
    }
    px
}

/// Scale factor for structural element sizes relative to the 64-px baseline.
fn sf(size: usize) -> f64 {
    size as f64 / 64.0
}

fn flat(size: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..size * size)
        .map(|_| 120.0 + 2.0 * rng.normal())
        .collect()
}

/// Fields of shaded ellipses; small and dense for rocks, large and sparse
/// for boulders.
fn ellipse_field(size: usize, rng: &mut SeededRng, large: bool) -> Vec<f64> {
    let f = sf(size);
    let mut px: Vec<f64> = (0..size * size)
        .map(|_| 100.0 + 2.0 * rng.normal())
        .collect();
    let count = if large {
        (7.0 * f * f).round() as usize
    } else {
        (45.0 * f * f).round() as usize
    };
    let (r_lo, r_hi) = if large { (8.0 * f, 15.0 * f) } else { (2.0 * f, 4.5 * f) };
    for _ in 0..count {
        let cy = rng.uniform_range(0.0, size as f64);
        let cx = rng.uniform_range(0.0, size as f64);
        let ry = rng.uniform_range(r_lo, r_hi);
        let rx = rng.uniform_range(r_lo, r_hi);
        let lift = rng.uniform_range(35.0, 90.0) * if rng.uniform() < 0.3 { -1.0 } else { 1.0 };
        // Top-lit shading: intensity falls off towards the lower rim.
        let shade = rng.uniform_range(15.0, 40.0);
        let y0 = (cy - ry).floor().max(0.0) as usize;
        let y1 = ((cy + ry).ceil() as usize).min(size - 1);
        let x0 = (cx - rx).floor().max(0.0) as usize;
        let x1 = ((cx + rx).ceil() as usize).min(size - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dy = (y as f64 - cy) / ry;
                let dx = (x as f64 - cx) / rx;
                let d2 = dy * dy + dx * dx;
                if d2 <= 1.0 {
                    px[y * size + x] = 100.0 + lift - shade * dy;
                }
            }
        }
    }
    px
}

/// Independent speckle quantized to 2-px grains: busy at the highest
/// spatial frequency the grid allows.
fn gravel(size: usize, rng: &mut SeededRng) -> Vec<f64> {
    let cells = size / 2;
    let grains: Vec<f64> = (0..cells * cells)
        .map(|_| 110.0 + rng.uniform_range(-55.0, 55.0))
        .collect();
    let mut px = vec![0.0; size * size];
    for y in 0..size {
        for x in 0..size {
            px[y * size + x] = grains[(y / 2) * cells + (x / 2)] + 3.0 * rng.normal();
        }
    }
    px
}

/// Bilinear upsample of a coarse Gaussian grid: band-limited noise whose
/// wavelength is set by `cell`.
fn coarse_noise(size: usize, cell: usize, sigma: f64, rng: &mut SeededRng) -> Vec<f64> {
    let g = size / cell + 2;
    let grid: Vec<f64> = (0..g * g).map(|_| sigma * rng.normal()).collect();
    let mut px = vec![0.0; size * size];
    for y in 0..size {
        let fy = y as f64 / cell as f64;
        let y0 = fy.floor() as usize;
        let wy = fy - y0 as f64;
        for x in 0..size {
            let fx = x as f64 / cell as f64;
            let x0 = fx.floor() as usize;
            let wx = fx - x0 as f64;
            let top = grid[y0 * g + x0] * (1.0 - wx) + grid[y0 * g + x0 + 1] * wx;
            let bot = grid[(y0 + 1) * g + x0] * (1.0 - wx) + grid[(y0 + 1) * g + x0 + 1] * wx;
            px[y * size + x] = top * (1.0 - wy) + bot * wy;
        }
    }
    px
}

fn sand(size: usize, rng: &mut SeededRng) -> Vec<f64> {
    let f = sf(size);
    let low = coarse_noise(size, (16.0 * f) as usize, 18.0, rng);
    low.into_iter()
        .map(|v| 130.0 + v + 1.5 * rng.normal())
        .collect()
}

/// Short bright strokes with a dominant near-vertical orientation on a dark
/// background.
fn grass(size: usize, rng: &mut SeededRng) -> Vec<f64> {
    let f = sf(size);
    let mut px: Vec<f64> = (0..size * size)
        .map(|_| 70.0 + 3.0 * rng.normal())
        .collect();
    let strokes = (140.0 * f * f).round() as usize;
    for _ in 0..strokes {
        let y = rng.uniform_range(0.0, size as f64);
        let x = rng.uniform_range(0.0, size as f64);
        let angle = (90.0 + rng.uniform_range(-25.0, 25.0)).to_radians();
        let len = rng.uniform_range(6.0 * f, 12.0 * f);
        let intensity = rng.uniform_range(110.0, 200.0);
        let (dy, dx) = (angle.sin(), angle.cos());
        let steps = len.ceil() as usize;
        for s in 0..steps {
            let yy = y + dy * s as f64;
            let xx = x + dx * s as f64;
            if yy < 0.0 || xx < 0.0 {
                continue;
            }
            let (yi, xi) = (yy as usize, xx as usize);
            if yi < size && xi < size {
                px[yi * size + xi] = intensity;
            }
        }
    }
    px
}

/// Brick grid: dark mortar lines on a regular spacing with per-row phase
/// jitter and per-brick intensity variation.
fn pavement(size: usize, rng: &mut SeededRng) -> Vec<f64> {
    let f = sf(size);
    let row_h = (10.0 * f).round() as usize;
    let brick_w = (14.0 * f).round() as usize;
    let mut px = vec![0.0; size * size];
    let rows = size / row_h + 1;
    // Precompute per-row phase and per-brick lightness.
    let mut phases = Vec::with_capacity(rows);
    let mut brick_tones = Vec::with_capacity(rows);
    for _ in 0..rows {
        phases.push(rng.below(brick_w as u64) as usize);
        let tones: Vec<f64> = (0..size / brick_w + 2)
            .map(|_| 150.0 + rng.uniform_range(-15.0, 15.0))
            .collect();
        brick_tones.push(tones);
    }
    for y in 0..size {
        let row = y / row_h;
        let in_mortar_row = y % row_h == 0;
        for x in 0..size {
            let shifted = x + phases[row];
            let v = if in_mortar_row || shifted % brick_w == 0 {
                60.0
            } else {
                brick_tones[row][shifted / brick_w]
            };
            px[y * size + x] = v + 2.0 * rng.normal();
        }
    }
    px
}

/// Band-limited mid-frequency noise plus sparse bright flecks.
fn asphalt(size: usize, rng: &mut SeededRng) -> Vec<f64> {
    let f = sf(size);
    let mid = coarse_noise(size, (4.0 * f).round() as usize, 14.0, rng);
    let mut px: Vec<f64> = mid.into_iter().map(|v| 110.0 + v).collect();
    let flecks = (size * size) / 250;
    for _ in 0..flecks {
        let i = rng.below((size * size) as u64) as usize;
        px[i] = rng.uniform_range(215.0, 255.0);
    }
    px
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape_and_labels() {
        let classes = [TerrainClass::Gravel, TerrainClass::Flat];
        let ds = synth_terrain(&classes, 5, 64, 7).unwrap();
        assert_eq!(ds.len(), 10);
        assert_eq!(ds.features().shape(), &[10, 1, 64, 64]);
        // Sorted: flat before gravel.
        assert_eq!(ds.class_names(), &["flat", "gravel"]);
        assert_eq!(&ds.labels()[..5], &[0; 5]);
        assert_eq!(&ds.labels()[5..], &[1; 5]);
    }

    #[test]
    fn pixel_identical_per_seed() {
        let classes = [TerrainClass::Sand, TerrainClass::Grass];
        let a = synth_terrain(&classes, 3, 64, 9).unwrap();
        let b = synth_terrain(&classes, 3, 64, 9).unwrap();
        assert_eq!(a, b);
        let c = synth_terrain(&classes, 3, 64, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(synth_terrain(&[TerrainClass::Flat], 1, 32, 0).is_err());
        assert!(synth_terrain(&[], 1, 64, 0).is_err());
        assert!(synth_terrain(&[TerrainClass::Flat, TerrainClass::Flat], 1, 64, 0).is_err());
        assert!(TerrainClass::parse("lava").is_err());
    }

    #[test]
    fn pixels_stay_in_unit_range() {
        let ds = synth_terrain(&ALL_TERRAIN_CLASSES, 2, 64, 3).unwrap();
        assert!(ds
            .features()
            .values()
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn boulders_have_stronger_gradients_than_flat() {
        let ds = synth_terrain(&[TerrainClass::Boulders, TerrainClass::Flat], 4, 64, 5).unwrap();
        let mean_abs_gradient = |sample: &[f64]| {
            let s = 64;
            let mut total = 0.0;
            let mut count = 0usize;
            for y in 0..s {
                for x in 1..s - 1 {
                    total += (sample[y * s + x + 1] - sample[y * s + x - 1]).abs();
                    count += 1;
                }
            }
            total / count as f64
        };
        // Labels: boulders = 0, flat = 1 after sorting.
        let g_boulders = mean_abs_gradient(ds.sample(0));
        let g_flat = mean_abs_gradient(ds.sample(4));
        assert!(
            g_boulders > 2.0 * g_flat,
            "boulders {g_boulders} vs flat {g_flat}"
        );
    }

    #[test]
    fn image_count_scales_with_request() {
        let ds = synth_terrain(
            &[
                TerrainClass::Flat,
                TerrainClass::Rocks,
                TerrainClass::Gravel,
                TerrainClass::Sand,
            ],
            50,
            64,
            1,
        )
        .unwrap();
        assert_eq!(ds.len(), 200);
    }
}
