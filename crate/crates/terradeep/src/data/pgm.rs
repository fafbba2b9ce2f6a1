use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::image::{resize_bilinear, GrayImage};
use crate::math::Tensor;
use std::io::Write;
use std::path::Path;

/// Read a binary (P5) PGM file with maxval up to 255.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_pgm(&bytes, &path.display().to_string())
}

fn parse_pgm(bytes: &[u8], path: &str) -> Result<GrayImage> {
    let fmt = |msg: &str| Error::Format {
        path: path.into(),
        line: None,
        msg: msg.into(),
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(fmt("not a binary PGM (missing P5 magic)"));
    }
    // Header tokens (width, height, maxval) separated by whitespace, with
    // '#' comments running to end of line.
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(fmt("truncated header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fmt("bad header number"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(fmt("zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(fmt(&format!("maxval {maxval} unsupported (need 1..=255)")));
    }
    // Exactly one whitespace byte separates the header from pixel data.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(fmt("missing header terminator"));
    }
    pos += 1;
    let n = width * height;
    if bytes.len() - pos < n {
        return Err(fmt(&format!(
            "expected {n} pixel bytes, found {}",
            bytes.len() - pos
        )));
    }
    let pixels = bytes[pos..pos + n].iter().map(|&b| b as f64).collect();
    GrayImage::new(height, width, pixels)
}

/// Write a binary (P5) PGM with maxval 255; intensities are rounded.
pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    write!(w, "P5\n{} {}\n255\n", img.width(), img.height()).map_err(io_err)?;
    let bytes: Vec<u8> = img
        .pixels()
        .iter()
        .map(|&p| p.round().clamp(0.0, 255.0) as u8)
        .collect();
    w.write_all(&bytes).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Load an image corpus laid out as `<root>/<class>/*.pgm`.
///
/// Class names are the subdirectory names in sorted order; every image is
/// resized to 128x128 and scaled to unit intensities, yielding
/// `[n, 1, 128, 128]` features.
pub fn load_image_dir(root: impl AsRef<Path>) -> Result<LabeledDataset> {
    let root = root.as_ref();
    let read_dir = |p: &Path| -> Result<Vec<std::path::PathBuf>> {
        let entries = std::fs::read_dir(p).map_err(|e| Error::io(p.display().to_string(), e))?;
        let mut paths = Vec::new();
        for entry in entries {
            paths.push(entry.map_err(|e| Error::io(p.display().to_string(), e))?.path());
        }
        paths.sort();
        Ok(paths)
    };

    let mut class_dirs: Vec<std::path::PathBuf> =
        read_dir(root)?.into_iter().filter(|p| p.is_dir()).collect();
    class_dirs.sort();
    if class_dirs.is_empty() {
        return Err(Error::Dataset(format!(
            "no class subdirectories under {}",
            root.display()
        )));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_names = Vec::new();
    for (label, dir) in class_dirs.iter().enumerate() {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let images: Vec<_> = read_dir(dir)?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
            .collect();
        if images.is_empty() {
            return Err(Error::Dataset(format!(
                "class directory {} holds no .pgm files",
                dir.display()
            )));
        }
        for img_path in images {
            let img = read_pgm(&img_path)?;
            let resized = resize_bilinear(&img, 128, 128)?;
            values.extend(resized.pixels().iter().map(|p| p / 255.0));
            labels.push(label);
        }
        class_names.push(name);
    }
    let n = labels.len();
    LabeledDataset::new(
        Tensor::new(vec![n, 1, 128, 128], values)?,
        labels,
        class_names,
    )
}
