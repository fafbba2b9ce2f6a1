use super::linalg::{gemm, Trans};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Valid-mode cross-correlation of a multi-channel 1-D signal.
///
/// `input` is `[channels, length]`, `kernels` is
/// `[filters, channels, width]`; the result is
/// `[filters, length - width + 1]` with unit stride and no padding.
pub fn conv1d(input: &Tensor, kernels: &Tensor) -> Result<Tensor> {
    if input.rank() != 2 || kernels.rank() != 3 || input.dim(0) != kernels.dim(1) {
        return Err(Error::shape_mismatch("conv1d", input.shape(), kernels.shape()));
    }
    let (channels, length) = (input.dim(0), input.dim(1));
    let (filters, width) = (kernels.dim(0), kernels.dim(2));
    if width > length {
        return Err(Error::Shape(format!(
            "conv1d kernel width {width} exceeds signal length {length}"
        )));
    }
    let positions = length - width + 1;
    let k = channels * width;
    let mut col = vec![0.0; k * positions];
    im2col_1d(input.values(), channels, length, width, &mut col);
    let mut out = Tensor::zeros(vec![filters, positions]);
    gemm(
        Trans::No,
        Trans::No,
        filters,
        k,
        positions,
        kernels.values(),
        &col,
        out.values_mut(),
        0.0,
    );
    out.ensure_finite("conv1d")?;
    Ok(out)
}

/// Valid-mode cross-correlation of a multi-channel image.
///
/// `input` is `[channels, height, width]`, `kernels` is
/// `[filters, channels, kh, kw]`; the result is
/// `[filters, height - kh + 1, width - kw + 1]` with unit stride.
pub fn conv2d(input: &Tensor, kernels: &Tensor) -> Result<Tensor> {
    if input.rank() != 3 || kernels.rank() != 4 || input.dim(0) != kernels.dim(1) {
        return Err(Error::shape_mismatch("conv2d", input.shape(), kernels.shape()));
    }
    let (channels, height, width) = (input.dim(0), input.dim(1), input.dim(2));
    let (filters, kh, kw) = (kernels.dim(0), kernels.dim(2), kernels.dim(3));
    if kh > height || kw > width {
        return Err(Error::Shape(format!(
            "conv2d kernel {kh}x{kw} exceeds image {height}x{width}"
        )));
    }
    let (oh, ow) = (height - kh + 1, width - kw + 1);
    let k = channels * kh * kw;
    let mut col = vec![0.0; k * oh * ow];
    im2col_2d(input.values(), channels, height, width, kh, kw, &mut col);
    let mut out = Tensor::zeros(vec![filters, oh, ow]);
    gemm(
        Trans::No,
        Trans::No,
        filters,
        k,
        oh * ow,
        kernels.values(),
        &col,
        out.values_mut(),
        0.0,
    );
    out.ensure_finite("conv2d")?;
    Ok(out)
}

/// Lower a `[channels, length]` signal into the `[channels*width, positions]`
/// patch matrix whose product with a flattened kernel bank performs the
/// correlation. Row `c*width + w` holds `input[c][p + w]` for each output
/// position `p`.
pub(crate) fn im2col_1d(input: &[f64], channels: usize, length: usize, width: usize, col: &mut [f64]) {
    let positions = length - width + 1;
    debug_assert_eq!(col.len(), channels * width * positions);
    for c in 0..channels {
        let src = &input[c * length..(c + 1) * length];
        for w in 0..width {
            let dst = &mut col[(c * width + w) * positions..][..positions];
            dst.copy_from_slice(&src[w..w + positions]);
        }
    }
}

/// Scatter-add the patch-matrix gradient back onto the signal gradient;
/// exact adjoint of [`im2col_1d`].
pub(crate) fn col2im_1d(col: &[f64], channels: usize, length: usize, width: usize, dinput: &mut [f64]) {
    let positions = length - width + 1;
    dinput.fill(0.0);
    for c in 0..channels {
        let dst = &mut dinput[c * length..(c + 1) * length];
        for w in 0..width {
            let src = &col[(c * width + w) * positions..][..positions];
            for p in 0..positions {
                dst[p + w] += src[p];
            }
        }
    }
}

/// Lower a `[channels, height, width]` image into the
/// `[channels*kh*kw, oh*ow]` patch matrix for GEMM-based correlation.
pub(crate) fn im2col_2d(
    input: &[f64],
    channels: usize,
    height: usize,
    width: usize,
    kh: usize,
    kw: usize,
    col: &mut [f64],
) {
    let (oh, ow) = (height - kh + 1, width - kw + 1);
    debug_assert_eq!(col.len(), channels * kh * kw * oh * ow);
    let positions = oh * ow;
    for c in 0..channels {
        let plane = &input[c * height * width..(c + 1) * height * width];
        for dy in 0..kh {
            for dx in 0..kw {
                let row = &mut col[((c * kh + dy) * kw + dx) * positions..][..positions];
                for y in 0..oh {
                    let src = &plane[(y + dy) * width + dx..][..ow];
                    row[y * ow..(y + 1) * ow].copy_from_slice(src);
                }
            }
        }
    }
}

/// Exact adjoint of [`im2col_2d`].
pub(crate) fn col2im_2d(
    col: &[f64],
    channels: usize,
    height: usize,
    width: usize,
    kh: usize,
    kw: usize,
    dinput: &mut [f64],
) {
    let (oh, ow) = (height - kh + 1, width - kw + 1);
    let positions = oh * ow;
    dinput.fill(0.0);
    for c in 0..channels {
        let plane = &mut dinput[c * height * width..(c + 1) * height * width];
        for dy in 0..kh {
            for dx in 0..kw {
                let row = &col[((c * kh + dy) * kw + dx) * positions..][..positions];
                for y in 0..oh {
                    let dst = &mut plane[(y + dy) * width + dx..][..ow];
                    for x in 0..ow {
                        dst[x] += row[y * ow + x];
                    }
                }
            }
        }
    }
}
