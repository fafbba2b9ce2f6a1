use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Max pooling over non-overlapping windows of 2 with stride 2 on a
/// `[channels, length]` signal. An odd trailing element is dropped.
///
/// Returns the pooled tensor and, per output element, the flat index into
/// the input that supplied the maximum (ties resolve to the earlier
/// element), which the backward pass uses to route gradients.
pub fn maxpool1d(input: &Tensor) -> Result<(Tensor, Vec<u32>)> {
    if input.rank() != 2 {
        return Err(Error::Shape(format!(
            "maxpool1d expects [channels, length], got {:?}",
            input.shape()
        )));
    }
    let (channels, length) = (input.dim(0), input.dim(1));
    let out_len = length / 2;
    if out_len == 0 {
        return Err(Error::Shape(format!(
            "maxpool1d needs length >= 2, got {length}"
        )));
    }
    let mut out = Tensor::zeros(vec![channels, out_len]);
    let mut argmax = vec![0u32; channels * out_len];
    pool1d_slice(input.values(), channels, length, out.values_mut(), &mut argmax);
    Ok((out, argmax))
}

/// Core of [`maxpool1d`] on raw slices, reusable per sample in batched code.
/// Argmax entries are flat indices into `vals`.
pub(crate) fn pool1d_slice(
    vals: &[f64],
    channels: usize,
    length: usize,
    out: &mut [f64],
    argmax: &mut [u32],
) {
    let out_len = length / 2;
    debug_assert_eq!(vals.len(), channels * length);
    debug_assert_eq!(out.len(), channels * out_len);
    for c in 0..channels {
        let src_base = c * length;
        for p in 0..out_len {
            let i = src_base + 2 * p;
            let (v, idx) = if vals[i + 1] > vals[i] {
                (vals[i + 1], i + 1)
            } else {
                (vals[i], i)
            };
            out[c * out_len + p] = v;
            argmax[c * out_len + p] = idx as u32;
        }
    }
}

/// Max pooling over non-overlapping 2x2 windows with stride 2 on a
/// `[channels, height, width]` image. Odd trailing rows/columns are dropped.
///
/// Ties resolve to the lowest flat input index (row-major scan order).
pub fn maxpool2d(input: &Tensor) -> Result<(Tensor, Vec<u32>)> {
    if input.rank() != 3 {
        return Err(Error::Shape(format!(
            "maxpool2d expects [channels, height, width], got {:?}",
            input.shape()
        )));
    }
    let (channels, height, width) = (input.dim(0), input.dim(1), input.dim(2));
    let (oh, ow) = (height / 2, width / 2);
    if oh == 0 || ow == 0 {
        return Err(Error::Shape(format!(
            "maxpool2d needs height and width >= 2, got {height}x{width}"
        )));
    }
    let mut out = Tensor::zeros(vec![channels, oh, ow]);
    let mut argmax = vec![0u32; channels * oh * ow];
    pool2d_slice(
        input.values(),
        channels,
        height,
        width,
        out.values_mut(),
        &mut argmax,
    );
    Ok((out, argmax))
}

/// Core of [`maxpool2d`] on raw slices, reusable per sample in batched code.
/// Argmax entries are flat indices into `vals`.
pub(crate) fn pool2d_slice(
    vals: &[f64],
    channels: usize,
    height: usize,
    width: usize,
    out: &mut [f64],
    argmax: &mut [u32],
) {
    let (oh, ow) = (height / 2, width / 2);
    debug_assert_eq!(vals.len(), channels * height * width);
    debug_assert_eq!(out.len(), channels * oh * ow);
    for c in 0..channels {
        let plane = c * height * width;
        for y in 0..oh {
            let r0 = plane + 2 * y * width;
            let r1 = r0 + width;
            for x in 0..ow {
                let candidates = [r0 + 2 * x, r0 + 2 * x + 1, r1 + 2 * x, r1 + 2 * x + 1];
                let mut best = candidates[0];
                for &i in &candidates[1..] {
                    if vals[i] > vals[best] {
                        best = i;
                    }
                }
                let o = (c * oh + y) * ow + x;
                out[o] = vals[best];
                argmax[o] = best as u32;
            }
        }
    }
}

/// Route output gradients back to the elements selected by pooling; the
/// inverse scatter for both pool variants.
pub(crate) fn unpool_scatter(dout: &[f64], argmax: &[u32], dinput: &mut [f64]) {
    debug_assert_eq!(dout.len(), argmax.len());
    dinput.fill(0.0);
    for (g, &i) in dout.iter().zip(argmax) {
        dinput[i as usize] += g;
    }
}
