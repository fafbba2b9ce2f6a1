use super::tensor::Tensor;
use crate::error::{Error, Result};
use std::cell::RefCell;

/// Whether an operand of [`gemm`] is read as stored or transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Trans {
    No,
    Yes,
}

// Register-tile and cache-block sizes. The microkernel keeps an 8x16 f64
// accumulator block live, which fits the 32 vector registers of machines
// this targets while leaving room for loads and broadcasts; the cache blocks
// keep one packed A block in L2 and a packed B panel in L3.
const MR: usize = 8;
const NR: usize = 8;
const KC: usize = 384;
const MC: usize = 256;
const NC: usize = 2048;

thread_local! {
    static PACK_A: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
    static PACK_B: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// View into `buf` of `len` elements starting at a 64-byte boundary. The
/// panel loads in the microkernel are full cache lines; keeping them aligned
/// avoids line-splitting penalties that otherwise vary with where the
/// allocator happens to place the buffer.
fn aligned_view(buf: &mut Vec<f64>, len: usize) -> &mut [f64] {
    buf.resize(len + 8, 0.0);
    let start = (buf.as_ptr() as usize).wrapping_neg() % 64 / 8;
    &mut buf[start..start + len]
}

#[inline(always)]
fn read(src: &[f64], trans: Trans, rows: usize, cols: usize, r: usize, c: usize) -> f64 {
    // `rows`/`cols` describe the logical operand op(X); storage is row-major
    // in the untransposed orientation.
    match trans {
        Trans::No => src[r * cols + c],
        Trans::Yes => {
            let _ = rows;
            src[c * rows + r]
        }
    }
}

/// Pack an `mc x kc` block of op(A) into column-panels of MR rows,
/// zero-padding the row remainder so the kernel never branches.
#[allow(clippy::too_many_arguments)]
fn pack_a(
    a: &[f64],
    trans: Trans,
    m: usize,
    k: usize,
    row0: usize,
    mc: usize,
    col0: usize,
    kc: usize,
    out: &mut [f64],
) {
    let panels = mc.div_ceil(MR);
    for panel in 0..panels {
        let base = panel * kc * MR;
        for p in 0..kc {
            for i in 0..MR {
                let r = row0 + panel * MR + i;
                out[base + p * MR + i] = if r < row0 + mc && r < m {
                    read(a, trans, m, k, r, col0 + p)
                } else {
                    0.0
                };
            }
        }
    }
}

/// Pack a `kc x nc` block of op(B) into row-panels of NR columns.
#[allow(clippy::too_many_arguments)]
fn pack_b(
    b: &[f64],
    trans: Trans,
    k: usize,
    n: usize,
    row0: usize,
    kc: usize,
    col0: usize,
    nc: usize,
    out: &mut [f64],
) {
    let panels = nc.div_ceil(NR);
    for panel in 0..panels {
        let base = panel * kc * NR;
        for p in 0..kc {
            for j in 0..NR {
                let c = col0 + panel * NR + j;
                out[base + p * NR + j] = if c < col0 + nc && c < n {
                    read(b, trans, k, n, row0 + p, c)
                } else {
                    0.0
                };
            }
        }
    }
}

/// MR x NR register-tile kernel over a shared depth `kc`. The B operand is
/// read at row stride `ldb` (NR for packed panels, the full row length when
/// reading an untransposed B in place). Accumulates into a local block, then
/// either overwrites or adds into `c` depending on `accumulate`, touching
/// only the `live_m x live_n` valid region.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn kernel(
    kc: usize,
    a_panel: &[f64],
    b_strip: &[f64],
    ldb: usize,
    c: &mut [f64],
    ldc: usize,
    live_m: usize,
    live_n: usize,
    accumulate: bool,
) {
    let mut acc = [[0.0f64; NR]; MR];
    for p in 0..kc {
        let bp = &b_strip[p * ldb..p * ldb + NR];
        let ap = &a_panel[p * MR..p * MR + MR];
        for i in 0..MR {
            let av = ap[i];
            for j in 0..NR {
                acc[i][j] = av.mul_add(bp[j], acc[i][j]);
            }
        }
    }
    if live_m == MR && live_n == NR {
        for i in 0..MR {
            let row = &mut c[i * ldc..i * ldc + NR];
            if accumulate {
                for j in 0..NR {
                    row[j] += acc[i][j];
                }
            } else {
                row.copy_from_slice(&acc[i]);
            }
        }
    } else {
        for i in 0..live_m {
            let row = &mut c[i * ldc..i * ldc + live_n];
            if accumulate {
                for j in 0..live_n {
                    row[j] += acc[i][j];
                }
            } else {
                row.copy_from_slice(&acc[i][..live_n]);
            }
        }
    }
}

/// `c = op(a) * op(b) + beta * c` for row-major buffers, with
/// `op(a): m x k`, `op(b): k x n`, `c: m x n` and `beta` in {0, 1}.
///
/// Deterministic: blocking constants are fixed, so the floating-point
/// summation order depends only on the problem shape.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    trans_a: Trans,
    trans_b: Trans,
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    b: &[f64],
    c: &mut [f64],
    beta: f64,
) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    debug_assert!(beta == 0.0 || beta == 1.0);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if beta == 0.0 {
            c.fill(0.0);
        }
        return;
    }
    if trans_b == Trans::No {
        // Row-major B can be read in place by the kernel; skipping the pack
        // roughly halves memory traffic when m is small relative to n.
        return gemm_b_direct(trans_a, m, k, n, a, b, c, beta);
    }
    PACK_A.with(|pa| {
        PACK_B.with(|pb| {
            let mut ap_buf = pa.borrow_mut();
            let mut bp_buf = pb.borrow_mut();
            let ap = aligned_view(&mut ap_buf, MC.min(m).div_ceil(MR) * MR * KC.min(k));
            let bp = aligned_view(&mut bp_buf, KC.min(k) * NC.min(n).div_ceil(NR) * NR);

            for jc in (0..n).step_by(NC) {
                let nc = NC.min(n - jc);
                for pc in (0..k).step_by(KC) {
                    let kc = KC.min(k - pc);
                    // First depth-block honours beta; later blocks accumulate.
                    let accumulate = pc > 0 || beta == 1.0;
                    pack_b(b, trans_b, k, n, pc, kc, jc, nc, &mut bp[..]);
                    for ic in (0..m).step_by(MC) {
                        let mc = MC.min(m - ic);
                        pack_a(a, trans_a, m, k, ic, mc, pc, kc, &mut ap[..]);
                        for jr in (0..nc).step_by(NR) {
                            let live_n = NR.min(nc - jr);
                            let b_panel = &bp[(jr / NR) * kc * NR..][..kc * NR];
                            for ir in (0..mc).step_by(MR) {
                                let live_m = MR.min(mc - ir);
                                let a_panel = &ap[(ir / MR) * kc * MR..][..kc * MR];
                                let c_off = (ic + ir) * n + jc + jr;
                                kernel(
                                    kc,
                                    a_panel,
                                    b_panel,
                                    NR,
                                    &mut c[c_off..],
                                    n,
                                    live_m,
                                    live_n,
                                    accumulate,
                                );
                            }
                        }
                    }
                }
            }
        })
    });
}

/// `gemm` specialisation for untransposed B: the kernel streams B rows in
/// place at stride `n`, so only the ragged right edge (`n % NR` columns) is
/// staged through a padded scratch strip.
#[allow(clippy::too_many_arguments)]
fn gemm_b_direct(
    trans_a: Trans,
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    b: &[f64],
    c: &mut [f64],
    beta: f64,
) {
    let n_edge = n % NR;
    let n_full = n - n_edge;
    PACK_A.with(|pa| {
        PACK_B.with(|pb| {
            let mut ap_buf = pa.borrow_mut();
            let mut bp_buf = pb.borrow_mut();
            let ap = aligned_view(&mut ap_buf, MC.min(m).div_ceil(MR) * MR * KC.min(k));
            let bp = aligned_view(&mut bp_buf, KC.min(k) * NR);

            for pc in (0..k).step_by(KC) {
                let kc = KC.min(k - pc);
                let accumulate = pc > 0 || beta == 1.0;
                if n_edge > 0 {
                    bp[..kc * NR].fill(0.0);
                    for p in 0..kc {
                        bp[p * NR..p * NR + n_edge]
                            .copy_from_slice(&b[(pc + p) * n + n_full..(pc + p) * n + n]);
                    }
                }
                for ic in (0..m).step_by(MC) {
                    let mc = MC.min(m - ic);
                    pack_a(a, trans_a, m, k, ic, mc, pc, kc, &mut ap[..]);
                    for jr in (0..n_full).step_by(NR) {
                        let b_strip = &b[pc * n + jr..];
                        for ir in (0..mc).step_by(MR) {
                            let live_m = MR.min(mc - ir);
                            let a_panel = &ap[(ir / MR) * kc * MR..][..kc * MR];
                            let c_off = (ic + ir) * n + jr;
                            kernel(
                                kc,
                                a_panel,
                                b_strip,
                                n,
                                &mut c[c_off..],
                                n,
                                live_m,
                                NR,
                                accumulate,
                            );
                        }
                    }
                    if n_edge > 0 {
                        for ir in (0..mc).step_by(MR) {
                            let live_m = MR.min(mc - ir);
                            let a_panel = &ap[(ir / MR) * kc * MR..][..kc * MR];
                            let c_off = (ic + ir) * n + n_full;
                            kernel(
                                kc,
                                a_panel,
                                &bp[..kc * NR],
                                NR,
                                &mut c[c_off..],
                                n,
                                live_m,
                                n_edge,
                                accumulate,
                            );
                        }
                    }
                }
            }
        })
    });
}

/// Matrix product of two rank-2 tensors.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0) {
        return Err(Error::shape_mismatch("matmul", a.shape(), b.shape()));
    }
    let (m, k, n) = (a.dim(0), a.dim(1), b.dim(1));
    let mut out = Tensor::zeros(vec![m, n]);
    gemm(
        Trans::No,
        Trans::No,
        m,
        k,
        n,
        a.values(),
        b.values(),
        out.values_mut(),
        0.0,
    );
    out.ensure_finite("matmul")?;
    Ok(out)
}

/// Dot product, summed in chunks of 8 lanes so it vectorises.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut lanes = [0.0f64; 8];
    let mut chunks_x = x.chunks_exact(8);
    let mut chunks_y = y.chunks_exact(8);
    for (cx, cy) in (&mut chunks_x).zip(&mut chunks_y) {
        for l in 0..8 {
            lanes[l] = cx[l].mul_add(cy[l], lanes[l]);
        }
    }
    let mut tail = 0.0;
    for (a, b) in chunks_x.remainder().iter().zip(chunks_y.remainder()) {
        tail += a * b;
    }
    lanes.iter().sum::<f64>() + tail
}

/// Squared Euclidean distance, vectorised the same way as [`dot`].
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut lanes = [0.0f64; 8];
    let mut chunks_x = x.chunks_exact(8);
    let mut chunks_y = y.chunks_exact(8);
    for (cx, cy) in (&mut chunks_x).zip(&mut chunks_y) {
        for l in 0..8 {
            let d = cx[l] - cy[l];
            lanes[l] = d.mul_add(d, lanes[l]);
        }
    }
    let mut tail = 0.0;
    for (a, b) in chunks_x.remainder().iter().zip(chunks_y.remainder()) {
        let d = a - b;
        tail += d * d;
    }
    lanes.iter().sum::<f64>() + tail
}
