//! The MatMul micro-kernel: up to 4 filter rows against up to 2 input
//! columns, stepping through 4-element MAC groups (one simulated SIMD
//! dot-product per row/column pair and step).

use super::trace::ExecutionTrace;

#[inline(always)]
fn load4(v: &[i8], base: usize) -> [i8; 4] {
    let mut out = [0i8; 4];
    for (q, o) in out.iter_mut().enumerate() {
        if let Some(&x) = v.get(base + q) {
            *o = x;
        }
    }
    out
}

/// Loads positions `base..base+4` of a column that starts `skip` entries
/// into the row (positions before `skip` read zero).
#[inline(always)]
fn load4_shifted(col: &[i8], base: usize, skip: usize) -> [i8; 4] {
    if base >= skip {
        return load4(col, base - skip);
    }
    let mut out = [0i8; 4];
    for (q, o) in out.iter_mut().enumerate() {
        let p = base + q;
        if p >= skip {
            if let Some(&x) = col.get(p - skip) {
                *o = x;
            }
        }
    }
    out
}

#[inline(always)]
fn sdot4(a: [i8; 4], b: [i8; 4]) -> i32 {
    a.iter().zip(b.iter()).map(|(&x, &y)| i32::from(x) * i32::from(y)).sum()
}

/// `acc[r][j] = dot(rows[r][skip[j]..], cols[j])` over contiguous operands.
/// `cols[j]` is aligned with the tail of each row.
pub(crate) fn direct_block<const R: usize, const N: usize>(
    rows: [&[i8]; R],
    cols: [&[i8]; N],
    skip: [usize; N],
) -> [[i32; N]; R] {
    let len = rows[0].len();
    let mut acc = [[0i32; N]; R];
    for g in 0..len.div_ceil(4) {
        let base = 4 * g;
        let xs: [[i8; 4]; N] = core::array::from_fn(|j| load4_shifted(cols[j], base, skip[j]));
        for r in 0..R {
            let w = load4(rows[r], base);
            for j in 0..N {
                acc[r][j] += sdot4(w, xs[j]);
            }
        }
    }
    acc
}

/// Indirect variant: the K*C_in row is walked as `k` segments of `c_in`,
/// with column segment `p` read from `segs[j][p]`.
pub(crate) fn segmented_block<const R: usize, const N: usize>(
    rows: [&[i8]; R],
    segs: [&[&[i8]]; N],
    c_in: usize,
) -> [[i32; N]; R] {
    let k = segs[0].len();
    let mut acc = [[0i32; N]; R];
    for p in 0..k {
        let seg_rows: [&[i8]; R] = core::array::from_fn(|r| &rows[r][p * c_in..(p + 1) * c_in]);
        for g in 0..c_in.div_ceil(4) {
            let base = 4 * g;
            let xs: [[i8; 4]; N] = core::array::from_fn(|j| load4(segs[j][p], base));
            for r in 0..R {
                let w = load4(seg_rows[r], base);
                for j in 0..N {
                    acc[r][j] += sdot4(w, xs[j]);
                }
            }
        }
    }
    acc
}

/// 4x2 MatMul over contiguous buffers of equal length (one im2col row per
/// column). Counts `8 * ceil(len / 4)` MAC groups in `trace`.
pub fn matmul_4x2(rows: [&[i8]; 4], inputs: [&[i8]; 2], trace: &mut ExecutionTrace) -> [[i32; 2]; 4] {
    let len = rows[0].len();
    debug_assert!(rows.iter().all(|r| r.len() == len) && inputs.iter().all(|c| c.len() == len));
    let steps = len.div_ceil(4) as u64;
    trace.mm_iterations += 1;
    trace.mm_steps += steps;
    trace.macgroup_ops += 8 * steps;
    direct_block(rows, inputs, [0, 0])
}

/// 4x2 MatMul with columns given as `k` segments of `c_in` values each.
/// Counts `8 * k * ceil(c_in / 4)` MAC groups in `trace`.
pub fn matmul_4x2_indirect(
    rows: [&[i8]; 4],
    segs: [&[&[i8]]; 2],
    c_in: usize,
    trace: &mut ExecutionTrace,
) -> [[i32; 2]; 4] {
    let k = segs[0].len();
    let steps = (k * c_in.div_ceil(4)) as u64;
    trace.mm_iterations += 1;
    trace.mm_steps += steps;
    trace.segment_loops += k as u64;
    trace.macgroup_ops += 8 * steps;
    segmented_block(rows, segs, c_in)
}
