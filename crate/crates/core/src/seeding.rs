//! Exact Euclidean distance transform and foreground seed placement.
//!
//! Seeds are placed one at a time at the foreground pixel farthest from the
//! background. The chosen pixel is then cleared and the transform recomputed.
//! Pixels outside the image count as background.

use crate::error::{Error, Result};
use crate::types::BinaryMask;

/// Ordered `(row, col)` seed positions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeedList {
    coords: Vec<(usize, usize)>,
}

impl SeedList {
    pub fn new(coords: Vec<(usize, usize)>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas). `f` holds `0` at sites and `INFINITY` elsewhere.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    // first finite site starts the envelope
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                // k > 0 here: z[0] is -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance from each pixel to the nearest background
/// pixel, with a one-pixel background frame around the image.
///
/// All intermediate values are small integers held in `f64`, so the result
/// is exact.
pub fn squared_distance_transform(mask: &BinaryMask) -> Vec<f64> {
    let (h, w) = (mask.height(), mask.width());
    let (ph, pw) = (h + 2, w + 2);
    let mut grid = vec![0.0f64; ph * pw];
    for r in 0..h {
        for c in 0..w {
            if mask.get(r, c) {
                grid[(r + 1) * pw + c + 1] = f64::INFINITY;
            }
        }
    }

    let n = ph.max(pw);
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut col_in = vec![0.0f64; ph];
    let mut col_out = vec![0.0f64; ph];
    for c in 0..pw {
        for r in 0..ph {
            col_in[r] = grid[r * pw + c];
        }
        edt_1d(&col_in, &mut col_out, &mut v, &mut z);
        for r in 0..ph {
            grid[r * pw + c] = col_out[r];
        }
    }
    let mut row_out = vec![0.0f64; pw];
    for r in 0..ph {
        let row = &grid[r * pw..(r + 1) * pw];
        edt_1d(row, &mut row_out, &mut v, &mut z);
        grid[r * pw..(r + 1) * pw].copy_from_slice(&row_out);
    }

    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        out.extend_from_slice(&grid[(r + 1) * pw + 1..(r + 1) * pw + 1 + w]);
    }
    out
}

/// Euclidean distance from each pixel to the nearest background pixel,
/// row-major. Background pixels map to 0 and the image border counts as
/// background.
pub fn distance_transform(mask: &BinaryMask) -> Vec<f64> {
    squared_distance_transform(mask)
        .into_iter()
        .map(f64::sqrt)
        .collect()
}

/// Places `n` seeds inside the foreground of `mask`.
///
/// Each step takes the pixel of largest distance transform value (ties go to
/// the smallest row, then the smallest column), records it, clears it in a
/// working copy of the mask and recomputes the transform.
pub fn place_seeds(mask: &BinaryMask, n: usize) -> Result<SeedList> {
    let available = mask.count();
    if available < n {
        return Err(Error::InsufficientForeground {
            requested: n,
            available,
        });
    }
    let w = mask.width();
    let mut work = mask.clone();
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        let dt = squared_distance_transform(&work);
        // strict > keeps the first (row-major smallest) maximum
        let mut best = 0usize;
        for (i, &d) in dt.iter().enumerate() {
            if d > dt[best] {
                best = i;
            }
        }
        let (row, col) = (best / w, best % w);
        debug_assert!(work.get(row, col));
        coords.push((row, col));
        work.set(row, col, false);
    }
    Ok(SeedList { coords })
}
