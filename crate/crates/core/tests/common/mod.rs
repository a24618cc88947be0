//! Straight-line reference implementations used to check the library.
//! Nothing here calls into the crate's numerical code.

#![allow(dead_code, clippy::needless_range_loop, clippy::too_many_arguments)]

/// Squared distance to the nearest background pixel, image frame counted as
/// background, by exhaustive search.
pub fn brute_force_sq_dt(bits: &[bool], h: usize, w: usize) -> Vec<i64> {
    let (hi, wi) = (h as i64, w as i64);
    let mut out = vec![0i64; h * w];
    for r in 0..hi {
        for c in 0..wi {
            if !bits[(r * wi + c) as usize] {
                continue;
            }
            let mut best = i64::MAX;
            for br in -1..=hi {
                for bc in -1..=wi {
                    let inside = br >= 0 && br < hi && bc >= 0 && bc < wi;
                    if inside && bits[(br * wi + bc) as usize] {
                        continue;
                    }
                    best = best.min((br - r) * (br - r) + (bc - c) * (bc - c));
                }
            }
            out[(r * wi + c) as usize] = best;
        }
    }
    out
}

/// Seeds by repeated brute-force distance transform; ties to smallest
/// (row, col).
pub fn brute_force_seeds(bits: &[bool], h: usize, w: usize, n: usize) -> Vec<(usize, usize)> {
    let mut work = bits.to_vec();
    let mut seeds = Vec::new();
    for _ in 0..n {
        let dt = brute_force_sq_dt(&work, h, w);
        let mut best = 0;
        for i in 0..h * w {
            if dt[i] > dt[best] {
                best = i;
            }
        }
        seeds.push((best / w, best % w));
        work[best] = false;
    }
    seeds
}

/// Superpixel-guided clustering written out as plain loops: concatenate
/// coordinates, gather masked pixels, iterate association and centroid
/// update without any stabilization, drop the coordinates.
///
/// `feat` is `c × h × w` row-major.
pub fn loop_clustering(
    feat: &[f32],
    c: usize,
    h: usize,
    w: usize,
    mask: &[bool],
    seeds: &[(usize, usize)],
    r: f64,
    iterations: usize,
    eps: f64,
) -> Vec<Vec<f64>> {
    // F' : masked augmented features
    let mut fp: Vec<Vec<f64>> = Vec::new();
    let mut index_of = vec![usize::MAX; h * w];
    for y in 0..h {
        for x in 0..w {
            if mask[y * w + x] {
                let mut v = Vec::with_capacity(c + 2);
                for ch in 0..c {
                    v.push(feat[ch * h * w + y * w + x] as f64);
                }
                v.push((y as f64 / r) as f32 as f64);
                v.push((x as f64 / r) as f32 as f64);
                index_of[y * w + x] = fp.len();
                fp.push(v);
            }
        }
    }
    let mut s: Vec<Vec<f64>> = seeds
        .iter()
        .map(|&(y, x)| fp[index_of[y * w + x]].clone())
        .collect();
    for _ in 0..iterations {
        let mut q = vec![vec![0.0f64; s.len()]; fp.len()];
        for p in 0..fp.len() {
            for i in 0..s.len() {
                let mut d2 = 0.0;
                for k in 0..c + 2 {
                    d2 += (fp[p][k] - s[i][k]) * (fp[p][k] - s[i][k]);
                }
                q[p][i] = (-d2).exp();
            }
        }
        let mut next = s.clone();
        for i in 0..s.len() {
            let mut z = 0.0;
            for p in 0..fp.len() {
                z += q[p][i];
            }
            if z < eps {
                continue;
            }
            for k in 0..c + 2 {
                let mut acc = 0.0;
                for p in 0..fp.len() {
                    acc += q[p][i] * fp[p][k];
                }
                next[i][k] = acc / z;
            }
        }
        s = next;
    }
    s.into_iter().map(|v| v[..c].to_vec()).collect()
}

/// Hard-assignment-free soft k-means on feature vectors only, run long
/// enough to converge.
pub fn soft_kmeans(
    points: &[Vec<f64>],
    mut centers: Vec<Vec<f64>>,
    iterations: usize,
) -> Vec<Vec<f64>> {
    for _ in 0..iterations {
        let mut next = centers.clone();
        for (i, ctr) in centers.iter().enumerate() {
            let mut z = 0.0;
            let mut acc = vec![0.0; ctr.len()];
            for p in points {
                let d2: f64 = p.iter().zip(ctr).map(|(a, b)| (a - b) * (a - b)).sum();
                let wt = (-d2).exp();
                z += wt;
                for (a, x) in acc.iter_mut().zip(p) {
                    *a += wt * x;
                }
            }
            if z > 0.0 {
                next[i] = acc.into_iter().map(|a| a / z).collect();
            }
        }
        centers = next;
    }
    centers
}

/// Cosine similarity by definition.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    if na < 1e-12 || nb < 1e-12 {
        0.0
    } else {
        dot / (na * nb)
    }
}
