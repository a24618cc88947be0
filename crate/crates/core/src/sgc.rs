//! Superpixel-guided clustering of a support feature map into prototypes.
//!
//! Pixels are embedded as `[features, row / r, col / r]`, so the squared
//! distance between two embedded pixels is `d_f² + (d_s / r)²`. Masked pixels
//! are softly associated to centroids with weights `exp(-‖p - s‖²)` and each
//! centroid is moved to the weighted mean of the pixels. After the last
//! iteration the two coordinate channels are dropped.

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::pooling::{adaptive_prototype_count, masked_average_pool};
use crate::seeding::{place_seeds, SeedList};
use crate::types::{AssociationMatrix, BinaryMask, FeatureMap, PrototypeSet, SgcConfig};

/// Appends two channels holding `row / r` and `col / r`.
pub fn augment_coordinates(feat: &FeatureMap, r: f64) -> Result<FeatureMap> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::NonPositiveFactor(r));
    }
    let (h, w) = (feat.height(), feat.width());
    let mut data = Vec::with_capacity((feat.channels() + 2) * h * w);
    data.extend_from_slice(feat.data());
    for row in 0..h {
        data.extend(std::iter::repeat_n((row as f64 / r) as f32, w));
    }
    for _ in 0..h {
        data.extend((0..w).map(|col| (col as f64 / r) as f32));
    }
    FeatureMap::new(feat.channels() + 2, h, w, data)
}

/// Gathers the feature vectors of foreground pixels into an
/// `N_m × channels` matrix, rows in row-major mask order.
pub fn extract_masked(feat: &FeatureMap, mask: &BinaryMask) -> Result<Array2<f64>> {
    feat.check_mask(mask)?;
    let fg = mask.foreground_indices();
    if fg.is_empty() {
        return Err(Error::EmptyMask);
    }
    let c = feat.channels();
    let mut out = Array2::zeros((fg.len(), c));
    for ch in 0..c {
        let plane = feat.plane(ch);
        for (row, &i) in fg.iter().enumerate() {
            out[[row, ch]] = plane[i] as f64;
        }
    }
    Ok(out)
}

/// Initial centroids: the masked rows at each seed's pixel.
pub fn init_centroids(
    masked: &Array2<f64>,
    seeds: &SeedList,
    mask: &BinaryMask,
) -> Result<Array2<f64>> {
    // row index of each pixel inside `masked`
    let mut row_of = vec![usize::MAX; mask.height() * mask.width()];
    for (row, i) in mask.foreground_indices().into_iter().enumerate() {
        row_of[i] = row;
    }
    if row_of.iter().filter(|&&r| r != usize::MAX).count() != masked.nrows() {
        return Err(Error::dims(
            "masked rows vs mask foreground",
            mask.count(),
            masked.nrows(),
        ));
    }
    let mut out = Array2::zeros((seeds.len(), masked.ncols()));
    for (k, &(row, col)) in seeds.coords().iter().enumerate() {
        if row >= mask.height() || col >= mask.width() || !mask.get(row, col) {
            return Err(Error::SeedOutsideMask { row, col });
        }
        out.row_mut(k)
            .assign(&masked.row(row_of[row * mask.width() + col]));
    }
    Ok(out)
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Soft association `exp(-‖p - s_i‖²)` of every masked pixel to every
/// centroid.
///
/// The global maximum exponent is subtracted before exponentiation. This
/// scales every weight by one common factor, which cancels in the centroid
/// update because each centroid is normalized by its own column sum.
pub fn association(masked: &Array2<f64>, centroids: &Array2<f64>) -> Result<AssociationMatrix> {
    if masked.ncols() != centroids.ncols() {
        return Err(Error::dims(
            "association columns",
            masked.ncols(),
            centroids.ncols(),
        ));
    }
    let mut exponents = Array2::zeros((masked.nrows(), centroids.nrows()));
    let mut max_exponent = f64::NEG_INFINITY;
    for (p, px) in masked.axis_iter(Axis(0)).enumerate() {
        for (i, s) in centroids.axis_iter(Axis(0)).enumerate() {
            let e = -squared_distance(px, s);
            exponents[[p, i]] = e;
            max_exponent = max_exponent.max(e);
        }
    }
    if !max_exponent.is_finite() {
        // no entries
        max_exponent = 0.0;
    }
    let weights = exponents.mapv_into(|e| (e - max_exponent).exp());
    Ok(AssociationMatrix {
        weights,
        max_exponent,
    })
}

/// Moves each centroid to the association-weighted mean of the masked rows.
/// A centroid whose total weight is below `eps` keeps its previous value.
pub fn update_centroids(
    masked: &Array2<f64>,
    q: &AssociationMatrix,
    prev: &Array2<f64>,
    eps: f64,
) -> Array2<f64> {
    let weights = &q.weights;
    let mut out = prev.clone();
    for i in 0..weights.ncols() {
        let column = weights.column(i);
        let z: f64 = column.sum();
        if z < eps || z == 0.0 || z.is_nan() {
            continue;
        }
        let mut acc = vec![0.0f64; masked.ncols()];
        for (p, &wt) in column.iter().enumerate() {
            for (a, &x) in acc.iter_mut().zip(masked.row(p)) {
                *a += wt * x;
            }
        }
        for (o, a) in out.row_mut(i).iter_mut().zip(acc) {
            *o = a / z;
        }
    }
    out
}

/// Runs `iterations` rounds of association and update starting from
/// `initial`, returning every centroid matrix including the initial one.
pub fn cluster_history(
    masked: &Array2<f64>,
    initial: Array2<f64>,
    iterations: usize,
    eps: f64,
) -> Result<Vec<Array2<f64>>> {
    let mut history = Vec::with_capacity(iterations + 1);
    history.push(initial);
    for _ in 0..iterations {
        let prev = history.last().expect("non-empty history");
        let q = association(masked, prev)?;
        let next = update_centroids(masked, &q, prev, eps);
        history.push(next);
    }
    Ok(history)
}

fn strip_coordinates(centroids: &Array2<f64>, channels: usize) -> Result<PrototypeSet> {
    let vectors = centroids
        .axis_iter(Axis(0))
        .map(|row| row.iter().take(channels).map(|&v| v as f32).collect())
        .collect();
    PrototypeSet::new(channels, vectors)
}

/// Clusters the masked support feature starting from explicit seeds.
///
/// Always runs the iterative clustering, even for a single seed.
pub fn sgc_cluster_with_seeds(
    feat: &FeatureMap,
    mask: &BinaryMask,
    seeds: &SeedList,
    cfg: &SgcConfig,
) -> Result<PrototypeSet> {
    cfg.validate()?;
    let augmented = augment_coordinates(feat, cfg.spatial_factor)?;
    let masked = extract_masked(&augmented, mask)?;
    let mut centroids = init_centroids(&masked, seeds, mask)?;
    for _ in 0..cfg.iterations {
        let q = association(&masked, &centroids)?;
        centroids = update_centroids(&masked, &q, &centroids, cfg.epsilon);
    }
    strip_coordinates(&centroids, feat.channels())
}

/// Superpixel-guided clustering.
///
/// The prototype count comes from [`adaptive_prototype_count`]. Counts of 0
/// or 1 return [`masked_average_pool`] unchanged. Otherwise seeds are placed
/// with [`place_seeds`] and refined for `cfg.iterations` rounds.
pub fn sgc_cluster(feat: &FeatureMap, mask: &BinaryMask, cfg: &SgcConfig) -> Result<PrototypeSet> {
    cfg.validate()?;
    feat.check_mask(mask)?;
    let foreground = mask.count();
    if foreground == 0 {
        return Err(Error::EmptyMask);
    }
    let n = adaptive_prototype_count(foreground, cfg);
    if n <= 1 {
        return masked_average_pool(feat, mask);
    }
    let seeds = place_seeds(mask, n)?;
    sgc_cluster_with_seeds(feat, mask, &seeds, cfg)
}
