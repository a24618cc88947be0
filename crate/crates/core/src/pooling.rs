//! Single-prototype reduction and the adaptive prototype count.

use crate::error::{Error, Result};
use crate::types::{BinaryMask, FeatureMap, PrototypeSet, SgcConfig};

/// Mean feature vector over the foreground of `mask`.
///
/// Sums are accumulated in `f64` in row-major mask order and divided by the
/// foreground count once per channel.
pub fn masked_average_pool(feat: &FeatureMap, mask: &BinaryMask) -> Result<PrototypeSet> {
    feat.check_mask(mask)?;
    let fg = mask.foreground_indices();
    if fg.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = fg.len() as f64;
    let mean = (0..feat.channels())
        .map(|ch| {
            let plane = feat.plane(ch);
            let sum: f64 = fg.iter().map(|&i| plane[i] as f64).sum();
            (sum / n) as f32
        })
        .collect();
    PrototypeSet::new(feat.channels(), vec![mean])
}

/// `min(floor(N_m / S_sp), N_max)`. Zero means the foreground is too small
/// for clustering and callers fall back to [`masked_average_pool`].
pub fn adaptive_prototype_count(foreground: usize, cfg: &SgcConfig) -> usize {
    (foreground / cfg.area_per_seed.max(1)).min(cfg.max_prototypes)
}
