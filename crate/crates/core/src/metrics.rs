//! Mask comparison metrics.

use crate::error::Result;
use crate::types::BinaryMask;

/// Intersection over union of the foregrounds. Two empty masks score 1.0.
pub fn iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    pred.check_same_shape(gt)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        inter += (p && g) as usize;
        union += (p || g) as usize;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// Mean of foreground IoU and background IoU.
pub fn fb_iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    let fg = iou(pred, gt)?;
    let bg = iou(&pred.complement(), &gt.complement())?;
    Ok(0.5 * (fg + bg))
}
