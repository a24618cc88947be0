//! Guided prototype allocation: matches prototypes against every query pixel
//! and assembles the guided query feature.
//!
//! The merged feature is laid out as `[query ⊕ guide ⊕ probability]` along
//! the channel axis, `2c + 1` channels in total.

use crate::error::{Error, Result};
use crate::types::{
    FeatureMap, GuideMap, ProbabilityMap, ProjectionWeights, PrototypeSet, SimilarityStack,
};

/// Norms below this produce a cosine of 0.
pub const NORM_GUARD: f64 = 1e-12;

/// Cosine similarity in `f64`. Zero when either vector has norm below
/// [`NORM_GUARD`].
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let (na, nb) = (na.sqrt(), nb.sqrt());
    if na < NORM_GUARD || nb < NORM_GUARD {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity of every prototype with every query pixel.
pub fn similarity_stack(protos: &PrototypeSet, query: &FeatureMap) -> Result<SimilarityStack> {
    if protos.is_empty() {
        return Err(Error::EmptyPrototypeSet);
    }
    if protos.dim() != query.channels() {
        return Err(Error::dims(
            "prototype dim vs query channels",
            query.channels(),
            protos.dim(),
        ));
    }
    let n = query.pixels();
    let c = query.channels();
    let pixels: Vec<Vec<f64>> = (0..n)
        .map(|p| (0..c).map(|ch| query.data()[ch * n + p] as f64).collect())
        .collect();
    let mut values = Vec::with_capacity(protos.count() * n);
    for proto in protos.vectors() {
        let s: Vec<f64> = proto.iter().map(|&v| v as f64).collect();
        values.extend(pixels.iter().map(|px| cosine(&s, px) as f32));
    }
    SimilarityStack::new(protos.count(), query.height(), query.width(), values)
}

/// Index of the most similar prototype at each pixel; ties go to the lowest
/// index.
pub fn guide_map(c: &SimilarityStack) -> Result<GuideMap> {
    if c.count() == 0 {
        return Err(Error::EmptyPrototypeSet);
    }
    let n = c.height() * c.width();
    let indices = (0..n)
        .map(|p| {
            let mut best = 0;
            for i in 1..c.count() {
                if c.get(i, p) > c.get(best, p) {
                    best = i;
                }
            }
            best
        })
        .collect();
    GuideMap::new(c.height(), c.width(), indices)
}

/// Scatters the selected prototype into every pixel.
pub fn guide_feature(protos: &PrototypeSet, g: &GuideMap) -> Result<FeatureMap> {
    let count = protos.count();
    if let Some(&index) = g.indices().iter().find(|&&i| i >= count) {
        return Err(Error::IndexOutOfRange { index, count });
    }
    let n = g.height() * g.width();
    let mut data = Vec::with_capacity(protos.dim() * n);
    for ch in 0..protos.dim() {
        data.extend(g.indices().iter().map(|&i| protos.vector(i)[ch]));
    }
    FeatureMap::new(protos.dim(), g.height(), g.width(), data)
}

/// Sum of the similarity planes, unnormalized.
pub fn probability_map(c: &SimilarityStack) -> Result<ProbabilityMap> {
    if c.count() == 0 {
        return Err(Error::EmptyPrototypeSet);
    }
    let n = c.height() * c.width();
    let values = (0..n)
        .map(|p| (0..c.count()).map(|i| c.get(i, p) as f64).sum::<f64>() as f32)
        .collect();
    Ok(ProbabilityMap {
        height: c.height(),
        width: c.width(),
        values,
    })
}

/// Concatenates query, guide feature and probability map along channels and
/// optionally applies a per-pixel linear projection.
pub fn assemble_query(
    query: &FeatureMap,
    guide: &FeatureMap,
    prob: &ProbabilityMap,
    proj: Option<&ProjectionWeights>,
) -> Result<FeatureMap> {
    let (h, w) = (query.height(), query.width());
    if guide.height() != h || guide.width() != w || prob.height() != h || prob.width() != w {
        return Err(Error::dims(
            "spatial size of query / guide / probability",
            format!("{h}x{w}"),
            format!(
                "{}x{} / {}x{}",
                guide.height(),
                guide.width(),
                prob.height(),
                prob.width()
            ),
        ));
    }
    if guide.channels() != query.channels() {
        return Err(Error::dims(
            "guide channels",
            query.channels(),
            guide.channels(),
        ));
    }
    let merged_channels = 2 * query.channels() + 1;
    let mut data = Vec::with_capacity(merged_channels * h * w);
    data.extend_from_slice(query.data());
    data.extend_from_slice(guide.data());
    data.extend_from_slice(prob.values());
    let merged = FeatureMap::new(merged_channels, h, w, data)?;
    match proj {
        None => Ok(merged),
        Some(p) => project(&merged, p),
    }
}

/// Applies `out = W · x + b` at every pixel.
pub fn project(input: &FeatureMap, proj: &ProjectionWeights) -> Result<FeatureMap> {
    if proj.in_channels() != input.channels() {
        return Err(Error::ProjectionShapeMismatch {
            expected: proj.in_channels(),
            got: input.channels(),
        });
    }
    let n = input.pixels();
    let (out_c, in_c) = (proj.out_channels(), proj.in_channels());
    let m = proj.matrix();
    let mut data = vec![0.0f32; out_c * n];
    let mut acc = vec![0.0f64; n];
    for o in 0..out_c {
        let b = proj.bias().map_or(0.0, |b| b[o] as f64);
        acc.iter_mut().for_each(|a| *a = b);
        for i in 0..in_c {
            let wt = m[o * in_c + i] as f64;
            for (a, &x) in acc.iter_mut().zip(input.plane(i)) {
                *a += wt * x as f64;
            }
        }
        for (d, &a) in data[o * n..(o + 1) * n].iter_mut().zip(&acc) {
            *d = a as f32;
        }
    }
    FeatureMap::new(out_c, input.height(), input.width(), data)
}

/// Everything produced by one allocation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub similarity: SimilarityStack,
    pub guide: GuideMap,
    pub guide_feature: FeatureMap,
    pub probability: ProbabilityMap,
    pub merged: FeatureMap,
}

/// Similarity, guide map, guide feature, probability map and merged feature
/// in one call.
pub fn allocate(
    protos: &PrototypeSet,
    query: &FeatureMap,
    proj: Option<&ProjectionWeights>,
) -> Result<Allocation> {
    let similarity = similarity_stack(protos, query)?;
    let guide = guide_map(&similarity)?;
    let guide_feat = guide_feature(protos, &guide)?;
    let probability = probability_map(&similarity)?;
    let merged = assemble_query(query, &guide_feat, &probability, proj)?;
    Ok(Allocation {
        similarity,
        guide,
        guide_feature: guide_feat,
        probability,
        merged,
    })
}
