//! Dense tensors, masks and prototype containers shared by the clustering and
//! allocation stages.
//!
//! Values are stored as `f32` so that everything can be written to and read
//! back from a tensor file without loss. Reductions accumulate in `f64`.

use ndarray::Array2;

use crate::error::{Error, Result};

fn check_finite(data: &[f32]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// A `channels × height × width` feature tensor, row-major by
/// (channel, row, col).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidConfig(format!(
                "feature map dimensions must be positive, got {channels}x{height}x{width}"
            )));
        }
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(Error::dims("feature map data length", expected, data.len()));
        }
        check_finite(&data)?;
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn filled(channels: usize, height: usize, width: usize, value: f32) -> Result<Self> {
        Self::new(
            channels,
            height,
            width,
            vec![value; channels * height * width],
        )
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for ch in 0..channels {
            for row in 0..height {
                for col in 0..width {
                    data.push(f(ch, row, col));
                }
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, ch: usize, row: usize, col: usize) -> f32 {
        self.data[(ch * self.height + row) * self.width + col]
    }

    /// One channel plane, `height × width` values.
    pub fn plane(&self, ch: usize) -> &[f32] {
        let n = self.pixels();
        &self.data[ch * n..(ch + 1) * n]
    }

    /// Feature vector at flat pixel index `row * width + col`.
    pub fn pixel(&self, index: usize) -> Vec<f32> {
        let n = self.pixels();
        (0..self.channels)
            .map(|ch| self.data[ch * n + index])
            .collect()
    }

    pub(crate) fn check_mask(&self, mask: &BinaryMask) -> Result<()> {
        if mask.height() != self.height || mask.width() != self.width {
            return Err(Error::dims(
                "mask vs feature map",
                format!("{}x{}", self.height, self.width),
                format!("{}x{}", mask.height(), mask.width()),
            ));
        }
        Ok(())
    }
}

/// Row-major `height × width` boolean mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidConfig(format!(
                "mask dimensions must be positive, got {height}x{width}"
            )));
        }
        if bits.len() != height * width {
            return Err(Error::dims("mask length", height * width, bits.len()));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn filled(height: usize, width: usize, value: bool) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                bits.push(f(row, col));
            }
        }
        Self::new(height, width, bits)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    /// Number of foreground pixels (`N_m`).
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Flat indices of foreground pixels in row-major order.
    pub fn foreground_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub(crate) fn check_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::dims(
                "mask shapes",
                format!("{}x{}", self.height, self.width),
                format!("{}x{}", other.height, other.width),
            ));
        }
        Ok(())
    }
}

/// Ordered prototype vectors, each tagged with the support shot it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    dim: usize,
    vectors: Vec<Vec<f32>>,
    shots: Vec<usize>,
}

impl PrototypeSet {
    pub fn new(dim: usize, vectors: Vec<Vec<f32>>) -> Result<Self> {
        let shots = vec![0; vectors.len()];
        Self::with_shots(dim, vectors, shots)
    }

    pub fn with_shots(dim: usize, vectors: Vec<Vec<f32>>, shots: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "prototype dimension must be positive".into(),
            ));
        }
        if shots.len() != vectors.len() {
            return Err(Error::dims(
                "prototype provenance",
                vectors.len(),
                shots.len(),
            ));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::dims("prototype length", dim, v.len()));
            }
            check_finite(v)?;
        }
        Ok(Self {
            dim,
            vectors,
            shots,
        })
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f32>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i]
    }

    /// Source shot index of every vector.
    pub fn shots(&self) -> &[usize] {
        &self.shots
    }

    /// Re-tags every vector as coming from `shot`.
    pub fn tagged(mut self, shot: usize) -> Self {
        self.shots.iter_mut().for_each(|s| *s = shot);
        self
    }

    /// Row-major `count × dim` copy of the vectors.
    pub fn flat(&self) -> Vec<f32> {
        self.vectors.iter().flatten().copied().collect()
    }
}

/// Soft pixel-to-centroid weights, one row per masked pixel (row-major mask
/// order) and one column per centroid.
///
/// `weights` equal the unscaled `exp(-d²)` values multiplied by the single
/// global factor `exp(-max_exponent)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    pub(crate) weights: Array2<f64>,
    pub(crate) max_exponent: f64,
}

impl AssociationMatrix {
    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Largest exponent `-‖p - s‖²` over all entries, subtracted before
    /// exponentiation.
    pub fn max_exponent(&self) -> f64 {
        self.max_exponent
    }

    pub fn pixels(&self) -> usize {
        self.weights.nrows()
    }

    pub fn centroids(&self) -> usize {
        self.weights.ncols()
    }

    /// Weights without the global stabilization factor. May underflow to zero.
    pub fn unscaled(&self) -> Array2<f64> {
        let m = self.max_exponent;
        self.weights.mapv(|w| w * m.exp())
    }
}

/// Cosine similarity of every prototype against every query pixel,
/// `count × height × width`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityStack {
    pub(crate) count: usize,
    pub(crate) height: usize,
    pub(crate) width: usize,
    pub(crate) values: Vec<f32>,
}

impl SimilarityStack {
    pub fn new(count: usize, height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != count * height * width {
            return Err(Error::dims(
                "similarity stack length",
                count * height * width,
                values.len(),
            ));
        }
        check_finite(&values)?;
        Ok(Self {
            count,
            height,
            width,
            values,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn plane(&self, i: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.values[i * n..(i + 1) * n]
    }

    #[inline]
    pub fn get(&self, i: usize, pixel: usize) -> f32 {
        self.values[i * self.height * self.width + pixel]
    }
}

/// Per-pixel index of the best matching prototype.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuideMap {
    pub(crate) height: usize,
    pub(crate) width: usize,
    pub(crate) indices: Vec<usize>,
}

impl GuideMap {
    pub fn new(height: usize, width: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.len() != height * width {
            return Err(Error::dims(
                "guide map length",
                height * width,
                indices.len(),
            ));
        }
        Ok(Self {
            height,
            width,
            indices,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Per-pixel sum of cosine similarities over all prototypes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    pub(crate) height: usize,
    pub(crate) width: usize,
    pub(crate) values: Vec<f32>,
}

impl ProbabilityMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

/// Settings for superpixel-guided clustering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgcConfig {
    /// Average foreground area assigned to each seed, in pixels.
    pub area_per_seed: usize,
    /// Upper bound on the number of prototypes.
    pub max_prototypes: usize,
    pub iterations: usize,
    /// Spatial weighting factor; coordinates are divided by it.
    pub spatial_factor: f64,
    /// Centroids whose total association falls below this are left unchanged.
    pub epsilon: f64,
}

impl Default for SgcConfig {
    fn default() -> Self {
        Self::new(100, 5, 5)
    }
}

impl SgcConfig {
    /// Config with the spatial factor defaulted to `sqrt(area_per_seed)`.
    pub fn new(area_per_seed: usize, max_prototypes: usize, iterations: usize) -> Self {
        Self {
            area_per_seed,
            max_prototypes,
            iterations,
            spatial_factor: (area_per_seed as f64).sqrt(),
            epsilon: 1e-12,
        }
    }

    pub fn with_spatial_factor(mut self, r: f64) -> Self {
        self.spatial_factor = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.area_per_seed < 1 {
            return Err(Error::InvalidConfig(
                "area per seed must be at least 1".into(),
            ));
        }
        if self.max_prototypes < 1 {
            return Err(Error::InvalidConfig(
                "maximum prototype count must be at least 1".into(),
            ));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidConfig(
                "iteration count must be at least 1".into(),
            ));
        }
        if !(self.spatial_factor > 0.0 && self.spatial_factor.is_finite()) {
            return Err(Error::NonPositiveFactor(self.spatial_factor));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(
                "epsilon must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A per-pixel linear map applied to the merged query feature
/// (1×1 convolution semantics). Weights are supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionWeights {
    out_channels: usize,
    in_channels: usize,
    matrix: Vec<f32>,
    bias: Option<Vec<f32>>,
}

impl ProjectionWeights {
    pub fn new(
        out_channels: usize,
        in_channels: usize,
        matrix: Vec<f32>,
        bias: Option<Vec<f32>>,
    ) -> Result<Self> {
        if out_channels == 0 || in_channels == 0 {
            return Err(Error::InvalidConfig(
                "projection dimensions must be positive".into(),
            ));
        }
        if matrix.len() != out_channels * in_channels {
            return Err(Error::dims(
                "projection matrix length",
                out_channels * in_channels,
                matrix.len(),
            ));
        }
        check_finite(&matrix)?;
        if let Some(b) = &bias {
            if b.len() != out_channels {
                return Err(Error::dims("projection bias length", out_channels, b.len()));
            }
            check_finite(b)?;
        }
        Ok(Self {
            out_channels,
            in_channels,
            matrix,
            bias,
        })
    }

    pub fn identity(channels: usize) -> Self {
        let mut matrix = vec![0.0; channels * channels];
        for i in 0..channels {
            matrix[i * channels + i] = 1.0;
        }
        Self {
            out_channels: channels,
            in_channels: channels,
            matrix,
            bias: None,
        }
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    pub fn bias(&self) -> Option<&[f32]> {
        self.bias.as_deref()
    }
}
