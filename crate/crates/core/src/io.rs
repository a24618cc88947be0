//! Tensor container and image export.
//!
//! Tensor files (little-endian):
//!
//! ```text
//! "ASGT" | version: u8 = 1 | dtype: u8 (1 = f32, 2 = u8 bool) | ndim: u8 (2 or 3)
//! dims: ndim × u32 | payload: row-major elements
//! ```
//!
//! Visual maps are written as binary PGM (P5).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{BinaryMask, FeatureMap, GuideMap, ProjectionWeights, PrototypeSet};

pub const MAGIC: [u8; 4] = *b"ASGT";
pub const VERSION: u8 = 1;
const DTYPE_F32: u8 = 1;
const DTYPE_U8: u8 = 2;
const HEADER_LEN: usize = 7;

/// Raw contents of a tensor file.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    F32 { dims: Vec<usize>, data: Vec<f32> },
    U8 { dims: Vec<usize>, data: Vec<u8> },
}

impl Tensor {
    pub fn dims(&self) -> &[usize] {
        match self {
            Tensor::F32 { dims, .. } | Tensor::U8 { dims, .. } => dims,
        }
    }

    fn describe(&self) -> String {
        let kind = match self {
            Tensor::F32 { .. } => "f32",
            Tensor::U8 { .. } => "u8",
        };
        format!("{kind} {:?}", self.dims())
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let dims = self.dims();
        if !(2..=3).contains(&dims.len()) {
            return Err(Error::UnsupportedRank(dims.len() as u8));
        }
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * dims.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(match self {
            Tensor::F32 { .. } => DTYPE_F32,
            Tensor::U8 { .. } => DTYPE_U8,
        });
        out.push(dims.len() as u8);
        for &d in dims {
            let d = u32::try_from(d)
                .map_err(|_| Error::ShapeOverflow(dims.iter().map(|&d| d as u64).collect()))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        let numel: usize = dims.iter().product();
        match self {
            Tensor::F32 { data, .. } => {
                if data.len() != numel {
                    return Err(Error::dims("tensor payload", numel, data.len()));
                }
                out.reserve(4 * numel);
                for v in data {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
            Tensor::U8 { data, .. } => {
                if data.len() != numel {
                    return Err(Error::dims("tensor payload", numel, data.len()));
                }
                out.extend_from_slice(data);
            }
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedPayload {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        let dtype = bytes[5];
        let elem = match dtype {
            DTYPE_F32 => 4,
            DTYPE_U8 => 1,
            other => return Err(Error::UnsupportedDtype(other)),
        };
        let ndim = bytes[6];
        if !(2..=3).contains(&ndim) {
            return Err(Error::UnsupportedRank(ndim));
        }
        let dims_end = HEADER_LEN + 4 * ndim as usize;
        if bytes.len() < dims_end {
            return Err(Error::TruncatedPayload {
                expected: dims_end,
                found: bytes.len(),
            });
        }
        let raw_dims: Vec<u64> = bytes[HEADER_LEN..dims_end]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as u64)
            .collect();
        let payload_len = raw_dims
            .iter()
            .try_fold(elem as u64, |acc, &d| acc.checked_mul(d))
            .and_then(|n| usize::try_from(n).ok())
            .and_then(|n| n.checked_add(dims_end).map(|_| n))
            .ok_or_else(|| Error::ShapeOverflow(raw_dims.clone()))?;
        let payload = &bytes[dims_end..];
        if payload.len() < payload_len {
            return Err(Error::TruncatedPayload {
                expected: payload_len,
                found: payload.len(),
            });
        }
        if payload.len() > payload_len {
            return Err(Error::dims(
                "tensor file length",
                dims_end + payload_len,
                bytes.len(),
            ));
        }
        let dims = raw_dims.into_iter().map(|d| d as usize).collect();
        Ok(match dtype {
            DTYPE_F32 => Tensor::F32 {
                dims,
                data: payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            },
            _ => Tensor::U8 {
                dims,
                data: payload.to_vec(),
            },
        })
    }

    pub fn into_feature_map(self) -> Result<FeatureMap> {
        match self {
            Tensor::F32 { dims, data } if dims.len() == 3 => {
                FeatureMap::new(dims[0], dims[1], dims[2], data)
            }
            other => Err(Error::WrongKind {
                expected: "3-dim f32 feature map",
                found: other.describe(),
            }),
        }
    }

    /// Any nonzero byte is foreground.
    pub fn into_mask(self) -> Result<BinaryMask> {
        match self {
            Tensor::U8 { dims, data } if dims.len() == 2 => {
                BinaryMask::new(dims[0], dims[1], data.into_iter().map(|b| b != 0).collect())
            }
            other => Err(Error::WrongKind {
                expected: "2-dim u8 mask",
                found: other.describe(),
            }),
        }
    }

    /// A 2-dim f32 tensor as `(rows, cols, data)`.
    pub fn into_matrix(self) -> Result<(usize, usize, Vec<f32>)> {
        match self {
            Tensor::F32 { dims, data } if dims.len() == 2 => Ok((dims[0], dims[1], data)),
            other => Err(Error::WrongKind {
                expected: "2-dim f32 matrix",
                found: other.describe(),
            }),
        }
    }
}

impl From<&FeatureMap> for Tensor {
    fn from(f: &FeatureMap) -> Self {
        Tensor::F32 {
            dims: vec![f.channels(), f.height(), f.width()],
            data: f.data().to_vec(),
        }
    }
}

impl From<&BinaryMask> for Tensor {
    fn from(m: &BinaryMask) -> Self {
        Tensor::U8 {
            dims: vec![m.height(), m.width()],
            data: m.bits().iter().map(|&b| b as u8).collect(),
        }
    }
}

impl From<&PrototypeSet> for Tensor {
    /// `count × dim`. An empty set is written with a zero row count.
    fn from(p: &PrototypeSet) -> Self {
        Tensor::F32 {
            dims: vec![p.count(), p.dim()],
            data: p.flat(),
        }
    }
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    let bytes = tensor.encode()?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    Tensor::decode(&fs::read(path)?)
}

pub fn read_feature_map(path: impl AsRef<Path>) -> Result<FeatureMap> {
    read_tensor(path)?.into_feature_map()
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    read_tensor(path)?.into_mask()
}

/// Reads a `count × dim` prototype file.
pub fn read_prototypes(path: impl AsRef<Path>) -> Result<PrototypeSet> {
    let (rows, cols, data) = read_tensor(path)?.into_matrix()?;
    let vectors = data
        .chunks_exact(cols.max(1))
        .take(rows)
        .map(<[f32]>::to_vec)
        .collect();
    PrototypeSet::new(cols, vectors)
}

/// Reads projection weights from an `out × in` matrix file and an optional
/// `out × 1` bias file.
pub fn read_projection(
    weights: impl AsRef<Path>,
    bias: Option<&Path>,
) -> Result<ProjectionWeights> {
    let (out_c, in_c, matrix) = read_tensor(weights)?.into_matrix()?;
    let bias = match bias {
        Some(p) => {
            let (rows, cols, b) = read_tensor(p)?.into_matrix()?;
            if cols != 1 || rows != out_c {
                return Err(Error::dims(
                    "projection bias shape",
                    format!("{out_c}x1"),
                    format!("{rows}x{cols}"),
                ));
            }
            Some(b)
        }
        None => None,
    };
    ProjectionWeights::new(out_c, in_c, matrix, bias)
}

fn pgm_header(width: usize, height: usize, maxval: u32) -> Vec<u8> {
    format!("P5\n{width} {height}\n{maxval}\n").into_bytes()
}

/// 8-bit PGM bytes; `[-1, 1]` maps linearly onto `[0, 255]`, values outside
/// are clamped.
pub fn encode_pgm_signed_unit(values: &[f32], height: usize, width: usize) -> Vec<u8> {
    let mut out = pgm_header(width, height, 255);
    out.extend(values.iter().map(|&v| {
        let t = ((v as f64).clamp(-1.0, 1.0) + 1.0) * 0.5 * 255.0;
        t.round() as u8
    }));
    out
}

/// 16-bit PGM bytes holding the raw guide indices (big-endian samples).
pub fn encode_pgm_guide(guide: &GuideMap) -> Vec<u8> {
    let mut out = pgm_header(guide.width(), guide.height(), 65535);
    for &i in guide.indices() {
        out.extend_from_slice(&(i.min(65535) as u16).to_be_bytes());
    }
    out
}

/// Similarity planes as CSV with columns `prototype,row,col,value`.
pub fn write_similarity_csv(
    path: impl AsRef<Path>,
    sim: &crate::types::SimilarityStack,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "prototype,row,col,value")?;
    for i in 0..sim.count() {
        for (p, v) in sim.plane(i).iter().enumerate() {
            writeln!(f, "{},{},{},{}", i, p / sim.width(), p % sim.width(), v)?;
        }
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn feature_map_round_trip_bytes() {
        let f =
            FeatureMap::from_fn(3, 4, 4, |c, r, x| (c as f32 - 1.3) * (r * 4 + x) as f32).unwrap();
        let t = Tensor::from(&f);
        let bytes = t.encode().unwrap();
        assert_eq!(&bytes[..7], b"ASGT\x01\x01\x03");
        assert_eq!(&bytes[7..11], &3u32.to_le_bytes());
        assert_eq!(bytes.len(), 7 + 12 + 4 * 48);
        let back = Tensor::decode(&bytes).unwrap();
        assert_eq!(back.encode().unwrap(), bytes);
        assert_eq!(back.into_feature_map().unwrap(), f);
    }

    #[test]
    fn u8_two_dims_is_mask() {
        let bytes = Tensor::U8 {
            dims: vec![2, 2],
            data: vec![0, 1, 255, 0],
        }
        .encode()
        .unwrap();
        let m = Tensor::decode(&bytes).unwrap().into_mask().unwrap();
        assert_eq!(m.bits(), &[false, true, true, false]);
        assert!(Tensor::decode(&bytes).unwrap().into_feature_map().is_err());
    }

    #[test]
    fn header_errors() {
        let good = Tensor::from(&FeatureMap::filled(1, 2, 2, 1.0).unwrap())
            .encode()
            .unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(Tensor::decode(&bad), Err(Error::BadMagic(_))));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(
            Tensor::decode(&bad),
            Err(Error::UnsupportedVersion(2))
        ));

        let mut bad = good.clone();
        bad[5] = 9;
        assert!(matches!(
            Tensor::decode(&bad),
            Err(Error::UnsupportedDtype(9))
        ));

        let mut bad = good.clone();
        bad[6] = 4;
        assert!(matches!(
            Tensor::decode(&bad),
            Err(Error::UnsupportedRank(4))
        ));

        assert!(matches!(
            Tensor::decode(&good[..good.len() - 1]),
            Err(Error::TruncatedPayload { .. })
        ));
        assert!(matches!(
            Tensor::decode(&good[..9]),
            Err(Error::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn huge_dims_overflow() {
        let mut bytes = b"ASGT\x01\x01\x03".to_vec();
        for _ in 0..3 {
            bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        }
        assert!(matches!(
            Tensor::decode(&bytes),
            Err(Error::ShapeOverflow(_))
        ));
    }

    #[test]
    fn nan_payload_rejected_as_feature_map() {
        let t = Tensor::F32 {
            dims: vec![1, 1, 2],
            data: vec![1.0, f32::NAN],
        };
        let back = Tensor::decode(&t.encode().unwrap()).unwrap();
        assert!(matches!(
            back.into_feature_map(),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn pgm_encodings() {
        let b = encode_pgm_signed_unit(&[-1.0, 0.0, 1.0, 3.0], 2, 2);
        assert_eq!(&b[..11], b"P5\n2 2\n255\n");
        assert_eq!(&b[11..], &[0, 128, 255, 255]);
        let g = GuideMap::new(1, 2, vec![1, 300]).unwrap();
        let b = encode_pgm_guide(&g);
        assert_eq!(&b[..13], b"P5\n2 1\n65535\n");
        assert_eq!(&b[13..], &[0, 1, 1, 44]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("protos.asgt");
        let set = PrototypeSet::new(2, vec![vec![1.0, 2.0], vec![3.0, -4.5]]).unwrap();
        write_tensor(&p, &Tensor::from(&set)).unwrap();
        assert_eq!(read_prototypes(&p).unwrap(), set);
    }

    proptest! {
        #[test]
        fn f32_bits_survive(bits in proptest::collection::vec(any::<u32>(), 1..60), split in 1usize..5) {
            let data: Vec<f32> = bits.iter().map(|&b| f32::from_bits(b)).collect();
            let n = data.len();
            let dims = if n.is_multiple_of(split) { vec![split, n / split] } else { vec![1, n] };
            let t = Tensor::F32 { dims, data };
            let back = Tensor::decode(&t.encode().unwrap()).unwrap();
            match (&t, &back) {
                (Tensor::F32 { data: a, dims: da }, Tensor::F32 { data: b, dims: db }) => {
                    prop_assert_eq!(da, db);
                    prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
                }
                _ => prop_assert!(false),
            }
        }
    }
}
