//! End-to-end driver: cluster every support shot, pool the prototypes,
//! allocate them against the query and write the results.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gpa::allocate;
use crate::io::{
    encode_pgm_guide, encode_pgm_signed_unit, read_feature_map, read_mask, read_projection,
    write_similarity_csv, write_tensor, Tensor,
};
use crate::kshot::merge_shots;
use crate::metrics::{fb_iou, iou};
use crate::pooling::adaptive_prototype_count;
use crate::sgc::sgc_cluster;
use crate::types::{PrototypeSet, SgcConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ShotPaths {
    pub feature: PathBuf,
    pub mask: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub shots: Vec<ShotPaths>,
    pub query: PathBuf,
    pub config: SgcConfig,
    pub projection: Option<PathBuf>,
    pub projection_bias: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub csv: bool,
}

impl RunManifest {
    pub fn validate(&self) -> Result<()> {
        if self.shots.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one support shot is required".into(),
            ));
        }
        self.config.validate()?;
        let mut inputs: Vec<&Path> = vec![&self.query];
        for s in &self.shots {
            inputs.push(&s.feature);
            inputs.push(&s.mask);
        }
        inputs.extend(self.projection.as_deref());
        inputs.extend(self.projection_bias.as_deref());
        for p in inputs {
            if !p.is_file() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("input file {} does not exist", p.display()),
                )));
            }
        }
        if self.projection_bias.is_some() && self.projection.is_none() {
            return Err(Error::InvalidConfig(
                "projection bias given without projection weights".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotReport {
    pub foreground: usize,
    pub prototypes: usize,
    /// True when the shot degraded to masked average pooling.
    pub pooled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub shots: Vec<ShotReport>,
    pub total_prototypes: usize,
    pub merged_channels: usize,
    pub artifacts: Vec<PathBuf>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.shots.iter().enumerate() {
            write!(f, "shot {k}: N_m={} N_sp={}", s.foreground, s.prototypes)?;
            if s.pooled {
                write!(f, " (fallback: masked average pooling)")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "total N_sp={}", self.total_prototypes)?;
        writeln!(f, "merged channels={}", self.merged_channels)
    }
}

fn save(path: PathBuf, bytes: &[u8], artifacts: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, bytes)?;
    artifacts.push(path);
    Ok(())
}

fn save_tensor(path: PathBuf, t: &Tensor, artifacts: &mut Vec<PathBuf>) -> Result<()> {
    write_tensor(&path, t)?;
    artifacts.push(path);
    Ok(())
}

pub fn run_pipeline(manifest: &RunManifest) -> Result<RunReport> {
    manifest.validate()?;
    let cfg = &manifest.config;

    let mut sets = Vec::with_capacity(manifest.shots.len());
    let mut shots = Vec::with_capacity(manifest.shots.len());
    for (k, paths) in manifest.shots.iter().enumerate() {
        let feat = read_feature_map(&paths.feature)?;
        let mask = read_mask(&paths.mask)?;
        let protos = sgc_cluster(&feat, &mask, cfg)?;
        let foreground = mask.count();
        shots.push(ShotReport {
            foreground,
            prototypes: protos.count(),
            pooled: adaptive_prototype_count(foreground, cfg) <= 1,
        });
        sets.push(protos.tagged(k));
    }
    let merged_protos: PrototypeSet = merge_shots(&sets)?;

    let query = read_feature_map(&manifest.query)?;
    let proj = match &manifest.projection {
        Some(p) => Some(read_projection(p, manifest.projection_bias.as_deref())?),
        None => None,
    };
    let alloc = allocate(&merged_protos, &query, proj.as_ref())?;

    let out = &manifest.out_dir;
    fs::create_dir_all(out)?;
    let mut artifacts = Vec::new();
    let (h, w) = (query.height(), query.width());

    save_tensor(
        out.join("prototypes.asgt"),
        &Tensor::from(&merged_protos),
        &mut artifacts,
    )?;
    save(
        out.join("guide_map.pgm"),
        &encode_pgm_guide(&alloc.guide),
        &mut artifacts,
    )?;

    let count = merged_protos.count() as f32;
    let prob = alloc.probability.values();
    let prob_unit: Vec<f32> = prob.iter().map(|&v| v / count).collect();
    save(
        out.join("probability_map.pgm"),
        &encode_pgm_signed_unit(&prob_unit, h, w),
        &mut artifacts,
    )?;
    save_tensor(
        out.join("probability_map.asgt"),
        &Tensor::F32 {
            dims: vec![h, w],
            data: prob.to_vec(),
        },
        &mut artifacts,
    )?;
    for i in 0..alloc.similarity.count() {
        let plane = alloc.similarity.plane(i);
        save(
            out.join(format!("similarity_{i}.pgm")),
            &encode_pgm_signed_unit(plane, h, w),
            &mut artifacts,
        )?;
        save_tensor(
            out.join(format!("similarity_{i}.asgt")),
            &Tensor::F32 {
                dims: vec![h, w],
                data: plane.to_vec(),
            },
            &mut artifacts,
        )?;
    }
    if manifest.csv {
        let path = out.join("similarity.csv");
        write_similarity_csv(&path, &alloc.similarity)?;
        artifacts.push(path);
    }
    save_tensor(
        out.join("merged.asgt"),
        &Tensor::from(&alloc.merged),
        &mut artifacts,
    )?;

    Ok(RunReport {
        total_prototypes: merged_protos.count(),
        merged_channels: alloc.merged.channels(),
        shots,
        artifacts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskComparison {
    pub iou: f64,
    pub fb_iou: f64,
}

impl fmt::Display for MaskComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "iou {:.4}", self.iou)?;
        writeln!(f, "fb_iou {:.4}", self.fb_iou)
    }
}

pub fn compare_masks(pred: impl AsRef<Path>, gt: impl AsRef<Path>) -> Result<MaskComparison> {
    let pred = read_mask(pred)?;
    let gt = read_mask(gt)?;
    Ok(MaskComparison {
        iou: iou(&pred, &gt)?,
        fb_iou: fb_iou(&pred, &gt)?,
    })
}
