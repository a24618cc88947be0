//! Adaptive prototype learning and allocation for few-shot segmentation.
//!
//! Given a support feature map and its foreground mask, [`sgc::sgc_cluster`]
//! condenses the masked features into a handful of prototypes. The number of
//! prototypes adapts to the foreground area and drops to plain masked
//! average pooling for small objects. [`gpa::allocate`] then matches those
//! prototypes against a query feature map pixel by pixel. Multiple support
//! shots are pooled with [`kshot::merge_shots`].
//!
//! Feature extraction is out of scope: feature maps are read from tensor
//! files (see [`io`]) or built in memory.

pub mod error;
pub mod fixture;
pub mod gpa;
pub mod io;
pub mod kshot;
pub mod metrics;
pub mod pipeline;
pub mod pooling;
pub mod seeding;
pub mod sgc;
pub mod types;

pub use error::{Error, Result};
pub use gpa::{allocate, Allocation};
pub use kshot::merge_shots;
pub use metrics::{fb_iou, iou};
pub use pooling::{adaptive_prototype_count, masked_average_pool};
pub use seeding::{distance_transform, place_seeds, SeedList};
pub use sgc::sgc_cluster;
pub use types::{
    AssociationMatrix, BinaryMask, FeatureMap, GuideMap, ProbabilityMap, ProjectionWeights,
    PrototypeSet, SgcConfig, SimilarityStack,
};
