//! Coherence length diagrams of grayscale images.
//!
//! For every pixel and each of `n` ray directions the *local coherence
//! length* is the shortest ray over which the mean brightness comes within a
//! relative tolerance of the image mean. Averaging per direction gives the
//! coherence length diagram (CLD), a polar signature of texture anisotropy.
//! Comparing each pixel's local diagram to the CLD yields the support map,
//! the defect map and the directional defect map.
//!
//! ```
//! use cldmap_core::{average_cld, compute_local_field, AnalysisConfig, GrayImage};
//!
//! let img = GrayImage::from_fn(32, 32, |r, c| if (c / 4) % 2 == 0 { 100 } else { 150 }).unwrap();
//! let field = compute_local_field(&img, &AnalysisConfig::default()).unwrap();
//! let cld = average_cld(&field);
//! assert!(cld.present_count() > 0);
//! ```

pub mod config;
pub mod directions;
pub mod engine;
mod error;
pub mod field;
pub mod image;
pub mod maps;
pub mod oracle;
pub mod render;

pub use config::{AnalysisConfig, Normalization, Threshold};
pub use directions::DirectionTable;
pub use engine::{compute_local_field, compute_local_field_with, Execution};
pub use error::{Error, Result};
pub use field::{average_cld, AverageCld, LocalField};
pub use image::{load_image, GrayImage, RealImage};
pub use maps::{
    defect_map, directional_defect_map, mixed_map, support_map, DefectField, DirectionalDefectField, QMean,
    SupportField,
};
pub use oracle::oracle_local_field;
