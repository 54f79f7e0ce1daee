//! Automatic primary-colour editing for product images.
//!
//! Given an image and a single target colour, the predominant colours are found
//! with adaptive MeanShift in CIE L\*a\*b\*, the primary one is swapped for the
//! target, and a weighted least-squares 3×3 RGB transform is fitted to the
//! palette correspondences. The transformed image is then alpha-blended back
//! towards the original wherever the result is far (in a\*b\*) from the target,
//! with the blend cap chosen by an edge-entropy search. An optional
//! gradient-preserving "regrain" pass removes residual artefacts. Parameters are
//! estimated on a 32×32 thumbnail and applied at full resolution.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, the precision the CLI uses.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod batch;
pub mod blending;
pub mod clustering;
pub mod colorspace;
pub mod correction;
pub mod error;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod pixels;
pub mod regrain;
pub mod scalar;

pub use blending::{
    blend, build_mask, chroma_distance, edge_entropy_objective, entropy, normalise_distance, search_delta_e_max,
    sobel_edges, BlendMask, EdgeMap, DELTA_E_GRID,
};
pub use clustering::{adaptive_meanshift, build_target_palette, meanshift, select_primary};
pub use colorspace::{image_to_lab, lab_to_rgb, rgb_to_lab, Lab, Rgb};
pub use correction::{apply_matrix, estimate_matrix};
pub use error::{Error, Result};
pub use linalg::Mat3;
pub use pipeline::{apply_model, edit_primary_colour, make_thumbnail};
pub use pixels::{Grid, Pixels};
pub use regrain::regrain;
pub use scalar::Scalar;

pub type RgbColor = Rgb<f64>;
pub type LabColor = Lab<f64>;
pub type PixelMatrix = Pixels<f64>;
pub type Matrix3 = Mat3<f64>;
pub type Palette = clustering::Palette<f64>;
pub type ClusteringParams = clustering::ClusteringParams<f64>;
pub type CorrectionModel = correction::CorrectionModel<f64>;
pub type EdgeParams = blending::EdgeParams<f64>;
pub type RegrainParams = regrain::RegrainParams<f64>;
pub type EditRequest = pipeline::EditRequest<f64>;
pub type EditReport = pipeline::EditReport<f64>;

pub type RgbColorF32 = Rgb<f32>;
pub type LabColorF32 = Lab<f32>;
pub type PixelMatrixF32 = Pixels<f32>;
