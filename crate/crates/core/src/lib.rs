//! Colour transfer by robust registration of Gaussian mixtures.
//!
//! The colour content of a target and a palette image is summarised by two
//! isotropic Gaussian mixtures (K-means centres, or index-aligned pixel pairs
//! when the images are registered). A smooth parametric warp of colour space,
//! an affine map plus a radial basis expansion on a fixed 5x5x5 control
//! grid, is fitted by minimising the L2 distance between the warped target
//! mixture and the palette mixture with a roughness penalty, annealing the
//! mixture bandwidth from coarse to fine. The fitted warp can be saved,
//! blended with other warps in parameter space and applied to images and
//! frame sequences in parallel.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which the estimator and CLI use.

// Negated comparisons reject NaN; index loops mirror the maths.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::should_implement_trait
)]

pub mod clustering;
pub mod color;
pub mod error;
pub mod estimator;
pub mod gmm;
pub mod image;
pub mod metrics;
pub mod recolor;
mod scalar;
pub mod warp;

pub use color::{ColorSpace, ColorTriple};
pub use error::{Error, Result};
pub use scalar::{compensated_sum, CompensatedSum, Scalar};

pub type Color = ColorTriple<f64>;
pub type Image = image::ImageBuffer<f64>;
pub type Warp = warp::WarpParameters<f64>;
pub type Grid = warp::ControlGrid<f64>;
pub type Rbf = warp::RbfKind<f64>;
pub type Gmm = gmm::IsotropicGmm<f64>;
pub type Gmms = gmm::PairedGmms<f64>;
pub type Config = estimator::EstimationConfig<f64>;
pub type Mask = recolor::MixMask<f64>;

pub type Color32 = ColorTriple<f32>;
pub type Image32 = image::ImageBuffer<f32>;
pub type Warp32 = warp::WarpParameters<f32>;
