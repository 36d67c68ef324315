use std::fmt;

use crate::color::ColorSpace;
use crate::error::{Error, Result};
use crate::warp::RbfFamily;
use crate::Scalar;

/// Which front end produced the mixture means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimationMode {
    /// K-means centres; full `K_t x K_p` cross term.
    NoCorrespondence,
    /// Index-aligned pixel pairs; diagonal cross term.
    Correspondence,
}

impl EstimationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimationMode::NoCorrespondence => "kmeans",
            EstimationMode::Correspondence => "corr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" | "km" | "nocorr" => Some(EstimationMode::NoCorrespondence),
            "corr" | "correspondence" | "correspondences" => Some(EstimationMode::Correspondence),
            _ => None,
        }
    }
}

impl fmt::Display for EstimationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const DEFAULT_HMAX: f64 = 0.5;
pub const DEFAULT_HMIN: f64 = 0.05;
pub const DEFAULT_ANNEAL_FACTOR: f64 = 0.5;
pub const DEFAULT_INNER_MAX_ITERS: usize = 200;
pub const DEFAULT_INNER_TOL: f64 = 1e-8;
/// Midpoint lattice size per axis for the roughness integral.
pub const DEFAULT_ROUGHNESS_RESOLUTION: usize = 16;

/// Kernel scales in the table are quoted for 8-bit RGB; normalised RGB
/// channels are 255 times smaller, so the scale is 255 times larger.
const RGB_EPSILON: f64 = 6e-3 * 255.0;

/// Tuned `(lambda, epsilon)` for a kernel, colour space and mode.
/// `epsilon` is `None` for the thin-plate spline.
pub fn table_parameters(
    family: RbfFamily,
    space: ColorSpace,
    mode: EstimationMode,
) -> (f64, Option<f64>) {
    use EstimationMode::*;
    use RbfFamily::*;
    match (family, space, mode) {
        (Tps, ColorSpace::Rgb, Correspondence) => (3e-3, None),
        (Tps, ColorSpace::Rgb, NoCorrespondence) => (3e-6, None),
        (Tps, ColorSpace::Lab, Correspondence) => (3e-3, None),
        (Tps, ColorSpace::Lab, NoCorrespondence) => (3e-4, None),

        (Gaussian, ColorSpace::Rgb, Correspondence) => (3e-5, Some(RGB_EPSILON)),
        (Gaussian, ColorSpace::Rgb, NoCorrespondence) => (3e-8, Some(RGB_EPSILON)),
        (Gaussian, ColorSpace::Lab, Correspondence) => (6e-3, Some(3.0)),
        (Gaussian, ColorSpace::Lab, NoCorrespondence) => (3e-4, Some(3.0)),

        (InverseMultiquadric, ColorSpace::Rgb, Correspondence) => (3e-5, Some(RGB_EPSILON)),
        (InverseMultiquadric, ColorSpace::Rgb, NoCorrespondence) => (3e-8, Some(RGB_EPSILON)),
        (InverseMultiquadric, ColorSpace::Lab, Correspondence) => (6e-3, Some(10.0)),
        (InverseMultiquadric, ColorSpace::Lab, NoCorrespondence) => (3e-4, Some(3.0)),

        (InverseQuadric, ColorSpace::Rgb, Correspondence) => (3e-6, Some(RGB_EPSILON)),
        (InverseQuadric, ColorSpace::Rgb, NoCorrespondence) => (3e-8, Some(RGB_EPSILON)),
        (InverseQuadric, ColorSpace::Lab, Correspondence) => (6e-3, Some(30.0)),
        (InverseQuadric, ColorSpace::Lab, NoCorrespondence) => (3e-4, Some(3.0)),
    }
}

/// Settings of the annealed estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationConfig<T> {
    /// Roughness weight.
    pub lambda: T,
    /// Kernel scale (unused for TPS; the kernel carries its own copy).
    pub epsilon: T,
    pub hmax: T,
    pub hmin: T,
    /// Bandwidth multiplier between stages, in `(0, 1)`.
    pub anneal_factor: T,
    pub inner_max_iters: usize,
    /// Relative cost decrease below which a stage stops.
    pub inner_tol: T,
    pub mode: EstimationMode,
    pub roughness_resolution: usize,
}

impl<T: Scalar> EstimationConfig<T> {
    /// Defaults with `lambda` and `epsilon` taken from the tuned table.
    pub fn for_kernel(family: RbfFamily, space: ColorSpace, mode: EstimationMode) -> Self {
        let (lambda, eps) = table_parameters(family, space, mode);
        Self {
            lambda: T::lit(lambda),
            epsilon: T::lit(eps.unwrap_or(1.0)),
            hmax: T::lit(DEFAULT_HMAX),
            hmin: T::lit(DEFAULT_HMIN),
            anneal_factor: T::lit(DEFAULT_ANNEAL_FACTOR),
            inner_max_iters: DEFAULT_INNER_MAX_ITERS,
            inner_tol: T::lit(DEFAULT_INNER_TOL),
            mode,
            roughness_resolution: DEFAULT_ROUGHNESS_RESOLUTION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return bad("lambda must be finite and >= 0");
        }
        if !(self.epsilon > T::zero()) {
            return bad("epsilon must be > 0");
        }
        if !(self.hmin > T::zero()) || !(self.hmax > self.hmin) || !self.hmax.is_finite() {
            return bad("bandwidths must satisfy 0 < hmin < hmax");
        }
        if !(self.anneal_factor > T::zero() && self.anneal_factor < T::one()) {
            return bad("anneal factor must lie in (0, 1)");
        }
        if self.inner_max_iters == 0 {
            return bad("inner_max_iters must be >= 1");
        }
        if !(self.inner_tol >= T::zero()) {
            return bad("inner_tol must be >= 0");
        }
        if self.roughness_resolution == 0 {
            return bad("roughness resolution must be >= 1");
        }
        Ok(())
    }

    /// Bandwidths of every annealing stage: `hmax, hmax f, hmax f^2, ...`
    /// while `h >= hmin`.
    pub fn schedule(&self) -> Vec<T> {
        let mut out = Vec::new();
        let mut h = self.hmax;
        while h >= self.hmin {
            out.push(h);
            h *= self.anneal_factor;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halving_schedule() {
        let cfg = EstimationConfig::<f64>::for_kernel(
            RbfFamily::Tps,
            ColorSpace::Rgb,
            EstimationMode::Correspondence,
        );
        assert_eq!(cfg.schedule(), vec![0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn table_lookups() {
        let corr = EstimationConfig::<f64>::for_kernel(
            RbfFamily::Tps,
            ColorSpace::Rgb,
            EstimationMode::Correspondence,
        );
        assert_eq!(corr.lambda, 3e-3);
        let km = EstimationConfig::<f64>::for_kernel(
            RbfFamily::Tps,
            ColorSpace::Rgb,
            EstimationMode::NoCorrespondence,
        );
        assert_eq!(km.lambda, 3e-6);
        assert_eq!(
            table_parameters(
                RbfFamily::InverseQuadric,
                ColorSpace::Lab,
                EstimationMode::Correspondence
            ),
            (6e-3, Some(30.0))
        );
        assert_eq!(
            table_parameters(
                RbfFamily::InverseMultiquadric,
                ColorSpace::Lab,
                EstimationMode::Correspondence
            )
            .1,
            Some(10.0)
        );
    }

    #[test]
    fn validation() {
        let mut cfg = EstimationConfig::<f64>::for_kernel(
            RbfFamily::Tps,
            ColorSpace::Rgb,
            EstimationMode::Correspondence,
        );
        assert!(cfg.validate().is_ok());
        cfg.hmin = 0.6;
        assert!(cfg.validate().is_err());
        cfg.hmin = 0.05;
        cfg.anneal_factor = 1.0;
        assert!(cfg.validate().is_err());
        cfg.anneal_factor = 0.5;
        cfg.lambda = -1.0;
        assert!(cfg.validate().is_err());
    }
}
