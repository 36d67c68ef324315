//! Isotropic Gaussian mixtures with equal weights and the closed-form
//! Gaussian integrals behind the L2 cost.
//!
//! With shared covariance `h^2 I`, the inner product of two components is
//! `N(0; mu1 - mu2, 2 h^2 I) = (4 pi h^2)^(-3/2) exp(-|mu1 - mu2|^2 / (4 h^2))`.

use rayon::prelude::*;

use crate::color::ColorTriple;
use crate::error::{Error, Result};
use crate::scalar::CompensatedSum;
use crate::warp::WarpParameters;
use crate::Scalar;

/// Mixture with means `means`, covariance `h^2 I` and weights `1/K`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicGmm<T> {
    pub means: Vec<ColorTriple<T>>,
    bandwidth: T,
}

impl<T: Scalar> IsotropicGmm<T> {
    pub fn new(means: Vec<ColorTriple<T>>, bandwidth: T) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::EmptyInput("a mixture needs at least one component"));
        }
        check_bandwidth(bandwidth)?;
        Ok(Self { means, bandwidth })
    }

    pub fn k(&self) -> usize {
        self.means.len()
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    pub fn weight(&self) -> T {
        T::one() / T::from_usize_lossy(self.means.len())
    }

    pub fn with_bandwidth(&self, h: T) -> Result<Self> {
        check_bandwidth(h)?;
        Ok(Self {
            means: self.means.clone(),
            bandwidth: h,
        })
    }

    /// Mixture density at `x`.
    pub fn density(&self, x: ColorTriple<T>) -> T {
        let h2 = self.bandwidth * self.bandwidth;
        let norm = (T::lit(2.0 * std::f64::consts::PI) * h2).powf(T::lit(-1.5));
        let sum: T = self
            .means
            .iter()
            .map(|m| (-(x.dist_sq(*m)) / (T::lit(2.0) * h2)).exp())
            .sum();
        norm * sum * self.weight()
    }
}

/// Target and palette mixtures sharing one bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedGmms<T> {
    pub target: IsotropicGmm<T>,
    pub palette: IsotropicGmm<T>,
    /// Means are index-aligned correspondences (`K_t = K_p = n`).
    pub paired: bool,
}

impl<T: Scalar> PairedGmms<T> {
    /// Mixtures built from cluster centres (no correspondences).
    pub fn unpaired(
        target: Vec<ColorTriple<T>>,
        palette: Vec<ColorTriple<T>>,
        h: T,
    ) -> Result<Self> {
        Ok(Self {
            target: IsotropicGmm::new(target, h)?,
            palette: IsotropicGmm::new(palette, h)?,
            paired: false,
        })
    }

    /// Mixtures whose means are index-aligned correspondence pairs.
    pub fn paired(pairs: &[(ColorTriple<T>, ColorTriple<T>)], h: T) -> Result<Self> {
        Ok(Self {
            target: IsotropicGmm::new(pairs.iter().map(|p| p.0).collect(), h)?,
            palette: IsotropicGmm::new(pairs.iter().map(|p| p.1).collect(), h)?,
            paired: true,
        })
    }

    pub fn bandwidth(&self) -> T {
        self.target.bandwidth
    }

    pub fn with_bandwidth(&self, h: T) -> Result<Self> {
        Ok(Self {
            target: self.target.with_bandwidth(h)?,
            palette: self.palette.with_bandwidth(h)?,
            paired: self.paired,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.paired && self.target.k() != self.palette.k() {
            return Err(Error::InvalidArgument(format!(
                "paired mixtures need equal sizes, got {} and {}",
                self.target.k(),
                self.palette.k()
            )));
        }
        if self.target.bandwidth != self.palette.bandwidth {
            return Err(Error::InvalidArgument(
                "target and palette bandwidths differ".into(),
            ));
        }
        Ok(())
    }
}

fn check_bandwidth<T: Scalar>(h: T) -> Result<()> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

/// `(4 pi h^2)^(-3/2)` and `1 / (4 h^2)` for a bandwidth.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel<T> {
    norm: T,
    inv_4h2: T,
}

impl<T: Scalar> Kernel<T> {
    pub(crate) fn new(h: T) -> Self {
        let h2 = h * h;
        Self {
            norm: (T::lit(4.0 * std::f64::consts::PI) * h2).powf(T::lit(-1.5)),
            inv_4h2: (T::lit(4.0) * h2).recip(),
        }
    }

    #[inline]
    pub(crate) fn value(&self, d2: T) -> T {
        self.norm * (-d2 * self.inv_4h2).exp()
    }

    /// `d/dDelta N(0; Delta, 2h^2 I) = -Delta / (2h^2) N = -2 inv_4h2 N Delta`.
    #[inline]
    pub(crate) fn grad_factor(&self, value: T) -> T {
        -T::lit(2.0) * self.inv_4h2 * value
    }
}

/// Inner product of two isotropic Gaussians with covariance `h^2 I`.
pub fn gaussian_scalar_product<T: Scalar>(
    mu1: ColorTriple<T>,
    mu2: ColorTriple<T>,
    h: T,
) -> Result<T> {
    check_bandwidth(h)?;
    Ok(Kernel::new(h).value(mu1.dist_sq(mu2)))
}

/// Quadratic entropy `(1/K^2) sum_k sum_l N(0; y_k - y_l, 2h^2 I)` of points `ys`.
/// When `grad` is given it receives `d/dy_k`.
pub(crate) fn entropy_of_points<T: Scalar>(
    ys: &[ColorTriple<T>],
    h: T,
    grad: Option<&mut [ColorTriple<T>]>,
) -> T {
    let kern = Kernel::new(h);
    let k = ys.len();
    let w = T::one() / (T::from_usize_lossy(k) * T::from_usize_lossy(k));
    let want_grad = grad.is_some();
    let rows: Vec<(T, ColorTriple<T>)> = ys
        .par_iter()
        .map(|yk| {
            let mut acc = CompensatedSum::new();
            let mut g = [T::zero(); 3];
            for yl in ys {
                let d = yk.sub(*yl);
                let v = kern.value(d.norm_sq());
                acc.add(v);
                if want_grad {
                    let f = kern.grad_factor(v);
                    g[0] += f * d.0[0];
                    g[1] += f * d.0[1];
                    g[2] += f * d.0[2];
                }
            }
            // Each unordered pair appears twice; the symmetric partner doubles the gradient.
            (acc.value(), ColorTriple(g).scale(T::lit(2.0) * w))
        })
        .collect();
    let mut total = CompensatedSum::new();
    for (v, _) in &rows {
        total.add(*v);
    }
    if let Some(grad) = grad {
        for (gk, (_, g)) in grad.iter_mut().zip(&rows) {
            *gk = *g;
        }
    }
    total.value() * w
}

/// Cross term between transformed target means `ys` and palette means `ps`.
/// Unpaired: full `K_t x K_p` double sum with weights `1/(K_t K_p)`.
/// Paired: index-aligned diagonal where each of the `n` pairs carries weight
/// `1/n`. With `1/n^2` the diagonal is `n` times weaker than the entropy and
/// the minimiser spreads the colours apart instead of matching the pairs.
pub(crate) fn cross_of_points<T: Scalar>(
    ys: &[ColorTriple<T>],
    ps: &[ColorTriple<T>],
    h: T,
    paired: bool,
    grad: Option<&mut [ColorTriple<T>]>,
) -> T {
    let kern = Kernel::new(h);
    let w = if paired {
        T::one() / T::from_usize_lossy(ys.len())
    } else {
        T::one() / (T::from_usize_lossy(ys.len()) * T::from_usize_lossy(ps.len()))
    };
    let want_grad = grad.is_some();
    let rows: Vec<(T, ColorTriple<T>)> = if paired {
        ys.par_iter()
            .zip(ps.par_iter())
            .map(|(y, p)| {
                let d = y.sub(*p);
                let v = kern.value(d.norm_sq());
                (v, d.scale(kern.grad_factor(v) * w))
            })
            .collect()
    } else {
        ys.par_iter()
            .map(|y| {
                let mut acc = CompensatedSum::new();
                let mut g = [T::zero(); 3];
                for p in ps {
                    let d = y.sub(*p);
                    let v = kern.value(d.norm_sq());
                    acc.add(v);
                    if want_grad {
                        let f = kern.grad_factor(v);
                        g[0] += f * d.0[0];
                        g[1] += f * d.0[1];
                        g[2] += f * d.0[2];
                    }
                }
                (acc.value(), ColorTriple(g).scale(w))
            })
            .collect()
    };
    let mut total = CompensatedSum::new();
    for (v, _) in &rows {
        total.add(*v);
    }
    if let Some(grad) = grad {
        for (gk, (_, g)) in grad.iter_mut().zip(&rows) {
            *gk = *g;
        }
    }
    total.value() * w
}

/// `<p_t | p_p>` with the target means moved through `warp`.
pub fn cross_term<T: Scalar>(gmms: &PairedGmms<T>, warp: &WarpParameters<T>) -> Result<T> {
    gmms.validate()?;
    let ys: Vec<_> = gmms.target.means.iter().map(|m| warp.eval(*m)).collect();
    Ok(cross_of_points(
        &ys,
        &gmms.palette.means,
        gmms.bandwidth(),
        gmms.paired,
        None,
    ))
}

/// `||p_t||^2` with the target means moved through `warp`.
pub fn entropy_term<T: Scalar>(target: &IsotropicGmm<T>, warp: &WarpParameters<T>) -> T {
    let ys: Vec<_> = target.means.iter().map(|m| warp.eval(*m)).collect();
    entropy_of_points(&ys, target.bandwidth, None)
}
