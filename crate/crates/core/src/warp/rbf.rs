use std::fmt;

use crate::Scalar;

/// Radial basis function family of the warp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RbfKind<T> {
    /// Thin-plate spline in 3D: `psi(r) = -r`.
    Tps,
    /// `exp(-(eps r)^2)`.
    Gaussian(T),
    /// `1 / sqrt(1 + (eps r)^2)`.
    InverseMultiquadric(T),
    /// `1 / (1 + (eps r)^2)`.
    InverseQuadric(T),
}

impl<T: Scalar> RbfKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            RbfKind::Tps => "tps",
            RbfKind::Gaussian(_) => "gaussian",
            RbfKind::InverseMultiquadric(_) => "imq",
            RbfKind::InverseQuadric(_) => "iq",
        }
    }

    pub fn epsilon(&self) -> Option<T> {
        match *self {
            RbfKind::Tps => None,
            RbfKind::Gaussian(e) | RbfKind::InverseMultiquadric(e) | RbfKind::InverseQuadric(e) => {
                Some(e)
            }
        }
    }

    /// Build a kernel from its short name. `epsilon` is ignored for TPS.
    pub fn from_name(name: &str, epsilon: T) -> Option<Self> {
        let k = match name.to_ascii_lowercase().as_str() {
            "tps" => RbfKind::Tps,
            "gaussian" | "g" => RbfKind::Gaussian(epsilon),
            "imq" | "inmq" | "inverse-multiquadric" => RbfKind::InverseMultiquadric(epsilon),
            "iq" | "inq" | "inverse-quadric" => RbfKind::InverseQuadric(epsilon),
            _ => return None,
        };
        Some(k)
    }

    pub fn is_valid(&self) -> bool {
        self.epsilon()
            .is_none_or(|e| e > T::zero() && e.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> RbfKind<U> {
        let c = |e: T| U::lit(e.as_f64());
        match *self {
            RbfKind::Tps => RbfKind::Tps,
            RbfKind::Gaussian(e) => RbfKind::Gaussian(c(e)),
            RbfKind::InverseMultiquadric(e) => RbfKind::InverseMultiquadric(c(e)),
            RbfKind::InverseQuadric(e) => RbfKind::InverseQuadric(c(e)),
        }
    }

    /// `psi(r)` as a function of the squared radius.
    #[inline]
    pub fn eval_sq(&self, r2: T) -> T {
        match *self {
            RbfKind::Tps => -r2.sqrt(),
            RbfKind::Gaussian(e) => (-(e * e) * r2).exp(),
            RbfKind::InverseMultiquadric(e) => (T::one() + e * e * r2).sqrt().recip(),
            RbfKind::InverseQuadric(e) => (T::one() + e * e * r2).recip(),
        }
    }

    /// Coefficients `(a, b)` such that the Hessian of `x -> psi(|x - c|)` is
    /// `a I + b d d^T` with `d = x - c`. Singular at `d = 0` for TPS.
    #[inline]
    pub fn hessian_coeffs(&self, r2: T) -> (T, T) {
        let two = T::lit(2.0);
        match *self {
            // Singular at the centre; a point quadrature sees it with measure zero.
            RbfKind::Tps if r2 == T::zero() => (T::zero(), T::zero()),
            RbfKind::Tps => {
                let r = r2.sqrt();
                (-r.recip(), (r2 * r).recip())
            }
            RbfKind::Gaussian(e) => {
                let e2 = e * e;
                let psi = (-e2 * r2).exp();
                (-two * e2 * psi, T::lit(4.0) * e2 * e2 * psi)
            }
            RbfKind::InverseMultiquadric(e) => {
                let e2 = e * e;
                let q = (T::one() + e2 * r2).recip();
                let s = q.sqrt();
                (-e2 * q * s, T::lit(3.0) * e2 * e2 * q * q * s)
            }
            RbfKind::InverseQuadric(e) => {
                let e2 = e * e;
                let q = (T::one() + e2 * r2).recip();
                (-two * e2 * q * q, T::lit(8.0) * e2 * e2 * q * q * q)
            }
        }
    }
}

/// Kernel family without its scale parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RbfFamily {
    Tps,
    Gaussian,
    InverseMultiquadric,
    InverseQuadric,
}

impl RbfFamily {
    pub const ALL: [RbfFamily; 4] = [
        RbfFamily::Tps,
        RbfFamily::Gaussian,
        RbfFamily::InverseMultiquadric,
        RbfFamily::InverseQuadric,
    ];

    pub fn parse(name: &str) -> Option<Self> {
        RbfKind::<f64>::from_name(name, 1.0).map(|k| k.family())
    }

    pub fn name(self) -> &'static str {
        self.with_epsilon(1.0f64).name()
    }

    pub fn with_epsilon<T: Scalar>(self, epsilon: T) -> RbfKind<T> {
        match self {
            RbfFamily::Tps => RbfKind::Tps,
            RbfFamily::Gaussian => RbfKind::Gaussian(epsilon),
            RbfFamily::InverseMultiquadric => RbfKind::InverseMultiquadric(epsilon),
            RbfFamily::InverseQuadric => RbfKind::InverseQuadric(epsilon),
        }
    }
}

impl<T: Scalar> RbfKind<T> {
    pub fn family(&self) -> RbfFamily {
        match self {
            RbfKind::Tps => RbfFamily::Tps,
            RbfKind::Gaussian(_) => RbfFamily::Gaussian,
            RbfKind::InverseMultiquadric(_) => RbfFamily::InverseMultiquadric,
            RbfKind::InverseQuadric(_) => RbfFamily::InverseQuadric,
        }
    }
}

/// `psi(r)` for `r >= 0`.
pub fn rbf_eval<T: Scalar>(kind: RbfKind<T>, r: T) -> T {
    kind.eval_sq(r * r)
}

impl<T: Scalar> fmt::Display for RbfKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.epsilon() {
            Some(e) => write!(f, "{}(eps={})", self.name(), e),
            None => f.write_str(self.name()),
        }
    }
}
