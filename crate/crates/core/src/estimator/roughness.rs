//! Integrated squared second derivatives of the warp over its grid box.
//!
//! Only the radial part has curvature, so with `H_j(x)` the Hessian of
//! `psi(|x - c_j|)` the integral is the quadratic form
//! `sum_c w_c^T Q w_c` with `Q_jk = int <H_j(x), H_k(x)>_F dx`, where `w_c`
//! is row `c` of `W`. `Q` is assembled once by midpoint quadrature.

use rayon::prelude::*;

use crate::scalar::CompensatedSum;
use crate::warp::{ControlGrid, RbfKind, WarpParameters, AFFINE_LEN};
use crate::Scalar;

use super::config::DEFAULT_ROUGHNESS_RESOLUTION;

/// Precomputed roughness quadratic form for one grid and kernel.
#[derive(Debug, Clone)]
pub struct RoughnessOperator<T> {
    m: usize,
    q: Vec<T>,
    resolution: usize,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Hessian features `[H00, H11, H22, sqrt2 H01, sqrt2 H02, sqrt2 H12]` of
/// every control point at `x`; their dot product is the Frobenius product.
fn hessian_features<T: Scalar>(
    grid: &ControlGrid<T>,
    rbf: RbfKind<T>,
    x: [T; 3],
    out: &mut [[T; 6]],
) {
    let s2 = T::lit(SQRT2);
    for (f, c) in out.iter_mut().zip(grid.points()) {
        let d = [x[0] - c.0[0], x[1] - c.0[1], x[2] - c.0[2]];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let (a, b) = rbf.hessian_coeffs(r2);
        *f = [
            a + b * d[0] * d[0],
            a + b * d[1] * d[1],
            a + b * d[2] * d[2],
            s2 * b * d[0] * d[1],
            s2 * b * d[0] * d[2],
            s2 * b * d[1] * d[2],
        ];
    }
}

impl<T: Scalar> RoughnessOperator<T> {
    pub fn new(grid: &ControlGrid<T>, rbf: RbfKind<T>, resolution: usize) -> Self {
        let m = grid.len();
        let n = resolution.max(1);
        let lo = grid.lo();
        let hi = grid.hi();
        let mid = |axis: usize, i: usize| {
            lo[axis]
                + (hi[axis] - lo[axis]) * (T::from_usize_lossy(i) + T::lit(0.5))
                    / T::from_usize_lossy(n)
        };
        let mut samples = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    samples.push([mid(0, i), mid(1, j), mid(2, k)]);
                }
            }
        }
        let features: Vec<Vec<[T; 6]>> = samples
            .par_iter()
            .map(|x| {
                let mut f = vec![[T::zero(); 6]; m];
                hessian_features(grid, rbf, *x, &mut f);
                f
            })
            .collect();
        let cell = grid.volume() / T::from_usize_lossy(n * n * n);
        let rows: Vec<Vec<T>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut row = vec![T::zero(); m];
                for (k, slot) in row.iter_mut().enumerate().skip(j) {
                    let mut acc = CompensatedSum::new();
                    for f in &features {
                        let (a, b) = (&f[j], &f[k]);
                        acc.add(
                            a[0] * b[0]
                                + a[1] * b[1]
                                + a[2] * b[2]
                                + a[3] * b[3]
                                + a[4] * b[4]
                                + a[5] * b[5],
                        );
                    }
                    *slot = acc.value() * cell;
                }
                row
            })
            .collect();
        let mut q = vec![T::zero(); m * m];
        for j in 0..m {
            for k in j..m {
                q[j * m + k] = rows[j][k];
                q[k * m + j] = rows[j][k];
            }
        }
        Self {
            m,
            q,
            resolution: n,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Entry `Q_jk`.
    pub fn entry(&self, j: usize, k: usize) -> T {
        self.q[j * self.m + k]
    }

    /// Roughness of a warp; the affine part contributes nothing.
    pub fn value(&self, weights: &[[T; 3]]) -> T {
        let mut total = CompensatedSum::new();
        for c in 0..3 {
            for j in 0..self.m {
                let mut qw = T::zero();
                for k in 0..self.m {
                    qw += self.q[j * self.m + k] * weights[k][c];
                }
                total.add(weights[j][c] * qw);
            }
        }
        total.value()
    }

    /// Add `scale * d(roughness)/d(theta)` into a packed gradient.
    pub fn add_gradient(&self, weights: &[[T; 3]], scale: T, grad: &mut [T]) {
        let two = T::lit(2.0) * scale;
        for j in 0..self.m {
            let mut qw = [T::zero(); 3];
            for k in 0..self.m {
                let q = self.q[j * self.m + k];
                qw[0] += q * weights[k][0];
                qw[1] += q * weights[k][1];
                qw[2] += q * weights[k][2];
            }
            for c in 0..3 {
                grad[AFFINE_LEN + 3 * j + c] += two * qw[c];
            }
        }
    }
}

/// Roughness of `w` and its gradient with respect to the packed parameters,
/// using the default quadrature resolution.
pub fn roughness<T: Scalar>(w: &WarpParameters<T>) -> (T, Vec<T>) {
    let op = RoughnessOperator::new(w.grid(), w.rbf(), DEFAULT_ROUGHNESS_RESOLUTION);
    let mut grad = vec![T::zero(); w.theta_len()];
    op.add_gradient(&w.weights, T::one(), &mut grad);
    (op.value(&w.weights), grad)
}
