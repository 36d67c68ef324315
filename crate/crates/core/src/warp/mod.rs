//! Parametric colour-space warp: an affine map plus a radial basis expansion
//! over a fixed control grid, `phi(x) = A x + o + W psi(x)`.
//!
//! The warp is linear in its packed parameter vector, so convex combinations
//! of parameter vectors blend warps pointwise.

mod grid;
mod io;
mod rbf;

pub use grid::{ControlGrid, DEFAULT_GRID_PER_AXIS};
pub use io::{load_warp, parse_warp, save_warp, write_warp, WARP_MAGIC, WARP_VERSION};
pub use rbf::{rbf_eval, RbfFamily, RbfKind};

use crate::color::{ColorSpace, ColorTriple};
use crate::error::{Error, Result};
use crate::Scalar;

/// Number of affine and offset entries at the head of a packed parameter vector.
pub const AFFINE_LEN: usize = 12;

/// Parameters of a colour warp.
///
/// Packed layout: row-major `A` (9), `o` (3), then `W` column by column
/// (3 per control point).
#[derive(Debug, Clone, PartialEq)]
pub struct WarpParameters<T> {
    pub affine: [[T; 3]; 3],
    pub offset: [T; 3],
    /// One 3-vector per control point (the columns of `W`).
    pub weights: Vec<[T; 3]>,
    grid: ControlGrid<T>,
    rbf: RbfKind<T>,
    space: ColorSpace,
}

/// `psi(|x - c_j|)` for every control point `c_j`.
pub fn basis_vector<T: Scalar>(
    grid: &ControlGrid<T>,
    rbf: RbfKind<T>,
    x: ColorTriple<T>,
) -> Vec<T> {
    let mut out = vec![T::zero(); grid.len()];
    basis_into(grid, rbf, x, &mut out);
    out
}

#[inline]
pub(crate) fn basis_into<T: Scalar>(
    grid: &ControlGrid<T>,
    rbf: RbfKind<T>,
    x: ColorTriple<T>,
    out: &mut [T],
) {
    for (o, c) in out.iter_mut().zip(grid.points()) {
        *o = rbf.eval_sq(x.dist_sq(*c));
    }
}

impl<T: Scalar> WarpParameters<T> {
    /// `A = I`, `o = 0`, `W = 0`.
    pub fn identity(grid: ControlGrid<T>, rbf: RbfKind<T>, space: ColorSpace) -> Self {
        let mut affine = [[T::zero(); 3]; 3];
        for (i, row) in affine.iter_mut().enumerate() {
            row[i] = T::one();
        }
        let m = grid.len();
        Self {
            affine,
            offset: [T::zero(); 3],
            weights: vec![[T::zero(); 3]; m],
            grid,
            rbf,
            space,
        }
    }

    pub fn from_theta(
        theta: &[T],
        grid: ControlGrid<T>,
        rbf: RbfKind<T>,
        space: ColorSpace,
    ) -> Result<Self> {
        let mut w = Self::identity(grid, rbf, space);
        w.set_theta(theta)?;
        Ok(w)
    }

    pub fn grid(&self) -> &ControlGrid<T> {
        &self.grid
    }

    pub fn rbf(&self) -> RbfKind<T> {
        self.rbf
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    /// Length of the packed parameter vector, `3 m + 12`.
    pub fn theta_len(&self) -> usize {
        theta_len(self.grid.len())
    }

    pub fn theta(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.theta_len());
        for row in &self.affine {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.offset);
        for col in &self.weights {
            out.extend_from_slice(col);
        }
        out
    }

    pub fn set_theta(&mut self, theta: &[T]) -> Result<()> {
        if theta.len() != self.theta_len() {
            return Err(Error::InvalidArgument(format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                self.theta_len()
            )));
        }
        for (i, row) in self.affine.iter_mut().enumerate() {
            row.copy_from_slice(&theta[3 * i..3 * i + 3]);
        }
        self.offset.copy_from_slice(&theta[9..12]);
        for (j, col) in self.weights.iter_mut().enumerate() {
            col.copy_from_slice(&theta[AFFINE_LEN + 3 * j..AFFINE_LEN + 3 * j + 3]);
        }
        Ok(())
    }

    /// True when both warps share grid, kernel and colour space.
    pub fn same_family(&self, other: &Self) -> bool {
        self.grid == other.grid && self.rbf == other.rbf && self.space == other.space
    }

    pub fn check_family(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::IncompatibleWarps(format!(
                "colour spaces differ ({} vs {})",
                self.space, other.space
            )));
        }
        if self.rbf != other.rbf {
            return Err(Error::IncompatibleWarps(format!(
                "kernels differ ({} vs {})",
                self.rbf, other.rbf
            )));
        }
        if self.grid != other.grid {
            return Err(Error::IncompatibleWarps("control grids differ".into()));
        }
        Ok(())
    }

    #[inline]
    fn affine_part(&self, x: ColorTriple<T>) -> [T; 3] {
        let a = &self.affine;
        let [x0, x1, x2] = x.0;
        [
            a[0][0] * x0 + a[0][1] * x1 + a[0][2] * x2 + self.offset[0],
            a[1][0] * x0 + a[1][1] * x1 + a[1][2] * x2 + self.offset[1],
            a[2][0] * x0 + a[2][1] * x1 + a[2][2] * x2 + self.offset[2],
        ]
    }

    /// `A x + o + W psi(x)`, unclamped.
    #[inline]
    pub fn eval(&self, x: ColorTriple<T>) -> ColorTriple<T> {
        let mut out = self.affine_part(x);
        let mut acc = [T::zero(); 3];
        for (c, w) in self.grid.points().iter().zip(&self.weights) {
            let psi = self.rbf.eval_sq(x.dist_sq(*c));
            acc[0] += w[0] * psi;
            acc[1] += w[1] * psi;
            acc[2] += w[2] * psi;
        }
        out[0] += acc[0];
        out[1] += acc[1];
        out[2] += acc[2];
        ColorTriple(out)
    }

    /// Evaluate given a precomputed basis vector for `x`.
    #[inline]
    pub fn eval_with_basis(&self, x: ColorTriple<T>, basis: &[T]) -> ColorTriple<T> {
        let mut out = self.affine_part(x);
        let mut acc = [T::zero(); 3];
        for (w, &psi) in self.weights.iter().zip(basis) {
            acc[0] += w[0] * psi;
            acc[1] += w[1] * psi;
            acc[2] += w[2] * psi;
        }
        out[0] += acc[0];
        out[1] += acc[1];
        out[2] += acc[2];
        ColorTriple(out)
    }

    /// Overwrite `self` with `sum_i gammas[i] * warps[i]` in parameter space.
    /// No validation; callers check family and weights.
    pub(crate) fn mix_from(&mut self, warps: &[&Self], gammas: &[T]) {
        for row in 0..3 {
            for col in 0..3 {
                let mut acc = T::zero();
                for (w, &g) in warps.iter().zip(gammas) {
                    acc += g * w.affine[row][col];
                }
                self.affine[row][col] = acc;
            }
            let mut acc = T::zero();
            for (w, &g) in warps.iter().zip(gammas) {
                acc += g * w.offset[row];
            }
            self.offset[row] = acc;
        }
        for j in 0..self.weights.len() {
            for c in 0..3 {
                let mut acc = T::zero();
                for (w, &g) in warps.iter().zip(gammas) {
                    acc += g * w.weights[j][c];
                }
                self.weights[j][c] = acc;
            }
        }
    }

    pub fn cast<U: Scalar>(&self) -> WarpParameters<U> {
        let c = |v: T| U::lit(v.as_f64());
        WarpParameters {
            affine: self.affine.map(|r| r.map(c)),
            offset: self.offset.map(c),
            weights: self.weights.iter().map(|w| w.map(c)).collect(),
            grid: self.grid.cast(),
            rbf: self.rbf.cast(),
            space: self.space,
        }
    }
}

pub fn theta_len(control_points: usize) -> usize {
    3 * control_points + AFFINE_LEN
}

pub fn identity_warp<T: Scalar>(
    grid: ControlGrid<T>,
    rbf: RbfKind<T>,
    space: ColorSpace,
) -> WarpParameters<T> {
    WarpParameters::identity(grid, rbf, space)
}

/// Evaluate `phi(x)`.
pub fn eval_warp<T: Scalar>(w: &WarpParameters<T>, x: ColorTriple<T>) -> ColorTriple<T> {
    w.eval(x)
}

pub(crate) fn validate_gammas<T: Scalar>(gammas: &[T]) -> Result<()> {
    if gammas.iter().any(|g| !(*g >= T::zero()) || !g.is_finite()) {
        return Err(Error::InvalidArgument(
            "mixing weights must be finite and >= 0".into(),
        ));
    }
    let sum: f64 = gammas.iter().map(|g| g.as_f64()).sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "mixing weights sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Convex combination of packed parameter vectors.
pub fn interpolate<T: Scalar>(
    warps: &[WarpParameters<T>],
    gammas: &[T],
) -> Result<WarpParameters<T>> {
    let first = warps
        .first()
        .ok_or(Error::EmptyInput("no warps to interpolate"))?;
    if warps.len() != gammas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} warps but {} weights",
            warps.len(),
            gammas.len()
        )));
    }
    for w in &warps[1..] {
        first.check_family(w)?;
    }
    validate_gammas(gammas)?;
    let refs: Vec<&WarpParameters<T>> = warps.iter().collect();
    let mut out = first.clone();
    out.mix_from(&refs, gammas);
    Ok(out)
}
