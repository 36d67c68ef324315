use crate::color::ColorTriple;
use crate::error::{Error, Result};
use crate::Scalar;

pub const DEFAULT_GRID_PER_AXIS: usize = 5;

/// Regular lattice of RBF control points over an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid<T> {
    per_axis: usize,
    lo: [T; 3],
    hi: [T; 3],
    points: Vec<ColorTriple<T>>,
}

impl<T: Scalar> ControlGrid<T> {
    /// `per_axis^3` points spanning `[lo, hi]` inclusive, ordered with the
    /// first channel varying slowest.
    pub fn new(per_axis: usize, lo: [T; 3], hi: [T; 3]) -> Result<Self> {
        if per_axis < 2 {
            return Err(Error::InvalidArgument(format!(
                "control grid needs at least 2 points per axis, got {per_axis}"
            )));
        }
        if (0..3).any(|i| !(hi[i] > lo[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
            return Err(Error::InvalidArgument(
                "control grid bounds must satisfy lo < hi".into(),
            ));
        }
        let coord = |axis: usize, i: usize| {
            let t = T::from_usize_lossy(i) / T::from_usize_lossy(per_axis - 1);
            lo[axis] + (hi[axis] - lo[axis]) * t
        };
        let mut points = Vec::with_capacity(per_axis.pow(3));
        for i in 0..per_axis {
            for j in 0..per_axis {
                for k in 0..per_axis {
                    points.push(ColorTriple::new(coord(0, i), coord(1, j), coord(2, k)));
                }
            }
        }
        Ok(Self {
            per_axis,
            lo,
            hi,
            points,
        })
    }

    /// Unit cube with `per_axis` points per axis.
    pub fn unit(per_axis: usize) -> Result<Self> {
        Self::new(per_axis, [T::zero(); 3], [T::one(); 3])
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn lo(&self) -> [T; 3] {
        self.lo
    }

    pub fn hi(&self) -> [T; 3] {
        self.hi
    }

    pub fn points(&self) -> &[ColorTriple<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn volume(&self) -> T {
        (0..3)
            .map(|i| self.hi[i] - self.lo[i])
            .fold(T::one(), |a, b| a * b)
    }

    pub fn cast<U: Scalar>(&self) -> ControlGrid<U> {
        ControlGrid {
            per_axis: self.per_axis,
            lo: self.lo.map(|v| U::lit(v.as_f64())),
            hi: self.hi.map(|v| U::lit(v.as_f64())),
            points: self.points.iter().map(|p| p.cast()).collect(),
        }
    }
}

impl<T: Scalar> Default for ControlGrid<T> {
    fn default() -> Self {
        Self::unit(DEFAULT_GRID_PER_AXIS).expect("valid default grid")
    }
}
