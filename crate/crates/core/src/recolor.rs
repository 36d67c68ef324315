//! Applying warps to images and frame sequences.
//!
//! Work is split by rows; every output pixel depends only on its input pixel
//! and immutable warp data, so results do not depend on the thread count.

use std::path::Path;

use rayon::prelude::*;

use crate::color::{rgb_to_working, working_to_rgb, ColorSpace, ColorTriple};
use crate::error::{Error, Result};
use crate::image::{open_dynamic, ImageBuffer};
use crate::warp::WarpParameters;
use crate::Scalar;

/// Per-pixel blending weight between two warps, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixMask<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> MixMask<T> {
    /// Values are clamped to `[0, 1]`; NaN becomes 0.
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "mask of {} values does not fit {width}x{height}",
                values.len()
            )));
        }
        let values = values
            .into_iter()
            .map(|v| {
                if v.is_nan() {
                    T::zero()
                } else {
                    v.max(T::zero()).min(T::one())
                }
            })
            .collect();
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, gamma: T) -> Result<Self> {
        Self::new(width, height, vec![gamma; width * height])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }
}

/// Load a greyscale mask (single channel, or the luma of an RGB image),
/// mapped linearly to `[0, 1]`.
pub fn load_mask<T: Scalar>(path: impl AsRef<Path>) -> Result<MixMask<T>> {
    let img = open_dynamic(path.as_ref())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<T> = match img.color().bits_per_pixel() / img.color().channel_count() as u16 {
        16 => img
            .into_luma16()
            .pixels()
            .map(|p| T::lit(p.0[0] as f64 / 65535.0))
            .collect(),
        _ => img
            .into_luma8()
            .pixels()
            .map(|p| T::lit(p.0[0] as f64 / 255.0))
            .collect(),
    };
    MixMask::new(w, h, values)
}

/// How input pixels reach the warp's coordinates and come back.
#[derive(Clone, Copy)]
enum Route {
    /// Input already in the warp space; clamp the warp output to `[0, 1]`.
    Direct,
    /// RGB input, warp in `space`; convert, warp, convert back and clamp in RGB.
    ViaWorking(ColorSpace),
}

impl Route {
    fn strict<T: Scalar>(w: &WarpParameters<T>, img: &ImageBuffer<T>) -> Result<Self> {
        img.expect_space(w.space())?;
        Ok(Route::Direct)
    }

    fn from_rgb<T: Scalar>(w: &WarpParameters<T>, img: &ImageBuffer<T>) -> Result<Self> {
        img.expect_space(ColorSpace::Rgb)?;
        Ok(match w.space() {
            ColorSpace::Rgb => Route::Direct,
            s => Route::ViaWorking(s),
        })
    }

    fn output_space<T: Scalar>(self, img: &ImageBuffer<T>) -> ColorSpace {
        match self {
            Route::Direct => img.space(),
            Route::ViaWorking(_) => ColorSpace::Rgb,
        }
    }

    #[inline]
    fn run<T: Scalar>(
        self,
        p: ColorTriple<T>,
        phi: impl FnOnce(ColorTriple<T>) -> ColorTriple<T>,
    ) -> ColorTriple<T> {
        match self {
            Route::Direct => phi(p).clamp_unit(),
            Route::ViaWorking(s) => working_to_rgb(phi(rgb_to_working(p, s)), s),
        }
    }
}

fn render_single<T: Scalar>(
    w: &WarpParameters<T>,
    img: &ImageBuffer<T>,
    route: Route,
) -> ImageBuffer<T> {
    let width = img.width();
    let mut out = vec![ColorTriple::splat(T::zero()); img.pixels().len()];
    out.par_chunks_mut(width)
        .zip(img.pixels().par_chunks(width))
        .for_each(|(dst, src)| {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = route.run(*s, |x| w.eval(x));
            }
        });
    ImageBuffer::new(width, img.height(), out, route.output_space(img)).expect("same dimensions")
}

fn render_mixed<T: Scalar>(
    w1: &WarpParameters<T>,
    w2: &WarpParameters<T>,
    mask: &MixMask<T>,
    img: &ImageBuffer<T>,
    route: Route,
) -> Result<ImageBuffer<T>> {
    w1.check_family(w2)?;
    if mask.dims() != img.dims() {
        return Err(Error::dims(mask.dims(), img.dims()));
    }
    let width = img.width();
    let mut out = vec![ColorTriple::splat(T::zero()); img.pixels().len()];
    out.par_chunks_mut(width)
        .zip(img.pixels().par_chunks(width))
        .zip(mask.values().par_chunks(width))
        .for_each(|((dst, src), gammas)| {
            // Consecutive pixels often share a weight; rebuild the blend only on change.
            let mut blend = w1.clone();
            let mut current: Option<T> = None;
            for ((d, s), &g) in dst.iter_mut().zip(src).zip(gammas) {
                if current != Some(g) {
                    blend.mix_from(&[w1, w2], &[g, T::one() - g]);
                    current = Some(g);
                }
                *d = route.run(*s, |x| blend.eval(x));
            }
        });
    ImageBuffer::new(width, img.height(), out, route.output_space(img))
}

fn render_dissolve<T: Scalar>(
    w_from: &WarpParameters<T>,
    w_to: &WarpParameters<T>,
    gammas: &[T],
    frames: &[ImageBuffer<T>],
    rgb_input: bool,
) -> Result<Vec<ImageBuffer<T>>> {
    w_from.check_family(w_to)?;
    if gammas.len() != frames.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} frames",
            gammas.len(),
            frames.len()
        )));
    }
    if let Some(g) = gammas
        .iter()
        .find(|g| !(**g >= T::zero() && **g <= T::one()))
    {
        return Err(Error::InvalidArgument(format!(
            "dissolve weight {g} outside [0, 1]"
        )));
    }
    let mut out = Vec::with_capacity(frames.len());
    let mut blend = w_from.clone();
    for (frame, &g) in frames.iter().zip(gammas) {
        blend.mix_from(&[w_from, w_to], &[g, T::one() - g]);
        let route = if rgb_input {
            Route::from_rgb(&blend, frame)?
        } else {
            Route::strict(&blend, frame)?
        };
        out.push(render_single(&blend, frame, route));
    }
    Ok(out)
}

/// Recolour every pixel with `phi` and clamp to `[0, 1]`. The image must be
/// in the warp's colour space.
pub fn apply<T: Scalar>(w: &WarpParameters<T>, img: &ImageBuffer<T>) -> Result<ImageBuffer<T>> {
    Ok(render_single(w, img, Route::strict(w, img)?))
}

/// Recolour with the parameters `gamma(p) theta_1 + (1 - gamma(p)) theta_2`
/// at every pixel `p`, then clamp.
pub fn apply_mixed<T: Scalar>(
    w1: &WarpParameters<T>,
    w2: &WarpParameters<T>,
    mask: &MixMask<T>,
    img: &ImageBuffer<T>,
) -> Result<ImageBuffer<T>> {
    render_mixed(w1, w2, mask, img, Route::strict(w1, img)?)
}

/// Frame `t` is recoloured with `gamma_t theta_from + (1 - gamma_t) theta_to`.
/// Passing the identity warp as `w_from` fades in the colour transfer.
pub fn apply_dissolve<T: Scalar>(
    w_from: &WarpParameters<T>,
    w_to: &WarpParameters<T>,
    gammas: &[T],
    frames: &[ImageBuffer<T>],
) -> Result<Vec<ImageBuffer<T>>> {
    render_dissolve(w_from, w_to, gammas, frames, false)
}

/// [`apply`] for RGB input with a warp in any colour space; the result is RGB.
pub fn apply_rgb<T: Scalar>(w: &WarpParameters<T>, img: &ImageBuffer<T>) -> Result<ImageBuffer<T>> {
    Ok(render_single(w, img, Route::from_rgb(w, img)?))
}

/// [`apply_mixed`] for RGB input.
pub fn apply_mixed_rgb<T: Scalar>(
    w1: &WarpParameters<T>,
    w2: &WarpParameters<T>,
    mask: &MixMask<T>,
    img: &ImageBuffer<T>,
) -> Result<ImageBuffer<T>> {
    render_mixed(w1, w2, mask, img, Route::from_rgb(w1, img)?)
}

/// [`apply_dissolve`] for RGB frames.
pub fn apply_dissolve_rgb<T: Scalar>(
    w_from: &WarpParameters<T>,
    w_to: &WarpParameters<T>,
    gammas: &[T],
    frames: &[ImageBuffer<T>],
) -> Result<Vec<ImageBuffer<T>>> {
    render_dissolve(w_from, w_to, gammas, frames, true)
}
