//! Dense colour rasters and PNG/JPEG I/O.

use std::path::Path;

use image::{DynamicImage, ImageError, ImageReader, RgbImage};
use rayon::prelude::*;

use crate::color::{rgb_to_working, working_to_rgb, ColorSpace, ColorTriple};
use crate::error::{Error, Result};
use crate::Scalar;

/// Row-major raster of colour triples tagged with its colour space.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer<T> {
    width: usize,
    height: usize,
    pixels: Vec<ColorTriple<T>>,
    space: ColorSpace,
}

impl<T: Scalar> ImageBuffer<T> {
    pub fn new(
        width: usize,
        height: usize,
        pixels: Vec<ColorTriple<T>>,
        space: ColorSpace,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            space,
        })
    }

    pub fn filled(width: usize, height: usize, color: ColorTriple<T>, space: ColorSpace) -> Self {
        Self::new(width, height, vec![color; width * height], space).expect("positive dimensions")
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        space: ColorSpace,
        mut f: impl FnMut(usize, usize) -> ColorTriple<T>,
    ) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels, space).expect("positive dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn pixels(&self) -> &[ColorTriple<T>] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [ColorTriple<T>] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<ColorTriple<T>> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> ColorTriple<T> {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[ColorTriple<T>] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn ensure_same_dims<U>(&self, other: &ImageBuffer<U>) -> Result<()> {
        if self.dims() != (other.width, other.height) {
            return Err(Error::dims(self.dims(), (other.width, other.height)));
        }
        Ok(())
    }

    fn with_pixels(&self, pixels: Vec<ColorTriple<T>>, space: ColorSpace) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels,
            space,
        }
    }

    /// Clamp every channel to `[0, 1]`.
    pub fn clamp_unit(&self) -> Self {
        let pixels = self.pixels.par_iter().map(|p| p.clamp_unit()).collect();
        self.with_pixels(pixels, self.space)
    }

    /// Convert an RGB buffer into the working coordinates of `space`.
    pub fn to_working(&self, space: ColorSpace) -> Result<Self> {
        self.expect_space(ColorSpace::Rgb)?;
        if space == ColorSpace::Rgb {
            return Ok(self.clone());
        }
        let pixels = self
            .pixels
            .par_iter()
            .map(|&p| rgb_to_working(p, space))
            .collect();
        Ok(self.with_pixels(pixels, space))
    }

    /// Convert working coordinates back to RGB clamped to `[0, 1]`.
    pub fn to_rgb(&self) -> Self {
        let space = self.space;
        let pixels = self
            .pixels
            .par_iter()
            .map(|&p| working_to_rgb(p, space))
            .collect();
        self.with_pixels(pixels, ColorSpace::Rgb)
    }

    pub fn expect_space(&self, space: ColorSpace) -> Result<()> {
        if self.space != space {
            return Err(Error::SpaceMismatch {
                expected: space,
                found: self.space,
            });
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ImageBuffer<U> {
        ImageBuffer {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| p.cast()).collect(),
            space: self.space,
        }
    }

    /// Quantise an RGB buffer to 8 bits per channel.
    pub fn to_rgb8(&self) -> Result<RgbImage> {
        self.expect_space(ColorSpace::Rgb)?;
        let mut raw = Vec::with_capacity(self.pixels.len() * 3);
        for p in &self.pixels {
            for v in p.0 {
                raw.push(quantize_u8(v));
            }
        }
        Ok(
            RgbImage::from_raw(self.width as u32, self.height as u32, raw)
                .expect("buffer length matches dimensions"),
        )
    }
}

#[inline]
fn quantize_u8<T: Scalar>(v: T) -> u8 {
    let v = v.as_f64();
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn image_err(path: &Path, source: ImageError) -> Error {
    match source {
        ImageError::IoError(e) => Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
        ImageError::Unsupported(u) => Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: u.to_string(),
        },
        other => Error::Image {
            path: path.to_path_buf(),
            source: other,
        },
    }
}

pub(crate) fn open_dynamic(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?
        .with_guessed_format()
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
    match reader.format() {
        Some(image::ImageFormat::Png) | Some(image::ImageFormat::Jpeg) => {}
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{other:?}; expected PNG or JPEG"),
            })
        }
    }
    reader.decode().map_err(|e| image_err(path, e))
}

/// Load a PNG or JPEG as normalised RGB. 8-bit data is divided by 255 and
/// 16-bit data by 65535; alpha is dropped.
pub fn load_image<T: Scalar>(path: impl AsRef<Path>) -> Result<ImageBuffer<T>> {
    let path = path.as_ref();
    let img = open_dynamic(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<ColorTriple<T>> = match img {
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => {
            let scale = T::lit(65535.0);
            img.into_rgb16()
                .pixels()
                .map(|p| ColorTriple(p.0.map(|v| T::lit(v as f64) / scale)))
                .collect()
        }
        _ => {
            let scale = T::lit(255.0);
            img.into_rgb8()
                .pixels()
                .map(|p| ColorTriple(p.0.map(|v| T::lit(v as f64) / scale)))
                .collect()
        }
    };
    ImageBuffer::new(w, h, pixels, ColorSpace::Rgb)
}

/// Save an RGB buffer at 8 bits per channel; the format follows the extension.
pub fn save_image<T: Scalar>(buf: &ImageBuffer<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = image::ImageFormat::from_path(path).map_err(|e| image_err(path, e))?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Jpeg) {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("{format:?}; expected PNG or JPEG"),
        });
    }
    let rgb = buf.to_rgb8()?;
    rgb.save_with_format(path, format)
        .map_err(|e| image_err(path, e))
}
