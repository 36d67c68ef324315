//! PSNR and SSIM between a recoloured image and a reference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::scalar::CompensatedSum;
use crate::Scalar;

/// Reported for identical images instead of infinity.
pub const PSNR_CAP_DB: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
}

impl MetricReport {
    pub fn compute<T: Scalar>(result: &ImageBuffer<T>, reference: &ImageBuffer<T>) -> Result<Self> {
        Ok(Self {
            psnr: psnr(result, reference)?,
            ssim: ssim(result, reference)?,
        })
    }

    /// `psnr=<dB> ssim=<value>`.
    pub fn to_line(&self) -> String {
        format!("psnr={:.4} ssim={:.6}", self.psnr, self.ssim)
    }

    /// `<result>,<reference>,<psnr>,<ssim>` without a trailing newline.
    pub fn csv_row(&self, result: &str, reference: &str) -> String {
        format!(
            "{},{},{:.6},{:.8}",
            csv_field(result),
            csv_field(reference),
            self.psnr,
            self.ssim
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `10 log10(1 / MSE)` over all channels of normalised values, capped at 100 dB.
pub fn psnr<T: Scalar>(a: &ImageBuffer<T>, b: &ImageBuffer<T>) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let rows: Vec<f64> = (0..a.height())
        .into_par_iter()
        .map(|y| {
            let mut acc = CompensatedSum::new();
            for (p, q) in a.row(y).iter().zip(b.row(y)) {
                for c in 0..3 {
                    let d = p.0[c].as_f64() - q.0[c].as_f64();
                    acc.add(d * d);
                }
            }
            acc.value()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for r in rows {
        total.add(r);
    }
    let mse = total.value() / (a.pixels().len() * 3) as f64;
    if mse <= 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

fn luma<T: Scalar>(img: &ImageBuffer<T>) -> Vec<f64> {
    img.pixels()
        .iter()
        .map(|p| LUMA[0] * p.0[0].as_f64() + LUMA[1] * p.0[1].as_f64() + LUMA[2] * p.0[2].as_f64())
        .collect()
}

/// Valid-mode separable filtering of a `w x h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let horiz: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let row = &plane[y * w..(y + 1) * w];
            (0..ow).map(move |x| {
                row[x..x + SSIM_WINDOW]
                    .iter()
                    .zip(k)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
        })
        .collect();
    (0..oh)
        .into_par_iter()
        .flat_map_iter(|y| {
            let horiz = &horiz;
            (0..ow).map(move |x| {
                (0..SSIM_WINDOW)
                    .map(|i| horiz[(y + i) * ow + x] * k[i])
                    .sum::<f64>()
            })
        })
        .collect()
}

/// Mean local SSIM of the Rec. 601 luma over 11x11 Gaussian windows
/// (sigma 1.5, K1 0.01, K2 0.03, dynamic range 1).
pub fn ssim<T: Scalar>(a: &ImageBuffer<T>, b: &ImageBuffer<T>) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {w}x{h}"
        )));
    }
    let k = gaussian_window();
    let la = luma(a);
    let lb = luma(b);
    let aa: Vec<f64> = la.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = lb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(&la, w, h, &k);
    let mu_b = filter_valid(&lb, w, h, &k);
    let e_aa = filter_valid(&aa, w, h, &k);
    let e_bb = filter_valid(&bb, w, h, &k);
    let e_ab = filter_valid(&ab, w, h, &k);
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut acc = CompensatedSum::new();
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        acc.add(num / den);
    }
    Ok(acc.value() / mu_a.len() as f64)
}
