#![allow(dead_code)]

use l2recolor::clustering::{
    downsample_for_clustering, kmeans, sample_correspondences, CLUSTER_MAX_HEIGHT,
    CLUSTER_MAX_WIDTH,
};
use l2recolor::estimator::{estimate_theta, Estimate, EstimationMode};
use l2recolor::gmm::PairedGmms;
use l2recolor::warp::{identity_warp, RbfFamily};
use l2recolor::{Color, ColorSpace, Config, Grid, Image, Rbf, Warp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth background with overlapping flat-coloured discs and boxes and a
/// little deterministic texture, so the image has both gradients and edges.
pub fn scene(width: usize, height: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    let shapes: Vec<(bool, f64, f64, f64, f64, Color)> = (0..24)
        .map(|_| {
            let colour = Color::new(
                r.gen_range(0.05..0.95),
                r.gen_range(0.05..0.95),
                r.gen_range(0.05..0.95),
            );
            (
                r.gen_bool(0.5),
                r.gen_range(0.0..1.0),
                r.gen_range(0.0..1.0),
                r.gen_range(0.04..0.18),
                r.gen_range(0.04..0.18),
                colour,
            )
        })
        .collect();
    let phase: f64 = r.gen_range(0.0..6.0);
    Image::from_fn(width, height, ColorSpace::Rgb, |x, y| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        let mut c = Color::new(
            0.2 + 0.6 * u,
            0.25 + 0.5 * v,
            0.5 + 0.3 * (6.0 * u + 4.0 * v + phase).sin(),
        );
        for &(is_box, cx, cy, rx, ry, colour) in &shapes {
            let (dx, dy) = ((u - cx) / rx, (v - cy) / ry);
            let inside = if is_box {
                dx.abs() <= 1.0 && dy.abs() <= 1.0
            } else {
                dx * dx + dy * dy <= 1.0
            };
            if inside {
                c = colour;
            }
        }
        let t = 0.02 * ((x as f64 * 0.9).sin() * (y as f64 * 1.3).cos());
        Color::new(c.0[0] + t, c.0[1] + t, c.0[2] + t).clamp_unit()
    })
}

/// A known global colour change: channel mixing, offset and a mild gamma.
pub fn grade(c: Color) -> Color {
    let m = [[0.85, 0.10, 0.0], [0.05, 0.80, 0.10], [0.0, 0.15, 0.90]];
    let mut out = [0.0; 3];
    for i in 0..3 {
        let lin = m[i][0] * c.0[0] + m[i][1] * c.0[1] + m[i][2] * c.0[2] + [0.08, 0.02, -0.03][i];
        out[i] = lin.clamp(0.0, 1.0).powf([0.9, 1.0, 1.1][i]);
    }
    Color::from(out)
}

pub fn map_image(img: &Image, f: impl Fn(Color) -> Color) -> Image {
    Image::new(
        img.width(),
        img.height(),
        img.pixels().iter().map(|p| f(*p)).collect(),
        img.space(),
    )
    .unwrap()
}

/// Identity warp plus uniform noise of size `amp` on every parameter.
pub fn random_warp(seed: u64, rbf: Rbf, space: ColorSpace, amp: f64) -> Warp {
    let mut r = rng(seed);
    let mut w = identity_warp(Grid::default(), rbf, space);
    let theta: Vec<f64> = w
        .theta()
        .iter()
        .map(|v| v + r.gen_range(-amp..amp))
        .collect();
    w.set_theta(&theta).unwrap();
    w
}

/// Configuration with tuned lambda and epsilon for the kernel, space and mode.
pub fn tuned(family: RbfFamily, space: ColorSpace, mode: EstimationMode) -> (Config, Rbf) {
    let cfg = Config::for_kernel(family, space, mode);
    let rbf = family.with_epsilon(cfg.epsilon);
    (cfg, rbf)
}

/// K-means front end on downsampled copies, then annealed estimation.
pub fn fit_clusters(
    target: &Image,
    palette: &Image,
    family: RbfFamily,
    space: ColorSpace,
    k: usize,
    seed: u64,
) -> Estimate<f64> {
    let (cfg, rbf) = tuned(family, space, EstimationMode::NoCorrespondence);
    let t = downsample_for_clustering(
        &target.to_working(space).unwrap(),
        CLUSTER_MAX_WIDTH,
        CLUSTER_MAX_HEIGHT,
    )
    .unwrap();
    let p = downsample_for_clustering(
        &palette.to_working(space).unwrap(),
        CLUSTER_MAX_WIDTH,
        CLUSTER_MAX_HEIGHT,
    )
    .unwrap();
    let ct = kmeans(t.pixels(), k, seed).unwrap();
    let cp = kmeans(p.pixels(), k, seed).unwrap();
    let g = PairedGmms::unpaired(ct.centers, cp.centers, cfg.hmax).unwrap();
    estimate_theta(&g, &cfg, &Grid::default(), rbf, space).unwrap()
}

/// Pixel-pair front end on aligned images, then annealed estimation.
pub fn fit_pairs(
    target: &Image,
    palette: &Image,
    family: RbfFamily,
    space: ColorSpace,
    n: usize,
    seed: u64,
    shift: usize,
) -> l2recolor::Result<Estimate<f64>> {
    let (cfg, rbf) = tuned(family, space, EstimationMode::Correspondence);
    let set = sample_correspondences(
        &target.to_working(space)?,
        &palette.to_working(space)?,
        n,
        seed,
        shift,
    )?;
    let g = PairedGmms::paired(&set.pairs, cfg.hmax)?;
    estimate_theta(&g, &cfg, &Grid::default(), rbf, space)
}
