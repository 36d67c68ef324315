//! Front ends that produce mixture means: K-means cluster centres for
//! unmatched images and sampled pixel pairs for aligned images.

use std::collections::HashSet;

use rand::distributions::{Distribution, Uniform};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::color::{ColorSpace, ColorTriple};
use crate::error::{Error, Result};
use crate::image::ImageBuffer;
use crate::scalar::compensated_sum;
use crate::Scalar;

pub const DEFAULT_CLUSTERS: usize = 50;
pub const DEFAULT_CORRESPONDENCES: usize = 2_000;
pub const CLUSTER_MAX_WIDTH: usize = 300;
pub const CLUSTER_MAX_HEIGHT: usize = 350;

const KMEANS_MAX_ITERS: usize = 200;
const KMEANS_REL_TOL: f64 = 1e-6;

/// Aspect-preserving box-filter downsample so that the result fits in
/// `max_w x max_h`. Images already within the bounds are returned unchanged.
pub fn downsample_for_clustering<T: Scalar>(
    img: &ImageBuffer<T>,
    max_w: usize,
    max_h: usize,
) -> Result<ImageBuffer<T>> {
    if max_w == 0 || max_h == 0 {
        return Err(Error::InvalidArgument(
            "downsample bounds must be >= 1".into(),
        ));
    }
    let (w, h) = img.dims();
    if w <= max_w && h <= max_h {
        return Ok(img.clone());
    }
    let scale = (max_w as f64 / w as f64).min(max_h as f64 / h as f64);
    let ow = ((w as f64 * scale + 1e-9).floor() as usize).clamp(1, max_w);
    let oh = ((h as f64 * scale + 1e-9).floor() as usize).clamp(1, max_h);

    let span = |o: usize, out: usize, src: usize| {
        let lo = o * src / out;
        let hi = ((o + 1) * src / out).max(lo + 1).min(src);
        lo..hi
    };
    let rows: Vec<Vec<ColorTriple<T>>> = (0..oh)
        .into_par_iter()
        .map(|oy| {
            let ys = span(oy, oh, h);
            (0..ow)
                .map(|ox| {
                    let xs = span(ox, ow, w);
                    let mut acc = ColorTriple::splat(T::zero());
                    let mut n = 0usize;
                    for y in ys.clone() {
                        for &p in &img.row(y)[xs.clone()] {
                            acc = acc.add(p);
                            n += 1;
                        }
                    }
                    acc.scale(T::one() / T::from_usize_lossy(n))
                })
                .collect()
        })
        .collect();
    ImageBuffer::new(ow, oh, rows.concat(), img.space())
}

/// Result of K-means clustering.
#[derive(Debug, Clone)]
pub struct ClusterModel<T> {
    pub centers: Vec<ColorTriple<T>>,
    pub counts: Vec<usize>,
    /// Cluster count that was asked for; `centers.len()` may be smaller when
    /// the input has fewer distinct points.
    pub requested_k: usize,
    /// Within-cluster sum of squared distances after every assignment step.
    pub objective_history: Vec<T>,
    pub assignments: Vec<usize>,
}

impl<T: Scalar> ClusterModel<T> {
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn was_reduced(&self) -> bool {
        self.centers.len() < self.requested_k
    }

    pub fn objective(&self) -> T {
        *self
            .objective_history
            .last()
            .expect("at least one assignment step")
    }
}

fn distinct_count_capped<T: Scalar>(points: &[ColorTriple<T>], cap: usize) -> usize {
    let mut seen = HashSet::new();
    for p in points {
        seen.insert(p.0.map(|v| v.as_f64().to_bits()));
        if seen.len() >= cap {
            break;
        }
    }
    seen.len()
}

fn kmeans_pp_init<T: Scalar>(
    points: &[ColorTriple<T>],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<ColorTriple<T>> {
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..points.len())]);
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| p.dist_sq(centers[0]).as_f64())
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = Uniform::new(0.0, total).sample(rng);
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` past the last partial sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            break;
        };
        let c = points[next];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.dist_sq(c).as_f64());
        }
    }
    centers
}

fn assign<T: Scalar>(points: &[ColorTriple<T>], centers: &[ColorTriple<T>]) -> (Vec<usize>, T) {
    let (labels, dists): (Vec<usize>, Vec<T>) = points
        .par_iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = p.dist_sq(centers[0]);
            for (j, c) in centers.iter().enumerate().skip(1) {
                let d = p.dist_sq(*c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            (best, best_d)
        })
        .unzip();
    (labels, compensated_sum(dists))
}

fn update<T: Scalar>(points: &[ColorTriple<T>], labels: &[usize], centers: &mut [ColorTriple<T>]) {
    let k = centers.len();
    let mut sums = vec![ColorTriple::splat(T::zero()); k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        sums[l] = sums[l].add(*p);
        counts[l] += 1;
    }
    for j in 0..k {
        if counts[j] > 0 {
            centers[j] = sums[j].scale(T::one() / T::from_usize_lossy(counts[j]));
        }
    }
    // Re-seed emptied centres at the points farthest from their own centre.
    let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut order: Vec<(T, usize)> = points
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (p, &l))| (p.dist_sq(centers[l]), i))
        .collect();
    order.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    for (slot, &j) in empty.iter().enumerate() {
        if let Some(&(_, i)) = order.get(slot) {
            centers[j] = points[i];
        }
    }
}

/// Lloyd's algorithm from a seeded k-means++ start.
///
/// Stops when assignments stop changing, when the relative objective change
/// drops below 1e-6, or after 200 iterations. If there are fewer distinct
/// points than `k`, `k` is reduced to the distinct count.
pub fn kmeans<T: Scalar>(
    points: &[ColorTriple<T>],
    k: usize,
    seed: u64,
) -> Result<ClusterModel<T>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("k-means needs at least one point"));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let k_eff = distinct_count_capped(points, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = kmeans_pp_init(points, k_eff, &mut rng);

    let (mut labels, j0) = assign(points, &centers);
    let mut history = vec![j0];
    for _ in 0..KMEANS_MAX_ITERS {
        update(points, &labels, &mut centers);
        let (next, j) = assign(points, &centers);
        let prev = *history.last().unwrap();
        history.push(j);
        let unchanged = next == labels;
        labels = next;
        let rel_small = prev <= T::zero() || (prev - j) <= T::lit(KMEANS_REL_TOL) * prev;
        if unchanged || rel_small {
            break;
        }
    }
    let mut counts = vec![0usize; centers.len()];
    for &l in &labels {
        counts[l] += 1;
    }
    Ok(ClusterModel {
        centers,
        counts,
        requested_k: k,
        objective_history: history,
        assignments: labels,
    })
}

/// Pixel pairs sampled from aligned target/palette images.
#[derive(Debug, Clone)]
pub struct CorrespondenceSet<T> {
    /// `(target, palette)` colour pairs.
    pub pairs: Vec<(ColorTriple<T>, ColorTriple<T>)>,
    /// Palette-frame `(x, y)` location of every pair.
    pub locations: Vec<(usize, usize)>,
    pub space: ColorSpace,
    pub seed: u64,
    pub shift_px: usize,
}

impl<T: Scalar> CorrespondenceSet<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn targets(&self) -> Vec<ColorTriple<T>> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn palettes(&self) -> Vec<ColorTriple<T>> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

/// Draw `n` pixel pairs from the region where the target, shifted right by
/// `shift_px`, overlaps the palette. Locations are drawn without replacement
/// when `n` fits in the overlap and with replacement otherwise.
pub fn sample_correspondences<T: Scalar>(
    target: &ImageBuffer<T>,
    palette_aligned: &ImageBuffer<T>,
    n: usize,
    seed: u64,
    shift_px: usize,
) -> Result<CorrespondenceSet<T>> {
    target.ensure_same_dims(palette_aligned)?;
    if target.space() != palette_aligned.space() {
        return Err(Error::SpaceMismatch {
            expected: target.space(),
            found: palette_aligned.space(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "number of correspondences must be >= 1".into(),
        ));
    }
    let (w, h) = target.dims();
    if shift_px >= w {
        return Err(Error::InvalidArgument(format!(
            "shift {shift_px} must be smaller than the image width {w}"
        )));
    }
    let ow = w - shift_px;
    let area = ow * h;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<usize> = if n <= area {
        index::sample(&mut rng, area, n).into_vec()
    } else {
        let dist = Uniform::new(0, area);
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    };
    let mut pairs = Vec::with_capacity(n);
    let mut locations = Vec::with_capacity(n);
    for i in flat {
        let x = shift_px + i % ow;
        let y = i / ow;
        pairs.push((target.get(x - shift_px, y), palette_aligned.get(x, y)));
        locations.push((x, y));
    }
    Ok(CorrespondenceSet {
        pairs,
        locations,
        space: target.space(),
        seed,
        shift_px,
    })
}
