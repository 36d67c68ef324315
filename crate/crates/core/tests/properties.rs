mod common;

use l2recolor::clustering::{kmeans, sample_correspondences};
use l2recolor::color::{lab_to_rgb, rgb_to_lab, rgb_to_working, working_to_rgb};
use l2recolor::gmm::{cross_term, gaussian_scalar_product, PairedGmms};
use l2recolor::recolor::apply;
use l2recolor::warp::{interpolate, parse_warp, write_warp, RbfFamily};
use l2recolor::{Color, ColorSpace, Image, Rbf, Warp};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn color() -> impl Strategy<Value = Color> {
    (unit(), unit(), unit()).prop_map(|(a, b, c)| Color::new(a, b, c))
}

fn kernel() -> impl Strategy<Value = Rbf> {
    (0usize..4, 0.5..20.0f64).prop_map(|(i, eps)| RbfFamily::ALL[i].with_epsilon(eps))
}

fn warp(amp: f64) -> impl Strategy<Value = Warp> {
    (kernel(), any::<u64>())
        .prop_map(move |(rbf, seed)| random_warp(seed, rbf, ColorSpace::Rgb, amp))
}

#[test]
fn lab_round_trip_on_fixed_sample() {
    let mut r = rng(2024);
    let worst = (0..1000)
        .map(|_| {
            let x = Color::new(r.gen(), r.gen(), r.gen());
            lab_to_rgb(rgb_to_lab(x)).max_abs_diff(x)
        })
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lab_round_trip(x in color()) {
        prop_assert!(lab_to_rgb(rgb_to_lab(x)).max_abs_diff(x) < 1e-3);
    }

    #[test]
    fn normalisation_idempotent(x in (-0.5..1.5f64, -0.5..1.5f64, -0.5..1.5f64), lab in any::<bool>()) {
        let x = Color::new(x.0, x.1, x.2);
        let once = x.clamp_unit();
        prop_assert_eq!(once.clamp_unit(), once);
        let space = if lab { ColorSpace::Lab } else { ColorSpace::Rgb };
        let back = working_to_rgb(rgb_to_working(once, space), space);
        let again = working_to_rgb(rgb_to_working(back, space), space);
        prop_assert!(back.max_abs_diff(again) < 1e-9);
    }

    #[test]
    fn warp_is_linear_in_theta(w1 in warp(0.2), seed in any::<u64>(), a in unit(), x in color()) {
        let mut w2 = w1.clone();
        let mut r = rng(seed);
        let theta: Vec<f64> = w1.theta().iter().map(|_| r.gen_range(-1.0..1.0)).collect();
        w2.set_theta(&theta).unwrap();
        let mixed = interpolate(&[w1.clone(), w2.clone()], &[a, 1.0 - a]).unwrap();
        let expect = w1.eval(x).scale(a).add(w2.eval(x).scale(1.0 - a));
        prop_assert!(mixed.eval(x).max_abs_diff(expect) < 1e-12);
    }

    #[test]
    fn theta_pack_round_trip(w in warp(0.3)) {
        let theta = w.theta();
        let mut other = l2recolor::warp::identity_warp(w.grid().clone(), w.rbf(), w.space());
        other.set_theta(&theta).unwrap();
        prop_assert_eq!(other.theta(), theta);
        prop_assert_eq!(&other, &w);
    }

    #[test]
    fn warp_text_round_trip(w in warp(0.3)) {
        let back: Warp = parse_warp(&write_warp(&w)).unwrap();
        prop_assert_eq!(back, w);
    }

    #[test]
    fn scalar_product_symmetric_and_decaying(a in color(), b in color(), h in 0.05..2.0f64) {
        let ab = gaussian_scalar_product(a, b, h).unwrap();
        prop_assert_eq!(ab, gaussian_scalar_product(b, a, h).unwrap());
        prop_assert!(ab <= gaussian_scalar_product(a, a, h).unwrap());
        let far = a.add(Color::new(20.0 * h, 0.0, 0.0));
        prop_assert!(gaussian_scalar_product(a, far, h).unwrap() < 1e-40);
    }

    #[test]
    fn translation_lowers_single_cross_term(m in color(), d in (-0.3..0.3f64, -0.3..0.3f64, -0.3..0.3f64), h in 0.05..1.0f64) {
        prop_assume!(d.0 * d.0 + d.1 * d.1 + d.2 * d.2 > 1e-8);
        let g = PairedGmms::unpaired(vec![m], vec![m], h).unwrap();
        let id = l2recolor::warp::identity_warp(l2recolor::Grid::default(), Rbf::Tps, ColorSpace::Rgb);
        let mut moved = id.clone();
        moved.offset = [d.0, d.1, d.2];
        prop_assert!(cross_term(&g, &moved).unwrap() < cross_term(&g, &id).unwrap());
    }

    #[test]
    fn recolouring_output_is_clamped(w in warp(0.5), seed in any::<u64>()) {
        let mut r = rng(seed);
        let img = Image::from_fn(9, 7, ColorSpace::Rgb, |_, _| Color::new(r.gen(), r.gen(), r.gen()));
        let out = apply(&w, &img).unwrap();
        prop_assert_eq!(out.clamp_unit(), out);
    }
}

#[test]
fn scalar_products_decay_as_inverse_cube() {
    let (a, b) = (Color::new(0.2, 0.4, 0.6), Color::new(0.5, 0.1, 0.9));
    let ratio = gaussian_scalar_product(a, b, 2000.0).unwrap()
        / gaussian_scalar_product(a, b, 1000.0).unwrap();
    assert!((ratio - 0.125).abs() < 1e-6, "{ratio}");
}

#[test]
fn kmeans_objective_and_assignments() {
    for seed in 0..5 {
        let img = scene(60, 40, seed);
        let model = kmeans(img.pixels(), 12, seed).unwrap();
        for w in model.objective_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
        for (p, &l) in img.pixels().iter().zip(&model.assignments) {
            let mine = p.dist_sq(model.centers[l]);
            for c in &model.centers {
                assert!(mine <= p.dist_sq(*c) + 1e-12);
            }
        }
    }
}

#[test]
fn aligned_identical_images_give_exact_pairs() {
    let img = scene(80, 60, 3);
    let set = sample_correspondences(&img, &img, 500, 9, 0).unwrap();
    assert_eq!(set.len(), 500);
    assert!(set.pairs.iter().all(|(t, p)| t == p));
}
