use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use l2recolor::image::{load_image, save_image};
use l2recolor::recolor::{apply_dissolve_rgb, apply_rgb};
use l2recolor::warp::{identity_warp, load_warp, save_warp};
use l2recolor::{Color, ColorSpace, Grid, Image, Rbf, Warp};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_l2recolor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn picture(w: usize, h: usize, tint: f64) -> Image {
    Image::from_fn(w, h, ColorSpace::Rgb, |x, y| {
        let u = x as f64 / w as f64;
        let v = y as f64 / h as f64;
        let block = if (x / 8 + y / 8) % 3 == 0 { 0.25 } else { 0.0 };
        Color::new(
            0.1 + 0.7 * u,
            0.2 + 0.5 * v + block,
            (0.6 - 0.4 * u * v + tint).clamp(0.0, 1.0),
        )
    })
}

fn write_image(dir: &Path, name: &str, img: &Image) -> PathBuf {
    let p = dir.join(name);
    save_image(img, &p).unwrap();
    p
}

fn shifted_warp(dx: f64) -> Warp {
    let mut w = identity_warp(Grid::default(), Rbf::Tps, ColorSpace::Rgb);
    w.offset = [dx, 0.0, -dx];
    w.weights[62] = [0.05, -0.03, 0.02];
    w
}

fn pixels(p: &Path) -> Vec<Color> {
    load_image::<f64>(p).unwrap().into_pixels()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["estimate"]).status.code(), Some(1));
    assert_eq!(
        run(&["estimate", "a.png", "b.png", "-o", "w", "--rbf", "spline"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn self_transfer_barely_changes_the_image() {
    let dir = TempDir::new().unwrap();
    let img = picture(90, 70, 0.0);
    let t = write_image(dir.path(), "t.png", &img);
    let w = dir.path().join("w.txt");
    let out = run(&["estimate", s(&t), s(&t), "-o", s(&w)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("mode=kmeans space=rgb rbf=tps"));
    let r = dir.path().join("r.png");
    assert!(run(&["apply", s(&w), s(&t), "-o", s(&r)]).status.success());
    let a = pixels(&t);
    let b = pixels(&r);
    let mad: f64 = a
        .iter()
        .zip(&b)
        .map(|(p, q)| (0..3).map(|c| (p.0[c] - q.0[c]).abs()).sum::<f64>())
        .sum::<f64>()
        / (3 * a.len()) as f64;
    assert!(mad < 2.0 / 255.0, "{mad}");
}

#[test]
fn correspondence_mode_needs_equal_dimensions() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(40, 30, 0.0));
    let p = write_image(dir.path(), "p.png", &picture(41, 30, 0.1));
    let out = run(&[
        "estimate",
        s(&t),
        s(&p),
        "-o",
        s(&dir.path().join("w")),
        "--mode",
        "corr",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
}

#[test]
fn correspondence_lambda_defaults_to_tuned_value() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(40, 30, 0.0));
    let p = write_image(dir.path(), "p.png", &picture(40, 30, 0.1));
    let w = dir.path().join("w.txt");
    let out = run(&[
        "estimate",
        s(&t),
        s(&p),
        "-o",
        s(&w),
        "--mode",
        "corr",
        "--n",
        "60",
        "--rbf",
        "tps",
        "--space",
        "rgb",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("lambda=0.003 "), "{}", stdout(&out));
    let out = run(&[
        "estimate",
        s(&t),
        s(&p),
        "-o",
        s(&w),
        "--mode",
        "corr",
        "--n",
        "60",
        "--lambda",
        "0.5",
    ]);
    assert!(stdout(&out).contains("lambda=0.5 "));
}

#[test]
fn numeric_failure_exit_code() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(40, 30, 0.0));
    let w = dir.path().join("w.txt");
    let out = run(&[
        "estimate",
        s(&t),
        s(&t),
        "-o",
        s(&w),
        "--hmax",
        "1e-120",
        "--hmin",
        "1e-121",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!w.exists());
}

#[test]
fn identity_warp_keeps_pixels() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(33, 21, 0.0));
    let w = dir.path().join("id.txt");
    save_warp(
        &identity_warp(Grid::default(), Rbf::Tps, ColorSpace::Rgb),
        &w,
    )
    .unwrap();
    let r = dir.path().join("r.png");
    assert!(run(&["apply", s(&w), s(&t), "-o", s(&r)]).status.success());
    let a = load_image::<f64>(&t).unwrap().to_rgb8().unwrap();
    let b = load_image::<f64>(&r).unwrap().to_rgb8().unwrap();
    assert_eq!(a.as_raw(), b.as_raw());
}

#[test]
fn frame_directory_keeps_names() {
    let dir = TempDir::new().unwrap();
    let frames = dir.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    for (i, name) in ["f001.png", "f002.png", "f003.png"].iter().enumerate() {
        write_image(&frames, name, &picture(20, 16, 0.05 * i as f64));
    }
    std::fs::write(frames.join("notes.txt"), "not a frame").unwrap();
    let w = dir.path().join("w.txt");
    save_warp(&shifted_warp(0.05), &w).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["apply", s(&w), s(&frames), "-o", s(&out_dir)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut names: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["f001.png", "f002.png", "f003.png"]);
}

#[test]
fn bad_warp_files_and_space_checks() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(20, 16, 0.0));
    let w = dir.path().join("w.txt");
    save_warp(&shifted_warp(0.05), &w).unwrap();
    let text = std::fs::read_to_string(&w).unwrap();
    let broken = dir.path().join("broken.txt");
    std::fs::write(&broken, text.replacen("theta", "thta", 1)).unwrap();
    let r = dir.path().join("r.png");
    let out = run(&["apply", s(&broken), s(&t), "-o", s(&r)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let truncated = dir.path().join("truncated.txt");
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    assert_eq!(
        run(&["apply", s(&truncated), s(&t), "-o", s(&r)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["apply", s(&w), s(&t), "-o", s(&r), "--space", "lab"])
            .status
            .code(),
        Some(2)
    );
    assert!(run(&["apply", s(&w), s(&t), "-o", s(&r), "--space", "rgb"])
        .status
        .success());
}

#[test]
fn lab_warps_apply_to_rgb_images() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(24, 18, 0.0));
    let w = dir.path().join("lab.txt");
    save_warp(
        &identity_warp(Grid::default(), Rbf::Tps, ColorSpace::Lab),
        &w,
    )
    .unwrap();
    let r = dir.path().join("r.png");
    assert!(run(&["apply", s(&w), s(&t), "-o", s(&r), "--space", "lab"])
        .status
        .success());
    for (a, b) in pixels(&t).iter().zip(pixels(&r).iter()) {
        assert!(a.max_abs_diff(*b) <= 1.0 / 255.0 + 1e-12);
    }
}

#[test]
fn mixing_paths() {
    let dir = TempDir::new().unwrap();
    let img = picture(30, 20, 0.0);
    let t = write_image(dir.path(), "t.png", &img);
    let (w1, w2) = (shifted_warp(0.08), shifted_warp(-0.05));
    let p1 = dir.path().join("w1.txt");
    let p2 = dir.path().join("w2.txt");
    save_warp(&w1, &p1).unwrap();
    save_warp(&w2, &p2).unwrap();
    let applied = dir.path().join("a.png");
    assert!(run(&["apply", s(&p1), s(&t), "-o", s(&applied)])
        .status
        .success());

    let g1 = dir.path().join("g1.png");
    assert!(
        run(&["mix", s(&p1), s(&p2), s(&t), "-o", s(&g1), "--gamma", "1.0"])
            .status
            .success()
    );
    assert_eq!(
        std::fs::read(&g1).unwrap(),
        std::fs::read(&applied).unwrap()
    );

    let white = dir.path().join("white.png");
    save_image(
        &Image::filled(30, 20, Color::splat(1.0), ColorSpace::Rgb),
        &white,
    )
    .unwrap();
    let m1 = dir.path().join("m1.png");
    assert!(run(&[
        "mix",
        s(&p1),
        s(&p2),
        s(&t),
        "-o",
        s(&m1),
        "--mask",
        s(&white)
    ])
    .status
    .success());
    assert_eq!(pixels(&m1), pixels(&applied));

    let small = dir.path().join("small.png");
    save_image(
        &Image::filled(10, 10, Color::splat(1.0), ColorSpace::Rgb),
        &small,
    )
    .unwrap();
    assert_eq!(
        run(&[
            "mix",
            s(&p1),
            s(&p2),
            s(&t),
            "-o",
            s(&m1),
            "--mask",
            s(&small)
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["mix", s(&p1), s(&p2), s(&t), "-o", s(&m1)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["mix", s(&p1), s(&p2), s(&t), "-o", s(&m1), "--gamma", "1.5"])
            .status
            .code(),
        Some(2)
    );

    let gauss = dir.path().join("g.txt");
    save_warp(
        &identity_warp(Grid::default(), Rbf::Gaussian(1.5), ColorSpace::Rgb),
        &gauss,
    )
    .unwrap();
    let out = run(&[
        "mix",
        s(&p1),
        s(&gauss),
        s(&t),
        "-o",
        s(&m1),
        "--gamma",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("incompatible"));
}

#[test]
fn schedule_matches_dissolve() {
    let dir = TempDir::new().unwrap();
    let frames = dir.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    let imgs: Vec<Image> = (0..3).map(|i| picture(18, 12, 0.1 * i as f64)).collect();
    for (i, img) in imgs.iter().enumerate() {
        write_image(&frames, &format!("{i:03}.png"), img);
    }
    let (w1, w2) = (
        identity_warp(Grid::default(), Rbf::Tps, ColorSpace::Rgb),
        shifted_warp(0.1),
    );
    let p1 = dir.path().join("w1.txt");
    let p2 = dir.path().join("w2.txt");
    save_warp(&w1, &p1).unwrap();
    save_warp(&w2, &p2).unwrap();
    let sched = dir.path().join("s.txt");
    std::fs::write(&sched, "# fade\n1\n0.5\n0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "mix",
        s(&p1),
        s(&p2),
        s(&frames),
        "-o",
        s(&out_dir),
        "--schedule",
        s(&sched),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let loaded: Vec<Image> = (0..3)
        .map(|i| load_image(frames.join(format!("{i:03}.png"))).unwrap())
        .collect();
    let w1: Warp = load_warp(&p1).unwrap();
    let w2: Warp = load_warp(&p2).unwrap();
    let expect = apply_dissolve_rgb(&w1, &w2, &[1.0, 0.5, 0.0], &loaded).unwrap();
    for (i, e) in expect.iter().enumerate() {
        let got = load_image::<f64>(out_dir.join(format!("{i:03}.png"))).unwrap();
        assert_eq!(got.to_rgb8().unwrap(), e.to_rgb8().unwrap(), "frame {i}");
    }
    std::fs::write(&sched, "1 0.5").unwrap();
    assert_eq!(
        run(&[
            "mix",
            s(&p1),
            s(&p2),
            s(&frames),
            "-o",
            s(&out_dir),
            "--schedule",
            s(&sched)
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn metrics_output_and_csv() {
    let dir = TempDir::new().unwrap();
    let a = Image::filled(16, 16, Color::splat(100.0 / 255.0), ColorSpace::Rgb);
    let b = Image::filled(16, 16, Color::splat(101.0 / 255.0), ColorSpace::Rgb);
    let pa = write_image(dir.path(), "a.png", &a);
    let pb = write_image(dir.path(), "b.png", &b);
    let out = run(&["metrics", s(&pa), s(&pa)]);
    assert_eq!(stdout(&out).trim(), "psnr=100.0000 ssim=1.000000");
    let out = run(&["metrics", s(&pa), s(&pb)]);
    assert!(stdout(&out).starts_with("psnr=48.13"), "{}", stdout(&out));

    let csv = dir.path().join("m.csv");
    for expected_rows in 1..=3 {
        assert!(run(&["metrics", s(&pa), s(&pb), "--csv", s(&csv)])
            .status
            .success());
        let text = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(text.lines().count(), expected_rows);
    }
    let c = write_image(
        dir.path(),
        "c.png",
        &Image::filled(16, 17, Color::splat(0.5), ColorSpace::Rgb),
    );
    assert_eq!(run(&["metrics", s(&pa), s(&c)]).status.code(), Some(2));
}

#[test]
fn runs_are_reproducible_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let t = write_image(dir.path(), "t.png", &picture(80, 60, 0.0));
    let p = write_image(dir.path(), "p.png", &picture(80, 60, 0.15));
    let mut warps = Vec::new();
    let mut images = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let w = dir.path().join(format!("w{i}.txt"));
        let r = dir.path().join(format!("r{i}.png"));
        let out = run(&[
            "--threads",
            threads,
            "pipeline",
            s(&t),
            s(&p),
            "-o",
            s(&r),
            "--warp-out",
            s(&w),
            "--k",
            "20",
            "--seed",
            "7",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        warps.push(std::fs::read(&w).unwrap());
        images.push(std::fs::read(&r).unwrap());
    }
    assert_eq!(warps[0], warps[1]);
    assert_eq!(images[0], images[1]);

    let w = dir.path().join("w2.txt");
    assert!(run(&[
        "estimate",
        s(&t),
        s(&p),
        "-o",
        s(&w),
        "--k",
        "20",
        "--seed",
        "7"
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&w).unwrap(), warps[0]);
    let r = dir.path().join("r2.png");
    assert!(run(&["apply", s(&w), s(&t), "-o", s(&r)]).status.success());
    assert_eq!(std::fs::read(&r).unwrap(), images[0]);

    let warp: Warp = load_warp(&w).unwrap();
    let direct = apply_rgb(&warp, &load_image(&t).unwrap()).unwrap();
    assert_eq!(
        direct.to_rgb8().unwrap(),
        load_image::<f64>(&r).unwrap().to_rgb8().unwrap()
    );
}
