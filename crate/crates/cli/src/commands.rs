use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use l2recolor::clustering::{
    downsample_for_clustering, kmeans, sample_correspondences, CLUSTER_MAX_HEIGHT,
    CLUSTER_MAX_WIDTH,
};
use l2recolor::estimator::{estimate_theta, table_parameters, Estimate, EstimationMode};
use l2recolor::gmm::PairedGmms;
use l2recolor::image::{load_image, save_image};
use l2recolor::metrics::MetricReport;
use l2recolor::recolor::{apply_dissolve_rgb, apply_mixed_rgb, apply_rgb, load_mask};
use l2recolor::warp::{interpolate, load_warp, save_warp};
use l2recolor::{Config, Error, Grid, Image, Mask, Result, Warp};

use crate::{Command, EstimateParams};

const FRAME_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Estimate {
            target,
            palette,
            out,
            params,
        } => {
            let est = estimate(&target, &palette, &params)?;
            save_warp(&est.warp, &out)?;
            println!("warp={}", out.display());
            Ok(())
        }
        Command::Apply {
            warp,
            input,
            out,
            space,
        } => {
            let w: Warp = load_warp(&warp)?;
            if let Some(s) = space {
                if s != w.space() {
                    return Err(Error::SpaceMismatch {
                        expected: s,
                        found: w.space(),
                    });
                }
            }
            apply_all(&w, &input, &out)
        }
        Command::Mix {
            warp1,
            warp2,
            input,
            out,
            gamma,
            mask,
            schedule,
        } => {
            let w1: Warp = load_warp(&warp1)?;
            let w2: Warp = load_warp(&warp2)?;
            w1.check_family(&w2)?;
            if let Some(g) = gamma {
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::InvalidArgument(format!("gamma {g} outside [0, 1]")));
                }
                apply_all(&interpolate(&[w1, w2], &[g, 1.0 - g])?, &input, &out)
            } else if let Some(mask) = mask {
                let mask: Mask = load_mask(&mask)?;
                for (src, dst) in frame_pairs(&input, &out)? {
                    let img: Image = load_image(&src)?;
                    save_image(&apply_mixed_rgb(&w1, &w2, &mask, &img)?, &dst)?;
                }
                Ok(())
            } else {
                let schedule = schedule.expect("clap requires one weight source");
                let gammas = read_schedule(&schedule)?;
                let frames = frame_pairs(&input, &out)?;
                if gammas.len() != frames.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} weights in {} for {} frames",
                        gammas.len(),
                        schedule.display(),
                        frames.len()
                    )));
                }
                for ((src, dst), g) in frames.into_iter().zip(gammas) {
                    let img: Image = load_image(&src)?;
                    let out = apply_dissolve_rgb(&w1, &w2, &[g], &[img])?;
                    save_image(&out[0], &dst)?;
                }
                Ok(())
            }
        }
        Command::Metrics {
            result,
            reference,
            csv,
        } => {
            let a: Image = load_image(&result)?;
            let b: Image = load_image(&reference)?;
            let report = MetricReport::compute(&a, &b)?;
            println!("{}", report.to_line());
            if let Some(csv) = csv {
                let row = report.csv_row(
                    &result.display().to_string(),
                    &reference.display().to_string(),
                );
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&csv)
                    .map_err(|e| io_err(&csv, e))?;
                writeln!(f, "{row}").map_err(|e| io_err(&csv, e))?;
            }
            Ok(())
        }
        Command::Pipeline {
            target,
            palette,
            out,
            input,
            warp_out,
            params,
        } => {
            let est = estimate(&target, &palette, &params)?;
            if let Some(path) = warp_out {
                save_warp(&est.warp, &path)?;
                println!("warp={}", path.display());
            }
            apply_all(&est.warp, input.as_deref().unwrap_or(&target), &out)
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Load both images, build the mode's mixtures and run the annealed fit.
/// Prints a short summary and optionally the cost trace.
fn estimate(target: &Path, palette: &Path, p: &EstimateParams) -> Result<Estimate<f64>> {
    let t: Image = load_image(target)?;
    let q: Image = load_image(palette)?;
    if p.mode == EstimationMode::Correspondence {
        t.ensure_same_dims(&q)?;
    }
    let t = t.to_working(p.space)?;
    let q = q.to_working(p.space)?;

    let (_, table_eps) = table_parameters(p.rbf, p.space, p.mode);
    let mut cfg = Config::for_kernel(p.rbf, p.space, p.mode);
    if let Some(l) = p.lambda {
        cfg.lambda = l;
    }
    cfg.epsilon = p.epsilon.or(table_eps).unwrap_or(cfg.epsilon);
    cfg.hmax = p.hmax;
    cfg.hmin = p.hmin;
    cfg.validate()?;
    let rbf = p.rbf.with_epsilon(cfg.epsilon);

    let gmms = match p.mode {
        EstimationMode::NoCorrespondence => {
            let ct = kmeans(
                downsample_for_clustering(&t, CLUSTER_MAX_WIDTH, CLUSTER_MAX_HEIGHT)?.pixels(),
                p.k,
                p.seed,
            )?;
            let cq = kmeans(
                downsample_for_clustering(&q, CLUSTER_MAX_WIDTH, CLUSTER_MAX_HEIGHT)?.pixels(),
                p.k,
                p.seed,
            )?;
            for (name, c) in [("target", &ct), ("palette", &cq)] {
                if c.was_reduced() {
                    eprintln!(
                        "warning: {name} has only {} distinct colours, using K = {}",
                        c.k(),
                        c.k()
                    );
                }
            }
            PairedGmms::unpaired(ct.centers, cq.centers, cfg.hmax)?
        }
        EstimationMode::Correspondence => {
            let set = sample_correspondences(&t, &q, p.n, p.seed, p.shift)?;
            PairedGmms::paired(&set.pairs, cfg.hmax)?
        }
    };

    let est = estimate_theta(&gmms, &cfg, &Grid::default(), rbf, p.space)?;
    let eps = match p.rbf {
        l2recolor::warp::RbfFamily::Tps => "-".to_string(),
        _ => cfg.epsilon.to_string(),
    };
    println!(
        "mode={} space={} rbf={} lambda={} epsilon={} components={}/{}",
        p.mode,
        p.space,
        p.rbf.name(),
        cfg.lambda,
        eps,
        gmms.target.k(),
        gmms.palette.k()
    );
    for s in &est.stages {
        println!(
            "stage={} h={} iterations={} cost={:.9e} -> {:.9e} stop={}",
            s.stage,
            s.bandwidth,
            s.iterations,
            s.start_cost(),
            s.end_cost(),
            s.stop.as_str()
        );
    }
    if let Some(log) = &p.log {
        let mut f = fs::File::create(log).map_err(|e| io_err(log, e))?;
        est.write_log(&mut f).map_err(|e| io_err(log, e))?;
    }
    Ok(est)
}

fn is_frame(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// `(input, output)` paths. A directory input maps every image in it, in
/// name order, to the same file name under `out`.
fn frame_pairs(input: &Path, out: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    if !input.is_dir() {
        return Ok(vec![(input.to_path_buf(), out.to_path_buf())]);
    }
    let mut frames: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| io_err(input, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| io_err(input, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| is_frame(p))
        .collect();
    if frames.is_empty() {
        return Err(Error::EmptyInput(
            "no PNG or JPEG frames in the input directory",
        ));
    }
    frames.sort();
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    Ok(frames
        .into_iter()
        .map(|src| {
            let dst = out.join(src.file_name().expect("file entry"));
            (src, dst)
        })
        .collect())
}

fn apply_all(w: &Warp, input: &Path, out: &Path) -> Result<()> {
    for (src, dst) in frame_pairs(input, out)? {
        let img: Image = load_image(&src)?;
        save_image(&apply_rgb(w, &img)?, &dst)?;
    }
    Ok(())
}

/// Weights separated by whitespace or newlines; `#` starts a comment.
fn read_schedule(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            let g: f64 = tok.parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "{} line {}: bad weight '{tok}'",
                    path.display(),
                    i + 1
                ))
            })?;
            out.push(g);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("schedule file has no weights"));
    }
    Ok(out)
}
