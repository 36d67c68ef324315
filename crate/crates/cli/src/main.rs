//! `l2recolor`: estimate, store, blend and apply colour-transfer warps.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l2recolor::estimator::EstimationMode;
use l2recolor::warp::RbfFamily;
use l2recolor::ColorSpace;

/// Exit status for invalid command lines.
const EXIT_USAGE: u8 = 1;
/// Exit status for unreadable, malformed or inconsistent inputs.
const EXIT_DATA: u8 = 2;
/// Exit status when the estimation produced a non-finite cost.
const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "l2recolor",
    version,
    about = "Colour transfer by robust L2 registration of Gaussian mixtures"
)]
struct Cli {
    /// Worker threads (default: available parallelism). Output never depends on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a warp that moves the target's colours towards the palette's.
    Estimate {
        target: PathBuf,
        palette: PathBuf,
        /// Warp file to write.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        params: EstimateParams,
    },
    /// Recolour an image, or every frame in a directory, with a stored warp.
    Apply {
        warp: PathBuf,
        /// Image file or directory of frames.
        input: PathBuf,
        /// Output image, or output directory when the input is a directory.
        #[arg(short, long)]
        out: PathBuf,
        /// Expected colour space of the warp; a different one is an error.
        #[arg(long, value_parser = parse_space)]
        space: Option<ColorSpace>,
    },
    /// Blend two warps with a constant weight, a per-pixel mask or a per-frame schedule.
    #[command(group(clap::ArgGroup::new("weight").required(true)))]
    Mix {
        warp1: PathBuf,
        warp2: PathBuf,
        /// Image file or directory of frames.
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Constant weight of the first warp, in [0, 1].
        #[arg(long, group = "weight")]
        gamma: Option<f64>,
        /// Greyscale image giving the first warp's weight per pixel.
        #[arg(long, group = "weight")]
        mask: Option<PathBuf>,
        /// Text file with one weight per frame, in frame order.
        #[arg(long, group = "weight")]
        schedule: Option<PathBuf>,
    },
    /// Print PSNR and SSIM of a result against a reference image.
    Metrics {
        result: PathBuf,
        reference: PathBuf,
        /// Append one `result,reference,psnr,ssim` row to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Estimate a warp and apply it in one go.
    Pipeline {
        target: PathBuf,
        palette: PathBuf,
        /// Recoloured output image (or directory when --input is a directory).
        #[arg(short, long)]
        out: PathBuf,
        /// Image or frame directory to recolour instead of the target.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also save the estimated warp here.
        #[arg(long)]
        warp_out: Option<PathBuf>,
        #[command(flatten)]
        params: EstimateParams,
    },
}

#[derive(Debug, Clone, Args)]
struct EstimateParams {
    #[arg(long, default_value = "rgb", value_parser = parse_space)]
    space: ColorSpace,
    #[arg(long, default_value = "tps", value_parser = parse_rbf)]
    rbf: RbfFamily,
    /// `kmeans` (clusters of each image) or `corr` (pixel pairs of aligned images).
    #[arg(long, default_value = "kmeans", value_parser = parse_mode)]
    mode: EstimationMode,
    /// Clusters per image in kmeans mode.
    #[arg(long, default_value_t = l2recolor::clustering::DEFAULT_CLUSTERS)]
    k: usize,
    /// Pixel pairs in corr mode.
    #[arg(long, default_value_t = l2recolor::clustering::DEFAULT_CORRESPONDENCES)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Horizontal misalignment (pixels) applied to the target in corr mode.
    #[arg(long, default_value_t = 0)]
    shift: usize,
    /// Roughness weight (default: tuned value for kernel, space and mode).
    #[arg(long)]
    lambda: Option<f64>,
    /// Kernel scale (default: tuned value; ignored by tps).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = l2recolor::estimator::DEFAULT_HMAX)]
    hmax: f64,
    #[arg(long, default_value_t = l2recolor::estimator::DEFAULT_HMIN)]
    hmin: f64,
    /// Write the per-iteration cost trace here.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn parse_space(s: &str) -> Result<ColorSpace, String> {
    ColorSpace::parse(s).ok_or_else(|| format!("unknown colour space '{s}' (rgb, lab)"))
}

fn parse_rbf(s: &str) -> Result<RbfFamily, String> {
    RbfFamily::parse(s).ok_or_else(|| format!("unknown kernel '{s}' (tps, gaussian, imq, iq)"))
}

fn parse_mode(s: &str) -> Result<EstimationMode, String> {
    EstimationMode::parse(s).ok_or_else(|| format!("unknown mode '{s}' (kmeans, corr)"))
}

fn exit_code(err: &l2recolor::Error) -> u8 {
    match err {
        l2recolor::Error::NonFiniteCost { .. } => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(EXIT_USAGE);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };
    match pool.install(|| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
