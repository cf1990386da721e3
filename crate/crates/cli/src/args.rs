use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use isentropy::{ModelKind, NoiseKind, ReportFormat, SweepModel};

#[derive(Parser, Debug)]
#[command(
    name = "isentropy",
    version,
    about = "Level-set entropy of ensemble scalar fields"
)]
pub struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "ISENTROPY_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print grid shape, member count and value range of an ensemble.
    Info {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Extract one z plane of a 3D ensemble.
    Slice {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// Plane to keep, as `z=<index>`.
        #[arg(long, value_name = "z=<i>", value_parser = parse_slice)]
        slice: usize,
        /// Output manifest; member files are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep every n-th vertex along each axis.
    Subsample {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// Keep vertices 0, n, 2n, … on every axis.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
        /// Output manifest; member files are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a synthetic ensemble by adding seeded noise to one member.
    Noisify {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// Which member of the input serves as the base.
        #[arg(long, default_value_t = 0)]
        member: usize,
        /// gaussian or uniform.
        #[arg(long, value_parser = parse_noise)]
        noise: NoiseKind,
        #[command(flatten)]
        magnitude: Magnitude,
        /// Members to generate.
        #[arg(long, default_value_t = isentropy::DEFAULT_NOISE_MEMBERS)]
        members: usize,
        /// Seed; member m draws from stream m of this seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output manifest; member files are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Entropy field for one model and isovalue.
    Entropy {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// full, uniform, gaussian, histogram:<B> or quantile:<B>.
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        /// Level-set value.
        #[arg(long, allow_negative_numbers = true)]
        isovalue: f64,
        /// Raw float32 cell data; a JSON sidecar is written to `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare models against the full-distribution baseline.
    Compare {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated models; the full distribution is always included as the baseline.
        #[arg(long, value_delimiter = ',', value_parser = parse_model, allow_hyphen_values = true, required = true)]
        models: Vec<ModelKind>,
        /// Comma-separated isovalues.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        isovalues: Vec<f64>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Total entropy of a histogram or quantile model over a range of bin counts.
    Binsweep {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// histogram or quantile.
        #[arg(long, value_parser = parse_sweep_model)]
        model: SweepModel,
        /// Level-set value.
        #[arg(long, allow_negative_numbers = true)]
        isovalue: f64,
        /// Strictly increasing bin counts [default: 1,2,3,5,10,20,50,100,200,500,1000].
        #[arg(long, value_delimiter = ',')]
        bins: Vec<usize>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Inject Gaussian and uniform noise into one member and compare models on each.
    Noisetest {
        /// Ensemble manifest (JSON).
        #[arg(long)]
        manifest: PathBuf,
        /// Which member of the input serves as the base.
        #[arg(long, default_value_t = 0)]
        member: usize,
        /// Comma-separated isovalues.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        isovalues: Vec<f64>,
        /// Comma-separated models compared on each noisy ensemble.
        #[arg(
            long,
            value_delimiter = ',',
            value_parser = parse_model,
            default_value = "uniform,gaussian,histogram:5,quantile:5"
        )]
        models: Vec<ModelKind>,
        #[command(flatten)]
        magnitude: Magnitude,
        /// Half-width for the uniform-noise run; defaults to the Gaussian magnitude.
        #[arg(long)]
        magnitude_uniform: Option<f64>,
        /// Members per noisy ensemble.
        #[arg(long, default_value_t = isentropy::DEFAULT_NOISE_MEMBERS)]
        members: usize,
        /// Seed shared by both noisy ensembles.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Grayscale PGM of a 2D entropy field (or one cell plane of a 3D one).
    Render {
        #[command(flatten)]
        source: RenderSource,
        /// Model to fit when rendering from --manifest.
        #[arg(long, value_parser = parse_model)]
        model: Option<ModelKind>,
        /// Isovalue when rendering from --manifest.
        #[arg(long, allow_negative_numbers = true)]
        isovalue: Option<f64>,
        /// Cell plane as `z=<index>`; required for 3D fields.
        #[arg(long, value_name = "z=<i>", value_parser = parse_slice)]
        slice: Option<usize>,
        /// Entropy mapped to white [default: 4 in 2D, 8 in 3D].
        #[arg(long)]
        max_bits: Option<f64>,
        /// Output PGM file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct RenderSource {
    /// Ensemble to fit (needs --model and --isovalue).
    #[arg(long, requires_all = ["model", "isovalue"])]
    pub manifest: Option<PathBuf>,
    /// Sidecar JSON of a previously written entropy field.
    #[arg(long)]
    pub entropy: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct Magnitude {
    /// Noise magnitude in data units (std dev or uniform half-width).
    #[arg(long)]
    pub magnitude: Option<f64>,
    /// Magnitude as a fraction of the base member's value range.
    #[arg(long)]
    pub magnitude_relative: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// csv or text.
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    pub format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the fit/entropy timing columns.
    #[arg(long)]
    pub timings: bool,
    /// Evaluate models serially so timings do not overlap (implies --timings).
    #[arg(long)]
    pub timing_strict: bool,
    /// Repeat timed phases and keep the fastest (implies --timings).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeat: u64,
}

pub fn parse_slice(s: &str) -> Result<usize, String> {
    let index = s
        .strip_prefix("z=")
        .ok_or_else(|| format!("expected z=<index>, got {s:?}"))?;
    index
        .parse()
        .map_err(|_| format!("bad slice index {index:?}"))
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: isentropy::Error| e.to_string())
}

fn parse_sweep_model(s: &str) -> Result<SweepModel, String> {
    s.parse().map_err(|e: isentropy::Error| e.to_string())
}

fn parse_noise(s: &str) -> Result<NoiseKind, String> {
    s.parse().map_err(|e: isentropy::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: isentropy::Error| e.to_string())
}
