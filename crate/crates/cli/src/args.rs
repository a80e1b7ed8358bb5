use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsmat::eval::DEFAULT_RESOLUTION;
use lsmat::parallel::THREADS_ENV;
use lsmat::shrink::DEFAULT_R_INIT_DIAGS;
use lsmat::solver::{InitStrategy, InscriptionVariant};
use lsmat::NoiseMode;

#[derive(Debug, Parser)]
#[command(name = "lsmat", version, about = "Medial axis transform of oriented point clouds")]
pub struct Cli {
    /// Worker threads for the per-sphere solvers (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a built-in shape, optionally with noise and outliers.
    Generate(GenerateArgs),
    /// Compute medial spheres for every (or selected) sample.
    Solve(SolveArgs),
    /// Score sphere centers against a ground-truth polygon, or run a noise sweep.
    Eval(EvalArgs),
    /// Draw a cloud and its spheres (SVG in 2D, PLY in 3D).
    Render(RenderArgs),
    /// Re-run a command from its manifest and check the outputs match.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseModeArg {
    Isotropic,
    AlongNormal,
}

impl From<NoiseModeArg> for NoiseMode {
    fn from(m: NoiseModeArg) -> Self {
        match m {
            NoiseModeArg::Isotropic => NoiseMode::Isotropic,
            NoiseModeArg::AlongNormal => NoiseMode::AlongNormal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Lsmat,
    Shrink,
    LsmatIrls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InscriptionArg {
    Blended,
    PointOnly,
    PlaneOnly,
}

impl From<InscriptionArg> for InscriptionVariant {
    fn from(v: InscriptionArg) -> Self {
        match v {
            InscriptionArg::Blended => InscriptionVariant::Blended,
            InscriptionArg::PointOnly => InscriptionVariant::PointOnly,
            InscriptionArg::PlaneOnly => InscriptionVariant::PlaneOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaximalityArg {
    ConstantPressure,
    InverseRadius,
    TargetRadius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    AlongNormal,
}

impl From<InitArg> for InitStrategy {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Random => InitStrategy::Random,
            InitArg::AlongNormal => InitStrategy::AlongNormal,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// circle, ellipse, rectangle, star, annulus, notched-box, sphere, ellipsoid or torus.
    pub shape: String,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Gaussian noise level, percent of the diagonal.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = NoiseModeArg::Isotropic)]
    pub noise_mode: NoiseModeArg,
    /// Fraction of samples replaced by uniform outliers.
    #[arg(long, default_value_t = 0.0)]
    pub outliers: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shape parameter override, e.g. `--param radius=2` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Oriented-point output file.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Ground-truth polygon output (2D only; default `<out>.poly.txt` next to `out`).
    #[arg(long)]
    pub gt_out: Option<PathBuf>,
    /// Manifest path (default `<out>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Solver flags. Unset values come from the defaults for `--sigma`.
#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Oriented-point input file (2D or 3D).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Lsmat)]
    pub method: MethodArg,
    /// Expected noise level in percent; selects the default parameters.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long)]
    pub omega_ratio: Option<f64>,
    #[arg(long)]
    pub omega2: Option<f64>,
    #[arg(long)]
    pub h_blend: Option<f64>,
    #[arg(long)]
    pub h_support: Option<f64>,
    #[arg(long)]
    pub d_pin: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub pin_weight: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step_damping: Option<f64>,
    #[arg(long)]
    pub radius_floor: Option<f64>,
    #[arg(long, value_enum)]
    pub inscription: Option<InscriptionArg>,
    #[arg(long, value_enum)]
    pub maximality: Option<MaximalityArg>,
    /// Target radius for `--maximality target-radius`, percent of the diagonal.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub irls_delta: Option<f64>,
    #[arg(long)]
    pub irls_epsilon_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial shrink radius in multiples of the diagonal.
    #[arg(long, default_value_t = DEFAULT_R_INIT_DIAGS)]
    pub r_init: f64,
    /// Comma-separated pin indices (default: every sample).
    #[arg(long, value_delimiter = ',')]
    pub pins: Option<Vec<usize>>,
    /// Sphere CSV output.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Sphere CSV from `solve`.
    #[arg(required_unless_present = "sweep", requires = "gt")]
    pub spheres: Option<PathBuf>,
    /// Ground-truth polygon file.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Print JSON instead of a one-line summary.
    #[arg(long)]
    pub json: bool,
    /// Write the JSON report (or sweep CSV) here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Sweep mode: generate SHAPE at each noise level, solve, and tabulate errors.
    #[arg(long, value_name = "SHAPE", requires = "sigma_list", conflicts_with_all = ["spheres", "gt"])]
    pub sweep: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub sigma_list: Option<Vec<f64>>,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Number of noise seeds averaged per level (seeds 0..k).
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Lsmat, MethodArg::Shrink])]
    pub methods: Vec<MethodArg>,
    #[arg(long, value_enum, default_value_t = InitArg::AlongNormal)]
    pub init: InitArg,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Oriented-point file.
    pub cloud: PathBuf,
    /// Sphere CSV; omitted draws the points only.
    #[arg(long)]
    pub spheres: Option<PathBuf>,
    /// `.svg` for 2D clouds, `.ply` for 3D.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Longer side of the 2D figure, in pixels.
    #[arg(long, default_value_t = 800.0)]
    pub size: f64,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs into this directory instead of their recorded paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
