use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lsmat::cloud::{parse_cloud, sniff_fields};
use lsmat::eval::{metrics_for_centers, GroundTruthAxis, Polygon};
use lsmat::shapes::{Shape2, Shape3, SHAPE2_NAMES, SHAPE3_NAMES};
use lsmat::shrink::{shrink_all, DEFAULT_R_INIT_DIAGS};
use lsmat::solver::{solve_all, solve_all_irls, InitStrategy, Irls, MaximalityVariant, Pins};
use lsmat::{MedialResult, Method, NoiseSpec, OrientedPointCloud, SolverConfig, Vector};
use serde::{Deserialize, Serialize};

use crate::args::{EvalArgs, GenerateArgs, MaximalityArg, MethodArg, RenderArgs, SolveArgs};
use crate::error::{read_text, write_text, CliError};
use crate::render;
use crate::spheres::{self, SphereTable};

pub const EVAL_SCHEMA: &str = "lsmat-eval/1";
pub const SWEEP_SCHEMA: &str = "lsmat-sweep/1";

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadInput(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeSpec {
    #[serde(rename = "2d")]
    Planar(Shape2),
    #[serde(rename = "3d")]
    Solid(Shape3),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Lsmat,
    Shrink,
    LsmatIrls,
}

impl From<MethodArg> for MethodName {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lsmat => MethodName::Lsmat,
            MethodArg::Shrink => MethodName::Shrink,
            MethodArg::LsmatIrls => MethodName::LsmatIrls,
        }
    }
}

impl MethodName {
    fn label(self) -> &'static str {
        match self {
            MethodName::Lsmat => "lsmat",
            MethodName::Shrink => "shrink",
            MethodName::LsmatIrls => "lsmat-irls",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    pub shape: ShapeSpec,
    pub n: usize,
    pub noise: NoiseSpec,
    pub out: PathBuf,
    pub gt_out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub input: PathBuf,
    pub method: Method,
    pub pins: Option<Vec<usize>>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRequest {
    pub spheres: PathBuf,
    pub gt: PathBuf,
    pub resolution: usize,
    pub json: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub shape: Shape2,
    pub n: usize,
    pub sigmas: Vec<f64>,
    pub seeds: u64,
    pub methods: Vec<MethodName>,
    pub init: InitStrategy,
    pub resolution: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderRequest {
    pub cloud: PathBuf,
    pub spheres: Option<PathBuf>,
    pub out: PathBuf,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Request {
    Generate(GenerateRequest),
    Solve(SolveRequest),
    Eval(EvalRequest),
    Sweep(SweepRequest),
    Render(RenderRequest),
}

impl Request {
    pub fn name(&self) -> &'static str {
        match self {
            Request::Generate(_) => "generate",
            Request::Solve(_) => "solve",
            Request::Eval(_) => "eval",
            Request::Sweep(_) => "sweep",
            Request::Render(_) => "render",
        }
    }

    pub fn inputs(&self) -> Vec<&Path> {
        match self {
            Request::Generate(_) | Request::Sweep(_) => vec![],
            Request::Solve(r) => vec![&r.input],
            Request::Eval(r) => vec![&r.spheres, &r.gt],
            Request::Render(r) => std::iter::once(&r.cloud).chain(&r.spheres).map(PathBuf::as_path).collect(),
        }
    }

    pub fn outputs_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Request::Generate(r) => std::iter::once(&mut r.out).chain(r.gt_out.as_mut()).collect(),
            Request::Solve(r) => vec![&mut r.out],
            Request::Eval(EvalRequest { out, .. }) | Request::Sweep(SweepRequest { out, .. }) => {
                out.iter_mut().collect()
            }
            Request::Render(r) => vec![&mut r.out],
        }
    }

    pub fn outputs(&self) -> Vec<PathBuf> {
        self.clone().outputs_mut().into_iter().map(|p| p.clone()).collect()
    }
}

/// What a command did, for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub timings_ms: BTreeMap<String, f64>,
    pub iterations: BTreeMap<String, u64>,
    /// Per-atom solver errors, reported after outputs are written.
    pub failure: Option<String>,
}

impl Outcome {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings_ms
            .insert(phase.to_owned(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

// ---------------------------------------------------------------- requests

pub fn resolve_shape(name: &str, params: &[String]) -> Result<ShapeSpec, CliError> {
    let spec = if let Some(s) = Shape2::named(name) {
        ShapeSpec::Planar(s)
    } else if let Some(s) = Shape3::named(name) {
        ShapeSpec::Solid(s)
    } else {
        let known: Vec<&str> = SHAPE2_NAMES.iter().chain(&SHAPE3_NAMES).copied().collect();
        return Err(bad(format!("unknown shape `{name}` (expected one of {})", known.join(", "))));
    };
    let spec = if params.is_empty() {
        spec
    } else {
        let mut value = serde_json::to_value(spec).unwrap();
        let fields = value
            .as_object_mut()
            .and_then(|o| o.values_mut().next())
            .and_then(|v| v.as_object_mut())
            .expect("shape serializes as a tagged object");
        for p in params {
            let (key, raw) = p
                .split_once('=')
                .ok_or_else(|| bad(format!("shape parameter `{p}` is not KEY=VALUE")))?;
            let key = key.trim().replace('-', "_");
            let slot = fields
                .get_mut(&key)
                .filter(|_| key != "shape")
                .ok_or_else(|| bad(format!("shape `{name}` has no parameter `{key}`")))?;
            let raw = raw.trim();
            *slot = if slot.is_u64() {
                raw.parse::<u64>().map(Into::into).map_err(|e| bad(format!("{key}: {e}")))?
            } else {
                let v: f64 = raw.parse().map_err(|e| bad(format!("{key}: {e}")))?;
                serde_json::Number::from_f64(v)
                    .ok_or_else(|| bad(format!("{key} must be finite")))?
                    .into()
            };
        }
        serde_json::from_value(value).map_err(|e| bad(format!("shape parameters: {e}")))?
    };
    match &spec {
        ShapeSpec::Planar(s) => s.validate(),
        ShapeSpec::Solid(s) => s.validate(),
    }
    .map_err(|e| bad(format!("shape `{name}`: {e}")))?;
    Ok(spec)
}

pub fn generate_request(a: &GenerateArgs) -> Result<GenerateRequest, CliError> {
    let shape = resolve_shape(&a.shape, &a.params)?;
    let noise = NoiseSpec {
        sigma_p: a.sigma,
        mode: a.noise_mode.into(),
        outlier_fraction: a.outliers,
        seed: a.seed,
    };
    noise.validate().map_err(bad)?;
    let gt_out = match shape {
        ShapeSpec::Planar(_) => Some(a.gt_out.clone().unwrap_or_else(|| {
            let stem = a.out.file_stem().unwrap_or_default().to_string_lossy();
            a.out.with_file_name(format!("{stem}.poly.txt"))
        })),
        ShapeSpec::Solid(_) if a.gt_out.is_some() => return Err(bad("--gt-out applies to 2D shapes only")),
        ShapeSpec::Solid(_) => None,
    };
    Ok(GenerateRequest {
        shape,
        n: a.n,
        noise,
        out: a.out.clone(),
        gt_out,
    })
}

pub fn solver_method(a: &SolveArgs) -> Result<Method, CliError> {
    if !(a.sigma >= 0.0) || !a.sigma.is_finite() {
        return Err(bad(format!("--sigma must be >= 0, got {}", a.sigma)));
    }
    if a.method == MethodArg::Shrink {
        if !(a.r_init > 0.0) || !a.r_init.is_finite() {
            return Err(bad(format!("--r-init must be > 0, got {}", a.r_init)));
        }
        return Ok(Method::Shrink { r_init: a.r_init });
    }
    let mut c = SolverConfig::default_params(a.sigma);
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = a.$field { c.$field = v; })* };
    }
    set!(omega_ratio, omega2, h_blend, h_support, d_pin, epsilon, pin_weight, max_iters, step_damping, radius_floor, seed);
    if let Some(v) = a.inscription {
        c.inscription = v.into();
    }
    if let Some(v) = a.init {
        c.init = v.into();
    }
    c.maximality = match (a.maximality, a.r_max) {
        (Some(MaximalityArg::TargetRadius), Some(r_max)) => MaximalityVariant::TargetRadius { r_max },
        (Some(MaximalityArg::TargetRadius), None) => {
            return Err(bad("--maximality target-radius needs --r-max"))
        }
        (_, Some(_)) => return Err(bad("--r-max applies to --maximality target-radius only")),
        (Some(MaximalityArg::InverseRadius), None) => MaximalityVariant::InverseRadius,
        (Some(MaximalityArg::ConstantPressure) | None, None) => MaximalityVariant::ConstantPressure,
    };
    let irls_flags = a.irls_delta.is_some() || a.irls_epsilon_scale.is_some();
    if a.method == MethodArg::LsmatIrls {
        let Irls::L1 {
            mut delta,
            mut epsilon_scale,
        } = Irls::l1_default()
        else {
            unreachable!()
        };
        delta = a.irls_delta.unwrap_or(delta);
        epsilon_scale = a.irls_epsilon_scale.unwrap_or(epsilon_scale);
        c.irls = Irls::L1 { delta, epsilon_scale };
    } else if irls_flags {
        return Err(bad("--irls-* flags need --method lsmat-irls"));
    }
    c.validate().map_err(bad)?;
    Ok(match a.method {
        MethodArg::LsmatIrls => Method::LsmatIrls { config: c },
        _ => Method::Lsmat { config: c },
    })
}

pub fn solve_request(a: &SolveArgs) -> Result<SolveRequest, CliError> {
    Ok(SolveRequest {
        input: a.input.clone(),
        method: solver_method(a)?,
        pins: a.pins.clone(),
        out: a.out.clone(),
    })
}

pub fn eval_request(a: &EvalArgs) -> Result<Request, CliError> {
    if a.resolution < 16 {
        return Err(bad(format!("--resolution must be >= 16, got {}", a.resolution)));
    }
    if let Some(name) = &a.sweep {
        let shape = match resolve_shape(name, &[])? {
            ShapeSpec::Planar(s) => s,
            ShapeSpec::Solid(_) => return Err(bad("sweep needs a 2D shape")),
        };
        let sigmas = a.sigma_list.clone().unwrap_or_default();
        if sigmas.is_empty() || sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(bad("--sigma-list needs non-negative noise levels"));
        }
        if a.seeds == 0 || a.methods.is_empty() {
            return Err(bad("sweep needs at least one seed and one method"));
        }
        return Ok(Request::Sweep(SweepRequest {
            shape,
            n: a.n,
            sigmas,
            seeds: a.seeds,
            methods: a.methods.iter().map(|&m| m.into()).collect(),
            init: a.init.into(),
            resolution: a.resolution,
            out: a.out.clone(),
        }));
    }
    match (&a.spheres, &a.gt) {
        (Some(spheres), Some(gt)) => Ok(Request::Eval(EvalRequest {
            spheres: spheres.clone(),
            gt: gt.clone(),
            resolution: a.resolution,
            json: a.json,
            out: a.out.clone(),
        })),
        _ => Err(bad("eval needs a sphere CSV and --gt, or --sweep")),
    }
}

pub fn render_request(a: &RenderArgs) -> Result<RenderRequest, CliError> {
    if !(a.size > 0.0) || !a.size.is_finite() {
        return Err(bad(format!("--size must be > 0, got {}", a.size)));
    }
    Ok(RenderRequest {
        cloud: a.cloud.clone(),
        spheres: a.spheres.clone(),
        out: a.out.clone(),
        size: a.size,
    })
}

// --------------------------------------------------------------- execution

enum AnyCloud {
    Planar(OrientedPointCloud<2>),
    Solid(OrientedPointCloud<3>),
}

fn load_any(path: &Path) -> Result<AnyCloud, CliError> {
    let text = read_text(path)?;
    Ok(match sniff_fields(&text) {
        Some(4) => AnyCloud::Planar(parse_cloud(&text)?),
        Some(6) => AnyCloud::Solid(parse_cloud(&text)?),
        Some(k) => {
            return Err(bad(format!(
                "{}: records have {k} fields (expected 4 for 2D or 6 for 3D)",
                path.display()
            )))
        }
        None => return Err(bad(format!("{}: no records", path.display()))),
    })
}

fn load_spheres(path: &Path) -> Result<SphereTable, CliError> {
    spheres::parse_csv(&read_text(path)?).map_err(|e| match e {
        CliError::BadInput(m) => bad(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn run_method<const D: usize>(
    cloud: &OrientedPointCloud<D>,
    method: &Method,
    pins: &Pins,
) -> Result<MedialResult<D>, CliError> {
    Ok(match method {
        Method::Lsmat { config } => solve_all(cloud, config, pins)?,
        Method::LsmatIrls { config } => solve_all_irls(cloud, config, pins)?,
        Method::Shrink { r_init } => shrink_all(cloud, pins, *r_init)?,
    })
}

pub fn execute(request: &Request) -> Result<Outcome, CliError> {
    let mut outcome = Outcome::default();
    match request {
        Request::Generate(r) => generate(r, &mut outcome)?,
        Request::Solve(r) => solve(r, &mut outcome)?,
        Request::Eval(r) => eval(r, &mut outcome)?,
        Request::Sweep(r) => sweep(r, &mut outcome)?,
        Request::Render(r) => render(r, &mut outcome)?,
    }
    Ok(outcome)
}

fn generate(r: &GenerateRequest, outcome: &mut Outcome) -> Result<(), CliError> {
    let (text, polygon) = outcome.time("sample", || -> Result<_, CliError> {
        Ok(match r.shape {
            ShapeSpec::Planar(s) => (
                s.cloud(r.n)?.perturb(&r.noise).to_text(),
                Some(s.polygon()?.to_text()),
            ),
            ShapeSpec::Solid(s) => (s.cloud(r.n)?.perturb(&r.noise).to_text(), None),
        })
    })?;
    write_text(&r.out, &text)?;
    if let (Some(path), Some(poly)) = (&r.gt_out, polygon) {
        write_text(path, &poly)?;
    }
    Ok(())
}

fn solve(r: &SolveRequest, outcome: &mut Outcome) -> Result<(), CliError> {
    let cloud = outcome.time("load", || load_any(&r.input))?;
    let pins = r.pins.clone().map_or(Pins::All, Pins::Indices);
    let (csv, stats) = match &cloud {
        AnyCloud::Planar(c) => {
            let res = outcome.time("solve", || run_method(c, &r.method, &pins))?;
            (spheres::to_csv(&res), atom_stats(&res))
        }
        AnyCloud::Solid(c) => {
            let res = outcome.time("solve", || run_method(c, &r.method, &pins))?;
            (spheres::to_csv(&res), atom_stats(&res))
        }
    };
    write_text(&r.out, &csv)?;
    let (total, max, converged, n, failure) = stats;
    outcome.iterations.insert("solve.atoms".into(), n);
    outcome.iterations.insert("solve.total".into(), total);
    outcome.iterations.insert("solve.max".into(), max);
    outcome.iterations.insert("solve.converged".into(), converged);
    outcome.failure = failure;
    outcome.stdout = format!("{converged}/{n} spheres converged, {total} iterations\n");
    Ok(())
}

fn atom_stats<const D: usize>(res: &MedialResult<D>) -> (u64, u64, u64, u64, Option<String>) {
    let its = res.atoms.iter().map(|a| a.iterations_run as u64);
    let failed: Vec<_> = res.atoms.iter().filter_map(|a| a.failure.as_ref().map(|e| (a.pin_index, e))).collect();
    let failure = failed
        .first()
        .map(|(pin, e)| format!("{} sphere(s) failed; first at pin {pin}: {e}", failed.len()));
    (
        its.clone().sum(),
        its.max().unwrap_or(0),
        res.atoms.iter().filter(|a| a.converged).count() as u64,
        res.atoms.len() as u64,
        failure,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalJson {
    pub schema: String,
    pub e_avg_pct: f64,
    pub e_max_pct: f64,
    pub n_atoms: usize,
    pub distances: Vec<f64>,
}

fn eval(r: &EvalRequest, outcome: &mut Outcome) -> Result<(), CliError> {
    let table = load_spheres(&r.spheres)?;
    if table.dim != 2 {
        return Err(bad(format!(
            "dimension mismatch: eval needs 2D spheres, {} holds {}D spheres",
            r.spheres.display(),
            table.dim
        )));
    }
    let polygon = Polygon::parse(&read_text(&r.gt)?)?;
    let gt = outcome.time("ground-truth", || GroundTruthAxis::from_polygon(&polygon, r.resolution))?;
    let centers: Vec<Vector<2>> = table.rows.iter().map(|row| Vector::<2>::from_column_slice(&row.center)).collect();
    let report = outcome.time("metrics", || metrics_for_centers(&centers, &gt))?;
    let json = EvalJson {
        schema: EVAL_SCHEMA.into(),
        e_avg_pct: report.e_avg_pct,
        e_max_pct: report.e_max_pct,
        n_atoms: report.n_atoms,
        distances: report.distances,
    };
    let text = serde_json::to_string_pretty(&json).unwrap() + "\n";
    if let Some(out) = &r.out {
        write_text(out, &text)?;
    }
    outcome.stdout = if r.json && r.out.is_none() {
        text
    } else {
        format!(
            "E_avg {:.4}%  E_max {:.4}%  ({} atoms)\n",
            json.e_avg_pct, json.e_max_pct, json.n_atoms
        )
    };
    Ok(())
}

fn sweep(r: &SweepRequest, outcome: &mut Outcome) -> Result<(), CliError> {
    let gt = GroundTruthAxis::from_polygon(&r.shape.polygon()?, r.resolution)?;
    let base = r.shape.cloud(r.n)?;
    let mut csv = format!("# {SWEEP_SCHEMA}\nsigma,method,seeds,e_avg_pct,e_max_pct,converged_fraction\n");
    let mut total_iters = 0u64;
    let start = Instant::now();
    for &sigma in &r.sigmas {
        let clouds: Vec<_> = (0..r.seeds)
            .map(|seed| base.perturb(&NoiseSpec::gaussian(sigma, lsmat::NoiseMode::Isotropic, seed)))
            .collect();
        for &m in &r.methods {
            let method = match m {
                MethodName::Shrink => Method::Shrink {
                    r_init: DEFAULT_R_INIT_DIAGS,
                },
                MethodName::Lsmat | MethodName::LsmatIrls => {
                    let mut config = SolverConfig {
                        init: r.init,
                        ..SolverConfig::default_params(sigma)
                    };
                    if m == MethodName::LsmatIrls {
                        config.irls = Irls::l1_default();
                        Method::LsmatIrls { config }
                    } else {
                        Method::Lsmat { config }
                    }
                }
            };
            let (mut avg, mut max, mut conv) = (0.0, 0.0, 0.0);
            for cloud in &clouds {
                let res = run_method(cloud, &method, &Pins::All)?;
                total_iters += res.atoms.iter().map(|a| a.iterations_run as u64).sum::<u64>();
                let rep = metrics_for_centers(&res.centers(), &gt)?;
                avg += rep.e_avg_pct;
                max += rep.e_max_pct;
                conv += res.converged_fraction();
            }
            let k = r.seeds as f64;
            let _ = writeln!(csv, "{sigma},{},{},{},{},{}", m.label(), r.seeds, avg / k, max / k, conv / k);
        }
    }
    outcome.timings_ms.insert("sweep".into(), start.elapsed().as_secs_f64() * 1e3);
    outcome.iterations.insert("sweep.total".into(), total_iters);
    match &r.out {
        Some(path) => write_text(path, &csv)?,
        None => outcome.stdout = csv,
    }
    Ok(())
}

fn render(r: &RenderRequest, outcome: &mut Outcome) -> Result<(), CliError> {
    let cloud = load_any(&r.cloud)?;
    let table = r.spheres.as_deref().map(load_spheres).transpose()?;
    let dim = match cloud {
        AnyCloud::Planar(_) => 2,
        AnyCloud::Solid(_) => 3,
    };
    if let Some(t) = &table {
        if t.dim != dim {
            return Err(bad(format!("dimension mismatch: {dim}D cloud with {}D spheres", t.dim)));
        }
    }
    let rows = table.map(|t| t.rows).unwrap_or_default();
    let text = outcome.time("render", || match &cloud {
        AnyCloud::Planar(c) => {
            let s: Vec<_> = rows.iter().map(|row| (Vector::<2>::from_column_slice(&row.center), row.radius)).collect();
            render::svg(c, &s, r.size)
        }
        AnyCloud::Solid(_) => {
            let s: Vec<_> = rows.iter().map(|row| (Vector::<3>::from_column_slice(&row.center), row.radius)).collect();
            render::ply(&s)
        }
    });
    write_text(&r.out, &text)
}
