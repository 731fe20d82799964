//! Command-line flags, the optional TOML config file, and their merge into
//! validated run settings. Flags override file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use yamabe_core::ode::{Direction, Limits, SolitonParams, Start};
use yamabe_core::verify::SuiteOptions;
use yamabe_core::warped::{FiberGeometry, SphereFactor};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "yamabe", version, about = "Gradient Yamabe soliton profiles on warped products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the warping profile ODE and write the sampled profile.
    Solve(SolveArgs),
    /// Classify a profile file as rotationally symmetric or cylinder type.
    Classify(ClassifyArgs),
    /// Closed-form curvature quantities along a profile file.
    Curvature(CurvatureArgs),
    /// Run the verification suite (built-in catalog or a profile file).
    Verify(VerifyArgs),
    /// Long-format `r,quantity,value` table of profile columns.
    PlotData(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Both => Direction::Both,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML file with default values for any flag (keys as the long flag
    /// names with `_` for `-`).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write to this file instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Manifold dimension (>= 3).
    #[arg(long)]
    pub n: Option<usize>,
    /// Soliton constant: > 0 shrinking, 0 steady, < 0 expanding.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Constant scalar curvature of the fiber.
    #[arg(long = "Rbar", allow_hyphen_values = true)]
    pub rbar: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Upper end of the integration interval.
    #[arg(long, allow_hyphen_values = true)]
    pub rmax: Option<f64>,
    /// Lower end of the integration interval (backward legs).
    #[arg(long, allow_hyphen_values = true)]
    pub rmin: Option<f64>,
    /// Relative error tolerance per step.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Absolute error tolerance per step.
    #[arg(long)]
    pub atol: Option<f64>,
    /// Largest step size.
    #[arg(long)]
    pub max_step: Option<f64>,
    /// Smallest step size before giving up.
    #[arg(long)]
    pub min_step: Option<f64>,
    /// Step budget per integration leg.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// `phi` at or below this value counts as a critical point of `f`.
    #[arg(long)]
    pub phi_min: Option<f64>,
    /// Stop with a blow-up endpoint once `phi` exceeds this.
    #[arg(long)]
    pub phi_max: Option<f64>,
    /// Stop with a blow-up endpoint once `|phi'|` exceeds this.
    #[arg(long)]
    pub dphi_max: Option<f64>,
    /// Sample spacing of the emitted profile (dense output); omitted means
    /// one row per accepted step.
    #[arg(long)]
    pub output_step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Start at a smooth critical point of `f` placed at r = 0.
    #[arg(long)]
    pub origin: bool,
    /// Fiber curvature at the origin (default `Rbar / ((n-1)(n-2))`).
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Truncation order of the origin series.
    #[arg(long)]
    pub order: Option<usize>,
    /// Radius at which the origin series hands over to the integrator.
    #[arg(long)]
    pub seed_radius: Option<f64>,
    /// Initial `phi` for a regular start.
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    /// Initial `phi'` for a regular start.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<f64>,
    /// Initial radius for a regular start (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    /// Integration direction from a regular start.
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileInputArgs {
    /// Profile file written by `solve` (`.json` is read as JSON, anything
    /// else as CSV). CSV files need `--n`, `--rho` and `--Rbar`.
    #[arg(long, value_name = "PATH")]
    pub profile: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    /// `phi` at or below this value at an end marks a critical point.
    #[arg(long)]
    pub phi_min: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: ProfileInputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: ProfileInputArgs,
    /// Fiber: `sphere:K`, `hyperbolic:K` (K < 0), `flat` or a product of
    /// round spheres `spheres:DIMxRADIUS,...`. Default: the space form with
    /// scalar curvature `Rbar`.
    #[arg(long)]
    pub fiber: Option<String>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: ProfileInputArgs,
    /// Comma-separated check names or catalog entry names.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<f64>,
    /// Replace every upper-bound tolerance by this value.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Number of level sets sampled per chart.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Number of fiber points per level set.
    #[arg(long)]
    pub fiber_points: Option<usize>,
    /// Fiber used with `--profile`.
    #[arg(long)]
    pub fiber: Option<String>,
    /// Radial window `LO,HI` used with `--profile`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: ProfileInputArgs,
    /// Comma-separated subset of phi,dphi,ddphi,f,R,H.
    #[arg(long, value_delimiter = ',')]
    pub quantities: Option<Vec<String>>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub rho: Option<f64>,
    #[serde(rename = "Rbar", alias = "rbar")]
    pub rbar: Option<f64>,
    pub origin: Option<bool>,
    pub kappa: Option<f64>,
    pub order: Option<usize>,
    pub seed_radius: Option<f64>,
    pub phi0: Option<f64>,
    pub p0: Option<f64>,
    pub r0: Option<f64>,
    pub direction: Option<DirectionArg>,
    pub rmax: Option<f64>,
    pub rmin: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step: Option<f64>,
    pub min_step: Option<f64>,
    pub max_steps: Option<usize>,
    pub phi_min: Option<f64>,
    pub phi_max: Option<f64>,
    pub dphi_max: Option<f64>,
    pub output_step: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub profile: Option<PathBuf>,
    pub fiber: Option<String>,
    pub checks: Option<Vec<String>>,
    pub h: Option<f64>,
    pub tolerance: Option<f64>,
    pub levels: Option<usize>,
    pub fiber_points: Option<usize>,
    pub window: Option<Vec<f64>>,
    pub quantities: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }
}

/// Settings shared by every subcommand after merging flags and file.
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Output {
    pub fn resolve(common: &CommonArgs, format: Option<Format>, file: &FileConfig, default: Format) -> Self {
        Self {
            path: common.output.clone().or_else(|| file.output.clone()),
            format: format.or(file.format).unwrap_or(default),
        }
    }
}

/// Soliton parameters, if all three are given somewhere.
pub fn resolve_params(args: &ParamArgs, file: &FileConfig) -> CliResult<Option<SolitonParams>> {
    let n = args.n.or(file.n);
    let rho = args.rho.or(file.rho);
    let rbar = args.rbar.or(file.rbar);
    match (n, rho, rbar) {
        (Some(n), Some(rho), Some(rbar)) => Ok(Some(SolitonParams::new(n, rho, rbar)?)),
        (None, None, None) => Ok(None),
        _ => Err(CliError::usage("--n, --rho and --Rbar must be given together")),
    }
}

pub fn require_params(args: &ParamArgs, file: &FileConfig) -> CliResult<SolitonParams> {
    resolve_params(args, file)?.ok_or_else(|| CliError::usage("missing soliton parameters: pass --n, --rho and --Rbar"))
}

pub fn resolve_limits(args: &LimitArgs, file: &FileConfig) -> CliResult<Limits> {
    let d = Limits::default();
    let limits = Limits {
        r_max: args.rmax.or(file.rmax).unwrap_or(d.r_max),
        r_min: args.rmin.or(file.rmin).unwrap_or(d.r_min),
        phi_min: args.phi_min.or(file.phi_min).unwrap_or(d.phi_min),
        phi_max: args.phi_max.or(file.phi_max).unwrap_or(d.phi_max),
        dphi_max: args.dphi_max.or(file.dphi_max).unwrap_or(d.dphi_max),
        rtol: args.rtol.or(file.rtol).unwrap_or(d.rtol),
        atol: args.atol.or(file.atol).unwrap_or(d.atol),
        max_step: args.max_step.or(file.max_step).unwrap_or(d.max_step),
        min_step: args.min_step.or(file.min_step).unwrap_or(d.min_step),
        max_steps: args.max_steps.or(file.max_steps).unwrap_or(d.max_steps),
        output_step: args.output_step.or(file.output_step),
    };
    if limits.r_max.is_nan() || limits.r_max <= 0.0 {
        return Err(CliError::usage(format!("--rmax must be positive, got {}", limits.r_max)));
    }
    limits.validate()?;
    Ok(limits)
}

pub struct SolveSettings {
    pub params: SolitonParams,
    pub start: Start,
    pub direction: Direction,
    pub limits: Limits,
}

pub fn resolve_solve(args: &SolveArgs, file: &FileConfig) -> CliResult<SolveSettings> {
    let params = require_params(&args.params, file)?;
    let limits = resolve_limits(&args.limits, file)?;
    let origin = args.origin || file.origin.unwrap_or(false);
    let phi0 = args.phi0.or(file.phi0);
    let p0 = args.p0.or(file.p0);
    let r0 = args.r0.or(file.r0);
    let direction = args.direction.or(file.direction);
    let start = if origin {
        if phi0.is_some() || p0.is_some() || r0.is_some() {
            return Err(CliError::usage("--origin excludes --phi0, --p0 and --r0"));
        }
        if matches!(direction, Some(d) if d != DirectionArg::Forward) {
            return Err(CliError::usage("an origin start integrates forward only"));
        }
        let m = (params.n - 1) as f64;
        Start::Origin {
            kappa: args.kappa.or(file.kappa).unwrap_or(params.rbar / (m * (m - 1.0))),
            order: args.order.or(file.order).unwrap_or(7),
            seed_radius: args.seed_radius.or(file.seed_radius),
        }
    } else {
        let (Some(phi), Some(p)) = (phi0, p0) else {
            return Err(CliError::usage("give either --origin or both --phi0 and --p0"));
        };
        if args.kappa.or(file.kappa).is_some() || args.order.or(file.order).is_some() || args.seed_radius.or(file.seed_radius).is_some() {
            return Err(CliError::usage("--kappa, --order and --seed-radius need --origin"));
        }
        Start::State(yamabe_core::ode::ProfileState::new(r0.unwrap_or(0.0), phi, p))
    };
    Ok(SolveSettings {
        params,
        start,
        direction: direction.unwrap_or(DirectionArg::Forward).into(),
        limits,
    })
}

pub fn resolve_suite(args: &VerifyArgs, file: &FileConfig) -> CliResult<SuiteOptions> {
    let d = SuiteOptions::default();
    let opts = SuiteOptions {
        h: args.h.or(file.h).unwrap_or(d.h),
        tolerance: args.tolerance.or(file.tolerance),
        levels: args.levels.or(file.levels).unwrap_or(d.levels),
        fiber_points: args.fiber_points.or(file.fiber_points).unwrap_or(d.fiber_points),
        selection: args.checks.clone().or_else(|| file.checks.clone()),
    };
    opts.validate()?;
    Ok(opts)
}

pub fn resolve_window(args: &VerifyArgs, file: &FileConfig) -> CliResult<Option<(f64, f64)>> {
    match args.window.as_ref().or(file.window.as_ref()) {
        None => Ok(None),
        Some(w) if w.len() == 2 && w[0] < w[1] => Ok(Some((w[0], w[1]))),
        Some(w) => Err(CliError::usage(format!("window needs LO,HI with LO < HI, got {w:?}"))),
    }
}

/// Parses a fiber description for an `m`-dimensional fiber.
pub fn parse_fiber(desc: &str, m: usize) -> CliResult<FiberGeometry> {
    let bad = |why: &str| CliError::usage(format!("bad fiber '{desc}': {why}"));
    let (kind, arg) = match desc.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (desc.trim(), None),
    };
    let number = |a: Option<&str>| -> CliResult<f64> {
        a.ok_or_else(|| bad("missing curvature"))?.parse::<f64>().map_err(|_| bad("curvature is not a number"))
    };
    let fiber = match kind {
        "sphere" => FiberGeometry::round_sphere(m, number(arg)?)?,
        "hyperbolic" => FiberGeometry::hyperbolic(m, number(arg)?)?,
        "flat" if arg.is_none() => FiberGeometry::flat(m)?,
        "spheres" => {
            let mut factors = Vec::new();
            for part in arg.ok_or_else(|| bad("missing factors"))?.split(',') {
                let (d, r) = part.trim().split_once('x').ok_or_else(|| bad("factors look like DIMxRADIUS"))?;
                factors.push(SphereFactor {
                    dim: d.parse().map_err(|_| bad("factor dimension is not an integer"))?,
                    radius: r.parse().map_err(|_| bad("factor radius is not a number"))?,
                });
            }
            let total: usize = factors.iter().map(|f| f.dim).sum();
            if total != m {
                return Err(bad(&format!("factor dimensions add up to {total}, fiber needs {m}")));
            }
            FiberGeometry::product_of_spheres(factors)?
        }
        _ => return Err(bad("expected sphere:K, hyperbolic:K, flat or spheres:DIMxRADIUS,...")),
    };
    if fiber.fiber_dim() != m {
        return Err(bad(&format!("fiber dimension {} does not match n - 1 = {m}", fiber.fiber_dim())));
    }
    Ok(fiber)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_strings() {
        assert_eq!(parse_fiber("sphere:1", 3).unwrap().scalar_curvature(), 6.0);
        assert_eq!(parse_fiber("hyperbolic:-1", 2).unwrap().scalar_curvature(), -2.0);
        assert_eq!(parse_fiber("flat", 4).unwrap().scalar_curvature(), 0.0);
        let p = parse_fiber("spheres:2x1.0,2x2.0", 4).unwrap();
        assert_eq!(p.scalar_curvature(), 2.0 + 0.5);
        assert!(parse_fiber("spheres:2x1.0", 4).is_err());
        assert!(parse_fiber("torus", 2).is_err());
        assert!(parse_fiber("sphere:x", 2).is_err());
    }

    #[test]
    fn file_values_yield_to_flags() {
        let file: FileConfig = toml::from_str("n = 3\nrho = 0.0\nRbar = 2.0\nrmax = 7.0\norigin = true\n").unwrap();
        let cli = Cli::try_parse_from(["yamabe", "solve", "--rmax", "9"]).unwrap();
        let Command::Solve(args) = cli.command else { panic!() };
        let s = resolve_solve(&args, &file).unwrap();
        assert_eq!(s.limits.r_max, 9.0);
        assert_eq!(s.params, SolitonParams::new(3, 0.0, 2.0).unwrap());
        assert!(matches!(s.start, Start::Origin { kappa, order: 7, .. } if kappa == 1.0));
        assert!(toml::from_str::<FileConfig>("nn = 3").is_err());
    }
}
