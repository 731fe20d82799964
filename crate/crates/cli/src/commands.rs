use std::io::Write;

use serde::Serialize;
use serde_json::json;
use yamabe_core::ode::{classify, integrate, SolitonParams, SolitonProfile};
use yamabe_core::verify::{default_fiber, run_catalog, run_profile, VerificationReport};
use yamabe_core::warped::{ricci_closed_form, scalar_closed_form, weyl_closed_form, FiberGeometry, WarpingSample};

use crate::config::{
    parse_fiber, resolve_solve, resolve_suite, resolve_window, ClassifyArgs, CurvatureArgs, FileConfig, Format, Output, PlotArgs, SolveArgs,
    VerifyArgs,
};
use crate::error::{CliError, CliResult};
use crate::table::{csv_text, json_text, load_profile, num, profile_csv, profile_json};

fn emit(out: &Output, text: &str) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: out.path.as_ref().map_or("<stdout>".into(), |p| p.display().to_string()),
        source,
    };
    match &out.path {
        Some(p) => std::fs::write(p, text).map_err(io_err),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(io_err)
        }
    }
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let out = Output::resolve(&args.common, args.format, &file, Format::Csv);
    let s = resolve_solve(args, &file)?;
    let profile = integrate(&s.params, s.start, s.direction, &s.limits)?;
    let (lo, hi) = profile.domain();
    eprintln!(
        "{} samples on [{}, {}] ({:?} / {:?}), {:?}",
        profile.samples().len(),
        num(lo.r),
        num(hi.r),
        lo.kind,
        hi.kind,
        profile.classification()
    );
    let text = match out.format {
        Format::Csv => profile_csv(&profile)?,
        Format::Json => profile_json(&profile)?,
    };
    emit(&out, &text)
}

pub fn classify_cmd(args: &ClassifyArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    if file.format == Some(Format::Csv) {
        return Err(CliError::usage("classify writes JSON only"));
    }
    let out = Output::resolve(&args.common, None, &file, Format::Json);
    let profile = load_profile(&args.input, &file)?;
    emit(&out, &json_text(&classify(&profile)?))
}

fn fiber_for(desc: Option<&String>, params: &SolitonParams) -> CliResult<FiberGeometry> {
    match desc {
        Some(s) => parse_fiber(s, params.n - 1),
        None => Ok(default_fiber(params)?),
    }
}

const CURVATURE_HEADER: [&str; 6] = ["r", "R", "R11", "Ric_fiber_min", "Ric_fiber_max", "weyl_max"];

#[derive(Default, Serialize)]
struct CurvatureColumns {
    r: Vec<f64>,
    #[serde(rename = "R")]
    scalar: Vec<f64>,
    #[serde(rename = "R11")]
    radial_ricci: Vec<f64>,
    #[serde(rename = "Ric_fiber_min")]
    fiber_ricci_min: Vec<f64>,
    #[serde(rename = "Ric_fiber_max")]
    fiber_ricci_max: Vec<f64>,
    weyl_max: Vec<f64>,
}

/// Closed-form curvature at every sample with `|phi| > phi_min`. The
/// tangential Ricci values are orthonormal-frame eigenvalues.
fn curvature_columns(profile: &SolitonProfile, fiber: &FiberGeometry) -> CliResult<CurvatureColumns> {
    let n = profile.params().n;
    let ft = fiber.tensors(None)?;
    let eig = fiber.ricci_eigenvalues()?;
    let (emin, emax) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut c = CurvatureColumns::default();
    for q in profile.samples().iter().filter(|q| q.phi.abs() > profile.phi_min()) {
        let s = WarpingSample::new(q.r, q.phi, q.dphi, q.ddphi);
        let ric = ricci_closed_form(&s, fiber, n)?;
        let phi2 = s.phi * s.phi;
        c.r.push(q.r);
        c.scalar.push(scalar_closed_form(&s, fiber.scalar_curvature(), n)?);
        c.radial_ricci.push(ric.radial);
        c.fiber_ricci_min.push((emin - ric.shift) / phi2);
        c.fiber_ricci_max.push((emax - ric.shift) / phi2);
        c.weyl_max.push(weyl_closed_form(&s, fiber, n, &ft)?.max_abs());
    }
    Ok(c)
}

pub fn curvature(args: &CurvatureArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let out = Output::resolve(&args.common, args.format, &file, Format::Csv);
    let profile = load_profile(&args.input, &file)?;
    let fiber = fiber_for(args.fiber.as_ref().or(file.fiber.as_ref()), profile.params())?;
    let c = curvature_columns(&profile, &fiber)?;
    let skipped = profile.samples().len() - c.r.len();
    if skipped > 0 {
        eprintln!("skipped {skipped} sample(s) with |phi| <= phi_min");
    }
    let text = match out.format {
        Format::Csv => csv_text(
            &CURVATURE_HEADER,
            (0..c.r.len()).map(|i| {
                [c.r[i], c.scalar[i], c.radial_ricci[i], c.fiber_ricci_min[i], c.fiber_ricci_max[i], c.weyl_max[i]]
                    .iter()
                    .map(|&v| num(v))
                    .collect()
            }),
        )?,
        Format::Json => json_text(&json!({"params": profile.params(), "fiber": fiber.label(), "columns": c})),
    };
    emit(&out, &text)
}

fn report_csv(report: &VerificationReport) -> CliResult<String> {
    csv_text(
        &["name", "residual", "tolerance", "pass"],
        report.checks.iter().map(|c| vec![c.name.clone(), num(c.residual), num(c.tolerance), c.pass.to_string()]),
    )
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let out = Output::resolve(&args.common, args.format, &file, Format::Json);
    let opts = resolve_suite(args, &file)?;
    let window = resolve_window(args, &file)?;
    let fiber_desc = args.fiber.as_ref().or(file.fiber.as_ref());
    let report = if args.input.profile.is_some() || file.profile.is_some() {
        let profile = load_profile(&args.input, &file)?;
        let fiber = fiber_desc.map(|s| parse_fiber(s, profile.params().n - 1)).transpose()?;
        run_profile(&profile, fiber, window, &opts)?
    } else {
        if fiber_desc.is_some() || window.is_some() {
            return Err(CliError::usage("--fiber and --window apply to --profile runs only"));
        }
        run_catalog(&opts)?
    };
    let text = match out.format {
        Format::Csv => report_csv(&report)?,
        Format::Json => json_text(&report),
    };
    emit(&out, &text)?;
    if report.overall_pass {
        Ok(())
    } else {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(CliError::VerificationFailed(failed.join(", ")))
    }
}

pub const QUANTITIES: [&str; 6] = ["phi", "dphi", "ddphi", "f", "R", "H"];

pub fn plot_data(args: &PlotArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let out = Output::resolve(&args.common, args.format, &file, Format::Csv);
    let profile = load_profile(&args.input, &file)?;
    let quantities = args
        .quantities
        .clone()
        .or_else(|| file.quantities.clone())
        .unwrap_or_else(|| QUANTITIES.iter().map(|s| s.to_string()).collect());
    if let Some(q) = quantities.iter().find(|q| !QUANTITIES.contains(&q.as_str())) {
        return Err(CliError::usage(format!("unknown quantity '{q}' (expected one of {})", QUANTITIES.join(","))));
    }
    let mut rows = Vec::new();
    for q in &quantities {
        for s in profile.samples() {
            let v = match q.as_str() {
                "phi" => s.phi,
                "dphi" => s.dphi,
                "ddphi" => s.ddphi,
                "f" => s.f,
                "R" => s.scalar,
                _ => profile.mean_curvature(s),
            };
            rows.push((s.r, q.as_str(), v));
        }
    }
    let text = match out.format {
        Format::Csv => csv_text(&["r", "quantity", "value"], rows.iter().map(|(r, q, v)| vec![num(*r), q.to_string(), num(*v)]))?,
        Format::Json => json_text(&json!({
            "r": rows.iter().map(|x| x.0).collect::<Vec<_>>(),
            "quantity": rows.iter().map(|x| x.1).collect::<Vec<_>>(),
            "value": rows.iter().map(|x| Some(x.2).filter(|v| v.is_finite())).collect::<Vec<_>>(),
        })),
    };
    emit(&out, &text)
}
