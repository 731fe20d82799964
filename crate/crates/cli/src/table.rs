//! Profile tables on disk: CSV with the header `r,phi,dphi,ddphi,f,R,H`
//! or JSON with the same columns as arrays plus parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};
use yamabe_core::ode::{classify, ClassificationReport, ProfileSample, SolitonParams, SolitonProfile};

use crate::config::{resolve_params, FileConfig, ProfileInputArgs};
use crate::error::{CliError, CliResult};

pub const PROFILE_HEADER: [&str; 7] = ["r", "phi", "dphi", "ddphi", "f", "R", "H"];

/// Shortest decimal that reads back to the same `f64` (`-0.0` prints as
/// `0.0`).
pub fn num(v: f64) -> String {
    format!("{:?}", v + 0.0)
}

/// Comma-separated rows with `\n` line endings.
pub fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::usage(format!("csv output: {e}"));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn profile_csv(profile: &SolitonProfile) -> CliResult<String> {
    csv_text(
        &PROFILE_HEADER,
        profile.samples().iter().map(|s| {
            [s.r, s.phi, s.dphi, s.ddphi, s.f, s.scalar, profile.mean_curvature(s)]
                .iter()
                .map(|&v| num(v))
                .collect()
        }),
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProfileJson {
    pub params: SolitonParams,
    #[serde(default, skip_deserializing)]
    pub classification: Option<ClassificationReport>,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub ddphi: Vec<f64>,
    pub f: Vec<f64>,
    #[serde(rename = "R")]
    pub scalar: Vec<f64>,
    /// Non-finite values (at `phi = 0`) are `null`.
    #[serde(rename = "H", default)]
    pub mean_curvature: Vec<Option<f64>>,
}

pub fn profile_json(profile: &SolitonProfile) -> CliResult<String> {
    let s = profile.samples();
    let col = |f: fn(&ProfileSample) -> f64| s.iter().map(f).collect::<Vec<_>>();
    let doc = ProfileJson {
        params: *profile.params(),
        classification: Some(classify(profile)?),
        r: col(|s| s.r),
        phi: col(|s| s.phi),
        dphi: col(|s| s.dphi),
        ddphi: col(|s| s.ddphi),
        f: col(|s| s.f),
        scalar: col(|s| s.scalar),
        mean_curvature: s.iter().map(|q| Some(profile.mean_curvature(q)).filter(|v| v.is_finite())).collect(),
    };
    Ok(json_text(&doc))
}

fn read_csv(text: &str, path: &Path) -> CliResult<Vec<ProfileSample>> {
    let bad = |why: String| CliError::usage(format!("{}: {why}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != PROFILE_HEADER {
        return Err(bad(format!("expected header {}, got {}", PROFILE_HEADER.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut v = [0.0; 6];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k].trim().parse().map_err(|_| bad(format!("row {}: column {} is not a number", i + 1, PROFILE_HEADER[k])))?;
        }
        out.push(ProfileSample {
            r: v[0],
            phi: v[1],
            dphi: v[2],
            ddphi: v[3],
            f: v[4],
            scalar: v[5],
        });
    }
    Ok(out)
}

fn read_json(text: &str, path: &Path) -> CliResult<(SolitonParams, Vec<ProfileSample>)> {
    let doc: ProfileJson = serde_json::from_str(text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let len = doc.r.len();
    if [doc.phi.len(), doc.dphi.len(), doc.ddphi.len(), doc.f.len(), doc.scalar.len()].iter().any(|&l| l != len) {
        return Err(CliError::usage(format!("{}: columns differ in length", path.display())));
    }
    let samples = (0..len)
        .map(|i| ProfileSample {
            r: doc.r[i],
            phi: doc.phi[i],
            dphi: doc.dphi[i],
            ddphi: doc.ddphi[i],
            f: doc.f[i],
            scalar: doc.scalar[i],
        })
        .collect();
    Ok((doc.params, samples))
}

/// Loads the profile named by `--profile` (or the config file).
pub fn load_profile(args: &ProfileInputArgs, file: &FileConfig) -> CliResult<SolitonProfile> {
    let path = args.profile.clone().or_else(|| file.profile.clone()).ok_or_else(|| CliError::usage("missing --profile"))?;
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let flags = resolve_params(&args.params, file)?;
    let (params, samples) = if path.extension().is_some_and(|e| e == "json") {
        let (p, s) = read_json(&text, &path)?;
        (flags.unwrap_or(p), s)
    } else {
        let params = flags.ok_or_else(|| CliError::usage("CSV profiles carry no parameters: pass --n, --rho and --Rbar"))?;
        (params, read_csv(&text, &path)?)
    };
    let phi_min = args.phi_min.or(file.phi_min).unwrap_or(yamabe_core::ode::Limits::default().phi_min);
    Ok(SolitonProfile::from_table(params, samples, phi_min)?)
}
