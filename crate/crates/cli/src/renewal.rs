//! `renewal`: vector renewal equations f = A f(· − T) + z on a lattice grid.

use std::path::{Path, PathBuf};

use fractal_spectra::asymptotics::{reducible_growth, renewal_limit, renewal_solve, RenewalSystem};
use fractal_spectra::nalgebra::DMatrix;
use fractal_spectra::Error;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{num, out_dir, profile_summary, write_csv, write_json};

pub const PRESETS: [(&str, &str); 3] = [
    ("staircase", "A = (1), T = 1, z = 1 on [0, 64): f(x) = floor(x) + 1"),
    ("swap", "A = [[0, 2], [1, 0]] / sqrt 2 with two bumps: periodic limit, period 2T"),
    ("chain", "A = 3x3 Jordan-type chain of ones: polynomial growth of degrees 2, 1, 0"),
];

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Forcing {
    Samples(Vec<f64>),
    Shape(Shape),
}

/// z_j on [from, to) in units of x; "bump" is sin² over the support.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Shape {
    from: f64,
    to: f64,
    #[serde(default)]
    bump: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemConfig {
    #[serde(default)]
    name: Option<String>,
    a: Vec<Vec<f64>>,
    #[serde(default = "one")]
    period: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    z: Vec<Forcing>,
}

fn one() -> f64 {
    1.0
}
fn default_steps() -> usize {
    64
}

fn shape(s: &Shape, step: f64) -> Vec<f64> {
    let (a, b) = ((s.from / step).round() as usize, (s.to / step).round() as usize);
    (0..b)
        .map(|k| match k {
            k if k < a => 0.0,
            _ if !s.bump => 1.0,
            k => (std::f64::consts::PI * (k - a) as f64 / (b - a) as f64).sin().powi(2),
        })
        .collect()
}

fn build(cfg: SystemConfig) -> Result<(String, RenewalSystem), CliError> {
    let n = cfg.a.len();
    if n == 0 || cfg.a.iter().any(|r| r.len() != n) {
        return Err(CliError::config("config field `a`: must be a non-empty square matrix"));
    }
    if cfg.steps == 0 || cfg.period.is_nan() || cfg.period <= 0.0 {
        return Err(CliError::config("config fields `period`, `steps`: need period > 0 and steps ≥ 1"));
    }
    let step = cfg.period / cfg.steps as f64;
    let z = cfg
        .z
        .iter()
        .map(|f| match f {
            Forcing::Samples(v) => v.clone(),
            Forcing::Shape(s) => shape(s, step),
        })
        .collect();
    let a = DMatrix::from_fn(n, n, |i, j| cfg.a[i][j]);
    let sys = RenewalSystem::new(a, cfg.period, cfg.steps, z)?;
    Ok((cfg.name.unwrap_or_else(|| "custom".into()), sys))
}

fn preset(name: &str) -> Result<SystemConfig, CliError> {
    let bump = |from: f64, to: f64| Forcing::Shape(Shape { from, to, bump: true });
    let cfg = match name {
        "staircase" => SystemConfig {
            name: None,
            a: vec![vec![1.0]],
            period: 1.0,
            steps: 64,
            z: vec![Forcing::Shape(Shape { from: 0.0, to: 64.0, bump: false })],
        },
        "swap" => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            SystemConfig {
                name: None,
                a: vec![vec![0.0, 2.0 * h], vec![h, 0.0]],
                period: 1.0,
                steps: 64,
                z: vec![bump(0.0, 0.5), bump(0.25, 1.25)],
            }
        }
        "chain" => SystemConfig {
            name: None,
            a: vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0]],
            period: 1.0,
            steps: 16,
            z: vec![bump(0.0, 0.5), bump(0.25, 1.0), bump(0.0, 1.0)],
        },
        _ => return Err(CliError::config(format!("unknown renewal preset `{name}` (see `fractal-spectra presets`)"))),
    };
    Ok(SystemConfig { name: Some(name.into()), ..cfg })
}

fn load(path: &Path) -> Result<SystemConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::config(format!("config field `{}`: {}", e.path(), e.inner())))
}

fn asymptotics(sys: &RenewalSystem, horizon: f64) -> Result<Value, CliError> {
    match renewal_limit(sys, horizon) {
        Ok(r) => Ok(json!({
            "kind": "periodic_limit",
            "rho": r.rho,
            "shifts": r.shifts,
            "b": (0..r.b.nrows()).map(|i| (0..r.b.ncols()).map(|j| r.b[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "deviation": r.deviation,
            "period_deviation": r.period_deviation,
            "residual": r.residual,
        })),
        Err(Error::Unsupported(_)) => {
            let reports = reducible_growth(sys, horizon)?;
            let comps: Vec<Value> = reports
                .iter()
                .map(|g| {
                    json!({
                        "component": g.component,
                        "expected_degree": g.expected_degree,
                        "reaches_basic": g.reaches_basic,
                        "degree": g.degree,
                        "residuals": g.residuals,
                        "tail_ratio": g.tail_ratio,
                        "profile": g.profile.as_ref().map(profile_summary),
                    })
                })
                .collect();
            Ok(json!({ "kind": "polynomial_growth", "components": comps }))
        }
        Err(e @ (Error::InvalidInput(_) | Error::InsufficientData(_))) => {
            Ok(json!({ "kind": "none", "reason": e.to_string() }))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(preset_name: Option<&str>, config: Option<&Path>, horizon: f64, out: Option<PathBuf>) -> Result<(), CliError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(CliError::config(format!("--horizon must be positive and finite (got {horizon})")));
    }
    let cfg = match (preset_name, config) {
        (Some(p), _) => preset(p)?,
        (None, Some(path)) => load(path)?,
        (None, None) => return Err(CliError::config("one of --preset or --config is required")),
    };
    let (name, sys) = build(cfg)?;
    let trace = renewal_solve(&sys, horizon)?;
    let dir = out_dir(&out)?;
    let n = sys.dim();
    let mut header = vec!["x".to_string()];
    header.extend((1..=n).map(|i| format!("f_{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = trace
        .f
        .iter()
        .enumerate()
        .map(|(k, v)| std::iter::once(num(trace.x(k))).chain(v.iter().map(|&y| num(y))).collect())
        .collect();
    write_csv(&dir.join("renewal_trace.csv"), &header, &rows, &[])?;
    let summary = json!({
        "system": name,
        "dim": n,
        "period_T": sys.period,
        "steps_per_period": sys.steps,
        "horizon": horizon,
        "spectral_radius": sys.spectral_radius(),
        "equation_residual": trace.residual,
        "final": trace.f.last().map(|v| v.iter().copied().collect::<Vec<_>>()),
        "asymptotics": asymptotics(&sys, horizon)?,
    });
    write_json(&dir.join("renewal_summary.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("JSON values serialize"));
    Ok(())
}
