//! File emission. Floats are written with 17 significant digits so that
//! identical runs give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use fractal_spectra::asymptotics::PeriodicProfile;
use fractal_spectra::{BoundaryCondition, Spectrum};
use serde_json::Value;

use crate::error::{CliError, EXIT_DATA};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Characters outside [A-Za-z0-9_-] become '_'.
pub fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn out_dir(dir: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let d = dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
    Ok(d)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>], footer: &[(&str, String)]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::io(path, e))?;
    }
    let mut bytes = w.into_inner().map_err(|e| CliError::io(path, e))?;
    for (k, v) in footer {
        bytes.extend_from_slice(format!("# {k},{v}\n").as_bytes());
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    fs::write(path, s).map_err(|e| CliError::io(path, e))
}

pub fn spectrum_path(dir: &Path, domain: &str, bc: BoundaryCondition, level: usize) -> PathBuf {
    dir.join(format!("spectrum_{}_{}_L{level}.csv", sanitize(domain), bc.tag()))
}

pub fn counting_path(dir: &Path, domain: &str, bc: BoundaryCondition, level: usize) -> PathBuf {
    dir.join(format!("counting_{}_{}_L{level}.csv", sanitize(domain), bc.tag()))
}

pub fn write_spectrum(path: &Path, s: &Spectrum, free_dim: usize) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> =
        s.values.iter().zip(&s.multiplicities).map(|(v, m)| vec![num(*v), m.to_string()]).collect();
    write_csv(
        path,
        &["eigenvalue", "multiplicity"],
        &rows,
        &[
            ("free_dim", free_dim.to_string()),
            ("positive", s.positive_count().to_string()),
            ("zero", s.zero_multiplicity.to_string()),
        ],
    )
}

/// Reads a spectrum CSV written by [`write_spectrum`].
pub fn read_spectrum(path: &Path, domain: &str, bc: BoundaryCondition, level: usize) -> Result<Spectrum, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|_| CliError::new(EXIT_DATA, format!("missing spectrum {} (run without --no-compute)", path.display())))?;
    let bad = |what: &str| CliError::new(EXIT_DATA, format!("{}: {what}", path.display()));
    let mut values = Vec::new();
    let mut multiplicities = Vec::new();
    let mut zero = None;
    for line in text.lines().skip(1) {
        if let Some(f) = line.strip_prefix("# ") {
            if let Some(z) = f.strip_prefix("zero,") {
                zero = Some(z.parse::<usize>().map_err(|_| bad("bad zero footer"))?);
            }
            continue;
        }
        let (v, m) = line.split_once(',').ok_or_else(|| bad("malformed row"))?;
        values.push(v.parse::<f64>().map_err(|_| bad("bad eigenvalue"))?);
        multiplicities.push(m.parse::<usize>().map_err(|_| bad("bad multiplicity"))?);
    }
    let zero_multiplicity = zero.ok_or_else(|| bad("missing zero footer"))?;
    Ok(Spectrum { values, multiplicities, bc, domain: domain.into(), level, zero_multiplicity })
}

pub fn write_profile(path: &Path, p: &PeriodicProfile) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> =
        p.bins.iter().map(|b| vec![num(b.center), num(b.mean), num(b.std), b.samples.to_string()]).collect();
    write_csv(
        path,
        &["bin_center_t", "mean", "std", "n_samples"],
        &rows,
        &[("period", num(p.period)), ("fold_residual", num(p.fold_residual))],
    )
}

pub fn profile_summary(p: &PeriodicProfile) -> Value {
    serde_json::json!({
        "period": p.period,
        "min": p.min,
        "max": p.max,
        "mean": p.mean,
        "amplitude": p.amplitude(),
        "fold_residual": p.fold_residual,
        "bins": p.bins.len(),
    })
}
