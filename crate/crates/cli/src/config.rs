//! Experiment configuration: JSON documents and preset lookup.

use std::path::{Path, PathBuf};

use fractal_spectra::bgd::{bgd_preset, BgdSystem, Domain, Letter, Variant, BGD_PRESETS};
use fractal_spectra::exact::{parse_rational, rat_int, Affine, Point, QuadField, Rational, Surd};
use fractal_spectra::forms::{snowflake_default_r, snowflake_harmonic, sg_harmonic};
use fractal_spectra::fractal::{fractal_preset, level_cap};
use fractal_spectra::{BoundaryCondition, FractalSpec, HarmonicStructure, SelfSimilarMeasure};
use serde::Deserialize;

use crate::error::CliError;

/// A rational "p/q" (or a bare integer), or a surd ["a", "b"] meaning a + b√s.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
    Surd([String; 2]),
}

impl Num {
    fn rational(&self) -> Result<Rational, String> {
        match self {
            Num::Int(n) => Ok(rat_int(*n)),
            Num::Text(s) => parse_rational(s).map_err(|e| e.to_string()),
            Num::Surd(_) => Err("expected a rational, found a surd".into()),
        }
    }

    fn surd(&self) -> Result<Surd, String> {
        match self {
            Num::Surd([a, b]) => Ok(Surd::new(
                parse_rational(a).map_err(|e| e.to_string())?,
                parse_rational(b).map_err(|e| e.to_string())?,
            )),
            other => Ok(Surd::rational(other.rational()?)),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MapConfig {
    Homothety { ratio: Num, fixed: [Num; 2] },
    Affine { linear: [[Num; 2]; 2], translation: [Num; 2] },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalConfig {
    pub name: String,
    /// s in Q(√s); coordinates may use surds in this field.
    #[serde(default = "default_radicand")]
    pub radicand: i64,
    pub maps: Vec<MapConfig>,
    pub boundary: Vec<[Num; 2]>,
    #[serde(default)]
    pub symmetries: Vec<MapConfig>,
}

fn default_radicand() -> i64 {
    3
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub d: Vec<Vec<Num>>,
    pub r: Vec<Num>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LetterConfig {
    Inside,
    Outside,
    Edge {
        target: usize,
        #[serde(default)]
        symmetry: usize,
        #[serde(default)]
        extra_boundary: Vec<usize>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub name: String,
    pub status: String,
    pub letters: Vec<LetterConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BgdConfig {
    pub name: String,
    #[serde(default)]
    pub widetilde: bool,
    pub domains: Vec<DomainConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Named<T> {
    Preset(String),
    Inline(T),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_decades")]
    pub decades: f64,
    #[serde(default = "default_ppd")]
    pub points_per_decade: usize,
}

fn default_start() -> f64 {
    2.0
}
fn default_decades() -> f64 {
    3.0
}
fn default_ppd() -> usize {
    100
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { start: default_start(), decades: default_decades(), points_per_decade: default_ppd() }
    }
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        let n = (self.decades * self.points_per_decade as f64).round() as usize + 1;
        fractal_spectra::asymptotics::log_grid(self.start, self.start * 10f64.powf(self.decades), n)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    /// Depth of the inertia counter used for second-term profiles.
    #[serde(default = "default_engine_level")]
    pub engine_level: usize,
    /// Window in units of the period T of t = log x / 2.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_engine_level() -> usize {
    24
}
fn default_window() -> [f64; 2] {
    [10.0, 20.0]
}
fn default_bins() -> usize {
    fractal_spectra::asymptotics::DEFAULT_BINS
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig { engine_level: default_engine_level(), window: default_window(), bins: default_bins() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Auto,
    Dense,
    Decimation,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub fractal: Option<Named<FractalConfig>>,
    #[serde(default)]
    pub harmonic: Option<HarmonicConfig>,
    #[serde(default)]
    pub measure: Option<Vec<Num>>,
    /// Rational r for the snowflake harmonic structure.
    #[serde(default)]
    pub snowflake_r: Option<Num>,
    #[serde(default)]
    pub bgd: Option<Named<BgdConfig>>,
    #[serde(default)]
    pub levels: Option<Vec<usize>>,
    #[serde(default)]
    pub bc: Option<Vec<String>>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub pin_v0: bool,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub asymptotics: AsymptoticsConfig,
}

/// Everything a command needs, resolved and validated.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: String,
    pub spec: FractalSpec,
    pub hs: HarmonicStructure,
    pub mu: SelfSimilarMeasure,
    pub bgd: Option<BgdSystem>,
    pub levels: Vec<usize>,
    pub bcs: Vec<BoundaryCondition>,
    pub grid: GridConfig,
    pub out: Option<PathBuf>,
    pub pin_v0: bool,
    pub method: Method,
    pub asymptotics: AsymptoticsConfig,
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(format!("config field `{path}`: {}", e.inner()))
    })
}

pub fn preset_config(name: &str) -> Result<ExperimentConfig, CliError> {
    let mut cfg = parse_config("{}")?;
    if fractal_preset(name).is_some() {
        cfg.fractal = Some(Named::Preset(name.into()));
    } else if BGD_PRESETS.contains(&name) {
        cfg.bgd = Some(Named::Preset(name.into()));
    } else {
        return Err(CliError::config(format!("unknown preset `{name}` (see `fractal-spectra presets`)")));
    }
    Ok(cfg)
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("config field `{field}`: {msg}"))
}

fn point(field: &str, p: &[Num; 2]) -> Result<Point, CliError> {
    Ok([p[0].surd().map_err(|e| field_err(field, e))?, p[1].surd().map_err(|e| field_err(field, e))?])
}

fn affine(field: &str, m: &MapConfig) -> Result<Affine, CliError> {
    match m {
        MapConfig::Homothety { ratio, fixed } => {
            Ok(Affine::homothety(ratio.rational().map_err(|e| field_err(field, e))?, &point(field, fixed)?))
        }
        MapConfig::Affine { linear, translation } => {
            let s = |n: &Num| n.surd().map_err(|e| field_err(field, e));
            Ok(Affine {
                linear: [[s(&linear[0][0])?, s(&linear[0][1])?], [s(&linear[1][0])?, s(&linear[1][1])?]],
                translation: [s(&translation[0])?, s(&translation[1])?],
            })
        }
    }
}

fn build_fractal(fc: &FractalConfig) -> Result<FractalSpec, CliError> {
    let field = QuadField::new(fc.radicand).map_err(|e| field_err("fractal.radicand", e))?;
    let maps = fc
        .maps
        .iter()
        .enumerate()
        .map(|(i, m)| affine(&format!("fractal.maps[{i}]"), m))
        .collect::<Result<Vec<_>, _>>()?;
    let boundary = fc
        .boundary
        .iter()
        .enumerate()
        .map(|(i, p)| point(&format!("fractal.boundary[{i}]"), p))
        .collect::<Result<Vec<_>, _>>()?;
    let symmetries = fc
        .symmetries
        .iter()
        .enumerate()
        .map(|(i, m)| affine(&format!("fractal.symmetries[{i}]"), m))
        .collect::<Result<Vec<_>, _>>()?;
    FractalSpec::new(fc.name.clone(), field, maps, boundary, symmetries).map_err(|e| field_err("fractal", e))
}

fn build_bgd(
    bc: &BgdConfig,
    spec: &FractalSpec,
    hs: &HarmonicStructure,
    mu: &SelfSimilarMeasure,
) -> Result<BgdSystem, CliError> {
    let mut domains = Vec::with_capacity(bc.domains.len());
    for (i, d) in bc.domains.iter().enumerate() {
        let letters = d
            .letters
            .iter()
            .map(|l| match l {
                LetterConfig::Inside => Letter::Inside,
                LetterConfig::Outside => Letter::Outside,
                LetterConfig::Edge { target, symmetry, extra_boundary } => {
                    Letter::Edge { target: *target, symmetry: *symmetry, extra_boundary: extra_boundary.clone() }
                }
            })
            .collect();
        domains.push(Domain::new(&d.name, &d.status, letters).map_err(|e| field_err(&format!("bgd.domains[{i}]"), e))?);
    }
    let variant = if bc.widetilde { Variant::Widetilde } else { Variant::Bgd };
    BgdSystem::new(bc.name.clone(), spec.clone(), hs.clone(), mu.clone(), domains, variant)
        .map_err(|e| field_err("bgd", e))
}

fn parse_bcs(list: &[String]) -> Result<Vec<BoundaryCondition>, CliError> {
    if list.is_empty() {
        return Err(field_err("bc", "at least one boundary condition is required"));
    }
    let mut out = Vec::new();
    for s in list {
        let bc = BoundaryCondition::parse(s).ok_or_else(|| field_err("bc", format!("unknown boundary condition `{s}`")))?;
        if !out.contains(&bc) {
            out.push(bc);
        }
    }
    Ok(out)
}

pub struct Overrides {
    pub levels: Option<Vec<usize>>,
    pub bc: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn resolve(self, ov: Overrides) -> Result<Experiment, CliError> {
        let preset_bgd = match &self.bgd {
            Some(Named::Preset(name)) => {
                Some(bgd_preset(name).map_err(|_| field_err("bgd", format!("unknown BGD preset `{name}`")))?)
            }
            _ => None,
        };
        // fractal: explicit, else the one underlying a preset system, else SG
        let spec = match (&self.fractal, &preset_bgd) {
            (Some(Named::Preset(name)), _) => {
                fractal_preset(name).ok_or_else(|| field_err("fractal", format!("unknown fractal preset `{name}`")))?
            }
            (Some(Named::Inline(fc)), _) => build_fractal(fc)?,
            (None, Some(sys)) => sys.spec.clone(),
            (None, None) => fractal_preset("sg").expect("sg preset"),
        };
        let is_snowflake = spec.name == "snowflake";
        let hs = match &self.harmonic {
            Some(h) => {
                let d = h
                    .d
                    .iter()
                    .map(|row| row.iter().map(|v| v.rational().map_err(|e| field_err("harmonic.d", e))).collect())
                    .collect::<Result<Vec<Vec<_>>, _>>()?;
                let r = h.r.iter().map(|v| v.rational().map_err(|e| field_err("harmonic.r", e))).collect::<Result<_, _>>()?;
                HarmonicStructure::new(d, r).map_err(|e| field_err("harmonic", e))?
            }
            None if is_snowflake => {
                let r = match &self.snowflake_r {
                    Some(v) => v.rational().map_err(|e| field_err("snowflake_r", e))?,
                    None => snowflake_default_r(),
                };
                snowflake_harmonic(r).map_err(|e| field_err("snowflake_r", e))?
            }
            None if spec.name == "sg" => sg_harmonic(),
            None => return Err(field_err("harmonic", "required for a user-defined fractal")),
        };
        hs.check_against(&spec).map_err(|e| field_err("harmonic", e))?;
        let mu = match &self.measure {
            Some(w) => SelfSimilarMeasure::new(
                w.iter().map(|v| v.rational().map_err(|e| field_err("measure", e))).collect::<Result<_, _>>()?,
            )
            .map_err(|e| field_err("measure", e))?,
            None => SelfSimilarMeasure::uniform(spec.alphabet_size()),
        };
        let bgd = match (&self.bgd, preset_bgd) {
            (Some(Named::Inline(bc)), _) => Some(build_bgd(bc, &spec, &hs, &mu)?),
            (_, Some(sys)) => {
                let custom = self.fractal.is_some() || self.harmonic.is_some() || self.measure.is_some() || self.snowflake_r.is_some();
                if custom {
                    Some(
                        BgdSystem::new(sys.name.clone(), spec.clone(), hs.clone(), mu.clone(), sys.domains.clone(), sys.variant)
                            .map_err(|e| field_err("bgd", e))?,
                    )
                } else {
                    Some(sys)
                }
            }
            _ => None,
        };
        let default_levels = if is_snowflake { vec![1, 2] } else { vec![4, 5, 6, 7] };
        let levels = ov.levels.or(self.levels).unwrap_or(default_levels);
        if levels.is_empty() {
            return Err(field_err("levels", "at least one level is required"));
        }
        let cap = level_cap();
        if let Some(&l) = levels.iter().find(|&&l| l > cap) {
            return Err(field_err("levels", format!("level {l} exceeds the cap {cap} (FRACTAL_SPECTRA_LEVEL_CAP)")));
        }
        let bcs = parse_bcs(&ov.bc.or(self.bc).unwrap_or_else(|| vec!["D".into(), "N".into()]))?;
        if self.grid.start <= 0.0 || self.grid.decades <= 0.0 || self.grid.points_per_decade == 0 {
            return Err(field_err("grid", "need start > 0, decades > 0 and points_per_decade ≥ 1"));
        }
        let a = &self.asymptotics;
        if !(a.window[0] >= 0.0 && a.window[1] > a.window[0]) || a.bins == 0 || a.engine_level == 0 {
            return Err(field_err("asymptotics", "need 0 ≤ window[0] < window[1], bins ≥ 1, engine_level ≥ 1"));
        }
        let name = bgd.as_ref().map_or_else(|| spec.name.clone(), |b| b.name.clone());
        Ok(Experiment {
            name,
            spec,
            hs,
            mu,
            bgd,
            levels,
            bcs,
            grid: self.grid,
            out: ov.out.or(self.out),
            pin_v0: self.pin_v0,
            method: self.method,
            asymptotics: self.asymptotics,
        })
    }
}
