use std::path::Path;

use fractal_spectra::asymptotics::{
    leading_profile, remainder_regime, second_profile, verify_bracketing, LeadingTerm, SecondTermReport,
};
use fractal_spectra::bgd::{analyze as analyze_system, bgd_consistency, bgd_preset, BgdSystem, Variant, BGD_PRESETS};
use fractal_spectra::exact::rational_to_f64;
use fractal_spectra::forms::{check_compatibility, gamma_data};
use fractal_spectra::spectra::{decimate, solve_dense};
use fractal_spectra::{
    geometric_form, BoundaryCondition, CellTable, Counting, Error, IncidenceAnalysis, InertiaCounter, Realization,
    Spectrum,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Experiment, Method};
use crate::error::{CliError, EXIT_CONSISTENCY, EXIT_DATA};
use crate::output::{
    counting_path, num, out_dir, profile_summary, read_spectrum, sanitize, spectrum_path, write_csv, write_json,
    write_profile, write_spectrum,
};

/// Name used for the whole fractal in file names.
const BASE: &str = "K";

fn system(exp: &Experiment) -> Result<&BgdSystem, CliError> {
    exp.bgd.as_ref().ok_or_else(|| CliError::config("this command needs a domain system (`bgd` preset or inline)"))
}

fn realization(exp: &Experiment, bc: BoundaryCondition) -> Realization {
    if exp.pin_v0 && bc == BoundaryCondition::Dirichlet {
        Realization::PinV0
    } else {
        Realization::Boundary
    }
}

fn base_root(table: &CellTable, bc: BoundaryCondition) -> usize {
    match bc {
        BoundaryCondition::Dirichlet => table.killed,
        BoundaryCondition::Neumann => table.full,
    }
}

fn base_counter(exp: &Experiment, n: usize, bc: BoundaryCondition) -> Result<InertiaCounter, CliError> {
    let table = CellTable::base(exp.spec.q(), exp.spec.alphabet_size());
    let root = base_root(&table, bc);
    Ok(InertiaCounter::new(&exp.spec, &exp.hs, &exp.mu, table, root, n, bc)?)
}

pub fn analysis_json(sys: &BgdSystem, an: &IncidenceAnalysis) -> Value {
    let classes: Vec<Value> = an
        .classes
        .iter()
        .map(|c| {
            json!({
                "members": c.members,
                "cyclic": c.cyclic,
                "radius": c.radius,
                "basic": c.basic,
                "period": c.period,
                "height": c.height,
            })
        })
        .collect();
    json!({
        "system": sys.name,
        "variant": match sys.variant { Variant::Bgd => "bgd", Variant::Widetilde => "widetilde" },
        "domains": sys.domains.iter().map(|d| d.name.clone()).collect::<Vec<_>>(),
        "incidence_matrix": an.a,
        "psi": an.psi,
        "d": an.d,
        "d_s": an.d_s,
        "gamma": an.gamma,
        "period_T": an.period,
        "irreducible": an.irreducible,
        "classes": classes,
        "heights": an.heights,
        "reaches_basic": an.reaches_basic,
        "return_periods": an.return_periods,
        "rho": an.rho,
        "rho_j": an.rho_j,
        "access": an.access,
        "b": an.b,
        "left": an.left,
        "c": an.c.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "c_f64": an.c.iter().map(rational_to_f64).collect::<Vec<_>>(),
        "s": an.s,
    })
}

pub fn analyze(exp: &Experiment) -> Result<(), CliError> {
    let sys = system(exp)?;
    let an = analyze_system(sys)?;
    let compat = check_compatibility(&sys.hs, &sys.spec)?;
    let depth = exp.levels.iter().copied().max().unwrap_or(1).max(1);
    let cons = bgd_consistency(sys, depth)?;
    let mut report = analysis_json(sys, &an);
    report["compatibility"] = json!({
        "pass": compat.pass,
        "residual": compat.residual.to_string(),
        "residual_f64": rational_to_f64(&compat.residual),
    });
    report["consistency"] = json!({
        "pass": cons.pass,
        "levels_checked": cons.levels_checked,
        "first_violation": cons.first_violation.as_ref().map(|v| json!({
            "level": v.level,
            "letter": v.letter,
            "point": v.point,
            "detail": v.detail,
        })),
    });
    let dir = out_dir(&exp.out)?;
    write_json(&dir.join("analysis.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("JSON values serialize"));
    if !cons.pass {
        let v = cons.first_violation.expect("failing report has a violation");
        return Err(CliError::new(
            EXIT_CONSISTENCY,
            format!("boundary recursion fails at level {}: {}", v.level, v.detail),
        ));
    }
    Ok(())
}

struct Job {
    domain: Option<usize>,
    name: String,
    bc: BoundaryCondition,
    level: usize,
}

fn jobs(exp: &Experiment) -> Vec<Job> {
    let mut out = Vec::new();
    for &level in &exp.levels {
        for &bc in &exp.bcs {
            out.push(Job { domain: None, name: BASE.into(), bc, level });
            if let Some(sys) = &exp.bgd {
                for (i, d) in sys.domains.iter().enumerate() {
                    out.push(Job { domain: Some(i), name: d.name.clone(), bc, level });
                }
            }
        }
    }
    out
}

/// (spectrum, number of free vertices)
fn solve(exp: &Experiment, job: &Job) -> Result<(Spectrum, usize), CliError> {
    let (n, bc) = (job.level, job.bc);
    if job.domain.is_none() && exp.method != Method::Dense {
        match decimate(&exp.spec, &exp.hs, &exp.mu, n, bc) {
            Ok(s) => {
                let dim = s.total_count();
                return Ok((s, dim));
            }
            Err(Error::Unsupported(_)) if exp.method == Method::Auto => {}
            Err(e) => return Err(e.into()),
        }
    }
    if exp.method == Method::Decimation {
        return Err(Error::Unsupported(format!("spectral decimation of domain `{}`", job.name)).into());
    }
    let form = match job.domain {
        Some(i) => system(exp)?.domain_form(i, n, bc, realization(exp, bc))?,
        None => {
            let table = CellTable::base(exp.spec.q(), exp.spec.alphabet_size());
            let root = base_root(&table, bc);
            geometric_form(&exp.spec, &exp.hs, &exp.mu, &table, root, n, bc, false)?
        }
    };
    let s = solve_dense(&form)?;
    Ok((s, form.dim()))
}

fn write_counting(path: &Path, c: &dyn Counting, grid: &[f64]) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = grid.iter().map(|&x| vec![num(x), c.count(x).to_string()]).collect();
    write_csv(path, &["x", "count"], &rows, &[])
}

pub fn spectrum(exp: &Experiment, no_compute: bool) -> Result<(), CliError> {
    let dir = out_dir(&exp.out)?;
    let grid = exp.grid.points();
    let jobs = jobs(exp);
    let spectra: Vec<Result<(Spectrum, Option<usize>), CliError>> = if no_compute {
        jobs.iter()
            .map(|j| read_spectrum(&spectrum_path(&dir, &j.name, j.bc, j.level), &j.name, j.bc, j.level).map(|s| (s, None)))
            .collect()
    } else {
        jobs.par_iter().map(|j| solve(exp, j).map(|(s, d)| (s, Some(d)))).collect()
    };
    for (job, res) in jobs.iter().zip(spectra) {
        let (s, dim) = res?;
        let sp = spectrum_path(&dir, &job.name, job.bc, job.level);
        if let Some(dim) = dim {
            write_spectrum(&sp, &s, dim)?;
        }
        let cp = counting_path(&dir, &job.name, job.bc, job.level);
        write_counting(&cp, &s.counting(), &grid)?;
        println!(
            "{} {} L{}: {} positive, {} zero -> {}",
            job.name,
            job.bc.tag(),
            job.level,
            s.positive_count(),
            s.zero_multiplicity,
            sp.display()
        );
    }
    Ok(())
}

/// Counting functions for one boundary condition: the whole fractal and
/// every domain, at one level.
struct Counters {
    base: Box<dyn Counting + Send + Sync>,
    domains: Vec<Box<dyn Counting + Send + Sync>>,
    /// Largest eigenvalue, when known.
    top: Option<f64>,
}

impl Counters {
    fn domain_refs(&self) -> Vec<&dyn Counting> {
        self.domains.iter().map(|d| d.as_ref() as &dyn Counting).collect()
    }
}

fn counters(exp: &Experiment, n: usize, bc: BoundaryCondition, cached: bool) -> Result<Counters, CliError> {
    let names: Vec<String> = exp.bgd.iter().flat_map(|s| s.domains.iter().map(|d| d.name.clone())).collect();
    if cached {
        let dir = out_dir(&exp.out)?;
        let load = |name: &str| read_spectrum(&spectrum_path(&dir, name, bc, n), name, bc, n);
        let base = load(BASE)?;
        let top = base.max_value();
        let domains = names
            .iter()
            .map(|nm| load(nm).map(|s| Box::new(s.counting()) as Box<dyn Counting + Send + Sync>))
            .collect::<Result<_, _>>()?;
        return Ok(Counters { base: Box::new(base.counting()), domains, top });
    }
    let base = Box::new(base_counter(exp, n, bc)?);
    let mut domains: Vec<Box<dyn Counting + Send + Sync>> = Vec::new();
    if let Some(sys) = &exp.bgd {
        for i in 0..sys.len() {
            domains.push(Box::new(sys.domain_counter(i, n, bc, realization(exp, bc))?));
        }
    }
    Ok(Counters { base, domains, top: None })
}

/// Window [x_lo, x_hi] in x. From cached spectra the window is pulled below
/// the top of the spectrum, where the discrete counts are not yet asymptotic.
fn window(exp: &Experiment, period: f64, top: Option<f64>) -> Result<(f64, f64, [f64; 2]), CliError> {
    let [mut lo, mut hi] = exp.asymptotics.window;
    if let Some(top) = top {
        let p_top = top.ln() / (2.0 * period);
        hi = hi.min(p_top - 4.0);
        lo = lo.min(hi - 4.0);
        if lo < 0.0 {
            return Err(CliError::new(
                EXIT_DATA,
                format!("cached spectra reach only {p_top:.2} periods; raise the levels or drop --no-compute"),
            ));
        }
    }
    let x = |p: f64| (2.0 * p * period).exp();
    Ok((x(lo), x(hi), [lo, hi]))
}

fn bracketing_json(
    exp: &Experiment,
    sys: &BgdSystem,
    an: &IncidenceAnalysis,
    bc: BoundaryCondition,
    cached: bool,
) -> Result<Value, CliError> {
    let grid = exp.grid.points();
    let bound = (an.n_letters * sys.spec.q()) as f64;
    let mut levels = Vec::new();
    for &n in &exp.levels {
        if n == 0 || (cached && !exp.levels.contains(&(n - 1))) {
            continue;
        }
        let fine = counters(exp, n, bc, cached)?;
        let coarse = counters(exp, n - 1, bc, cached)?;
        let r = verify_bracketing(
            &fine.domain_refs(),
            &coarse.domain_refs(),
            coarse.base.as_ref(),
            &an.a,
            &an.s,
            an.gamma * an.gamma,
            bound,
            &grid,
        )?;
        levels.push(json!({
            "level": n,
            "bound": r.bound,
            "violation": r.violation,
            "max_residual": r.residuals.iter().map(|p| p.1).fold(0.0, f64::max),
            "worst_domain": sys.domains[r.worst.0].name,
            "worst_x": r.worst.1,
        }));
    }
    Ok(json!({ "grid_points": grid.len(), "levels": levels }))
}

pub fn asymptotics(exp: &Experiment, no_compute: bool) -> Result<(), CliError> {
    let dir = out_dir(&exp.out)?;
    let gd = gamma_data(&exp.hs, &exp.mu)?;
    let regime = match remainder_regime(&gd.gammas, gd.d_s) {
        Ok(r) => json!({
            "period": r.period,
            "m": r.m,
            "p": r.p,
            "q_coeffs": r.q_coeffs,
            "beta": r.beta,
            "multiplicity": r.multiplicity,
            "regime": r.regime.label(),
        }),
        Err(e @ (Error::Unsupported(_) | Error::InvalidInput(_))) => json!({ "status": "unsupported", "reason": e.to_string() }),
        Err(e) => return Err(e.into()),
    };
    let an = exp.bgd.as_ref().map(analyze_system).transpose()?;
    let period = match (&an, gd.period) {
        (Some(a), _) => a.period,
        (None, Some(t)) => t,
        (None, None) => return Err(Error::Unsupported("profiles need a common γ_i (lattice case)".into()).into()),
    };
    let level = if no_compute {
        exp.levels.iter().copied().max().expect("levels are non-empty")
    } else {
        exp.asymptotics.engine_level
    };
    let bins = exp.asymptotics.bins;
    for &bc in &exp.bcs {
        let c = counters(exp, level, bc, no_compute)?;
        let (x_lo, x_hi, w) = window(exp, period, c.top)?;
        let g = leading_profile(c.base.as_ref(), gd.d_s, period, x_lo, x_hi, bins)?;
        write_profile(&dir.join(format!("G_{}.csv", bc.tag())), &g)?;
        let mut report = json!({
            "experiment": exp.name,
            "bc": bc.tag(),
            "level": level,
            "source": if no_compute { "cached spectra" } else { "inertia counter" },
            "window_periods": w,
            "window_x": [x_lo, x_hi],
            "d_s": gd.d_s,
            "period_T": period,
            "G": profile_summary(&g),
            "regime": regime.clone(),
        });
        if let (Some(sys), Some(an)) = (&exp.bgd, &an) {
            report["system"] = json!(sys.name);
            report["second_term"] = match second_profile(&c.domain_refs(), LeadingTerm::Base(c.base.as_ref()), an, x_lo, x_hi, bins) {
                Ok(SecondTermReport::Profile(st)) => {
                    let mut doms = Vec::new();
                    for (d, p) in sys.domains.iter().zip(&st.domains) {
                        let Some(p) = p else {
                            doms.push(json!({ "domain": d.name, "profile": null }));
                            continue;
                        };
                        let file = format!("G_{}_{}.csv", sanitize(&d.name), bc.tag());
                        write_profile(&dir.join(&file), p)?;
                        let mut s = profile_summary(p);
                        s["domain"] = json!(d.name);
                        s["file"] = json!(file);
                        s["max_bin_mean"] = json!(p.bins.iter().map(|b| b.mean).fold(f64::NEG_INFINITY, f64::max));
                        doms.push(s);
                    }
                    let file = format!("G_star_{}.csv", bc.tag());
                    write_profile(&dir.join(&file), &st.consensus)?;
                    json!({
                        "status": "profile",
                        "exponent_d": an.d,
                        "domains": doms,
                        "shifts": st.shifts,
                        "consensus": profile_summary(&st.consensus),
                        "consensus_file": file,
                        "max_pair_gap": st.max_pair_gap,
                        "max_pair_ratio": st.max_pair_ratio,
                    })
                }
                Ok(SecondTermReport::BoundedRemainder { sup_lower, sup_upper }) => json!({
                    "status": "bounded_remainder",
                    "sup_lower": sup_lower,
                    "sup_upper": sup_upper,
                }),
                Err(e @ Error::Unsupported(_)) => json!({ "status": "unsupported", "reason": e.to_string() }),
                Err(e) => return Err(e.into()),
            };
            report["bracketing"] = bracketing_json(exp, sys, an, bc, no_compute)?;
        }
        let path = dir.join(format!("asymptotics_{}.json", bc.tag()));
        write_json(&path, &report)?;
        println!("{} -> {}", bc.tag(), path.display());
    }
    Ok(())
}

pub fn presets() {
    println!("fractals:");
    println!("  sg          Sierpinski gasket");
    println!("  snowflake   hexagonal snowflake (7 maps)");
    println!("domain systems:");
    for name in BGD_PRESETS {
        let sys = bgd_preset(name).expect("bundled presets are valid");
        let names: Vec<&str> = sys.domains.iter().map(|d| d.name.as_str()).collect();
        println!("  {name:<15} on {}, domains {}", sys.spec.name, names.join(", "));
    }
    println!("renewal systems:");
    for (name, about) in crate::renewal::PRESETS {
        println!("  {name:<15} {about}");
    }
}
