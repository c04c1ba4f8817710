use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fractal-spectra"));
    c.env_remove("FRACTAL_SPECTRA_LEVEL_CAP");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn footer(path: &Path, key: &str) -> usize {
    let text = fs::read_to_string(path).unwrap();
    let line = text.lines().find_map(|l| l.strip_prefix(&format!("# {key},"))).unwrap();
    line.parse().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn analyze_reports_perron_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--preset", "snowflake-koch", "--levels", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("analysis.json"));
    assert!((r["psi"].as_f64().unwrap() - 4.0).abs() < 1e-9);

    let o = run(&["analyze", "--preset", "sg-cut-bottom"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("analysis.json"));
    let d = 2.0 * 2f64.ln() / 5f64.ln();
    assert!((r["d"].as_f64().unwrap() - d).abs() < 1e-9);
    assert_eq!(r["incidence_matrix"], serde_json::json!([[2]]));
    assert_eq!(r["consistency"]["pass"], true);
}

#[test]
fn analyze_needs_a_domain_system() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["analyze", "--preset", "sg"], dir.path())), 2);
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"bgd": "sg-halves", "grid": {"points_per_decade": "ten"}}"#).unwrap();
    let o = run(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("grid.points_per_decade"), "{}", stderr(&o));

    fs::write(&cfg, r#"{"bgd": "sg-halves", "levles": [2]}"#).unwrap();
    let o = run(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("levles"), "{}", stderr(&o));

    fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(code(&run(&["analyze", "--config", cfg.to_str().unwrap()], dir.path())), 2);
}

#[test]
fn unknown_presets_and_bad_flags_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["spectrum", "--preset", "sg-quarters"], dir.path())), 2);
    assert_eq!(code(&run(&["spectrum", "--preset", "sg", "--bc", "R"], dir.path())), 2);
    assert_eq!(code(&run(&["spectrum", "--preset", "sg", "--levels", "13"], dir.path())), 2);
    let o = bin()
        .args(["spectrum", "--preset", "sg", "--levels", "4", "--out"])
        .arg(dir.path())
        .env("FRACTAL_SPECTRA_LEVEL_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn sg_level_one_dirichlet_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--preset", "sg", "--levels", "1", "--bc", "D"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("spectrum_K_D_L1.csv"));
    assert_eq!(r, vec![vec![15.0, 1.0], vec![37.5, 2.0]]);
    let text = fs::read_to_string(dir.path().join("spectrum_K_D_L1.csv")).unwrap();
    assert!(text.starts_with("eigenvalue,multiplicity\n1.5000000000000000e1,1\n"));
    let c = rows(&dir.path().join("counting_K_D_L1.csv"));
    assert_eq!(c.len(), 301);
    assert!(c.iter().all(|r| r[1] == if r[0] < 15.0 { 0.0 } else if r[0] < 37.5 { 1.0 } else { 3.0 }));
}

#[test]
fn domain_spectra_audit_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--preset", "sg-cut-bottom", "--levels", "3"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = dir.path().join("spectrum_CB_D_L3.csv");
    assert_eq!(footer(&d, "positive"), footer(&d, "free_dim"));
    assert_eq!(footer(&d, "zero"), 0);

    let n = dir.path().join("spectrum_CB_N_L3.csv");
    assert_eq!(footer(&n, "zero"), 1);
    assert!(rows(&n).iter().all(|r| r[0] > 0.0));
    assert_eq!(footer(&n, "positive") + 1, footer(&n, "free_dim"));
    let k = dir.path().join("spectrum_K_N_L3.csv");
    assert_eq!(footer(&k, "zero"), 1);
}

#[test]
fn dense_cap_exits_with_resource_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum", "--preset", "sg-cut-bottom", "--levels", "9", "--bc", "D"], dir.path());
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("dense cap"), "{}", stderr(&o));
}

#[test]
fn cached_spectra_are_reused_or_reported_missing() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["spectrum", "--preset", "sg", "--levels", "3", "--no-compute"], dir.path())), 5);
    assert_eq!(code(&run(&["asymptotics", "--preset", "sg-halves", "--no-compute"], dir.path())), 5);

    assert_eq!(code(&run(&["spectrum", "--preset", "sg", "--levels", "3"], dir.path())), 0);
    let counting = dir.path().join("counting_K_D_L3.csv");
    let before = fs::read(&counting).unwrap();
    fs::remove_file(&counting).unwrap();
    assert_eq!(code(&run(&["spectrum", "--preset", "sg", "--levels", "3", "--no-compute"], dir.path())), 0);
    assert_eq!(fs::read(&counting).unwrap(), before);
}

#[test]
fn cut_bottom_second_term_is_non_positive() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["asymptotics", "--preset", "sg-cut-bottom", "--bc", "D"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&dir.path().join("asymptotics_D.json"));
    assert_eq!(r["second_term"]["status"], "profile");
    let g = &r["second_term"]["domains"][0];
    let fr = g["fold_residual"].as_f64().unwrap();
    let bins = rows(&dir.path().join("G_CB_D.csv"));
    assert_eq!(bins.len(), 64);
    assert!(bins.iter().all(|b| b[1] <= 3.0 * fr));
    assert!(g["amplitude"].as_f64().unwrap() > 10.0 * fr);
    let br = r["bracketing"]["levels"].as_array().unwrap();
    assert_eq!(br.len(), 4);
    assert!(br.iter().all(|l| l["violation"].as_f64().unwrap() <= 0.0));
    assert!(dir.path().join("G_D.csv").exists());
    assert_eq!(r["regime"]["regime"], "p<beta");
}

#[test]
fn halves_take_the_bounded_remainder_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["asymptotics", "--preset", "sg-halves", "--bc", "D,N"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for bc in ["D", "N"] {
        let r = json(&dir.path().join(format!("asymptotics_{bc}.json")));
        assert_eq!(r["second_term"]["status"], "bounded_remainder");
        assert_eq!(r["second_term"]["sup_upper"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn renewal_demos() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["renewal", "--preset", "staircase", "--horizon", "10"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for r in rows(&dir.path().join("renewal_trace.csv")) {
        assert_eq!(r[1], r[0].floor() + 1.0, "x = {}", r[0]);
    }

    let o = run(&["renewal", "--preset", "swap"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&dir.path().join("renewal_summary.json"));
    assert_eq!(s["asymptotics"]["kind"], "periodic_limit");
    assert!(s["asymptotics"]["deviation"].as_f64().unwrap() < 1e-6);

    let o = run(&["renewal", "--preset", "chain"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = json(&dir.path().join("renewal_summary.json"));
    let degrees: Vec<u64> =
        s["asymptotics"]["components"].as_array().unwrap().iter().map(|c| c["degree"].as_u64().unwrap()).collect();
    assert_eq!(degrees, [2, 1, 0]);
}

#[test]
fn renewal_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["renewal", "--preset", "swap", "--horizon", "0"], dir.path())), 2);
    let cfg = dir.path().join("div.json");
    fs::write(&cfg, r#"{"a": [[0, 3], [1, 0]], "z": [[1, 1], {"from": 0, "to": 0.5}]}"#).unwrap();
    assert_eq!(code(&run(&["renewal", "--config", cfg.to_str().unwrap()], dir.path())), 6);
    fs::write(&cfg, r#"{"a": [[1, 2]], "z": [[1]]}"#).unwrap();
    let o = run(&["renewal", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`a`"), "{}", stderr(&o));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        for cmd in ["spectrum", "asymptotics"] {
            let o = run(&[cmd, "--preset", "sg-thirds", "--levels", "3,4"], dir);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
        }
        assert_eq!(code(&run(&["analyze", "--preset", "sg-thirds", "--levels", "3,4"], dir)), 0);
    }
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert!(sa.len() > 20);
    assert_eq!(sa, sb);
}

#[test]
fn presets_lists_everything() {
    let o = bin().arg("presets").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["sg", "snowflake", "sg-cut-bottom", "sg-halves", "sg-omega3", "sg-thirds", "sg-tilde", "snowflake-koch", "swap"] {
        assert!(text.contains(name), "missing {name}");
    }
}

const INLINE_CUT_BOTTOM: &str = r#"{
  "fractal": {
    "name": "gasket",
    "maps": [
      {"ratio": "1/2", "fixed": [0, 0]},
      {"ratio": "1/2", "fixed": [1, 0]},
      {"ratio": "1/2", "fixed": ["1/2", ["0", "1/2"]]}
    ],
    "boundary": [[0, 0], [1, 0], ["1/2", ["0", "1/2"]]]
  },
  "harmonic": {"d": [[-2, 1, 1], [1, -2, 1], [1, 1, -2]], "r": ["3/5", "3/5", "3/5"]},
  "bgd": {
    "name": "sg-cut-bottom",
    "domains": [{"name": "CB", "status": "bbi", "letters": [
      {"kind": "edge", "target": 0}, {"kind": "edge", "target": 0}, {"kind": "inside"}
    ]}]
  },
  "levels": [2, 3]
}"#;

#[test]
fn inline_system_matches_its_preset() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("cb.json");
    fs::write(&cfg, INLINE_CUT_BOTTOM).unwrap();
    let o = run(&["analyze", "--config", cfg.to_str().unwrap()], a.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!((json(&a.path().join("analysis.json"))["psi"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    assert_eq!(code(&run(&["spectrum", "--config", cfg.to_str().unwrap()], a.path())), 0);
    assert_eq!(code(&run(&["spectrum", "--preset", "sg-cut-bottom", "--levels", "2,3"], b.path())), 0);
    for f in ["spectrum_CB_D_L3.csv", "spectrum_CB_N_L2.csv", "spectrum_K_D_L3.csv", "counting_CB_N_L3.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn inline_fractal_without_harmonic_structure_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("f.json");
    let text = INLINE_CUT_BOTTOM.replace(
        r#""harmonic": {"d": [[-2, 1, 1], [1, -2, 1], [1, 1, -2]], "r": ["3/5", "3/5", "3/5"]},"#,
        "",
    );
    fs::write(&cfg, text).unwrap();
    let o = run(&["analyze", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("harmonic"), "{}", stderr(&o));
}
