use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use glab::config::{parse_json, ExperimentConfig};
use glab::{run_experiment, Experiment, RunArtifact};
use glab_core::farey::{LaminationSeqSpec, Slope};
use glab_core::geometry::MobiusMap;
use glab_core::grafting::{iterate_graft_limit, GraftedStructure};
use glab_core::holonomy::{build_bent, FnCoordinates, HolonomyRep};
use glab_core::lamination::Weight;
use glab_core::pleated::{convergence_experiment, ConvergenceOptions};
use glab_core::topology::CurveClass;
use glab_core::{Mobius, C64};

fn glab(out: &Path, cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glab")).args(args).env("GLAB_OUT", out).current_dir(cwd).output().expect("glab runs")
}

fn run_dir(o: &Output) -> PathBuf {
    let line = String::from_utf8_lossy(&o.stdout);
    PathBuf::from(line.split_whitespace().nth(2).unwrap_or_else(|| panic!("no output dir in {line:?}; stderr {}", String::from_utf8_lossy(&o.stderr))))
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v.into_iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())).collect()
}

fn artifact(dir: &Path, id: &str) -> RunArtifact {
    serde_json::from_slice(&std::fs::read(dir.join(format!("{id}.json"))).unwrap()).unwrap()
}

fn csv_rows(dir: &Path, id: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(dir.join(format!("{id}.csv"))).unwrap();
    r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect()
}

fn fnc() -> FnCoordinates {
    FnCoordinates::genus2([2.0, 2.0, 2.0], [0.0, 0.0, 0.0])
}

#[test]
fn graft_iterate_weights() {
    let t = tempfile::tempdir().unwrap();
    let o = glab(t.path(), t.path(), &["graft", "iterate", "--loop", "a1", "--imax", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = run_dir(&o);
    let rows = csv_rows(&dir, "graft-iterate");
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[1], i.to_string());
        assert_eq!(r[2].parse::<f64>().unwrap(), 2.0 * std::f64::consts::PI * i as f64);
        assert_eq!(r[3], "true");
    }
    let a = artifact(&dir, "graft-iterate");
    assert!(rows.iter().all(|r| r.last().unwrap() == &a.config_hash));
    assert_eq!(a.seed, 7);
    assert!(std::fs::read_to_string(dir.join("graft-iterate.svg")).unwrap().contains(&a.config_hash));
}

#[test]
fn reruns_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let (o1, o2) = (t.path().join("one"), t.path().join("two"));
    let args = ["schottky", "cert", "--gens", "a1,b1 A1 B1", "--seed", "11"];
    let d1 = run_dir(&glab(&o1, t.path(), &args));
    let d2 = run_dir(&glab(&o2, t.path(), &args));
    assert_eq!(files(&d1), files(&d2));
    assert_eq!(artifact(&d1, "schottky-cert").seed, 11);
    // from the config embedded in the artifact
    let o3 = t.path().join("three");
    let r = glab(&o3, t.path(), &["run", "--config", d1.join("schottky-cert.json").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let d3 = run_dir(&r);
    assert_eq!(d3.file_name(), d1.file_name());
    assert_eq!(files(&d1), files(&d3));
}

#[test]
fn writes_only_below_output_root() {
    let t = tempfile::tempdir().unwrap();
    let cwd = t.path().join("cwd");
    std::fs::create_dir(&cwd).unwrap();
    let out = t.path().join("out");
    assert_eq!(glab(&out, &cwd, &["graft", "iterate"]).status.code(), Some(0));
    assert_eq!(std::fs::read_dir(&cwd).unwrap().count(), 0);
    let dirs: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
    assert_eq!(dirs.len(), 1);
}

#[test]
fn converge_matches_direct_call() {
    let t = tempfile::tempdir().unwrap();
    let rho = build_bent(&fnc(), &[0.05, 0.0, 0.0]).unwrap();
    let rep = t.path().join("rep.json");
    std::fs::write(&rep, serde_json::to_string(&rho).unwrap()).unwrap();
    let o = glab(t.path(), t.path(), &["pleated", "converge", "--rep", rep.to_str().unwrap(), "--jmin", "-2", "--jmax", "12"]);
    let dir = run_dir(&o);
    let spec = LaminationSeqSpec::torus(1, Slope::ZERO, Slope::INF);
    let direct = convergence_experiment(&rho, &spec, -2, 12, &ConvergenceOptions::default()).unwrap();
    let rows = csv_rows(&dir, "pleated-converge");
    assert_eq!(rows.len(), direct.rows.len());
    for (r, d) in rows.iter().zip(&direct.rows) {
        assert_eq!(r[0], d.j.to_string());
        assert_eq!(r[2].parse::<f64>().unwrap(), d.toward_end.unwrap());
        assert_eq!(r[3].parse::<f64>().unwrap(), d.toward_start.unwrap());
    }
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(artifact(&dir, "pleated-converge").status, glab::Status::Certified);
    // a far-off tolerance is not met
    let o = glab(t.path(), t.path(), &["pleated", "converge", "--rep", rep.to_str().unwrap(), "--jmin", "-2", "--jmax", "2", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(artifact(&run_dir(&o), "pleated-converge").status, glab::Status::Uncertified);
}

#[test]
fn cap_exhaustion_is_flagged() {
    let t = tempfile::tempdir().unwrap();
    let s0 = GraftedStructure::fuchsian(fnc()).unwrap();
    let sharp = s0.graft(&CurveClass::parse("a1", 2).unwrap(), 1).unwrap();
    let flat = GraftedStructure::new(fnc(), vec![(CurveClass::parse("b1", 2).unwrap(), 1), (CurveClass::parse("b2", 2).unwrap(), 2)]).unwrap();
    let p = |name: &str, body: String| {
        let f = t.path().join(name);
        std::fs::write(&f, body).unwrap();
        f.to_str().unwrap().to_string()
    };
    let (s, f) = (p("sharp.json", serde_json::to_string(&sharp).unwrap()), p("flat.json", serde_json::to_string(&flat).unwrap()));
    let caps = p("caps.json", r#"{"path": {"depth": 1, "word_length": 4}}"#.into());
    let o = glab(t.path(), t.path(), &["graft", "plan", "--sharp", &s, "--flat", &f, "--caps", &caps]);
    assert_eq!(o.status.code(), Some(2));
    let a = artifact(&run_dir(&o), "graft-plan");
    assert!(a.cap_exhausted && a.error.unwrap().contains("cap exhausted"));

    let o = glab(t.path(), t.path(), &["graft", "plan", "--sharp", &s, "--flat", &f]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&run_dir(&o), "graft-plan");
    assert_eq!(rows.last().unwrap()[0], "final");
    assert!(rows.iter().all(|r| r[7] == "true"));
}

#[test]
fn schottky_failures() {
    let t = tempfile::tempdir().unwrap();
    let e = Mobius::so2(0.5);
    let l = Mobius::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
    let rep = HolonomyRep::unchecked(2, vec![e, l, l, e]).unwrap();
    let f = t.path().join("rep.json");
    std::fs::write(&f, serde_json::to_string(&rep).unwrap()).unwrap();
    let o = glab(t.path(), t.path(), &["schottky", "cert", "--rep", f.to_str().unwrap(), "--gens", "a1,b1"]);
    assert_eq!(o.status.code(), Some(1));
    let a = artifact(&run_dir(&o), "schottky-cert");
    assert!(a.error.unwrap().contains("not loxodromic"));
    let cert: glab_core::schottky::SchottkyCertificate = serde_json::from_value(a.result).unwrap();
    assert_eq!(cert.disjointness_margin, f64::NEG_INFINITY);
    // a letter the genus does not have
    let o = glab(t.path(), t.path(), &["schottky", "cert", "--gens", "a3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
}

#[test]
fn density_target_file() {
    let t = tempfile::tempdir().unwrap();
    let f = t.path().join("target.json");
    std::fs::write(&f, r#"[{"genus": 2, "leaves": [], "twist_limit": {"base": [["b1", 1]], "along": ["a1"]}},
        {"genus": 2, "leaves": [{"curve": "a1", "weight": 0.3}, {"curve": "a2", "weight": 0.7}]}]"#)
    .unwrap();
    let o = glab(t.path(), t.path(), &["density", "--target", f.to_str().unwrap(), "--eps", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&run_dir(&o), "density");
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][3].as_str(), rows[0][4].as_str()), ("twist_limit", "21"));
    assert_eq!(rows[1][3], "multiloop");
    assert!(rows.iter().all(|r| r[7] == "true" && r[5].parse::<f64>().unwrap() < 0.05));
}

#[test]
fn usage_errors_exit_one() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(glab(t.path(), t.path(), &["no-such-experiment"]).status.code(), Some(1));
    assert_eq!(glab(t.path(), t.path(), &["graft", "plan"]).status.code(), Some(1));
    assert_eq!(glab(t.path(), t.path(), &["graft", "iterate", "--imax", "0"]).status.code(), Some(1));
    let f = t.path().join("x.json");
    std::fs::write(&f, r#"{"experiment": {"id": "graft-iterate"}}"#).unwrap();
    let o = glab(t.path(), t.path(), &["run", "--config", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config schema"));
}

#[test]
fn mobius_roundtrip() {
    let maps = [
        Mobius::from_real(2.0, 1.0, 1.0, 1.0).unwrap(),
        MobiusMap::new(C64::new(0.3, 1.7), C64::new(-2.0, 0.1), C64::new(0.4, -0.9), C64::new(1.1, 0.0)).unwrap(),
        build_bent(&fnc(), &[0.05, 0.0, 0.0]).unwrap().generators()[3],
    ];
    for m in maps {
        let back: Mobius = parse_json(&serde_json::to_string(&m).unwrap()).unwrap();
        assert!(back.distance(&m) < 1e-12);
        assert_eq!(back, m);
    }
}

#[test]
fn heavy_flag_roundtrip() {
    let s0 = GraftedStructure::fuchsian(fnc()).unwrap();
    let lim = iterate_graft_limit(&s0, &CurveClass::parse("a1", 2).unwrap(), 3).unwrap();
    let text = serde_json::to_string(&lim).unwrap();
    let back: glab_core::grafting::GraftLimit = parse_json(&text).unwrap();
    assert_eq!(back, lim);
    assert_eq!(back.limit.lamination.leaves[0].weight, Weight::Heavy);
}

#[test]
fn truncated_json_names_offset() {
    let cfg = ExperimentConfig::new(Experiment::GraftIterate { tau: fnc(), loop_curve: "a1".into(), imax: 3, tol: 1e-9 });
    let text = cfg.to_json();
    let cut = &text[..40];
    let e = parse_json::<ExperimentConfig>(cut).unwrap_err();
    assert_eq!(e.offset, 40);
    assert!(e.to_string().starts_with("byte 40"), "{e}");
    let multi = "{\n  \"a\": [1,\n  2,,\n";
    let e = parse_json::<serde_json::Value>(multi).unwrap_err();
    assert_eq!(&multi[e.offset - 1..e.offset], ",");
    // and a config survives the round trip exactly
    let back: ExperimentConfig = parse_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(run_experiment(&back).unwrap().artifact.config_hash, cfg.hash());
}
