use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentz-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("LORENTZ_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report_value(report: &str, key: &str) -> Option<String> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = ").map(str::to_string))
}

#[test]
fn version_prints_the_crate_version() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["version"], tmp.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), format!("lorentz-lab {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn recipe_listing_names_the_incompleteness_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["recipes"], tmp.path());
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["schwarzschild-interior-collapse", "clifton-pohl-incomplete", "milne-incomplete", "ads2-refocus"] {
        assert!(s.lines().any(|l| l.starts_with(name)), "{name} missing from\n{s}");
    }
}

#[test]
fn shown_recipe_runs_from_a_file() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["recipes", "--show", "flrw-bigbang"], tmp.path());
    assert!(o.status.success());
    std::fs::write(tmp.path().join("bang.scn"), &o.stdout).unwrap();
    let o = lab(&["run", "bang.scn"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert_eq!(report_value(&s, "satisfied").as_deref(), Some("true"));
    assert!(tmp.path().join("bang.csv").exists());
    assert!(tmp.path().join("bang.report.txt").exists());
}

#[test]
fn unknown_metric_is_a_config_error_naming_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.scn"),
        "[metric]\nname = \"kerr\"\n\n[run]\nkind = \"curvature\"\nmatter = \"vacuum\"\nsamples = 3\n",
    )
    .unwrap();
    let o = lab(&["run", "bad.scn"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let err = report_value(&stdout(&o), "error").unwrap();
    assert!(err.contains("metric.name"), "{err}");
    assert!(err.contains("kerr"), "{err}");
}

#[test]
fn malformed_toml_and_missing_files_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("broken.scn"), "[metric\nname = ").unwrap();
    assert_eq!(lab(&["run", "broken.scn"], tmp.path()).status.code(), Some(3));
    assert_eq!(lab(&["run", "no-such-thing.scn"], tmp.path()).status.code(), Some(3));
    std::fs::write(
        tmp.path().join("extra.scn"),
        "[metric]\nname = \"minkowski\"\ncolour = 1\n\n[run]\nkind = \"curvature\"\nmatter = \"vacuum\"\n",
    )
    .unwrap();
    assert_eq!(lab(&["run", "extra.scn"], tmp.path()).status.code(), Some(3));
}

#[test]
fn failed_expectation_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let src = r#"
[metric]
name = "minkowski"
params = { n = 3 }

[run]
kind = "expansion"
slice = { type = "isotropic", expansion = -3.0 }
x = [0.0, 0.0, 0.0, 0.0]
t_max = 2.0

[expect]
t_star = { value = 0.5, tol = 1e-9 }
"#;
    std::fs::write(tmp.path().join("wrong.scn"), src).unwrap();
    let o = lab(&["run", "wrong.scn"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(report_value(&stdout(&o), "expect.t_star").unwrap().starts_with("FAIL"));
}

#[test]
fn ads2_refocuses_at_pi() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["run", "ads2-refocus"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let t: f64 = report_value(&stdout(&o), "t_star_max").unwrap().parse().unwrap();
    assert!((t - std::f64::consts::PI).abs() < 1e-4);
    let csv = std::fs::read_to_string(tmp.path().join("ads2-refocus.det.csv")).unwrap();
    assert!(csv.starts_with("# lorentz-lab "));
    assert!(csv.lines().any(|l| l == "direction,t,det_a"));
}

#[test]
fn csv_output_is_reproducible_across_runs_and_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let names = ["twin-minkowski", "schwarzschild-vacuum", "ads2-refocus"];
    let mut args = vec!["run"];
    args.extend(names);
    assert!(lab(&args, a.path()).status.success());
    args.extend(["--jobs", "3"]);
    assert!(lab(&args, b.path()).status.success());
    for n in names {
        let file = format!("{n}.csv");
        let x = std::fs::read(a.path().join(&file)).unwrap();
        let y = std::fs::read(b.path().join(&file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
}

#[test]
fn seed_precedence_is_flag_then_scenario_then_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let src = "[metric]\nname = \"de-sitter\"\n\n[run]\nkind = \"curvature\"\nmatter = \"cosmological-constant\"\nlambda = 3.0\nsamples = 4\n";
    std::fs::write(tmp.path().join("ds.scn"), src).unwrap();
    std::fs::write(tmp.path().join("seeded.scn"), format!("seed = 11\n{src}")).unwrap();
    let seed_of = |args: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_lorentz-lab"));
        c.args(args).current_dir(tmp.path()).env_remove("LORENTZ_LAB_SEED");
        if let Some(v) = env {
            c.env("LORENTZ_LAB_SEED", v);
        }
        let o = c.output().unwrap();
        assert!(o.status.success(), "{}", stdout(&o));
        report_value(&stdout(&o), "seed").unwrap()
    };
    assert_eq!(seed_of(&["run", "ds.scn"], None), "1");
    assert_eq!(seed_of(&["run", "ds.scn"], Some("42")), "42");
    assert_eq!(seed_of(&["run", "seeded.scn"], Some("42")), "11");
    assert_eq!(seed_of(&["run", "seeded.scn", "--seed", "7"], Some("42")), "7");

    let first = std::fs::read(tmp.path().join("ds.csv")).unwrap();
    seed_of(&["run", "ds.scn", "--seed", "99"], None);
    let other = std::fs::read(tmp.path().join("ds.csv")).unwrap();
    assert_ne!(first, other, "different seeds should sample different points");
}

#[test]
fn invalid_seed_environment_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lorentz-lab"))
        .args(["run", "minkowski-line"])
        .current_dir(tmp.path())
        .env("LORENTZ_LAB_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn csv_header_carries_the_scenario_digest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(&["run", "minkowski-line"], tmp.path());
    assert!(o.status.success());
    let sha = report_value(&stdout(&o), "scenario_sha256").unwrap();
    let csv = std::fs::read_to_string(tmp.path().join("minkowski-line.csv")).unwrap();
    assert!(csv.lines().any(|l| l == format!("# scenario-sha256: {sha}")));
    assert_eq!(sha, lorentz_lab::output::sha256_hex(lorentz_lab::recipes::find("minkowski-line").unwrap().source.as_bytes()));
}
