use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_decaylab"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn csv_shape(path: &Path) -> (usize, usize) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let cols = lines.next().unwrap().split(',').count();
    (lines.count(), cols)
}

const SHORT_PRICE: &str = r#"
name = "short-price"
pipeline = "price-law"

[model]
family = "regge_wheeler"
mass = 1.0
ell = 0
sigma = 1

[grids]
x = [10.0]

[fd]
h = 0.1
t_final = 300.0
output_stride = 5

[fit]
window = [100.0, 300.0]
"#;

#[test]
fn price_law_writes_manifest_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "p.toml", SHORT_PRICE);
    let out = dir.path().join("out");
    let o = run(&["price-law", "--config", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_s"].as_f64().is_some());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("decay_report.json")).unwrap()).unwrap();
    let alpha = report["reports"][0]["alpha"].as_f64().unwrap();
    assert!(alpha > 2.5 && alpha < 4.0, "{alpha}");
    assert_eq!(report["reports"][0]["theory"]["exponent"].as_f64(), Some(3.0));

    // fit run on the emitted series reproduces the report
    let series = out.join("series.csv");
    let o = run(&["fit", "run", "--input", series.to_str().unwrap(), "--window", "100:300"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["reports"][0]["alpha"].as_f64().unwrap() - alpha).abs() < 0.05);

    let summary = dir.path().join("summary.csv");
    let o = run(&["fit", "compare", "--output", summary.to_str().unwrap(), out.join("decay_report.json").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_shape(&summary), (1, 9));
}

#[test]
fn rerun_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("scatter_rw.toml");
    let mut bytes = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = run(&["scatter", "sweep", "--config", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        bytes.push(fs::read(out.join("scattering.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    // 50 energies, 6 columns
    assert_eq!(csv_shape(&dir.path().join("run0/scattering.csv")), (50, 6));
}

#[test]
fn evolve_flags_give_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ev");
    let o = run(&[
        "evolve",
        "run",
        "--model",
        r#"family = "inverse_square_model", a = 0.7"#,
        "--stations",
        "-2,0,1,3,5",
        "--t",
        "0:4:3",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_shape(&out.join("field.csv")), (15, 4));
    let header = fs::read_to_string(out.join("field.csv")).unwrap();
    assert!(header.starts_with("t,x,value,abs_value\n"));
    assert!(out.join("field.json").exists());
}

#[test]
fn schrodinger_has_imaginary_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = run(&[
        "evolve", "run", "--model", r#"family = "free""#, "--propagator", "schrodinger", "--stations", "0,1", "--t", "0:1:2",
        "--output-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_shape(&out.join("field.csv")), (4, 5));
}

#[test]
fn validation_errors_exit_two_and_name_fields() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
name = "bad"
pipeline = "evolve"

[model]
family = "free"

[grids]
t = []
x = [0.0]

[tolerances]
evolve_budget = -1.0
"#;
    let cfg = write_config(dir.path(), "bad.toml", text);
    let o = run(&["evolve", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("grids.t"), "{err}");
    assert!(err.contains("tolerances.evolve_budget"), "{err}");

    let unknown = write_config(dir.path(), "unknown.toml", &SHORT_PRICE.replace("[fd]", "[fd]\nfoo = 1"));
    let o = run(&["price-law", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("foo"));

    let o = run(&["scatter", "sweep", "--config", configs().join("wkb_barrier.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn accuracy_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
name = "tight"
pipeline = "evolve"

[model]
family = "free"

[grids]
t = [1.0]
x = [0.0]

[tolerances]
evolve_budget = 1e-30
"#;
    let cfg = write_config(dir.path(), "tight.toml", text);
    let o = run(&["evolve", "run", "--config", cfg.to_str().unwrap(), "--output-dir", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn shipped_configs_parse() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let v: toml::Value = toml::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(v.get("pipeline").is_some(), "{}", path.display());
    }
}

#[test]
fn potential_dump_and_wkb() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pot");
    let o = run(&["potential", "dump", "--config", configs().join("potential_rw.toml").to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_shape(&out.join("potential.csv")), (901, 2));
    assert!(out.join("tails.json").exists());

    let text = r#"
name = "wkb"
pipeline = "wkb-sweep"

[model]
family = "inverse_square_barrier"
strength = 2.0

[grids]
energy = [0.5]
hbar = [0.05]
"#;
    let cfg = write_config(dir.path(), "wkb.toml", text);
    let out = dir.path().join("wkb");
    let o = run(&["wkb", "sweep", "--config", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_shape(&out.join("wkb.csv")), (1, 7));
}
