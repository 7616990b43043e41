use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-forge"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPECTRAL_FORGE_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn one_soliton_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "--kind", "custom", "--values", "-1", "--vinf", "0", "--x-max", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("potential.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# config_sha256=")));
    let mut rows = 0;
    for line in text.lines().skip_while(|l| *l != "x,V").skip(1) {
        let (x, v) = line.split_once(',').unwrap();
        let (x, v): (f64, f64) = (x.parse().unwrap(), v.parse().unwrap());
        assert!((v + 2.0 / x.cosh().powi(2)).abs() < 1e-10);
        rows += 1;
    }
    assert!(rows > 100);
    assert!(dir.path().join("potential.config.json").exists());
}

#[test]
fn both_methods_write_a_small_difference() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "--method", "both", "--kind", "harmonic", "--n", "20", "--out", "h.csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let diff = fs::read_to_string(dir.path().join("h-diff.csv")).unwrap();
    let sup: f64 = diff
        .lines()
        .find_map(|l| l.strip_prefix("# interior_sup_rel_diff="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(sup <= 1e-6, "{sup}");
    assert!(dir.path().join("h-marchenko.csv").exists() && dir.path().join("h-dressing.csv").exists());
}

#[test]
fn validation_and_numerical_failures_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["wkb", "--kind", "zeta", "--e0", "5"])), 2);
    assert_eq!(code(&run(dir.path(), &["construct", "--method", "bogus"])), 2);
    assert_eq!(code(&run(dir.path(), &["construct", "--kind", "custom"])), 2);
    assert_eq!(code(&run(dir.path(), &["construct", "--n", "0"])), 2);
    assert_eq!(code(&run(dir.path(), &["nonsense"])), 2);
    fs::write(dir.path().join("empty.csv"), "").unwrap();
    assert_eq!(code(&run(dir.path(), &["verify", "--potential", "empty.csv", "--kind", "harmonic", "--n", "3"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_spectral-forge"))
        .args(["construct", "--kind", "primes", "--n", "60", "--x-max", "1", "--dx", "0.05"])
        .current_dir(dir.path())
        .env("SPECTRAL_FORGE_PRECISION_BITS", "53")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn zeta_profile_at_two_pi() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["wkb", "--kind", "zeta", "--e0", "6.2831853"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(text.contains("# kind=zeta") && text.contains("\nV,x\n"));
}

#[test]
fn round_trip_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&run(p, &["construct", "--kind", "harmonic", "--n", "10", "--method", "dressing"])), 0);
    let o = run(p, &["verify", "--potential", "potential.csv", "--kind", "harmonic", "--tol", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(p.join("report.csv")).unwrap();
    let rows: Vec<&str> = report.lines().skip_while(|l| !l.starts_with("n,")).skip(1).collect();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let abs: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(abs < 1e-4, "{row}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("report.summary.json")).unwrap()).unwrap();
    assert!(summary["parity"]["even_count"].as_u64() == Some(5));
    assert!(summary["config_sha256"].is_string());
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("run.cfg"), "# spectrum\nkind = \"triangular\"\nn = 5\nout = from-config.csv\n").unwrap();
    assert_eq!(code(&run(p, &["spectrum", "--config", "run.cfg"])), 0);
    let five = fs::read_to_string(p.join("from-config.csv")).unwrap();
    assert!(five.contains("# kind=triangular") && five.contains("\n5,"));
    assert_eq!(code(&run(p, &["--threads", "1", "spectrum", "--config", "run.cfg", "--n", "3", "--out", "flag.csv"])), 0);
    let three = fs::read_to_string(p.join("flag.csv")).unwrap();
    assert!(three.contains("\n3,") && !three.contains("\n4,"));
    fs::write(p.join("bad.cfg"), "n 5\n").unwrap();
    assert_eq!(code(&run(p, &["spectrum", "--config", "bad.cfg"])), 2);
}
