use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nwall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nwall")).args(args).env_remove("NWALL_SEED").output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nwall-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_an_image_of_the_wall_size() {
    let out = scratch("tilde3.ppm");
    let r = nwall(&["gen", "--p", "3", "--seq", "cantor", "--h", "3", "--pad", "tilde", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let img = fs::read(&out).unwrap();
    // 81 columns; rows -2..=40.
    let head = b"P6\n81 43\n255\n";
    assert!(img.starts_with(head));
    assert_eq!(img.len(), head.len() + 81 * 43 * 3);
}

#[test]
fn render_of_a_dump_matches_direct_output() {
    let (dump, a, b) = (scratch("w.dump"), scratch("a.ppm"), scratch("b.ppm"));
    let base = ["gen", "--p", "5", "--seq", "cantor", "--h", "2", "--pad", "tilde", "--out"];
    assert!(nwall(&[&base[..], &[s(&dump)]].concat()).status.success());
    assert!(nwall(&[&base[..], &[s(&a)]].concat()).status.success());
    assert!(nwall(&["render", "--input", s(&dump), "--out", s(&b)]).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn profile_text_output() {
    let out = scratch("prof.txt");
    assert!(nwall(&["gen", "--p", "3", "--seq", "cantor", "--h", "1", "--pad", "tilde", "--out", s(&out)]).status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.len() == 9));
}

#[test]
fn fractal_csv_has_one_row_per_level() {
    let out = scratch("levels.csv");
    let r = nwall(&["fractal", "--p", "3", "--levels", "5", "--csv", s(&out)]);
    assert!(r.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1,7,5,9,"));
}

#[test]
fn verify_passing_suites_exit_zero_with_json() {
    let json = scratch("report.json");
    let r = nwall(&["verify", "--suite", "series,profile,windows", "--p", "3", "--h", "2", "--json", s(&json)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stdout));
    let text = fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"check\": \"rotated cantor and singer profiles\""));
    assert!(String::from_utf8_lossy(&r.stdout).lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn verify_exits_nonzero_on_failure() {
    let r = nwall(&["verify", "--suite", "dimension", "--p", "3"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("FAIL box-dimension estimate"));
}

#[test]
fn seed_from_environment_is_recorded_and_reproducible() {
    let run = |seed: &str, name: &str| {
        let json = scratch(name);
        let r = Command::new(env!("CARGO_BIN_EXE_nwall"))
            .args(["verify", "--suite", "identities", "--p", "3", "--trials", "5", "--json", s(&json)])
            .env("NWALL_SEED", seed)
            .output()
            .unwrap();
        assert!(r.status.success());
        fs::read(&json).unwrap()
    };
    let a = run("42", "seed-a.json");
    assert_eq!(a, run("42", "seed-b.json"));
    assert!(String::from_utf8_lossy(&a).contains("\"seed\": 42"));
    assert_ne!(a, run("43", "seed-c.json"));
}

#[test]
fn bad_arguments_fail_with_usage() {
    let r = nwall(&["gen", "--p", "4", "--seq", "cantor", "--h", "1", "--out", "x"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("not prime"));
    let r = nwall(&["verify", "--suite", "everything"]);
    assert_eq!(r.status.code(), Some(2));
    let r = nwall(&["frobnicate"]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("Usage"));
}

#[test]
fn seq_prints_prefixes() {
    let r = nwall(&["seq", "--p", "5", "--seq", "singer", "--h", "1"]);
    assert_eq!(String::from_utf8_lossy(&r.stdout), "p=5 lo=0\n1 0 3 0 3 0 1\n");
    let r = nwall(&["seq", "--p", "3", "--seq", "cantor", "--len", "9", "--digits"]);
    assert_eq!(String::from_utf8_lossy(&r.stdout), "101000101\n");
}
