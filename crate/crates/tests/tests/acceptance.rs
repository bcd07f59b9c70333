//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nwall::sequences::cantor_tilde;
use nwall::toeplitz_oracle::oracle_wall;
use nwall::verify::{self, CheckReport, DEFAULT_SEED};
use nwall::wall_engine::{default_max_row, detect_windows, generate_wall, generate_with, mismatches, FrameLabel, Side};
use nwall::{Exec, Prime, Seq, Wall};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    match failures.first() {
        None => Outcome { pass: true, detail: summary },
        Some(first) => Outcome { pass: false, detail: format!("{summary}; {} failures, first: {first}", failures.len()) },
    }
}

fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

fn report_failures(reports: &[CheckReport]) -> Vec<String> {
    reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| {
            let h = r.params.h.map(|h| format!(" h={h}")).unwrap_or_default();
            match r.mismatches.first() {
                Some(m) => format!("{} p={}{h} at [{}, {}]: expected {}, got {}", r.check, r.params.p, m.m, m.n, m.expected, m.actual),
                None => format!("{} p={}{h}", r.check, r.params.p),
            }
        })
        .collect()
}

fn from_reports(reports: &[CheckReport]) -> Outcome {
    let instances: u64 = reports.iter().map(|r| r.instances).sum();
    outcome(&report_failures(reports), format!("{} checks, {instances} instances", reports.len()))
}

fn random_seq(rng: &mut ChaCha8Rng, p: Prime) -> Seq {
    let len = rng.gen_range(20..=60);
    let density: f64 = rng.gen_range(0.1..0.9);
    let vals: Vec<i64> =
        (0..len).map(|_| if rng.gen_bool(density) { rng.gen_range(1..p.get() as i64) } else { 0 }).collect();
    Seq::from_ints(p, 0, &vals)
}

fn oracle_equivalence(walls: &mut Vec<Wall>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut failures, mut cells) = (vec![], 0usize);
    for p in [3, 5, 7].map(prime) {
        for _ in 0..200 {
            let s = random_seq(&mut rng, p);
            let max_row = default_max_row(&s);
            match generate_wall(&s, max_row) {
                Ok(e) => {
                    let o = oracle_wall(&s, max_row);
                    cells += o.iter().filter(|&(m, n, c)| c.known().is_some() && e.known(m, n).is_some()).count();
                    if let Some(m) = mismatches(&o, &e).first() {
                        failures.push(format!("p={p} {}: [{}, {}] expected {}, got {}", s.digits(), m.m, m.n, m.expected, m.actual));
                    }
                    walls.push(e);
                }
                Err(err) => failures.push(format!("p={p} {}: {err}", s.digits())),
            }
        }
    }
    outcome(&failures, format!("600 walls, {cells} cells compared"))
}

fn profile_theorem(walls: &mut Vec<Wall>) -> Outcome {
    let cases = [(3, 1..=5), (5, 1..=3), (7, 1..=3)];
    let mut reports = vec![];
    for (p, hs) in cases {
        let p = prime(p);
        for h in hs {
            reports.push(verify::check_profile_theorem(p, h, Exec::default()));
            let q = p.get().pow(h) as i64;
            match generate_with(&cantor_tilde(p, h), p.one(), p.one(), q - 1, Exec::default()) {
                Ok(w) => walls.push(w),
                Err(e) => panic!("padded cantor wall p={p} h={h}: {e}"),
            }
        }
    }
    from_reports(&reports)
}

fn square_windows_and_frames(walls: &[Wall]) -> Outcome {
    let (mut failures, mut windows, mut edges, mut ratios) = (vec![], 0usize, 0usize, 0usize);
    for w in walls {
        let p = w.prime();
        let found = match detect_windows(w) {
            Ok(found) => found,
            Err(e) => {
                failures.push(format!("p={p}: {e}"));
                continue;
            }
        };
        for win in found.iter().filter(|x| matches!(x.side, Side::Finite(_))) {
            windows += 1;
            let l = win.side_len().unwrap();
            for label in FrameLabel::INNER {
                if !win.is_complete(label) {
                    continue;
                }
                edges += 1;
                if let Some((m, n)) = win.geometric_break(w, label) {
                    failures.push(format!("p={p} window at [{}, {}]: edge {label} not geometric at [{m}, {n}]", win.top_row, win.left_col));
                }
            }
            if let Some((pr, qr, rr, sr)) = win.pqrs() {
                ratios += 1;
                let sign = if l % 2 == 0 { p.one() } else { -p.one() };
                if pr * sr != sign * qr * rr {
                    failures.push(format!("p={p} window at [{}, {}] size {l}: PS = {}, QR = {}", win.top_row, win.left_col, pr * sr, qr * rr));
                }
            }
        }
    }
    outcome(&failures, format!("{} walls, {windows} windows, {edges} inner edges, {ratios} ratio identities", walls.len()))
}

fn laurent_inverses() -> Outcome {
    let reports: Vec<CheckReport> = [3, 5, 7].into_iter().flat_map(|p| verify::check_series(prime(p), 2000)).collect();
    from_reports(&reports)
}

fn fractal_counts() -> Outcome {
    let mut reports = vec![];
    for p in [3, 5] {
        for k in 1..=6 {
            reports.extend(verify::check_fractal_counts(prime(p), k, Exec::default()));
        }
    }
    from_reports(&reports)
}

fn dimension_estimate() -> Outcome {
    let r = verify::check_dimension_estimate(prime(3), 5, 0.1, Exec::default());
    let detail = match r.mismatches.first() {
        Some(m) => format!("estimate {} against {}", m.actual, m.expected),
        None => "within 0.1".to_string(),
    };
    Outcome { pass: r.pass, detail }
}

fn closed_forms() -> Outcome {
    let mut reports = vec![];
    for p in [3, 5, 7, 11, 13].map(prime) {
        reports.push(verify::check_base_case(p, Exec::default()));
        reports.push(verify::check_recurrence_forms(p, Exec::default()));
    }
    from_reports(&reports)
}

fn identities() -> Outcome {
    let reports: Vec<CheckReport> =
        [3, 5].into_iter().flat_map(|p| verify::check_section7(prime(p), 100, DEFAULT_SEED, Exec::default())).collect();
    from_reports(&reports)
}

fn window_lemmata() -> Outcome {
    let reports: Vec<CheckReport> = [(3, 1), (3, 2), (5, 1), (7, 1)]
        .into_iter()
        .flat_map(|(p, h)| verify::check_window_lemmata(prime(p), h, Exec::default()))
        .collect();
    from_reports(&reports)
}

/// The command line in-process; returns the exit code.
fn nwall(args: &[&str]) -> u8 {
    let mut sink = vec![];
    nwall_cli::run([&["nwall"], args].concat(), &mut sink)
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("nwall-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let mut failures = vec![];
    let mut same = |a: &str, b: &str, what: &str| match (fs::read(path(a)), fs::read(path(b))) {
        (Ok(x), Ok(y)) if x == y && !x.is_empty() => {}
        (Ok(_), Ok(_)) => failures.push(format!("{what} differ")),
        _ => failures.push(format!("{what} missing")),
    };
    for name in ["run1.json", "run2.json"] {
        let out = path(name);
        let code = nwall(&["verify", "--suite", "all", "--seed", "12345", "--json", out.to_str().unwrap()]);
        assert!(code <= 1, "verify stopped with an error");
    }
    same("run1.json", "run2.json", "JSON reports");
    let gen = |name: &str, extra: &[&str]| {
        let out = path(name);
        let args = [&["gen", "--p", "5", "--seq", "cantor", "--h", "2", "--pad", "tilde", "--out", out.to_str().unwrap()], extra].concat();
        assert_eq!(nwall(&args), 0);
    };
    gen("a.ppm", &[]);
    gen("b.ppm", &[]);
    gen("c.ppm", &["--sequential"]);
    gen("a.pgm", &[]);
    gen("b.pgm", &[]);
    same("a.ppm", "b.ppm", "colour renders");
    same("a.ppm", "c.ppm", "parallel and sequential renders");
    same("a.pgm", "b.pgm", "profile renders");
    let _ = fs::remove_dir_all(&dir);
    outcome(&failures, "verify --suite all twice, five renders".to_string())
}

fn main() -> ExitCode {
    let mut walls = vec![];
    let run = |n: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {n}: {name} ({}, {:.1}s)", o.detail, start.elapsed().as_secs_f64());
        o.pass
    };
    let mut ok = vec![
        run(1, "engine matches the determinant oracle", &mut || oracle_equivalence(&mut walls)),
        run(2, "cantor wall profile matches the morphism", &mut || profile_theorem(&mut walls)),
    ];
    ok.push(run(3, "windows are square with geometric frames and ratio identity", &mut || square_windows_and_frames(&walls)));
    ok.push(run(4, "laurent series inverses", &mut laurent_inverses));
    ok.push(run(5, "morphism counts and count sandwich", &mut fractal_counts));
    ok.push(run(6, "box-dimension estimate within 0.1", &mut dimension_estimate));
    ok.push(run(7, "closed forms of the first padded level", &mut closed_forms));
    ok.push(run(8, "wall transformation identities", &mut identities));
    ok.push(run(9, "frames around windows of the padded cantor walls", &mut window_lemmata));
    ok.push(run(10, "deterministic reports and renders", &mut determinism));
    let failed = ok.iter().filter(|&&b| !b).count();
    println!("{} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
