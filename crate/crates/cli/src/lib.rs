//! The `nwall` command line as a library, so it can be driven in-process.

use std::fs;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use nwall::fractal;
use nwall::render::{render_profile, render_wall, ImageFormat};
use nwall::sequences::{cantor, cantor_block, singer, singer_block};
use nwall::verify::{self, SuiteConfig};
use nwall::wall_engine::{default_max_row, generate_with};
use nwall::{profile, Exec, Prime, Seq, Wall};

#[derive(Parser)]
#[command(name = "nwall", version, about = "Number walls over prime fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a wall and write it as a dump, profile text or image.
    Gen(GenArgs),
    /// Run verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Box counts per level of the Cantor wall as CSV.
    Fractal(FractalArgs),
    /// Render a wall dump as an image.
    Render(RenderArgs),
    /// Print a sequence prefix.
    Seq(SeqArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cantor,
    Singer,
    /// Read the sequence from --input (text form as printed by `seq`).
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pad {
    None,
    /// As many zeros on each side as the sequence is long.
    Tilde,
    /// Zeros extending to the left forever.
    Left,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Dump,
    Profile,
    Ppm,
    Pgm,
}

#[derive(Args)]
struct SeqSpec {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, value_enum, default_value = "cantor")]
    seq: Kind,
    /// Block level: the first p^h terms (p^h + 2 for singer).
    #[arg(long, conflicts_with = "len")]
    h: Option<u32>,
    #[arg(long)]
    len: Option<usize>,
    #[arg(long, value_enum, default_value = "none")]
    pad: Pad,
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    spec: SeqSpec,
    /// Last row to compute; defaults to the deepest row the sequence determines.
    #[arg(long)]
    max_row: Option<i64>,
    #[arg(long, default_value_t = 1)]
    r0: i64,
    #[arg(long, default_value_t = 1)]
    a0: i64,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the format implied by the extension (.ppm, .pgm, .txt, anything else is a dump).
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// series, profile, closed-forms, identities, windows, fractal, dimension or all.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    suite: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    p: Vec<u64>,
    /// Levels for the profile, window and fractal checks.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    h: Vec<u32>,
    /// Defaults to NWALL_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = verify::DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Keep wall-clock times in the report (makes it run-dependent).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct FractalArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    levels: u32,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    /// .ppm or .pgm
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeqArgs {
    #[command(flatten)]
    spec: SeqSpec,
    /// Residues run together instead of the text form.
    #[arg(long)]
    digits: bool,
}

type Res<T> = Result<T, String>;

fn exec(sequential: bool) -> Exec {
    if sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn build_seq(spec: &SeqSpec) -> Res<Seq> {
    let base = match spec.seq {
        Kind::File => {
            let path = spec.input.as_ref().ok_or("--seq file needs --input")?;
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Seq::from_text(&text).map_err(|e| e.to_string())?
        }
        kind => {
            let p = Prime::new(spec.p.ok_or("--p is required")?).map_err(|e| e.to_string())?;
            match (kind, spec.h, spec.len) {
                (Kind::Cantor, Some(h), _) => cantor_block(p, h),
                (Kind::Singer, Some(h), _) => singer_block(p, h),
                (Kind::Cantor, None, Some(n)) => cantor(p, n),
                (Kind::Singer, None, Some(n)) => singer(p, n),
                _ => return Err("give --h or --len".into()),
            }
        }
    };
    match spec.pad {
        Pad::None => Ok(base),
        Pad::Tilde => base.zero_pad_both(base.len()).map_err(|e| e.to_string()),
        Pad::Left => Ok(base.left_zero_extend()),
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> Res<()> {
    fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn gen(a: GenArgs) -> Res<()> {
    let s = build_seq(&a.spec)?;
    let p = s.prime();
    let max_row = a.max_row.unwrap_or_else(|| default_max_row(&s));
    let w = generate_with(&s, p.elem(a.r0), p.elem(a.a0), max_row, exec(a.sequential)).map_err(|e| e.to_string())?;
    let out = a.out.to_string_lossy().to_string();
    let fmt = a.format.unwrap_or(match ImageFormat::from_extension(&out) {
        Some(ImageFormat::Ppm) => OutFormat::Ppm,
        Some(ImageFormat::Pgm) => OutFormat::Pgm,
        None if out.ends_with(".txt") => OutFormat::Profile,
        None => OutFormat::Dump,
    });
    let bytes = match fmt {
        OutFormat::Dump => {
            let mut buf = vec![];
            w.write_dump(&mut buf).map_err(|e| e.to_string())?;
            buf
        }
        OutFormat::Profile => profile(&w).to_text().into_bytes(),
        OutFormat::Ppm => render_wall(&w, ImageFormat::Ppm),
        OutFormat::Pgm => render_profile(&profile(&w), ImageFormat::Pgm),
    };
    write_out(&a.out, &bytes)
}

fn seed_from_env() -> Res<Option<u64>> {
    match std::env::var("NWALL_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("NWALL_SEED={v:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn run_verify(a: VerifyArgs, out: &mut dyn Write) -> Res<bool> {
    let seed = match a.seed {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(verify::DEFAULT_SEED),
    };
    let cfg = SuiteConfig { suites: a.suite, primes: a.p, levels: a.h, seed, trials: a.trials, timings: a.timings, exec: exec(a.sequential) };
    let reports = verify::run_suite(&cfg).map_err(|e| e.to_string())?;
    for r in &reports {
        let h = r.params.h.map(|h| format!(" h={h}")).unwrap_or_default();
        let status = if r.pass { "PASS" } else { "FAIL" };
        let _ = write!(out, "{status} {} p={}{h} ({} checked", r.check, r.params.p, r.instances);
        if let Some(m) = r.mismatches.first() {
            let _ = write!(out, ", {} failures, first at [{}, {}]: expected {}, got {}", r.mismatch_count, m.m, m.n, m.expected, m.actual);
        }
        let _ = writeln!(out, ")");
    }
    if let Some(path) = &a.json {
        write_out(path, verify::to_json(&reports).as_bytes())?;
    }
    Ok(verify::all_pass(&reports))
}

fn run_fractal(a: FractalArgs, out: &mut dyn Write) -> Res<()> {
    let p = Prime::new(a.p).map_err(|e| e.to_string())?;
    let rows = fractal::level_table(p, a.levels, exec(a.sequential)).map_err(|e| e.to_string())?;
    let csv = fractal::to_csv(&rows);
    match &a.csv {
        Some(path) => write_out(path, csv.as_bytes()),
        None => out.write_all(csv.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn run_render(a: RenderArgs) -> Res<()> {
    let file = fs::File::open(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let w = Wall::read_dump(io::BufReader::new(file)).map_err(|e| e.to_string())?;
    let fmt = ImageFormat::from_extension(&a.out.to_string_lossy()).ok_or("--out must end in .ppm or .pgm")?;
    let bytes = match fmt {
        ImageFormat::Ppm => render_wall(&w, fmt),
        ImageFormat::Pgm => render_profile(&profile(&w), fmt),
    };
    write_out(&a.out, &bytes)
}

fn run_seq(a: SeqArgs, out: &mut dyn Write) -> Res<()> {
    let s = build_seq(&a.spec)?;
    let text = if a.digits { format!("{}\n", s.digits()) } else { s.to_text() };
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

/// Runs the command line with `args` (program name first), writing normal output to `out`.
/// Returns the process exit code: 0 success, 1 a failed check, 2 an error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(a) => gen(a).map(|_| true),
        Cmd::Verify(a) => run_verify(a, out),
        Cmd::Fractal(a) => run_fractal(a, out).map(|_| true),
        Cmd::Render(a) => run_render(a).map(|_| true),
        Cmd::Seq(a) => run_seq(a, out).map(|_| true),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
