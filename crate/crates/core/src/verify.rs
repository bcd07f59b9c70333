//! Cellwise checks of the structural claims about number walls, with JSON-ready reports.

use std::collections::HashMap;
use std::fmt::Display;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::finite_field::{binom, FieldError, Fp, Prime};
use crate::fractal::{self, boxes_from_grid, boxes_from_profile, cantor_profile, BoxLevel};
use crate::morphism2d::{phi_0, phi_f, phi_p, pi_coding, Letter, Morphism2D};
use crate::par::{self, Exec};
use crate::sequences::{cantor, cantor_block, cantor_tilde, laurent_inverse, one_plus_t_minus_2, series_mul, singer, singer_block, Extension, Seq};
use crate::wall_engine::{default_max_row, generate_with, profile, FrameLabel, Mismatch, ProfileCell, Side, Wall};

/// Mismatches kept per report.
pub const MISMATCH_CAP: usize = 50;
pub const DEFAULT_SEED: u64 = 0x6e77_616c_6c5f_7631;
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Params {
    pub p: u64,
    pub h: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Params,
    pub pass: bool,
    /// Configurations, instances or cells actually examined.
    pub instances: u64,
    /// Total failures; `mismatches` holds at most `MISMATCH_CAP` of them.
    pub mismatch_count: u64,
    pub mismatches: Vec<Mismatch>,
    pub millis: u64,
}

impl CheckReport {
    fn finish(check: &str, params: Params, t: Tally, start: Instant) -> Self {
        CheckReport {
            check: check.to_string(),
            params,
            pass: t.bad == 0,
            instances: t.instances,
            mismatch_count: t.bad,
            mismatches: t.list,
            millis: start.elapsed().as_millis() as u64,
        }
    }
}

/// Failure accumulator.
#[derive(Default)]
struct Tally {
    list: Vec<Mismatch>,
    bad: u64,
    instances: u64,
}

impl Tally {
    fn push(&mut self, m: i64, n: i64, expected: impl Display, actual: impl Display, what: &str) {
        self.bad += 1;
        if self.list.len() < MISMATCH_CAP {
            self.list.push(Mismatch::new(m, n, format!("{expected} [{what}]"), actual));
        }
    }

    fn value(&mut self, m: i64, n: i64, expected: Fp, actual: Fp, what: &str) {
        if expected != actual {
            self.push(m, n, expected, actual, what);
        }
    }

    fn cell(&mut self, w: &Wall, m: i64, n: i64, expected: Fp, what: &str) {
        match w.known(m, n) {
            Some(v) => self.value(m, n, expected, v, what),
            None => self.push(m, n, expected, "undefined", what),
        }
    }

    fn nonzero(&mut self, m: i64, n: i64, v: Fp, what: &str) {
        if v.is_zero() {
            self.push(m, n, "nonzero", v, what);
        }
    }

    /// A missing configuration or instance.
    fn missing(&mut self, what: &str) {
        self.push(0, 0, "at least one instance", "none found", what);
    }
}

fn pw(x: Fp, e: i64) -> Fp {
    x.pow_i(e).expect("nonzero base")
}

fn div(a: Fp, b: Fp) -> Fp {
    a.try_div(b).expect("nonzero divisor")
}

fn rng_for(seed: u64, p: Prime, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ p.get().wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt.wrapping_mul(0xbf58_476d_1ce4_e5b9))
}

fn nonzero_elem(rng: &mut ChaCha8Rng, p: Prime) -> Fp {
    p.elem_u(rng.gen_range(1..p.get()))
}

fn any_elem(rng: &mut ChaCha8Rng, p: Prime) -> Fp {
    p.elem_u(rng.gen_range(0..p.get()))
}

fn random_values(rng: &mut ChaCha8Rng, p: Prime, len: usize) -> Vec<Fp> {
    (0..len).map(|_| any_elem(rng, p)).collect()
}

fn ra_wall(s: &Seq, r: Fp, a: Fp, max_row: i64, exec: Exec) -> Wall {
    generate_with(s, r, a, max_row, exec).expect("finite sequences with nonzero parameters generate")
}

fn plain_wall(s: &Seq, max_row: i64, exec: Exec) -> Wall {
    let p = s.prime();
    ra_wall(s, p.one(), p.one(), max_row, exec)
}

fn finite(p: Prime, values: Vec<Fp>) -> Seq {
    Seq::new(p, 0, values)
}

// ---------------------------------------------------------------------------
// Series

/// cantor * singer = 1 and theta^2 (1 + t^-2) = 1, up to `degree`.
pub fn check_series(p: Prime, degree: usize) -> Vec<CheckReport> {
    let len = degree + 1;
    let params = Params { p: p.get(), h: None, seed: None };
    let one = |s: &Seq, t: &mut Tally, what: &str| {
        for (i, &v) in s.values().iter().enumerate() {
            let want = if i == 0 { p.one() } else { p.zero() };
            t.value(0, i as i64, want, v, what);
        }
        t.instances += s.len() as u64;
    };

    let start = Instant::now();
    let mut t = Tally::default();
    let prod = series_mul(&cantor(p, len), &singer(p, len), len).expect("same field");
    one(&prod, &mut t, "coefficient of cantor times singer");
    let first = CheckReport::finish("cantor times singer is one", params.clone(), t, start);

    let start = Instant::now();
    let mut t = Tally::default();
    let th = cantor(p, len);
    let sq = series_mul(&th, &th, len).expect("same field");
    let prod = series_mul(&sq, &one_plus_t_minus_2(p, len), len).expect("same field");
    one(&prod, &mut t, "coefficient of theta squared times (1 + t^-2)");
    let second = CheckReport::finish("theta squared times (1 + t^-2) is one", params, t, start);
    vec![first, second]
}

// ---------------------------------------------------------------------------
// Profile of the padded Cantor wall

pub fn check_profile_theorem(p: Prime, h: u32, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let q = p.get().pow(h) as i64;
    let w = ra_wall(&cantor_tilde(p, h), p.one(), p.one(), q - 1, exec);
    let pg = profile(&w);
    match phi_p(p).expand2d_with(Letter::A, h, exec) {
        Ok(g) => {
            let want = pi_coding(&g);
            for m in 0..q {
                for n in 0..q {
                    let (e, a) = (want.get(m, n), pg.get(m, q + n));
                    if e != a {
                        t.push(m, q + n, e.to_char(), a.to_char(), "zero profile of the padded cantor wall");
                    }
                }
            }
            t.instances = (q * q) as u64;
        }
        Err(e) => t.push(0, 0, "morphism image", e, "morphism expansion"),
    }
    CheckReport::finish("profile of the padded cantor wall matches the morphism", Params { p: p.get(), h: Some(h), seed: None }, t, start)
}

// ---------------------------------------------------------------------------
// Closed forms for the first padded level

fn half(p: Prime) -> i64 {
    ((p.get() - 1) / 2) as i64
}

fn bn(a: i64, b: i64, p: Prime) -> Fp {
    if a < 0 || b < 0 {
        p.zero()
    } else {
        binom(a as u64, b as u64, p)
    }
}

fn frac(a: i64, b: i64, p: Prime) -> Fp {
    div(p.elem(a), p.elem(b))
}

/// Entries of W(0^p C_1 0^p) on rows -1..p, columns p..2p, against their closed forms.
pub fn check_base_case(p: Prime, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let pp = p.get() as i64;
    let p2 = half(p);
    let s = cantor_tilde(p, 1);
    let w = plain_wall(&s, default_max_row(&s), exec);
    let (one, zero) = (p.one(), p.zero());

    let a_form = |i: i64, j: i64| {
        let mut x = one;
        for k in 0..j {
            x *= bn(p2 + k, i + k, p);
        }
        for k in 1..j {
            x *= pw(frac(k, p2 + k - i, p), j - k);
        }
        x * x
    };
    let b_form = |i: i64, j: i64| {
        let mut x = one.sign(j);
        for k in 0..j {
            let c = bn(p2 + k, i + k + 1, p);
            x *= c * c * p.elem(i + k + 1) * pw(p.elem(p2 - i + k), -(2 * (j - k) - 1));
        }
        for k in 1..j {
            x *= pw(p.elem(k), 2 * (j - k));
        }
        x
    };
    let c_form = |i: i64, j: i64| {
        let mut x = bn(p2 + j, i + j, p);
        for k in 0..j {
            let c = bn(p2 + k, i + k, p);
            x *= c * c * pw(frac(k + 1, p2 + k - i + 1, p), 2 * (j - k) - 1);
        }
        x
    };

    for j in 0..=p2 {
        for i in 0..=p2 {
            let (ma, na) = (2 * j - 1, pp + 2 * i);
            t.cell(&w, ma, na, a_form(i, j), "a family");
            t.nonzero(ma, na, a_form(i, j), "a family");
            let (mc, nc) = (2 * j, pp + 2 * i);
            t.cell(&w, mc, nc, c_form(i, j), "c family");
            t.nonzero(mc, nc, c_form(i, j), "c family");
            if i < p2 {
                let (mb, nb) = (2 * j - 1, pp + 2 * i + 1);
                t.cell(&w, mb, nb, b_form(i, j), "b family");
                t.nonzero(mb, nb, b_form(i, j), "b family");
                t.cell(&w, 2 * j, pp + 2 * i + 1, zero, "d family");
            }
            t.instances += 1;
        }
    }
    for i in 0..=p2 {
        t.value(-1, i, one, a_form(i, 0), "first a row");
        t.value(0, i, bn(p2, i, p), c_form(i, 0), "first c row");
        if i < p2 {
            t.value(-1, i, one, b_form(i, 0), "first b row");
        }
    }
    CheckReport::finish("base case closed forms", Params { p: p.get(), h: Some(1), seed: None }, t, start)
}

/// The r/a families indexed [step][i].
#[derive(Debug, Clone)]
struct Families {
    rc: Vec<Vec<Option<Fp>>>,
    ac: Vec<Vec<Option<Fp>>>,
    rs: Vec<Vec<Option<Fp>>>,
    as_: Vec<Vec<Option<Fp>>>,
}

struct Closed {
    p: Prime,
    p2: i64,
}

impl Closed {
    fn rc(&self, i: i64, t: i64) -> Fp {
        let (p, p2, j) = (self.p, self.p2, t / 2);
        let mut x = p.one().sign(j);
        for k in 1..=j {
            x *= if t % 2 == 0 { frac(i + k, p2 - i + k, p) } else { frac(p2 - i + k, i + k, p) };
        }
        x
    }

    fn ac(&self, i: i64, t: i64) -> Fp {
        let (p, p2, j) = (self.p, self.p2, t / 2);
        let mut x = bn(p2 + j, i + j, p);
        for k in 0..j {
            let c = bn(p2 + k, i + k, p);
            x *= c * c * pw(frac(k + 1, p2 + 1 - i + k, p), 2 * j - 1 - 2 * k);
        }
        x
    }

    fn rs(&self, i: i64, t: i64) -> Fp {
        let (p, p2, j) = (self.p, self.p2, t / 2);
        if t % 2 == 0 {
            let mut x = p.one().sign(j);
            for k in 0..j {
                x *= frac(p2 - i + k, i + 1 + k, p);
            }
            x
        } else {
            let mut x = p.one().sign(j + 1);
            for k in 0..=j {
                x *= frac(i + k + 1, p2 - i + k, p);
            }
            x
        }
    }

    fn as_(&self, i: i64, t: i64) -> Fp {
        let (p, p2, j) = (self.p, self.p2, t / 2);
        if t % 2 == 0 {
            if j == 0 {
                return p.zero();
            }
            let mut prod = p.one();
            for k in 0..j {
                prod *= bn(p2 + k, i + k, p);
            }
            let mut x = div(prod * prod, bn(p2 + j, i + j, p));
            for k in 0..=j - 2 {
                x *= pw(frac(k + 1, p2 + k - i + 1, p), 2 * j - 3 - 2 * k);
            }
            x
        } else {
            let mut x = bn(p2 + j, i + j + 1, p) * frac(p2 + j + 1, j + 1, p);
            for k in 0..=j {
                let c = bn(p2 + k, i + k + 1, p);
                x *= c * c * pw(frac(k + 1, p2 - i + k, p), 2 * j + 1 - 2 * k);
            }
            x
        }
    }
}

/// Runs the eight recurrences for steps 0..=p. Entries whose recurrence reaches outside
/// 0 <= i <= p_2 (the C-step at i = 0 and i = p_2) are seeded from the closed forms.
/// A zero divisor leaves the entry empty and is reported.
fn iterate_families(p: Prime, cf: &Closed, t: &mut Tally) -> Families {
    let p2 = cf.p2;
    let steps = p.get() as usize + 1;
    let nc = p2 as usize + 1;
    let ns = p2 as usize;
    let mut f = Families {
        rc: vec![vec![None; nc]; steps],
        ac: vec![vec![None; nc]; steps],
        rs: vec![vec![None; ns]; steps],
        as_: vec![vec![None; ns]; steps],
    };
    for i in 0..nc {
        f.rc[0][i] = Some(p.one());
        f.ac[0][i] = Some(bn(p2, i as i64, p));
    }
    for i in 0..ns {
        f.rs[0][i] = Some(p.one());
        f.as_[0][i] = Some(p.zero());
    }
    let inv = |x: Fp, i: usize, step: usize, t: &mut Tally| -> Option<Fp> {
        match x.inv() {
            Ok(v) => Some(v),
            Err(_) => {
                t.push(i as i64, step as i64, "nonzero divisor", "0", "division by zero in the recurrences");
                None
            }
        }
    };
    for step in 0..steps - 1 {
        let nx = step + 1;
        if step % 2 == 0 {
            for i in 0..nc {
                f.rc[nx][i] = f.rc[step][i].and_then(|r| inv(r, i, step, t));
                f.ac[nx][i] = f.ac[step][i];
            }
            for i in 0..ns {
                let (Some(ac), Some(ac1), Some(rs), Some(rc1)) = (f.ac[step][i], f.ac[step][i + 1], f.rs[step][i], f.rc[step][i + 1]) else {
                    continue;
                };
                let Some(iac1) = inv(ac1, i, step, t) else { continue };
                f.rs[nx][i] = Some(-ac * rs * iac1);
                let mut prod = p.one();
                for k in 0..=i {
                    match f.rs[step][k].and_then(|r| inv(r, i, step, t)) {
                        Some(v) => prod *= v.pow(4),
                        None => continue,
                    }
                }
                let Some(d) = inv(ac1 * rc1, i, step, t) else { continue };
                f.as_[nx][i] = Some(ac1.pow(3) * prod * (p.one() + ac * rs * d));
            }
        } else {
            for i in 0..ns {
                let Some(rs) = f.rs[step][i] else { continue };
                f.rs[nx][i] = inv(rs, i, step, t);
                let mut prod = p.one();
                for k in 0..=i {
                    match f.rs[step][k].and_then(|r| inv(r, i, step, t)) {
                        Some(v) => prod *= v.pow(4),
                        None => continue,
                    }
                }
                f.as_[nx][i] = f.as_[step][i].and_then(|a| inv(a, i, step, t)).map(|ia| rs * rs * prod * ia);
            }
            for i in 0..nc {
                if i == 0 || i == nc - 1 {
                    f.rc[nx][i] = Some(cf.rc(i as i64, nx as i64));
                    f.ac[nx][i] = Some(cf.ac(i as i64, nx as i64));
                    continue;
                }
                let (Some(am), Some(a0), Some(rc), Some(rs)) = (f.as_[step][i - 1], f.as_[step][i], f.rc[step][i], f.rs[step][i]) else {
                    continue;
                };
                let Some(d1) = inv(a0 * rc * rs * rs, i, step, t) else { continue };
                f.rc[nx][i] = Some(-am * d1);
                let Some(d2) = inv(rs.pow(3) * a0 * rc, i, step, t) else { continue };
                f.ac[nx][i] = Some(a0 * rs * rs * (p.one() + am * d2));
            }
        }
    }
    f
}

/// The recurrences from their initial values against the closed forms, the nonzeroness of
/// every family on the steps that feed a construction, and the families read off W(C~_2).
pub fn check_recurrence_forms(p: Prime, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let p2 = half(p);
    let cf = Closed { p, p2 };
    let f = iterate_families(p, &cf, &mut t);
    let last = p.get() as i64;

    type Fam<'a> = (&'a str, &'a Vec<Vec<Option<Fp>>>, Box<dyn Fn(i64, i64) -> Fp + 'a>);
    let fams: [Fam; 4] = [
        ("r_C", &f.rc, Box::new(|i, s| cf.rc(i, s))),
        ("a_C", &f.ac, Box::new(|i, s| cf.ac(i, s))),
        ("r_S", &f.rs, Box::new(|i, s| cf.rs(i, s))),
        ("a_S", &f.as_, Box::new(|i, s| cf.as_(i, s))),
    ];
    for (name, table, closed) in &fams {
        for step in 0..=last {
            for (i, v) in table[step as usize].iter().enumerate() {
                let want = closed(i as i64, step);
                match v {
                    Some(v) => t.value(i as i64, step, want, *v, &format!("{name} from the recurrences")),
                    None => t.push(i as i64, step, want, "not computed", &format!("{name} from the recurrences")),
                }
                let feeds = (1..last).contains(&step) || (step == last && name.starts_with('r'));
                if feeds {
                    t.nonzero(i as i64, step, want, &format!("{name} closed form"));
                }
                t.instances += 1;
            }
        }
    }

    // a_{i,t} from the r_S family.
    let a_i = |i: i64, step: i64| {
        let mut x = p.one();
        for k in 0..i {
            x *= pw(cf.rs(k, step), if step % 2 == 0 { 2 } else { -2 });
        }
        x
    };

    // The same families as they appear in the wall of the padded level-2 block.
    let q = p.get() as i64;
    let base = q * q;
    let s = cantor_tilde(p, 2);
    let w = plain_wall(&s, (last + 1) * q + 2, exec);
    let c = cantor_block(p, 1);
    let sg = singer_block(p, 1);
    for step in 0..last {
        let j = step / 2;
        for i in 0..=p2 {
            let (rc, ac, ai) = (cf.rc(i, step), cf.ac(i, step), a_i(i, step));
            let col = base + 2 * i * q;
            if step % 2 == 0 {
                let m = 2 * j * q;
                for k in 0..q {
                    t.cell(&w, m - 1, col + k, ai * pw(rc, q - 1 - k), "geometric row above a cantor segment");
                    t.cell(&w, m, col + k, ac * pw(rc, q - 1 - k) * c.at(k), "cantor segment");
                }
            } else {
                let m = (2 * j + 1) * q + 1;
                for k in 0..q {
                    t.cell(&w, m - 2, col + k, ac * pw(rc, k) * c.at(k), "cantor segment");
                    t.cell(&w, m - 1, col + k, ai * pw(rc, k), "geometric row below a cantor segment");
                }
            }
            if i == p2 {
                continue;
            }
            let (rs, as_) = (cf.rs(i, step), cf.as_(i, step));
            let col = base + (2 * i + 1) * q - 1;
            if step % 2 == 0 {
                let m = 2 * j * q;
                for k in 0..q + 2 {
                    t.cell(&w, m - 1, col + k, ai * pw(rs, k), "geometric row above a singer segment");
                    t.cell(&w, m - 2, col + k, as_ * pw(rs, k) * sg.at(k), "singer segment");
                }
            } else {
                let m = (2 * j + 1) * q + 1;
                for k in 0..q + 2 {
                    t.cell(&w, m - 1, col + k, a_i(i, step) * pw(rs, -k), "geometric row above a singer segment");
                    t.cell(&w, m, col + k, as_ * pw(rs, q + 1 - k) * sg.at(k), "singer segment");
                }
            }
        }
    }
    CheckReport::finish("recurrence closed forms", Params { p: p.get(), h: None, seed: None }, t, start)
}

// ---------------------------------------------------------------------------
// Identities on random walls

fn section7_report(name: &str, p: Prime, seed: u64, t: Tally, start: Instant) -> CheckReport {
    CheckReport::finish(name, Params { p: p.get(), h: None, seed: Some(seed) }, t, start)
}

/// Random parameters; the first trial uses all ones.
fn params4(rng: &mut ChaCha8Rng, p: Prime, trial: usize) -> [Fp; 4] {
    if trial == 0 {
        [p.one(); 4]
    } else {
        [nonzero_elem(rng, p), nonzero_elem(rng, p), nonzero_elem(rng, p), nonzero_elem(rng, p)]
    }
}

fn check_rescale(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 1);
    for trial in 0..trials {
        let len = rng.gen_range(12..=30);
        let s = finite(p, random_values(&mut rng, p, len));
        let [r0, a0, r1, a1] = params4(&mut rng, p, trial);
        let mr = default_max_row(&s);
        let lhs = ra_wall(&s.geometric_transform(r1, a1).expect("finite"), r0, a0, mr, exec);
        let base = plain_wall(&s, mr, exec);
        for (m, n, c) in base.iter() {
            let Some(v) = c.known() else { continue };
            if m < -1 {
                continue;
            }
            let factor = div(pw(r1, n * (m + 1)) * pw(a1, m + 1), pw(r0, n * m) * pw(a0, m));
            t.cell(&lhs, m, n, factor * v, "rescaled wall");
        }
        if profile(&lhs) != profile(&base) {
            t.push(trial as i64, 0, "equal profiles", "different profiles", "profile of the rescaled wall");
        }
        t.instances += 1;
    }
    section7_report("rescaled wall", p, seed, t, start)
}

fn triangle(l: i64) -> impl Iterator<Item = (i64, i64)> {
    (0..=l / 2).flat_map(move |m| (m..=l - m).map(move |n| (m, n)))
}

fn check_reflection(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 2);
    for _ in 0..trials {
        let len = rng.gen_range(12..=30);
        let s = finite(p, random_values(&mut rng, p, len));
        let l = len as i64 - 1;
        let w = plain_wall(&s, l / 2, exec);
        let wr = plain_wall(&s.reversed().expect("finite"), l / 2, exec);
        for (m, n) in triangle(l) {
            if let Some(v) = w.known(m, n) {
                t.cell(&wr, m, l - n, v, "reflected wall");
            }
        }
        t.instances += 1;
    }
    section7_report("reflected wall", p, seed, t, start)
}

fn check_ra_reflection(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 3);
    for trial in 0..trials {
        let len = rng.gen_range(12..=30);
        let s = finite(p, random_values(&mut rng, p, len));
        let l = len as i64 - 1;
        let [r0, a0, r1, a1] = params4(&mut rng, p, trial);
        let lhs = ra_wall(&s.geometric_transform(r1, a1).expect("finite"), r0, a0, l / 2, exec);
        let rev = s.reversed().expect("finite").geometric_transform(pw(r1, -1), pw(r1, l) * a1).expect("finite");
        let rhs = ra_wall(&rev, pw(r0, -1), a0 * pw(r0, l), l / 2, exec);
        for (m, n) in triangle(l) {
            if let Some(v) = lhs.known(m, n) {
                t.cell(&rhs, m, l - n, v, "reflected rescaled wall");
            }
        }
        t.instances += 1;
    }
    section7_report("reflected rescaled wall", p, seed, t, start)
}

fn check_frame_portions(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 4);
    for _ in 0..trials {
        let len = 44;
        let mut v = random_values(&mut rng, p, len);
        let run = rng.gen_range(1..=5);
        let at = rng.gen_range(14..=22);
        for x in v.iter_mut().skip(at).take(run) {
            *x = p.zero();
        }
        let s = finite(p, v);
        let w = plain_wall(&s, default_max_row(&s), exec);
        for win in w.windows() {
            let Side::Finite(l) = win.side else { continue };
            if !win.fully_framed() {
                continue;
            }
            let l = l as i64;
            let (m, n) = (win.top_row - 2, win.left_col - 2);
            let seq = |label| finite(p, win.frame_values(&w, label).expect("complete frame"));
            let portion = |label, ratio: FrameLabel| {
                let r = win.ratio(ratio).expect("inner frame ratio");
                let a = win.origin(ratio).expect("inner frame origin");
                ra_wall(&seq(label), r, a, (l + 1) / 2, exec)
            };
            let south = portion(FrameLabel::H, FrameLabel::D);
            let east = portion(FrameLabel::G, FrameLabel::C);
            let north = portion(FrameLabel::E, FrameLabel::A);
            let west = portion(FrameLabel::F, FrameLabel::B);
            for i in 0..=(l + 1) / 2 {
                for j in i..=l + 1 - i {
                    let cases = [
                        (m + l + 3 + i, n + l + 2 - j, south.known(i, j), "portion below the south outer frame"),
                        (m + l + 2 - i, n + l + 3 + j, east.known(j, i), "portion right of the east outer frame"),
                        (m - i, n + 1 + j, north.known(i, j), "portion above the north outer frame"),
                        (m + 1 + i, n - j, west.known(j, i), "portion left of the west outer frame"),
                    ];
                    for (bm, bn_, want, what) in cases {
                        let (Some(want), Some(_)) = (want, w.known(bm, bn_)) else { continue };
                        t.cell(&w, bm, bn_, want, what);
                    }
                }
            }
            t.instances += 1;
        }
    }
    if t.instances == 0 {
        t.missing("fully framed window");
    }
    section7_report("outer frame portions", p, seed, t, start)
}

fn random_unit_leading(rng: &mut ChaCha8Rng, p: Prime, len: usize) -> Vec<Fp> {
    let mut v = random_values(rng, p, len);
    v[0] = nonzero_elem(rng, p);
    v
}

fn check_column_inverse(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 5);
    for trial in 0..trials {
        let len = 30;
        let s = finite(p, random_unit_leading(&mut rng, p, len));
        let [r0, a0, r1, a1] = params4(&mut rng, p, trial);
        let u = laurent_inverse(&s, len).expect("unit leading term");
        let x = s.geometric_transform(r1, a1).expect("finite").with_extensions(Extension::ZeroOutside, Extension::UndefinedOutside);
        let w = ra_wall(&x, r0, a0, len as i64 - 2, exec);
        let s0 = s.at(0);
        for m in 0..len as i64 - 1 {
            if w.known(m, 0).is_some() {
                t.cell(&w, m, 0, a1 * s0 * pw(div(a1 * s0, a0), m), "column 0 of the one-sided wall");
            }
            if w.known(m, 1).is_some() && m + 1 < len as i64 {
                let ratio = div(-s0 * a1 * r1, r0 * a0);
                t.cell(&w, m, 1, -a1 * r1 * s0 * s0 * pw(ratio, m) * u.at(m + 1), "column 1 of the one-sided wall");
            }
        }
        t.instances += 1;
    }
    section7_report("one-sided column inverse", p, seed, t, start)
}

/// Window below-left of a zero region: built as prefix, l-2 zeros, then S(r1, a1), in an
/// (r0', a0')-wall, with the region above row -1 acting as the upper window.
fn check_window_inverse(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 6);
    for trial in 0..trials {
        let l = rng.gen_range(3..=8_i64);
        let pre_len = rng.gen_range(2..=6);
        let mut pre = random_values(&mut rng, p, pre_len);
        *pre.last_mut().expect("nonempty") = nonzero_elem(&mut rng, p);
        let slen = (2 * l + 6) as usize;
        let s = finite(p, random_unit_leading(&mut rng, p, slen));
        let [r0w, a0w, r1, a1] = params4(&mut rng, p, trial);
        let t_seq = s.geometric_transform(r1, a1).expect("finite");
        let mut y = pre.clone();
        y.extend(std::iter::repeat_n(p.zero(), l as usize - 2));
        y.extend_from_slice(t_seq.values());
        let y = finite(p, y);
        let w = ra_wall(&y, r0w, a0w, default_max_row(&y), exec);
        let (m, n) = (-1, pre_len as i64 + l - 2);
        let (r0, a0) = (r0w, a0w * pw(r0w, n));
        for i in 0..=l {
            t.cell(&w, m, n + i, a0 * pw(r0, i), "geometric row above the transformed sequence");
            t.cell(&w, m + 1, n + i, a1 * pw(r1, i) * s.at(i), "transformed sequence");
        }
        let s0 = s.at(0);
        let u = laurent_inverse(&s, (l + 1) as usize).expect("unit leading term");
        let ratio = div(-s0 * a1 * r1, r0 * a0);
        for i in 0..l {
            t.cell(&w, m + i, n, a0 * pw(div(a1 * s0, a0), i), "inner frame column of the lower window");
        }
        for i in 0..=l {
            t.cell(&w, m + i, n + 1, a0 * r0 * s0 * u.at(i) * pw(ratio, i), "column beside the lower window");
        }
        let ut = u.geometric_transform(ratio, a0 * r0 * s0).expect("finite");
        let block = ra_wall(&ut, div(a1 * s0, a0), a0, l / 2, exec);
        for i in 0..=(l + 1) / 2 {
            for j in i..=l - i {
                if let Some(want) = block.known(i, j) {
                    t.cell(&w, m + j, n + i + 1, want, "rotated wall of the inverse beside the lower window");
                }
            }
        }
        t.instances += 1;
    }
    section7_report("window column inverse", p, seed, t, start)
}

fn check_one_sided_inverse(p: Prime, trials: usize, seed: u64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let mut rng = rng_for(seed, p, 7);
    let (len, size) = (40_usize, 20_i64);
    for _ in 0..trials {
        let mut v = random_values(&mut rng, p, len);
        v[0] = p.one();
        let s = finite(p, v);
        let u = laurent_inverse(&s, len).expect("unit leading term");
        let u_alt = u.geometric_transform(-p.one(), p.one()).expect("finite");
        let ws = plain_wall(&s.left_zero_extend(), size, exec);
        let wu = plain_wall(&u_alt.left_zero_extend(), size, exec);
        for j in -1..size {
            for i in 0..size {
                match wu.known(i - 1, j + 1) {
                    Some(want) => t.cell(&ws, j, i, want, "one-sided wall against the rotated wall of the inverse"),
                    None => t.push(i - 1, j + 1, "known", "undefined", "wall of the inverse"),
                }
            }
        }
        t.instances += 1;
    }
    section7_report("one-sided inverse rotation", p, seed, t, start)
}

/// All randomized identities for one prime.
pub fn check_section7(p: Prime, trials: usize, seed: u64, exec: Exec) -> Vec<CheckReport> {
    vec![
        check_rescale(p, trials, seed, exec),
        check_reflection(p, trials, seed, exec),
        check_ra_reflection(p, trials, seed, exec),
        check_frame_portions(p, trials, seed, exec),
        check_column_inverse(p, trials, seed, exec),
        check_window_inverse(p, trials, seed, exec),
        check_one_sided_inverse(p, trials.min(10), seed, exec),
    ]
}

// ---------------------------------------------------------------------------
// Window configurations in the padded Cantor walls

/// (a, r) with vals[i] = a r^i base[i], trying r = 1, 2, ... in turn.
fn fit_transform(vals: &[Fp], base: &[Fp]) -> Option<(Fp, Fp)> {
    let p = vals.first()?.modulus();
    let a = vals[0].try_div(base[0]).ok()?;
    p.elements().filter(|r| !r.is_zero()).find(|&r| {
        let mut x = a;
        vals.iter().zip(base).all(|(&v, &b)| {
            let ok = v == x * b;
            x *= r;
            ok
        })
    }).map(|r| (a, r))
}

fn fit_geometric(vals: &[Fp]) -> Option<(Fp, Fp)> {
    let p = vals.first()?.modulus();
    fit_transform(vals, &vec![p.one(); vals.len()])
}

/// Finite windows by top-left corner, and the walls they live in.
struct Layout<'a> {
    w: &'a Wall,
    at: HashMap<(i64, i64), usize>,
}

impl<'a> Layout<'a> {
    fn new(w: &'a Wall) -> Self {
        let at = w.windows().iter().filter_map(|r| r.side_len().map(|l| ((r.top_row, r.left_col), l))).collect();
        Layout { w, at }
    }

    fn has(&self, top: i64, left: i64, size: i64) -> bool {
        self.at.get(&(top, left)).is_some_and(|&l| l as i64 == size)
    }

    fn corners(&self, size: i64) -> Vec<(i64, i64)> {
        let mut v: Vec<_> = self.at.iter().filter(|&(_, &l)| l as i64 == size).map(|(&k, _)| k).collect();
        v.sort_unstable();
        v
    }

    fn row(&self, m: i64, cols: impl Iterator<Item = i64>) -> Option<Vec<Fp>> {
        cols.map(|n| self.w.known(m, n)).collect()
    }

    /// Whether the rectangle lies inside the computed part of the wall.
    fn covers(&self, rows: std::ops::RangeInclusive<i64>, cols: std::ops::RangeInclusive<i64>) -> bool {
        [(*rows.start(), *cols.start()), (*rows.start(), *cols.end()), (*rows.end(), *cols.start()), (*rows.end(), *cols.end())]
            .iter()
            .all(|&(m, n)| self.w.known(m, n).is_some())
    }

    /// Whether every zero region meeting the rectangle has side at most `size`; the rectangle is
    /// the configuration with its inner frames.
    fn level_at_most(&self, size: i64, rows: std::ops::RangeInclusive<i64>, cols: std::ops::RangeInclusive<i64>) -> bool {
        self.w.windows().iter().all(|r| {
            let side = (r.rows.1 - r.rows.0).max(r.cols.1 - r.cols.0) + 1;
            let meets = r.rows.0 <= *rows.end() && r.rows.1 >= *rows.start() && r.cols.0 <= *cols.end() && r.cols.1 >= *cols.start();
            side <= size || !meets
        })
    }

    fn col(&self, n: i64, rows: impl Iterator<Item = i64>) -> Option<Vec<Fp>> {
        rows.map(|m| self.w.known(m, n)).collect()
    }
}

struct Level {
    p: Prime,
    q: i64,
    c: Vec<Fp>,
    s: Vec<Fp>,
}

impl Level {
    fn new(p: Prime, h: u32) -> Self {
        Level { p, q: p.get().pow(h) as i64, c: cantor_block(p, h).values().to_vec(), s: singer_block(p, h).values().to_vec() }
    }
}

/// Largest block length used when searching for configurations beyond the first two levels up.
const SEARCH_BLOCK: u64 = 250;

/// Walls of the padded blocks from one level up, at least two levels and more while the block
/// stays within `SEARCH_BLOCK`.
fn level_walls(p: Prime, h: u32, exec: Exec) -> Vec<Wall> {
    (1..)
        .take_while(|&up| up <= 2 || p.get().pow(h + up) <= SEARCH_BLOCK)
        .map(|up| {
            let s = cantor_tilde(p, h + up);
            let rows = (2 * p.get().pow(h + up) as i64).min(default_max_row(&s));
            plain_wall(&s, rows, exec)
        })
        .collect()
}

#[derive(Default)]
struct WindowTallies {
    below: Tally,
    cantor_between: Tally,
    singer_between: Tally,
    rotated: Tally,
    between_cantor: Tally,
    between_cantor_eq: Tally,
    between_singer: Tally,
    between_singer_eq: Tally,
}

fn lemma_cantor_below(lay: &Layout, lv: &Level, t: &mut Tally, exec: Exec) {
    let (p, q) = (lv.p, lv.q);
    for (t2, c2) in lay.corners(q - 2) {
        let (m, n) = (t2 + q - 2, c2 - 1);
        if !lay.has(m + 1, n - q, q) {
            continue;
        }
        let Some(inner) = lay.row(m, n..n + q) else { continue };
        let Some(outer) = lay.row(m + 1, n..n + q + 2) else { continue };
        let Some((a0, r0)) = fit_geometric(&inner) else { continue };
        let cbase: Vec<Fp> = cantor(p, (q + 2) as usize).values().to_vec();
        let Some((a1, r1)) = fit_transform(&outer, &cbase) else { continue };
        let ratio = div(-a1 * r1, r0 * a0);
        for i in 0..=q + 1 {
            t.cell(lay.w, m + i, n, a0 * pw(div(a1, a0), i), "inner frame column of the lower window");
            t.cell(lay.w, m + i, n + 1, a0 * r0 * pw(ratio, i) * lv.s[i as usize], "singer column beside the lower window");
        }
        let st = finite(p, lv.s.clone()).geometric_transform(ratio, a0 * r0).expect("finite");
        let block = ra_wall(&st, div(a1, a0), a0, (q + 2) / 2, exec);
        for i in 0..=(q + 2) / 2 {
            for j in i..=q + 1 - i {
                if let Some(want) = block.known(i, j) {
                    t.cell(lay.w, m + j, n + i + 1, want, "rotated singer wall beside the lower window");
                }
            }
        }
        t.instances += 1;
    }
}

/// Cantor segment under a small window, between two windows of size q.
/// Returns (m, n) of every configuration that satisfied the hypotheses.
fn lemma_cantor_between(lay: &Layout, lv: &Level, t: &mut Tally) -> Vec<(i64, i64)> {
    let (p, q) = (lv.p, lv.q);
    let mut found = vec![];
    for (m, left) in lay.corners(q) {
        let n = left + q;
        if !lay.has(m, n + q, q) || !lay.has(m - q + 1, n + 1, q - 2) || !lay.covers(m - q - 1..=m + 2 * q, n - q - 2..=n + 2 * q + 1) || !lay.level_at_most(q, m - q..=m + 2 * q - 1, n - q - 1..=n + 2 * q) {
            continue;
        }
        let Some(inner) = lay.row(m - 1, (0..q).map(|k| n + q - 1 - k)) else { continue };
        let Some(outer) = lay.row(m, (0..q).map(|k| n + q - 1 - k)) else { continue };
        let Some((a0, r0)) = fit_geometric(&inner) else { continue };
        let Some((a1, r1)) = fit_transform(&outer, &lv.c) else { continue };
        for (col, what) in [(n + 1, "east outer frame of the west window"), (n + q - 2, "west outer frame of the east window")] {
            match lay.col(col, (0..q + 2).map(|i| m + i - 1)) {
                Some(v) if fit_transform(&v, &lv.s).is_some() => {}
                Some(v) => t.push(m - 1, col, "transform of the singer block", format!("{:?}", v.iter().map(|x| x.value()).collect::<Vec<_>>()), what),
                None => t.push(m - 1, col, "known column", "undefined", what),
            }
        }
        let Some(below_inner) = lay.at.get(&(m + q + 1, n + 1)).copied() else {
            t.push(m + q + 1, n + 1, format!("window of size {}", q - 2), "none", "window below the segment");
            continue;
        };
        if below_inner as i64 != q - 2 {
            t.push(m + q + 1, n + 1, format!("window of size {}", q - 2), format!("size {below_inner}"), "window below the segment");
        }
        for i in 0..q {
            t.cell(lay.w, m + q - 1, n + i, a1 * pw(r1, -i) * lv.c[i as usize], "north outer frame of the window below");
            t.cell(lay.w, m + q, n + i, div(a1 * a1 * pw(r0, i), a0 * pw(r1, 2 * i)), "north inner frame of the window below");
        }
        let plain = inner.iter().all(|v| *v == p.one()) && outer.iter().zip(&lv.c).all(|(v, c)| v == c);
        if plain {
            for i in 0..q + 2 {
                for j in 0..q {
                    if let Some(v) = lay.w.known(m + i - 1, n + j) {
                        t.cell(lay.w, m + i - 1, n + q - 1 - j, v, "left-right symmetry");
                        t.cell(lay.w, m + q - i, n + j, v, "up-down symmetry");
                    }
                }
            }
        }
        found.push((m, n));
        t.instances += 1;
    }
    found
}

fn lemma_singer_between(lay: &Layout, lv: &Level, t: &mut Tally) -> Vec<(i64, i64)> {
    let (p, q) = (lv.p, lv.q);
    let mut found = vec![];
    for (m, left) in lay.corners(q - 2) {
        let n = left + q - 2;
        if !lay.has(m, n + q + 2, q - 2) || !lay.has(m - q - 1, n + 1, q) || !lay.covers(m - q - 3..=m + 2 * q + 1, n - q..=n + 2 * q + 3) || !lay.level_at_most(q, m - q - 2..=m + 2 * q - 1, n - q + 1..=n + 2 * q) {
            continue;
        }
        let Some(inner) = lay.row(m - 1, (0..q + 2).map(|k| n + q + 1 - k)) else { continue };
        let Some(outer) = lay.row(m, (0..q + 2).map(|k| n + q + 1 - k)) else { continue };
        let Some((a0, r0)) = fit_geometric(&inner) else { continue };
        let Some((a1, r1)) = fit_transform(&outer, &lv.s) else { continue };
        for (col, what) in [(n + 1, "east outer frame of the west window"), (n + q, "west outer frame of the east window")] {
            match lay.col(col, (0..q).map(|i| m + i - 1)) {
                Some(v) if fit_transform(&v, &lv.c).is_some() => {}
                Some(v) => t.push(m - 1, col, "transform of the cantor block", format!("{:?}", v.iter().map(|x| x.value()).collect::<Vec<_>>()), what),
                None => t.push(m - 1, col, "known column", "undefined", what),
            }
        }
        match lay.at.get(&(m + q - 1, n + 1)) {
            Some(&l) if l as i64 == q => {}
            other => t.push(m + q - 1, n + 1, format!("window of size {q}"), format!("{other:?}"), "window below the segment"),
        }
        let coef = div(a0 * a0 * pw(r0, 4), a1 * r1 * r1);
        let ratio = div(r1, r0 * r0);
        for i in 0..q + 2 {
            t.cell(lay.w, m + q - 3, n + i, coef * pw(ratio, i) * lv.s[i as usize], "north outer frame of the window below");
            t.cell(lay.w, m + q - 2, n + i, a0 * pw(r0, 2 - i), "north inner frame of the window below");
        }
        let plain = inner.iter().all(|v| *v == p.one()) && outer.iter().zip(&lv.s).all(|(v, s)| v == s);
        if plain {
            for i in -1..=q - 2 {
                for j in 1..=q {
                    if let Some(v) = lay.w.known(m + i, n + j) {
                        t.cell(lay.w, m + i, n + q + 1 - j, v, "left-right symmetry");
                        t.cell(lay.w, m + q - 3 - i, n + j, v, "up-down symmetry");
                    }
                }
            }
        }
        found.push((m, n));
        t.instances += 1;
    }
    found
}

fn profile_block(w: &Wall, m: i64, n: i64, q: i64) -> Vec<Vec<ProfileCell>> {
    (0..q)
        .map(|i| {
            (0..q)
                .map(|j| match w.known(m + i, n + j) {
                    Some(v) if v.is_zero() => ProfileCell::Zero,
                    Some(_) => ProfileCell::X,
                    None => ProfileCell::Undefined,
                })
                .collect()
        })
        .collect()
}

fn check_rotated_profiles(cw: &[(&Wall, (i64, i64))], sw: &[(&Wall, (i64, i64))], q: i64, t: &mut Tally) {
    if cw.is_empty() || sw.is_empty() {
        t.missing("pair of cantor and singer configurations");
        return;
    }
    for &(wc, (m, n)) in cw {
        for &(ws, (ms, ns)) in sw {
            let c = profile_block(wc, m, n, q);
            let s = profile_block(ws, ms - 1, ns + 1, q);
            for i in 0..q as usize {
                for j in 0..q as usize {
                    let rot = s[q as usize - 1 - j][i];
                    if c[i][j] != rot {
                        t.push(m + i as i64, n + j as i64, rot.to_char(), c[i][j].to_char(), "profile against the rotated singer block");
                    }
                }
            }
            t.instances += 1;
        }
    }
}

/// The frames around a window of one size sitting between two windows of the other size.
struct Between {
    a_a: Fp,
    r_l: Fp,
    r_a: Fp,
    a_r: Fp,
    r_r: Fp,
    a1: Fp,
    r1: Fp,
    a2: Fp,
    r2: Fp,
    a3: Fp,
    r3: Fp,
}

/// `side_seq` is the block on the south outer frames of the side windows, `top_seq` the block
/// above the middle window; `side` and `mid` are the window sizes.
#[allow(clippy::too_many_arguments)]
fn fit_between(lay: &Layout, m: i64, n: i64, q: i64, side_len: i64, top_len: i64, side_seq: &[Fp], top_seq: &[Fp]) -> Option<Between> {
    let left_inner = lay.row(m, (0..side_len).map(|i| n - i))?;
    let left_outer = lay.row(m + 1, (0..side_len).map(|i| n - i))?;
    let mid_inner = lay.row(m, (0..top_len).map(|i| n + i))?;
    let mid_outer = lay.row(m - 1, (0..top_len).map(|i| n + i))?;
    let right_inner = lay.row(m, (0..side_len).map(|i| n + 2 * q - i))?;
    let right_outer = lay.row(m + 1, (0..side_len).map(|i| n + 2 * q - i))?;
    let (a_a, r_l) = fit_geometric(&left_inner)?;
    let (a_a2, r_a) = fit_geometric(&mid_inner)?;
    if a_a != a_a2 {
        return None;
    }
    let (a_r, r_r) = fit_geometric(&right_inner)?;
    let (a1, r1) = fit_transform(&left_outer, side_seq)?;
    let (a2, r2) = fit_transform(&mid_outer, top_seq)?;
    let (a3, r3) = fit_transform(&right_outer, side_seq)?;
    Some(Between { a_a, r_l, r_a, a_r, r_r, a1, r1, a2, r2, a3, r3 })
}

impl Between {
    /// The three ratios agree up to sign; returns x = r2 / r_A.
    fn common_ratio(&self) -> Option<Fp> {
        let x = div(self.r2, self.r_a);
        let sq = x * x;
        let y = div(self.r1, self.r_l);
        let z = div(self.r3, self.r_r);
        (y * y == sq && z * z == sq).then_some(x)
    }

    fn bracket(&self, k: i64, r3sq_in_last: bool) -> Fp {
        let b = self;
        let third = if r3sq_in_last {
            div(b.a1 * b.a_r * b.r_r, b.r_a * b.a_a * b.a3 * b.r3 * b.r3)
        } else {
            div(b.a1 * b.a_r * b.r_r, b.a3 * b.r3 * b.r3 * b.r_a * b.a_a)
        };
        div(b.a1 * b.a2, b.a_a * b.a_a) * pw(div(b.r2, b.r_a), k) + b.r_a * b.r_l * pw(div(b.r1, b.r_l), k) + third * pw(div(b.r3, b.r_r), k)
    }
}

fn lemma_between_cantor(lay: &Layout, lv: &Level, t: &mut Tally, teq: &mut Tally) {
    let q = lv.q;
    for (top, left) in lay.corners(q - 2) {
        let (m, n) = (top + q - 2, left + q - 2);
        if !lay.has(m + 1, n + 1, q) || !lay.has(top, n + q + 2, q - 2) {
            continue;
        }
        if [-q, -q - 1, 2 * q + 1, 2 * q + 2].iter().any(|&j| lay.w.known(m + 1, n + j).is_none_or(|v| !v.is_zero())) {
            continue;
        }
        let Some(b) = fit_between(lay, m, n, q, q, q + 2, &lv.c, &lv.s) else { continue };
        let rho = div(-b.a1 * b.a_r, b.r_a * b.a3 * b.a_a);
        let scale = div(b.a3.pow(3), b.a_r * b.a_r);
        let mut h = vec![];
        for i in 0..=q + 1 {
            t.cell(lay.w, m + q + 1, n + q + 1 - i, div(b.a3 * b.a3, b.a_r) * pw(rho, i), "south inner frame of the middle window");
            let hk = lv.s[i as usize] * b.bracket(i, true) * scale * pw(rho, i);
            t.cell(lay.w, m + q + 2, n + q + 1 - i, hk, "south outer frame of the middle window");
            h.push(lay.w.known(m + q + 2, n + q + 1 - i));
        }
        t.instances += 1;
        if let Some(x) = b.common_ratio() {
            match h.into_iter().collect::<Option<Vec<Fp>>>() {
                Some(hv) if fit_transform(&hv, &lv.s).is_some() => {}
                Some(_) => teq.push(m + q + 2, n + q + 1, "transform of the singer block", "not a transform", "south outer frame of the middle window"),
                None => teq.push(m + q + 2, n + q + 1, "known frame", "undefined", "south outer frame of the middle window"),
            }
            let ratio = x * rho;
            let konst = scale * (lv.p.one() + div(b.a1 * b.a_r * b.r_r, b.r_a * b.a_a * b.a3 * b.r3 * b.r3));
            for k in 0..=q + 1 {
                teq.cell(lay.w, m + q + 2, n + q + 1 - k, lv.s[k as usize] * pw(ratio, k) * konst, "simplified south outer frame");
            }
            teq.instances += 1;
        }
    }
}

fn lemma_between_singer(lay: &Layout, lv: &Level, t: &mut Tally, teq: &mut Tally) {
    let q = lv.q;
    for (top, left) in lay.corners(q) {
        let (m, n) = (top + q, left + q);
        if !lay.has(m + 1, n + 1, q - 2) || !lay.has(top, n + q, q) {
            continue;
        }
        let Some(b) = fit_between(lay, m, n, q, q + 2, q, &lv.s, &lv.c) else { continue };
        let rho = div(-b.a1 * b.a_r * b.r_r * b.r_r, b.r_a * b.a3 * b.a_a * b.r3 * b.r3);
        let mut h = vec![];
        for i in 0..q {
            t.cell(lay.w, m + q - 1, n + q - 1 - i, b.a_r * b.r_r * b.r_r * pw(rho, i), "south inner frame of the middle window");
            let hk = lv.c[i as usize] * b.bracket(i, false) * b.r3 * b.r3 * b.a3 * pw(rho, i);
            t.cell(lay.w, m + q, n + q - 1 - i, hk, "south outer frame of the middle window");
            h.push(lay.w.known(m + q, n + q - 1 - i));
        }
        t.instances += 1;
        if let Some(x) = b.common_ratio() {
            match h.into_iter().collect::<Option<Vec<Fp>>>() {
                Some(hv) if fit_transform(&hv, &lv.c).is_some() => {}
                Some(_) => teq.push(m + q, n + q - 1, "transform of the cantor block", "not a transform", "south outer frame of the middle window"),
                None => teq.push(m + q, n + q - 1, "known frame", "undefined", "south outer frame of the middle window"),
            }
            let ratio = x * rho;
            let konst = b.a3 * b.r3 * b.r3 + div(b.a1 * b.a_r * b.r_r, b.r_a * b.a_a);
            for k in 0..q {
                teq.cell(lay.w, m + q, n + q - 1 - k, lv.c[k as usize] * pw(ratio, k) * konst, "simplified south outer frame");
            }
            teq.instances += 1;
        }
    }
}

/// Every window configuration of size p^h found in the padded walls above level h.
pub fn check_window_lemmata(p: Prime, h: u32, exec: Exec) -> Vec<CheckReport> {
    let start = Instant::now();
    let lv = Level::new(p, h);
    let walls = level_walls(p, h, exec);
    let mut ts = WindowTallies::default();
    let mut cantor_cfg = vec![];
    let mut singer_cfg = vec![];
    for w in &walls {
        let lay = Layout::new(w);
        lemma_cantor_below(&lay, &lv, &mut ts.below, exec);
        cantor_cfg.extend(lemma_cantor_between(&lay, &lv, &mut ts.cantor_between).into_iter().map(|c| (w, c)));
        singer_cfg.extend(lemma_singer_between(&lay, &lv, &mut ts.singer_between).into_iter().map(|c| (w, c)));
        lemma_between_cantor(&lay, &lv, &mut ts.between_cantor, &mut ts.between_cantor_eq);
        lemma_between_singer(&lay, &lv, &mut ts.between_singer, &mut ts.between_singer_eq);
    }
    check_rotated_profiles(&cantor_cfg, &singer_cfg, lv.q, &mut ts.rotated);
    let params = Params { p: p.get(), h: Some(h), seed: None };
    let named = [
        ("cantor frame below a window", ts.below),
        ("cantor segment between two windows", ts.cantor_between),
        ("singer segment between two windows", ts.singer_between),
        ("rotated cantor and singer profiles", ts.rotated),
        ("window between two cantor frames", ts.between_cantor),
        ("window between two cantor frames with equal ratios", ts.between_cantor_eq),
        ("window between two singer frames", ts.between_singer),
        ("window between two singer frames with equal ratios", ts.between_singer_eq),
    ];
    named
        .into_iter()
        .map(|(name, mut t)| {
            if t.instances == 0 && t.bad == 0 {
                t.missing("configuration matching the hypotheses");
            }
            CheckReport::finish(name, params.clone(), t, start)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fractal counts

/// Largest grid side materialized by the fractal checks; deeper levels use letter counts only.
pub const EXPAND_SIDE: u64 = 729;

/// Letter frequencies of m^k(A), from the frequencies in each image.
fn letter_counts(m: &Morphism2D<Letter>, k: u32) -> Option<[u128; 12]> {
    let mut counts = [0u128; 12];
    counts[Letter::A as usize] = 1;
    for _ in 0..k {
        let mut next = [0u128; 12];
        for l in Letter::ALL {
            let c = counts[l as usize];
            if c == 0 {
                continue;
            }
            for &x in m.image(l)?.cells() {
                next[x as usize] += c;
            }
        }
        counts = next;
    }
    Some(counts)
}

fn nonzero_letters(m: &Morphism2D<Letter>, k: u32) -> Option<u128> {
    letter_counts(m, k).map(|c| c.iter().sum::<u128>() - c[Letter::Zero as usize])
}

/// Nonzero letters of m^k(A) counted on the expanded grid, when it is small enough.
fn expanded_boxes(m: &Morphism2D<Letter>, p: Prime, k: u32, exec: Exec) -> Option<Result<BoxLevel, String>> {
    (p.get().pow(k) <= EXPAND_SIDE)
        .then(|| m.expand2d_with(Letter::A, k, exec).map_err(|e| e.to_string()).and_then(|g| boxes_from_grid(&g, k, p).map_err(|e| e.to_string())))
}

fn morphism_count(t: &mut Tally, m: &Morphism2D<Letter>, k: u32, boxes: &Option<Result<BoxLevel, String>>, want: &[(u128, &str)]) {
    let Some(c) = nonzero_letters(m, k) else {
        t.push(k as i64, 0, "image for every letter", "missing image", "letter counts");
        return;
    };
    for &(w, what) in want {
        if c != w {
            t.push(k as i64, 0, w, c, &format!("nonzero letters against the {what}"));
        }
    }
    match boxes {
        Some(Ok(b)) if b.count() as u128 != c => t.push(k as i64, 1, c, b.count(), "nonzero letters of the expanded grid"),
        Some(Err(e)) => t.push(k as i64, 1, "expansion", e, "expanded grid"),
        _ => {}
    }
    t.instances += 1;
}

/// Morphism counts at level k against their closed forms, and the wall's boxes between the two
/// bounds when the level is small enough to expand.
pub fn check_fractal_counts(p: Prime, k: u32, exec: Exec) -> Vec<CheckReport> {
    let params = Params { p: p.get(), h: Some(k), seed: None };
    let (lo_m, hi_m) = (phi_0(p), phi_f(p));
    let mut out = vec![];

    let start = Instant::now();
    let mut t = Tally::default();
    let lower = expanded_boxes(&lo_m, p, k, exec);
    morphism_count(&mut t, &lo_m, k, &lower, &[(fractal::n_k(p, k), "closed form")]);
    out.push(CheckReport::finish("lower morphism count", params.clone(), t, start));

    let start = Instant::now();
    let mut t = Tally::default();
    let upper = expanded_boxes(&hi_m, p, k, exec);
    if k >= 1 {
        let want = [(fractal::a_k_recurrence(p, k), "recurrence"), (fractal::a_k_sum(p, k), "unrolled sum"), (fractal::a_k_closed(p, k), "closed form")];
        morphism_count(&mut t, &hi_m, k, &upper, &want);
    }
    out.push(CheckReport::finish("upper morphism count", params.clone(), t, start));

    let (Some(Ok(lo)), Some(Ok(hi))) = (&lower, &upper) else {
        return out;
    };
    if k == 0 {
        return out;
    }
    let start = Instant::now();
    let mut t = Tally::default();
    match cantor_profile(p, k, exec).map_err(|e| e.to_string()).and_then(|g| boxes_from_profile(&g, k, p).map_err(|e| e.to_string())) {
        Ok(wb) => {
            if !lo.is_subset_of(&wb) {
                t.push(k as i64, 0, "lower boxes inside wall boxes", "not contained", "box inclusion");
            }
            if !wb.is_subset_of(hi) {
                t.push(k as i64, 1, "wall boxes inside upper boxes", "not contained", "box inclusion");
            }
            let c = wb.count() as u128;
            if c < fractal::n_k(p, k) || c > fractal::a_k_recurrence(p, k) {
                t.push(k as i64, 0, format!("between {} and {}", fractal::n_k(p, k), fractal::a_k_recurrence(p, k)), c, "wall box count");
            }
            t.instances = 1;
        }
        Err(e) => t.push(k as i64, 0, "wall profile", e, "cantor wall"),
    }
    out.push(CheckReport::finish("count sandwich", params, t, start));
    out
}

/// Deepest level with p^k <= 625; the dimension suite ignores the configured levels.
pub fn dimension_depth(p: Prime) -> u32 {
    (1..).take_while(|&k| p.get().pow(k) <= 625).last().unwrap_or(1).max(2)
}

/// Box-counting estimate on levels 1..=levels against log((p^2+1)/2)/log p, tolerance `tol`.
pub fn check_dimension_estimate(p: Prime, levels: u32, tol: f64, exec: Exec) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::default();
    let target = fractal::target_dimension(p);
    match fractal::level_table(p, levels, exec) {
        Ok(rows) => {
            let counts: Vec<(u32, u128)> = rows.iter().map(|r| (r.level, r.count as u128)).collect();
            match fractal::box_dim_estimate(&counts, p) {
                Ok(est) => {
                    for (v, what) in [(est.deepest, "estimate at the deepest level"), (est.slope, "least-squares slope")] {
                        if (v - target).abs() > tol {
                            t.push(levels as i64, 0, format!("{target:.5} +- {tol}"), format!("{v:.5}"), what);
                        }
                    }
                }
                Err(e) => t.push(levels as i64, 0, "estimate", e, "box-dimension estimator"),
            }
            t.instances = rows.len() as u64;
        }
        Err(e) => t.push(levels as i64, 0, "level table", e, "cantor wall levels"),
    }
    CheckReport::finish("box-dimension estimate", Params { p: p.get(), h: Some(levels), seed: None }, t, start)
}

// ---------------------------------------------------------------------------
// Suites

pub const SUITES: [&str; 7] = ["series", "profile", "closed-forms", "identities", "windows", "fractal", "dimension"];

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Suite names from `SUITES`; empty or "all" selects everything.
    pub suites: Vec<String>,
    pub primes: Vec<u64>,
    pub levels: Vec<u32>,
    pub seed: u64,
    pub trials: usize,
    /// Record wall-clock time per check; off keeps reports byte-identical between runs.
    pub timings: bool,
    pub exec: Exec,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suites: vec![],
            primes: vec![3],
            levels: vec![1, 2],
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            timings: false,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}; expected one of all, {}", SUITES.join(", "))]
    UnknownSuite(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

type Task = Box<dyn Fn() -> Vec<CheckReport> + Send + Sync>;

/// Runs the selected checks; report order follows the task list, not completion order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>, SuiteError> {
    for s in &cfg.suites {
        if s != "all" && !SUITES.contains(&s.as_str()) {
            return Err(SuiteError::UnknownSuite(s.clone()));
        }
    }
    let want = |name: &str| cfg.suites.is_empty() || cfg.suites.iter().any(|s| s == "all" || s == name);
    let mut primes = vec![];
    for &v in &cfg.primes {
        primes.push(Prime::new(v)?);
    }
    let exec = cfg.exec;
    let (seed, trials) = (cfg.seed, cfg.trials);
    let mut tasks: Vec<Task> = vec![];
    for &p in &primes {
        if want("series") {
            tasks.push(Box::new(move || check_series(p, 2000)));
        }
        if want("profile") {
            for &h in &cfg.levels {
                tasks.push(Box::new(move || vec![check_profile_theorem(p, h, exec)]));
            }
        }
        if want("closed-forms") {
            tasks.push(Box::new(move || vec![check_base_case(p, exec), check_recurrence_forms(p, exec)]));
        }
        if want("identities") {
            tasks.push(Box::new(move || check_section7(p, trials, seed, exec)));
        }
        if want("windows") {
            for &h in cfg.levels.iter().filter(|&&h| h >= 1) {
                tasks.push(Box::new(move || check_window_lemmata(p, h, exec)));
            }
        }
        if want("fractal") {
            for &h in cfg.levels.iter().filter(|&&h| h >= 1) {
                tasks.push(Box::new(move || check_fractal_counts(p, h, exec)));
            }
        }
        if want("dimension") {
            let top = dimension_depth(p);
            tasks.push(Box::new(move || vec![check_dimension_estimate(p, top, 0.1, exec)]));
        }
    }
    let results = par::map_range(exec, tasks.len(), |i| tasks[i]());
    let mut out: Vec<CheckReport> = results.into_iter().flatten().collect();
    if !cfg.timings {
        for r in &mut out {
            r.millis = 0;
        }
    }
    Ok(out)
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

pub fn to_json(reports: &[CheckReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}
