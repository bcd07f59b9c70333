use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nwall::morphism2d::{phi_p, Letter};
use nwall::sequences::{cantor, cantor_tilde};
use nwall::toeplitz_oracle::oracle_ra_wall_with;
use nwall::verify::check_window_lemmata;
use nwall::wall_engine::generate_with;
use nwall::{Exec, Prime};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn engine(c: &mut Criterion) {
    let mut g = c.benchmark_group("engine");
    g.sample_size(20);
    for (p, h) in [(3, 5), (5, 3), (7, 3)] {
        let p = Prime::new(p).unwrap();
        let s = cantor_tilde(p, h);
        let rows = p.get().pow(h) as i64 - 1;
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, format!("p{p}h{h}")), &s, |b, s| {
                b.iter(|| generate_with(s, p.one(), p.one(), rows, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let p = Prime::new(5).unwrap();
    let s = cantor(p, 60);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "p5len60"), |b| b.iter(|| oracle_ra_wall_with(&s, p.one(), p.one(), 29, exec)));
    }
    g.finish();
}

fn morphism(c: &mut Criterion) {
    let mut g = c.benchmark_group("morphism");
    g.sample_size(20);
    for (p, k) in [(3, 6), (5, 4)] {
        let m = phi_p(Prime::new(p).unwrap());
        for (name, exec) in MODES {
            g.bench_function(BenchmarkId::new(name, format!("p{p}k{k}")), |b| b.iter(|| m.expand2d_with(Letter::A, k, exec).unwrap()));
        }
    }
    g.finish();
}

fn lemmata(c: &mut Criterion) {
    let mut g = c.benchmark_group("window_lemmata");
    g.sample_size(10);
    let p = Prime::new(3).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "p3h2"), |b| b.iter(|| check_window_lemmata(p, 2, exec)));
    }
    g.finish();
}

criterion_group!(benches, engine, oracle, morphism, lemmata);
criterion_main!(benches);
