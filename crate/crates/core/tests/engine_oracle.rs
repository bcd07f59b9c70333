use nwall::toeplitz_oracle::{oracle_ra_wall, oracle_wall};
use nwall::wall_engine::{default_max_row, generate_ra_wall, generate_wall, mismatches, profile, Side};
use nwall::{Extension, Prime, Seq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sparse random sequences so that windows of several sizes appear.
fn random_seq(rng: &mut ChaCha8Rng, p: Prime, max_len: usize) -> Seq {
    let len = rng.gen_range(1..=max_len);
    let density: f64 = rng.gen_range(0.1..0.9);
    let vals: Vec<i64> = (0..len)
        .map(|_| if rng.gen_bool(density) { rng.gen_range(1..p.get() as i64) } else { 0 })
        .collect();
    Seq::from_ints(p, rng.gen_range(-5..5), &vals)
}

#[test]
fn engine_matches_oracle_on_random_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fallbacks = 0;
    let mut windows = 0;
    for p in [3, 5, 7] {
        let p = Prime::new(p).unwrap();
        for _ in 0..200 {
            let s = random_seq(&mut rng, p, 60);
            let max_row = default_max_row(&s);
            let e = generate_wall(&s, max_row).unwrap_or_else(|err| panic!("{err} on {}", s.to_text()));
            let o = oracle_wall(&s, max_row);
            assert_eq!(e.known_count(), o.known_count(), "coverage differs on {}", s.to_text());
            assert!(mismatches(&o, &e).is_empty(), "{}", s.to_text());
            fallbacks += e.fallback_count();
            windows += e.windows().iter().filter(|w| matches!(w.side, Side::Finite(_))).count();
        }
    }
    assert!(windows > 100, "only {windows} windows exercised");
    println!("fallbacks: {fallbacks}, windows: {windows}");
}

#[test]
fn zero_extended_sequences_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [3, 5] {
        let p = Prime::new(p).unwrap();
        for i in 0..60 {
            let ext = |b: bool| if b { Extension::ZeroOutside } else { Extension::UndefinedOutside };
            let s = random_seq(&mut rng, p, 25).with_extensions(ext(i % 2 == 0), ext(i % 3 == 0));
            let max_row = rng.gen_range(0..12);
            let e = generate_wall(&s, max_row).unwrap_or_else(|err| panic!("{err} on {}", s.to_text()));
            let o = oracle_wall(&s, max_row);
            assert_eq!(e, o, "{}", s.to_text());
        }
    }
}

#[test]
fn ra_walls_match_scaled_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = Prime::new(5).unwrap();
    for _ in 0..100 {
        let s = random_seq(&mut rng, p, 40);
        let (r0, a0) = (p.elem(rng.gen_range(1..5)), p.elem(rng.gen_range(1..5)));
        let max_row = default_max_row(&s);
        let e = generate_ra_wall(&s, r0, a0, max_row).unwrap();
        let o = oracle_ra_wall(&s, r0, a0, max_row);
        assert_eq!(e, o);
        assert_eq!(profile(&e), profile(&generate_wall(&s, max_row).unwrap()));
    }
}
