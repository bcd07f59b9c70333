use nwall::morphism2d::{phi_p, Letter};
use nwall::sequences::{laurent_inverse, series_mul};
use nwall::wall_engine::{detect_windows, generate_with, ProfileGrid};
use nwall::{binom, generate_wall, profile, Exec, Fp, Prime, Seq, Wall};
use proptest::prelude::*;

fn primes() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![3u64, 5, 7, 11, 13]).prop_map(|p| Prime::new(p).unwrap())
}

fn seq_strategy(max_len: usize) -> impl Strategy<Value = Seq> {
    primes().prop_flat_map(move |p| {
        prop::collection::vec(0..p.get() as i64, 1..=max_len).prop_map(move |v| Seq::from_ints(p, 0, &v))
    })
}

fn nonzero(p: Prime) -> impl Strategy<Value = Fp> {
    (1..p.get() as i64).prop_map(move |x| p.elem(x))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn default_rows(s: &Seq) -> i64 {
    (s.len() as i64 - 1) / 2
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn field_laws(p in primes(), a in any::<i64>(), b in any::<i64>(), c in any::<i64>()) {
        let (a, b, c) = (p.elem(a), p.elem(b), p.elem(c));
        prop_assert_eq!((a + b) * c, a * c + b * c);
        prop_assert_eq!(a - a, p.zero());
        if !a.is_zero() {
            prop_assert_eq!(a * a.inv().unwrap(), p.one());
            prop_assert_eq!(a.pow(p.get() - 1), p.one());
        }
    }

    #[test]
    fn lucas_binomials_match_integers(p in primes(), n in 0u64..40, k in 0u64..40) {
        let exact = if k > n { 0u128 } else { (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) };
        prop_assert_eq!(binom(n, k, p), p.elem((exact % p.get() as u128) as i64));
    }

    #[test]
    fn series_inverse_is_two_sided(s in seq_strategy(40)) {
        prop_assume!(!s.at(0).is_zero());
        let len = s.len();
        let u = laurent_inverse(&s, len).unwrap();
        let one = series_mul(&s, &u, len).unwrap();
        prop_assert_eq!(one.at(0), s.prime().one());
        prop_assert!((1..len as i64).all(|i| one.at(i).is_zero()));
        prop_assert_eq!(series_mul(&u, &s, len).unwrap(), one);
    }

    #[test]
    fn walls_of_random_sequences_have_square_windows(s in seq_strategy(50)) {
        let w = generate_wall(&s, default_rows(&s)).unwrap();
        prop_assert!(detect_windows(&w).is_ok());
    }

    #[test]
    fn reversal_mirrors_the_wall(s in seq_strategy(40)) {
        let rows = default_rows(&s);
        let (w, wr) = (generate_wall(&s, rows).unwrap(), generate_wall(&s.reversed().unwrap(), rows).unwrap());
        let c = s.lo() + s.hi() - 1;
        for (m, n, cell) in w.iter() {
            if let Some(v) = cell.known() {
                prop_assert_eq!(wr.known(m, c - n), Some(v), "cell [{}, {}]", m, n);
            }
        }
    }

    #[test]
    fn geometric_transform_rescales_rows(
        (s, r, a) in seq_strategy(40).prop_flat_map(|s| { let p = s.prime(); (Just(s), nonzero(p), nonzero(p)) })
    ) {
        let rows = default_rows(&s);
        let w = generate_wall(&s, rows).unwrap();
        let wt = generate_wall(&s.geometric_transform(r, a).unwrap(), rows).unwrap();
        for (m, n, cell) in w.iter() {
            if let (Some(v), true) = (cell.known(), m >= 0) {
                let k = (m + 1) as u64;
                prop_assert_eq!(wt.known(m, n), Some(a.pow(k) * r.pow_i(k as i64 * n).unwrap() * v));
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree(s in seq_strategy(60)) {
        let p = s.prime();
        let rows = default_rows(&s);
        let par = generate_with(&s, p.one(), p.one(), rows, Exec::Parallel).unwrap();
        let seq = generate_with(&s, p.one(), p.one(), rows, Exec::Sequential).unwrap();
        prop_assert_eq!(par, seq);
    }

    #[test]
    fn dump_and_profile_text_round_trip(s in seq_strategy(30)) {
        let w = generate_wall(&s, default_rows(&s)).unwrap();
        let mut buf = vec![];
        w.write_dump(&mut buf).unwrap();
        prop_assert_eq!(Wall::read_dump(&buf[..]).unwrap(), w.clone());
        let pg = profile(&w).rebased_to_origin();
        prop_assert_eq!(ProfileGrid::from_text(&pg.to_text()).unwrap(), pg);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn morphism_images_scale_by_p(p in prop::sample::select(vec![3u64, 5, 7]), k in 0u32..3) {
        let p = Prime::new(p).unwrap();
        let g = phi_p(p).expand2d(Letter::A, k).unwrap();
        let side = p.get().pow(k) as usize;
        prop_assert_eq!((g.rows(), g.cols()), (side, side));
        prop_assert_eq!(g.get(0, 0), Letter::A);
    }
}
