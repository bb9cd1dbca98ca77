use proptest::prelude::*;

use levylab::metrics::{self, d_j1_bracket, d_m2, d_tilde_d, hausdorff};
use levylab::paths::{completed_graph, Completion, Path, StepPath};

fn build_step(u0: f64, raw: Vec<(f64, f64)>) -> StepPath {
    let mut times: Vec<f64> = raw.iter().map(|(t, _)| *t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let jumps: Vec<(f64, Vec<f64>)> = times
        .iter()
        .zip(raw.iter())
        .map(|(t, (_, v))| (*t, vec![*v]))
        .collect();
    StepPath::new(1, vec![u0], jumps).unwrap()
}

fn step_path(max_jumps: usize) -> impl Strategy<Value = StepPath> {
    (
        -2.0f64..2.0,
        prop::collection::vec(((0.01f64..1.0), (-2.0f64..2.0)), 0..=max_jumps),
    )
        .prop_map(|(u0, raw)| build_step(u0, raw))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dtilde_symmetric(a in step_path(5), b in step_path(5)) {
        let ab = d_tilde_d(&a, &b).unwrap().value;
        let ba = d_tilde_d(&b, &a).unwrap().value;
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn dtilde_triangle(a in step_path(4), b in step_path(4), c in step_path(4)) {
        let ac = d_tilde_d(&a, &c).unwrap().value;
        let ab = d_tilde_d(&a, &b).unwrap().value;
        let bc = d_tilde_d(&b, &c).unwrap().value;
        prop_assert!(ac <= ab + bc + 1e-9, "ac={ac} ab={ab} bc={bc}");
    }

    #[test]
    fn dtilde_vanishes_on_reparametrized_copies(
        u0 in -2.0f64..2.0,
        raw in prop::collection::vec(((0.01f64..1.0), (-2.0f64..2.0)), 1..=5),
        other_times in prop::collection::vec(0.01f64..1.0, 5),
    ) {
        // same value sequence on different jump times: distance zero
        let a = build_step(u0, raw.clone());
        let mut times = other_times;
        times.sort_by(f64::total_cmp);
        times.dedup();
        if times.len() >= a.jumps().len() {
            let jumps: Vec<(f64, Vec<f64>)> = a
                .jumps()
                .iter()
                .zip(&times)
                .map(|((_, v), t)| (*t, v.clone()))
                .collect();
            let b = StepPath::new(1, vec![u0], jumps).unwrap();
            prop_assert_eq!(d_tilde_d(&a, &b).unwrap().value, 0.0);
        }
    }

    #[test]
    fn dtilde_below_every_oracle_evaluation(
        a in step_path(4),
        b in step_path(4),
        seed in any::<u64>(),
    ) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dp = d_tilde_d(&a, &b).unwrap().value;
        for _ in 0..8 {
            let lam = metrics::oracle::random_alignment_reparam(&mut rng, &a, &b);
            let s = metrics::oracle::sup_diff_under_lambda(&a, &b, &lam);
            prop_assert!(dp <= s + 1e-9, "dp={dp} oracle={s}");
        }
    }

    #[test]
    fn dtilde_bounded_by_sup_difference(
        u0a in -2.0f64..2.0,
        u0b in -2.0f64..2.0,
        raw in prop::collection::vec(((0.01f64..1.0), (-2.0f64..2.0), (-2.0f64..2.0)), 0..=5),
    ) {
        // identical jump times: identity coupling bounds the quotient distance
        let a = build_step(u0a, raw.iter().map(|(t, v, _)| (*t, *v)).collect());
        let b = build_step(u0b, raw.iter().map(|(t, _, w)| (*t, *w)).collect());
        if a.jumps().len() == b.jumps().len() {
            let mut sup = (u0a - u0b).abs();
            for ((_, va), (_, vb)) in a.jumps().iter().zip(b.jumps()) {
                sup = sup.max((va[0] - vb[0]).abs());
            }
            prop_assert!(d_tilde_d(&a, &b).unwrap().value <= sup + 1e-12);
        }
    }

    #[test]
    fn path_json_round_trip_is_bit_exact(
        u0 in any::<f64>().prop_filter("finite", |v| v.is_finite()),
        raw in prop::collection::vec(
            ((0.01f64..1.0), any::<f64>().prop_filter("finite", |v| v.is_finite())),
            0..=5,
        ),
    ) {
        let p = Path::Step(build_step(u0, raw));
        let json = serde_json::to_string(&p).unwrap();
        let back: Path = serde_json::from_str(&json).unwrap();
        match (&p, &back) {
            (Path::Step(a), Path::Step(b)) => {
                prop_assert_eq!(a.u0()[0].to_bits(), b.u0()[0].to_bits());
                prop_assert_eq!(a.jumps().len(), b.jumps().len());
                for (x, y) in a.jumps().iter().zip(b.jumps()) {
                    prop_assert_eq!(x.0.to_bits(), y.0.to_bits());
                    prop_assert_eq!(x.1[0].to_bits(), y.1[0].to_bits());
                }
            }
            _ => prop_assert!(false, "kind changed in round trip"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn m2_below_j1_upper_bracket(a in step_path(4), b in step_path(4)) {
        let delta = 1e-3;
        let m2 = d_m2(&Path::Step(a.clone()), &Path::Step(b.clone()), delta).unwrap();
        let (_, j1_hi) = d_j1_bracket(&a, &b).unwrap();
        prop_assert!(
            m2.value <= j1_hi + m2.error_bound + 1e-9,
            "m2={} j1_hi={}",
            m2.value,
            j1_hi
        );
    }

    #[test]
    fn hausdorff_halving_delta_halves_bound(a in step_path(3), b in step_path(3)) {
        let ga = completed_graph(&Path::Step(a), Completion::Segment);
        let gb = completed_graph(&Path::Step(b), Completion::Segment);
        let coarse = hausdorff(&ga, &gb, 2e-3).unwrap();
        let fine = hausdorff(&ga, &gb, 1e-3).unwrap();
        prop_assert!((fine.error_bound - 0.5 * coarse.error_bound).abs() < 1e-15);
        prop_assert!((coarse.value - fine.value).abs() <= coarse.error_bound + fine.error_bound);
    }

    #[test]
    fn hausdorff_self_distance_within_bound(a in step_path(4)) {
        let g = completed_graph(&Path::Step(a), Completion::Segment);
        let r = hausdorff(&g, &g, 1e-3).unwrap();
        prop_assert!(r.value <= r.error_bound);
    }

    #[test]
    fn m2_triangle_within_error_bounds(
        a in step_path(3),
        b in step_path(3),
        c in step_path(3),
    ) {
        let delta = 2e-3;
        let (a, b, c) = (Path::Step(a), Path::Step(b), Path::Step(c));
        let ac = d_m2(&a, &c, delta).unwrap();
        let ab = d_m2(&a, &b, delta).unwrap();
        let bc = d_m2(&b, &c, delta).unwrap();
        let slack = ac.error_bound + ab.error_bound + bc.error_bound;
        prop_assert!(ac.value <= ab.value + bc.value + slack + 1e-12);
    }
}
