use orbitweave::entropy::{max_separated, max_separated_by_graph, min_spanning, min_spanning_by_graph};
use orbitweave::measures::{weak_star_distance, LocalObservable, MarkovMeasure, Measure, Mixture, TestFamily};
use orbitweave::shadowing::{agreement_depth, perturbed_orbit, shadow_shift, validate_pseudo};
use orbitweave::systems::TentMap;
use orbitweave::variational::{attainable_range, constrained_sup, pressure};
use orbitweave::{ShiftSpace, State, System, Word};
use proptest::prelude::*;

fn two_state(a: f64, b: f64) -> MarkovMeasure {
    MarkovMeasure::from_stochastic(vec![vec![1.0 - a, a], vec![1.0 - b, b]]).unwrap()
}

fn prob() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

fn word() -> impl Strategy<Value = Word> {
    (prop::collection::vec(0u8..2, 0..12), prop::collection::vec(0u8..2, 1..6)).prop_map(|(h, c)| Word::new(h, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weak_star_distance_is_a_bounded_metric(
        a in prob(), b in prob(), c in prob(), d in prob(), e in prob(), f in prob(), w in 0.0f64..1.0,
    ) {
        let family = TestFamily::cylinders(&ShiftSpace::full(2).unwrap(), 16).unwrap();
        let x = Measure::Markov(two_state(a, b));
        let y = Measure::Mixture(Mixture::new(vec![(w, two_state(c, d)), (1.0 - w, two_state(a, d))]).unwrap());
        let z = Measure::Markov(two_state(e, f));
        let dist = |p: &Measure, q: &Measure| weak_star_distance(p, q, &family).unwrap().value;
        prop_assert_eq!(dist(&x, &x), 0.0);
        prop_assert!((dist(&x, &y) - dist(&y, &x)).abs() <= 1e-15);
        prop_assert!(dist(&x, &z) <= dist(&x, &y) + dist(&y, &z) + 1e-12);
        prop_assert!(dist(&x, &y) <= 1.0);
    }

    #[test]
    fn bowen_distance_grows_with_n(x in word(), y in word(), n in 1usize..20) {
        let sys = System::Shift(ShiftSpace::full(2).unwrap());
        let (x, y) = (State::Word(x), State::Word(y));
        let a = sys.dist_n(&x, &y, n).unwrap();
        let b = sys.dist_n(&x, &y, n + 1).unwrap();
        prop_assert!(a <= b);
        prop_assert!(sys.dist(&x, &y).unwrap() <= a);
        prop_assert_eq!(a, sys.dist_n_by_orbit(&x, &y, n).unwrap());
    }

    #[test]
    fn tent_bowen_distance_grows_with_n(x in 0.0f64..2.0, y in 0.0f64..2.0, n in 1usize..30) {
        let sys = System::Tent(TentMap::new(1.7).unwrap());
        let (x, y) = (State::Point(x), State::Point(y));
        prop_assert!(sys.dist_n(&x, &y, n).unwrap() <= sys.dist_n(&x, &y, n + 1).unwrap());
    }

    #[test]
    fn separated_and_spanning_counts_sandwich(points in prop::collection::vec(0.0f64..2.0, 1..14), n in 1usize..6, eps in 0.01f64..0.5) {
        let sys = System::Tent(TentMap::new(2.0).unwrap());
        let pts: Vec<State> = points.into_iter().map(State::Point).collect();
        let wide = max_separated(&sys, &pts, n, 2.0 * eps).unwrap().count;
        let narrow = max_separated(&sys, &pts, n, eps).unwrap().count;
        let span = min_spanning(&sys, &pts, n, eps).unwrap().count;
        prop_assert!(wide <= span && span <= narrow, "{wide} {span} {narrow}");
    }

    #[test]
    fn shift_class_counts_match_graph_solvers(words in prop::collection::vec(word(), 1..16), n in 1usize..8, q in 0i32..4) {
        let sys = System::Shift(ShiftSpace::full(2).unwrap());
        let pts: Vec<State> = words.into_iter().map(State::Word).collect();
        let eps = 0.5f64.powi(q);
        prop_assert_eq!(max_separated(&sys, &pts, n, eps).unwrap().count, max_separated_by_graph(&sys, &pts, n, eps).unwrap().count);
        prop_assert_eq!(min_spanning(&sys, &pts, n, eps).unwrap().count, min_spanning_by_graph(&sys, &pts, n, eps).unwrap().count);
    }

    #[test]
    fn pseudo_orbits_round_trip_and_concatenate(seed in any::<u64>(), x in 0.0f64..2.0, len in 2usize..40, delta in 1e-6f64..1e-2) {
        let sys = System::Tent(TentMap::new(1.9).unwrap());
        let first = perturbed_orbit(&sys, &State::Point(x), len, delta, seed).unwrap();
        let again = validate_pseudo(&sys, first.states().to_vec(), first.delta()).unwrap();
        prop_assert_eq!(&again, &first);
        let last = first.states().last().unwrap().clone();
        let second = perturbed_orbit(&sys, &sys.apply(&last).unwrap(), len, delta, seed ^ 1).unwrap();
        let joined = first.concat(second, &sys).unwrap();
        prop_assert_eq!(joined.len(), 2 * len);
    }

    #[test]
    fn splice_meets_the_half_resolution_bound(seed in any::<u64>(), head in prop::collection::vec(0u8..2, 1..30), exp in 0.0f64..12.0) {
        let shift = ShiftSpace::full(2).unwrap();
        let sys = System::Shift(shift.clone());
        let delta = 2f64.powf(-exp);
        let x0 = State::Word(Word::new(head, vec![0, 1]));
        let po = perturbed_orbit(&sys, &x0, 60, delta, seed).unwrap();
        let r = shadow_shift(&shift, &po).unwrap();
        let m = agreement_depth(delta).unwrap();
        prop_assert!(r.max_deviation <= 0.5f64.powi(m as i32 + 1));
        prop_assert!(r.verify(&sys, &po).unwrap());
    }

    #[test]
    fn pressure_is_convex(values in prop::collection::vec(-1.0f64..1.0, 4), q in -5.0f64..5.0, h in 0.01f64..2.0) {
        let shift = ShiftSpace::full(2).unwrap();
        let phi = LocalObservable::new(2, 2, values).unwrap();
        let p = |q: f64| pressure(&shift, &phi, q).unwrap();
        prop_assert!(p(q - h) + p(q + h) - 2.0 * p(q) >= -1e-9);
    }

    #[test]
    fn legendre_dual_is_concave_and_below_entropy(values in prop::collection::vec(-1.0f64..1.0, 4), t in 0.05f64..0.95, s in 0.05f64..0.95) {
        let shift = ShiftSpace::full(2).unwrap();
        let phi = LocalObservable::new(2, 2, values).unwrap();
        let (lo, hi) = attainable_range(&shift, &phi).unwrap();
        prop_assume!(hi - lo > 1e-3);
        let (a, c) = (lo + 0.05 * (hi - lo), lo + 0.95 * (hi - lo));
        let b = a + t * (c - a);
        let h = |x: f64| constrained_sup(&shift, &phi, x).unwrap();
        let (ha, hb, hc) = (h(a), h(b), h(c));
        prop_assert!(hb.h_var >= (1.0 - t) * ha.h_var + t * hc.h_var - 1e-8);
        let top = 2f64.ln();
        let mid = h(a + s * (c - a));
        prop_assert!(mid.h_var <= top + 1e-12);
        prop_assert!(mid.duality_gap.abs() <= 1e-8);
        prop_assert!((mid.maximizer.integral - mid.alpha).abs() <= 1e-8);
    }
}

#[test]
fn pressure_at_zero_is_topological_entropy_for_sfts() {
    let phi = LocalObservable::frequency(3, 2).unwrap();
    let shift = ShiftSpace::sft(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
    // every row and column has two ones, so the spectral radius is 2
    assert!((pressure(&shift, &phi, 0.0).unwrap() - 2f64.ln()).abs() < 1e-12);
}
