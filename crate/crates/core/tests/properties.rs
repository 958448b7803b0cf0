//! Property tests for the spec-level invariants that deserve random probing
//! beyond the pinned examples.

use proptest::prelude::*;

use finfreq::construct::{mp_test_simple, power_envelope, ConstraintSet};
use finfreq::lp::{solve_lp, LinearProgram, LpOutcome, Relation};
use finfreq::ratio::{int, parse_ratio, ratio, ratio_string};
use finfreq::testkit::{rejection_probability, size, Test};
use finfreq::worlds::{build_iid_bernoulli_in, Hypothesis, ParameterSpace, SampleSpace};
use finfreq::Ratio;

fn arb_ratio() -> impl Strategy<Value = Ratio> {
    (-1000i64..=1000, 1i64..=1000).prop_map(|(n, d)| ratio(n, d))
}

/// A probability in [0, 1].
fn arb_prob() -> impl Strategy<Value = Ratio> {
    (1i64..=60).prop_flat_map(|d| (0i64..=d, Just(d))).prop_map(|(n, d)| ratio(n, d))
}

/// An interior probability in (0, 1).
fn arb_interior() -> impl Strategy<Value = Ratio> {
    (2i64..=60).prop_flat_map(|d| (1i64..d, Just(d))).prop_map(|(n, d)| ratio(n, d))
}

fn arb_test(n: usize) -> impl Strategy<Value = Vec<Ratio>> {
    prop::collection::vec(arb_prob(), 1 << n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ratio_string_round_trips(r in arb_ratio()) {
        prop_assert_eq!(parse_ratio(&ratio_string(&r)).unwrap(), r);
    }

    #[test]
    fn np_test_spends_the_level_budget_exactly(
        theta0 in arb_interior(),
        theta1 in arb_interior(),
        alpha in arb_prob(),
        n in 1usize..=4,
    ) {
        prop_assume!(theta0 != theta1);
        let space = SampleSpace::binary(n).unwrap();
        let null = build_iid_bernoulli_in(space.clone(), &theta0).unwrap();
        let alt = build_iid_bernoulli_in(space, &theta1).unwrap();
        let np = mp_test_simple(&null, &alt, &alpha).unwrap();
        // Interior null worlds have full support, so the optimum rejects with
        // probability exactly alpha under the null...
        prop_assert_eq!(rejection_probability(&np, &null).unwrap(), alpha.clone());
        // ...and unbiasedness follows: power weakly above alpha.
        prop_assert!(rejection_probability(&np, &alt).unwrap() >= alpha);
    }

    #[test]
    fn np_test_beats_any_level_test(
        theta0 in arb_interior(),
        theta1 in arb_interior(),
        alpha in arb_prob(),
        phi in arb_test(3),
    ) {
        prop_assume!(theta0 != theta1);
        let space = SampleSpace::binary(3).unwrap();
        let null = build_iid_bernoulli_in(space.clone(), &theta0).unwrap();
        let alt = build_iid_bernoulli_in(space.clone(), &theta1).unwrap();
        // Scale an arbitrary test down into the level-alpha class.
        let candidate = Test::new(space, phi).unwrap();
        let null_rate = rejection_probability(&candidate, &null).unwrap();
        let candidate = if null_rate > alpha {
            let shrink = &alpha / &null_rate;
            candidate.mix(&Test::never_reject(candidate.space().clone()), &shrink).unwrap()
        } else {
            candidate
        };
        let np = mp_test_simple(&null, &alt, &alpha).unwrap();
        prop_assert!(
            rejection_probability(&np, &alt).unwrap()
                >= rejection_probability(&candidate, &alt).unwrap()
        );
    }

    #[test]
    fn envelope_dominates_scaled_random_tests(
        alpha in arb_prob(),
        phi in arb_test(4),
    ) {
        let space = SampleSpace::binary(4).unwrap();
        let worlds = [ratio(3, 10), ratio(1, 2), ratio(7, 10)]
            .into_iter()
            .map(|t| build_iid_bernoulli_in(space.clone(), &t).unwrap())
            .collect();
        let ps = ParameterSpace::new(worlds).unwrap();
        let hyp = Hypothesis::at_least(&ps, &ratio(1, 2)).unwrap();
        let candidate = Test::new(space.clone(), phi).unwrap();
        let sz = size(&candidate, &hyp, &ps).unwrap();
        let candidate = if sz > alpha {
            let shrink = &alpha / &sz;
            candidate.mix(&Test::never_reject(space), &shrink).unwrap()
        } else {
            candidate
        };
        let env = power_envelope(&ps, &hyp, &alpha, ConstraintSet::LevelOnly).unwrap();
        for &a in hyp.alt_indices() {
            let theta = ps.world(a).theta();
            let p = rejection_probability(&candidate, ps.world(a)).unwrap();
            prop_assert!(env.value_at(theta).unwrap() >= &p);
        }
    }

    #[test]
    fn lp_optima_are_feasible(
        objective in prop::collection::vec(-5i64..=5, 3),
        rows in prop::collection::vec(
            (prop::collection::vec(-3i64..=3, 3), 0i64..=2, 0u8..3),
            0..4,
        ),
    ) {
        let mut lp = LinearProgram::new(3, objective.into_iter().map(int).collect()).unwrap();
        for (coeffs, rhs, rel) in &rows {
            let rel = match rel {
                0 => Relation::Le,
                1 => Relation::Ge,
                _ => Relation::Eq,
            };
            lp.add_constraint(coeffs.iter().map(|&c| int(c)).collect(), rel, int(*rhs)).unwrap();
        }
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal(sol) => {
                for x in &sol.assignment {
                    prop_assert!(x >= &int(0) && x <= &int(1));
                }
                for c in &lp.constraints {
                    let lhs: Ratio = c.coeffs.iter().zip(&sol.assignment).map(|(a, x)| a * x).sum();
                    match c.rel {
                        Relation::Le => prop_assert!(lhs <= c.rhs),
                        Relation::Ge => prop_assert!(lhs >= c.rhs),
                        Relation::Eq => prop_assert_eq!(lhs, c.rhs.clone()),
                    }
                }
            }
            LpOutcome::Infeasible => {}
            LpOutcome::Unbounded => prop_assert!(false, "box-bounded LP cannot be unbounded"),
        }
    }
}
