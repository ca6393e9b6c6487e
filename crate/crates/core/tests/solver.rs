use proptest::prelude::*;

use rido::allocator::{
    brute_force_oracle, group_partition, round_allocation, solve_grouped, solve_relaxed, Partition,
};
use rido::schedules::robust_dcs;
use rido::{validate_budget, SurrogateCoefficients};

fn value(f: &[f64], n: &[f64]) -> f64 {
    f.iter().zip(n).map(|(a, b)| a / b).sum()
}

proptest! {
    #[test]
    fn relaxation_lower_bounds_the_oracle_and_rounding_stays_within_two(
        (f, budget) in (1usize..=5).prop_flat_map(|t| {
            (proptest::collection::vec(0.0f64..10.0, t), t as u64..=25)
        })
    ) {
        let coeffs = SurrogateCoefficients::new(f.clone());
        let cont = solve_relaxed(&coeffs, budget).unwrap();
        let cont_value = value(&f, cont.as_slice());
        let (oracle, oracle_value) = brute_force_oracle(&coeffs, budget).unwrap();
        prop_assert!(cont_value <= oracle_value + 1e-9);
        prop_assert!(validate_budget(oracle.as_slice(), oracle.total()));

        let rounded = round_allocation(&cont, budget).unwrap();
        prop_assert!(validate_budget(rounded.as_slice(), budget));
        let as_f: Vec<f64> = rounded.as_slice().iter().map(|&x| x as f64).collect();
        prop_assert!(value(&f, &as_f) <= 2.0 * cont_value + 1e-12);
    }

    #[test]
    fn groups_are_solved_uniformly_and_numerators_are_nonnegative(
        f in proptest::collection::vec(-2.0f64..2.0, 1..8),
        extra in 0u64..30,
    ) {
        let budget = f.len() as u64 + extra;
        let Partition::Grouped(problem) = group_partition(&SurrogateCoefficients::new(f), budget) else {
            return Ok(());
        };
        for g in &problem.groups {
            prop_assert!(g.numerator >= 0.0);
        }
        let y = solve_grouped(&problem).unwrap();
        prop_assert!((y.total() - budget as f64).abs() < 1e-9 * budget as f64);
        prop_assert!(y.as_slice().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(y.as_slice().iter().all(|&v| v >= 1.0));
        for g in &problem.groups {
            let first = y.as_slice()[g.start];
            prop_assert!(y.as_slice()[g.start..g.end()].iter().all(|&v| v == first));
        }
    }

    #[test]
    fn doubling_the_budget_halves_the_value_when_unconstrained(
        f in proptest::collection::vec(0.5f64..2.0, 1..6),
    ) {
        // Every Neyman level is at least 1 at this budget, so no lower bound binds.
        let coeffs = SurrogateCoefficients::new(f.clone());
        let a = solve_relaxed(&coeffs, 100).unwrap();
        let b = solve_relaxed(&coeffs, 200).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((2.0 * x - y).abs() < 1e-9 * y);
        }
        let (va, vb) = (value(&f, a.as_slice()), value(&f, b.as_slice()));
        prop_assert!((va - 2.0 * vb).abs() < 1e-9 * va);
    }

    #[test]
    fn robust_schedules_spend_the_budget(
        gamma in 0.01f64..0.999,
        horizon in 1usize..60,
        extra in 0u64..100_000,
    ) {
        let budget = horizon as u64 + extra;
        let r = robust_dcs(budget, horizon, gamma).unwrap();
        prop_assert!(validate_budget(r.dcs.as_slice(), budget));
        prop_assert!(r.dcs.last() >= 1);
    }
}
