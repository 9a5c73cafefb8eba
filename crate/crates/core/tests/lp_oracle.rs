mod common;

use common::oracle::{binary_enumeration, random_lp, random_milp, vertex_enumeration};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use triopf::lp::{solve_lp, solve_milp, LpStatus, FEASIBILITY_TOL};

#[test]
fn random_three_variable_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut optimal = 0;
    for case in 0..100 {
        let lp = random_lp(&mut rng, 3, 5);
        let sol = solve_lp(&lp).unwrap();
        match vertex_enumeration(&lp) {
            Some(best) => {
                optimal += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!(
                    (sol.objective_value - best).abs() <= 1e-6,
                    "case {case}: simplex {} vs oracle {best}",
                    sol.objective_value
                );
                assert!(lp.max_violation(&sol.values) <= FEASIBILITY_TOL);
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible, "case {case}"),
        }
    }
    assert!(optimal >= 30, "generator produced too few feasible cases");
}

#[test]
fn random_milps_match_binary_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..40 {
        let lp = random_milp(&mut rng, 6, 2, 4);
        let sol = solve_milp(&lp).unwrap();
        match binary_enumeration(&lp) {
            Some(best) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!((sol.objective_value - best).abs() <= 1e-6, "case {case}");
                for (v, x) in lp.variables.iter().zip(&sol.values) {
                    if v.is_binary {
                        assert!(*x == 0.0 || *x == 1.0);
                    }
                }
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible, "case {case}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_points_are_feasible_and_deterministic(seed in any::<u64>(), n in 1usize..=4, m in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_lp(&mut rng, n, m);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(&a.values, &b.values);
        prop_assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        if a.status == LpStatus::Optimal {
            prop_assert!(lp.max_violation(&a.values) <= FEASIBILITY_TOL);
            let best = vertex_enumeration(&lp).expect("oracle agrees on feasibility");
            prop_assert!((a.objective_value - best).abs() <= 1e-6);
        } else {
            prop_assert_eq!(a.status, LpStatus::Infeasible);
            prop_assert!(vertex_enumeration(&lp).is_none());
        }
    }

    #[test]
    fn relaxation_bounds_the_milp(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_milp(&mut rng, 4, 2, 3);
        let milp = solve_milp(&lp).unwrap();
        let mut relaxed = lp.clone();
        for v in &mut relaxed.variables {
            v.is_binary = false;
        }
        let lp_sol = solve_lp(&relaxed).unwrap();
        if milp.status == LpStatus::Optimal {
            prop_assert_eq!(lp_sol.status, LpStatus::Optimal);
            let gap = match lp.sense {
                triopf::lp::Sense::Minimize => milp.objective_value - lp_sol.objective_value,
                triopf::lp::Sense::Maximize => lp_sol.objective_value - milp.objective_value,
            };
            prop_assert!(gap >= -1e-7);
        }
    }
}
