//! Property tests for the invariants that must hold on arbitrary inputs.

use bisectnet::belief::MASS_TOL;
use bisectnet::network::{coefficient_of_ergodicity, StochasticMatrix};
use bisectnet::Belief;
use proptest::prelude::*;

fn belief_strategy() -> impl Strategy<Value = Belief> {
    (
        proptest::collection::vec(1e-6..1.0f64 - 1e-6, 0..9),
        proptest::collection::vec(0.05..4.0f64, 10),
    )
        .prop_map(|(mut interior, values)| {
            interior.sort_by(f64::total_cmp);
            interior.dedup();
            let mut breakpoints = vec![0.0];
            breakpoints.append(&mut interior);
            breakpoints.push(1.0);
            let n = breakpoints.len() - 1;
            Belief::new(breakpoints, values[..n].to_vec()).unwrap()
        })
}

fn stochastic_strategy(m: usize) -> impl Strategy<Value = StochasticMatrix> {
    proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, m), m).prop_filter_map(
        "rows must have positive sum",
        |rows| {
            let mut out = Vec::with_capacity(rows.len());
            for mut row in rows {
                let sum: f64 = row.iter().sum();
                if sum <= 1e-9 {
                    return None;
                }
                for v in &mut row {
                    *v /= sum;
                }
                out.push(row);
            }
            StochasticMatrix::from_rows(out).ok()
        },
    )
}

proptest! {
    #[test]
    fn operations_preserve_normalization(b in belief_strategy(), y: bool, eps in 0.01..0.5f64, alpha in 0.0..1.0f64) {
        let x_hat = b.quantile(0.5).unwrap();
        let updated = b.bayes_bisection_update(y, eps, x_hat).unwrap();
        prop_assert!((updated.total_mass() - 1.0).abs() < MASS_TOL);
        let mixed = Belief::mix(alpha, &updated, &b).unwrap();
        prop_assert!((mixed.total_mass() - 1.0).abs() < MASS_TOL);
    }

    #[test]
    fn quantile_inverts_cdf(b in belief_strategy(), u in 0.001..0.999f64) {
        // Strictly positive segment values by construction.
        let x = b.quantile(u).unwrap();
        let f = b.cdf(x).unwrap();
        prop_assert!((f - u).abs() < 1e-12, "cdf(quantile({u})) = {f}");
    }

    #[test]
    fn prenorm_mass_is_unit_at_median(b in belief_strategy(), y: bool, eps in 0.001..=0.5f64) {
        let x_hat = b.quantile(0.5).unwrap();
        let mass = b.bayes_prenorm_mass(y, eps, x_hat).unwrap();
        prop_assert!((mass - 1.0).abs() < MASS_TOL, "pre-normalization mass {mass}");
    }

    #[test]
    fn affirmative_update_concentrates_left_of_median(b in belief_strategy(), eps in 0.01..0.49f64, frac in 0.0..1.0f64) {
        let x_hat = b.quantile(0.5).unwrap();
        let updated = b.bayes_bisection_update(true, eps, x_hat).unwrap();
        let x = x_hat * frac;
        prop_assert!(updated.cdf(x).unwrap() + 1e-12 >= b.cdf(x).unwrap());
    }

    #[test]
    fn update_inserts_at_most_one_segment(b in belief_strategy(), y: bool, eps in 0.01..0.5f64) {
        let x_hat = b.quantile(0.5).unwrap();
        let updated = b.bayes_bisection_update(y, eps, x_hat).unwrap();
        prop_assert!(updated.segment_count() <= b.segment_count() + 1);
    }

    #[test]
    fn contraction_bounds_spread(a in stochastic_strategy(5), x in proptest::collection::vec(0.0..10.0f64, 5)) {
        let ax = a.apply(&x);
        let spread = |v: &[f64]| {
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        prop_assert!(spread(&ax) <= coefficient_of_ergodicity(&a) * spread(&x) + 1e-12);
    }

    #[test]
    fn ergodicity_coefficient_submultiplicative(a in stochastic_strategy(4), b in stochastic_strategy(4)) {
        let ab = a.matmul(&b);
        prop_assert!(
            coefficient_of_ergodicity(&ab)
                <= coefficient_of_ergodicity(&a) * coefficient_of_ergodicity(&b) + 1e-12
        );
    }
}
