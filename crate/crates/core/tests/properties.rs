use bec_core::diagnostics::oracles::generate_corpus;
use bec_core::diagnostics::{gronwall_bound, record, GronwallInputs};
use bec_core::solver::Discretization;
use bec_core::{Field, Grid, ModelParameters};
use proptest::prelude::*;

fn disc(cells: usize) -> Discretization {
    Discretization::new(ModelParameters::physical(), Grid::new(cells, 2.0, 1.0).unwrap()).unwrap()
}

fn positive_field(cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, cells)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // z(t) solves z' = 2^-m b z^m, so rescaling b rescales the blow-up time inversely
    #[test]
    fn gronwall_time_scales_inversely_with_b(
        d in 0.0f64..3.0, gap in 0.1f64..10.0, b in 0.1f64..10.0, m in 1.1f64..5.0, s in 0.1f64..10.0,
    ) {
        let g = GronwallInputs { a: 2.0 * d + gap, b, d, m };
        let t = gronwall_bound(&g).unwrap();
        let ts = gronwall_bound(&GronwallInputs { b: s * b, ..g }).unwrap();
        prop_assert!(t > 0.0 && t.is_finite());
        prop_assert!((ts * s - t).abs() <= 1e-12 * t);
    }

    #[test]
    fn gronwall_time_decreases_with_initial_moment(
        gap in 0.1f64..10.0, extra in 0.01f64..10.0, m in 1.1f64..5.0,
    ) {
        let g = GronwallInputs { a: gap, b: 1.0, d: 0.0, m };
        let bigger = GronwallInputs { a: gap + extra, ..g };
        prop_assert!(gronwall_bound(&bigger).unwrap() < gronwall_bound(&g).unwrap());
    }

    #[test]
    fn records_are_pure_and_sign_correct(v in positive_field(32)) {
        let d = disc(32);
        let u = Field::new(v, 0.0).unwrap();
        let a = record(&d, &u, 1e-3, 0.0);
        let b = record(&d, &u, 1e-3, 0.0);
        prop_assert_eq!(a.csv_row(), b.csv_row());
        prop_assert!(a.mass > 0.0 && a.energy > 0.0 && a.moment_y > 0.0);
        prop_assert!(a.entropy_production >= 0.0);
        prop_assert!(a.entropy.is_finite());
        prop_assert_eq!(a.sup_norm, u.sup_norm());
    }

    #[test]
    fn mass_is_linear(v in positive_field(24), w in positive_field(24), c in 0.1f64..5.0) {
        let d = disc(24);
        let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + c * b).collect();
        let lhs = d.mass(&sum);
        let rhs = d.mass(&v) + c * d.mass(&w);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn rhs_conserves_weighted_mass(v in positive_field(40)) {
        let d = disc(40);
        let r = d.rhs(&v);
        let scale: f64 = d.mass_weights().iter().zip(&r).map(|(m, r)| (m * r).abs()).sum();
        prop_assert!(d.mass(&r).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn corpus_is_nonnegative_and_reproducible(seed in any::<u64>()) {
        let a = generate_corpus(12, 1.0, 1.3, seed);
        let b = generate_corpus(12, 1.0, 1.3, seed);
        prop_assert_eq!(&a, &b);
        for (_, f) in &a {
            for i in 0..=200 {
                let y = f.eval(i as f64 / 200.0);
                prop_assert!(y >= 0.0 && y.is_finite());
            }
        }
    }
}
