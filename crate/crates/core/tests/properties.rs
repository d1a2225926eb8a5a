use proptest::prelude::*;

use coupled_strings::exterior::{symplectic_bivector, wedge2};
use coupled_strings::models::{transfer_anderson, transfer_point};
use coupled_strings::symplectic::{is_symplectic, sp2_project};
use coupled_strings::zariski::{lie_closure, model1_seeds, model2_seeds};

fn point_energy() -> impl Strategy<Value = f64> {
    prop_oneof![-20.0..-1.001f64, -0.999..0.999f64, 1.001..40.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn transfer_matrices_are_symplectic(e in point_energy(), w1 in -5.0..5.0f64, w2 in -5.0..5.0f64) {
        let m = transfer_point(e, [w1, w2]).unwrap();
        prop_assert!(is_symplectic(m.as_mat(), 1e-9).unwrap());
        let a = transfer_anderson(e, [w1, w2]).unwrap();
        prop_assert!(is_symplectic(a.as_mat(), 1e-9).unwrap());
    }

    #[test]
    fn wedge_square_fixes_the_symplectic_bivector(e in point_energy(), w1 in -3.0..3.0f64, w2 in -3.0..3.0f64) {
        let m = transfer_point(e, [w1, w2]).unwrap();
        let x = symplectic_bivector();
        let moved = wedge2(m.as_mat()) * x;
        prop_assert!((moved - x).amax() <= 1e-9 * wedge2(m.as_mat()).amax().max(1.0));
    }

    #[test]
    fn inverse_is_exact(e in point_energy(), w1 in -3.0..3.0f64, w2 in -3.0..3.0f64) {
        let m = transfer_point(e, [w1, w2]).unwrap();
        let prod = m.as_mat() * m.inverse().as_mat();
        prop_assert!((prod - nalgebra::Matrix4::identity()).amax() <= 1e-9 * m.as_mat().amax().powi(2));
    }

    #[test]
    fn seeds_lie_in_the_algebra(e in 1.05..20.0f64) {
        for s in model1_seeds(e).unwrap() {
            prop_assert!(sp2_project(&s).1 <= 1e-12 * s.norm());
        }
        if let Ok(seeds) = model2_seeds(e + 1.0) {
            for s in seeds {
                prop_assert!(sp2_project(&s).1 <= 1e-9 * s.norm().max(1.0));
            }
        }
    }

    #[test]
    fn closure_dimension_ignores_order_and_scale(e in 1.05..20.0f64, rot in 0usize..10, k in 0.01..100.0f64) {
        let seeds = model1_seeds(e).unwrap();
        let base = lie_closure(&seeds[..4], 1e-8).unwrap().dim();
        let mut shuffled: Vec<_> = seeds[..4].iter().map(|m| m * k).collect();
        shuffled.rotate_left(rot % 4);
        prop_assert_eq!(lie_closure(&shuffled, 1e-8).unwrap().dim(), base);
    }
}
