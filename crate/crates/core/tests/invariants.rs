use proptest::prelude::*;
use twophase::acf::phi_of;
use twophase::blowup::TwoPlane;
use twophase::solver::smoothed_heaviside;
use twophase::{par, Grid};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heaviside_is_monotone_in_unit_interval(eps in 1e-3f64..1.0, s in -2.0f64..2.0, ds in 0.0f64..1.0) {
        let a = smoothed_heaviside(eps, s).unwrap();
        let b = smoothed_heaviside(eps, s + ds).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(a <= b);
        if s >= eps {
            prop_assert_eq!(a, 1.0);
        }
        if s <= -eps {
            prop_assert_eq!(a, 0.0);
        }
    }

    #[test]
    fn chunked_sum_matches_sequential_order(n in 0usize..20_000, seed in 0u64..1000) {
        let f = |i: usize| ((i as u64 * 2654435761 + seed) % 1000) as f64 * 1e-3;
        let chunked = par::sum_range(n, f);
        let direct: f64 = (0..n).map(f).sum();
        prop_assert!((chunked - direct).abs() <= 1e-9 * direct.max(1.0));
        prop_assert_eq!(chunked.to_bits(), par::sum_range(n, f).to_bits());
    }

    #[test]
    fn two_plane_sign_follows_normal(angle in 0.0f64..std::f64::consts::TAU, beta in 0.1f64..3.0,
                                     x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let nu = [angle.cos(), angle.sin(), 0.0];
        let t = TwoPlane::new(beta, nu, [0.0; 3], 2.0, 1.0).unwrap();
        let s = x * nu[0] + y * nu[1];
        let v = t.value(&[x, y, 0.0]);
        prop_assert_eq!(v > 0.0, s > 0.0);
        let a = if s > 0.0 { 2.0 } else { 1.0 };
        prop_assert!((v.abs() - beta * s.abs() / a).abs() <= 1e-12);
    }

    #[test]
    fn phi_scales_quartically(k in 0.2f64..5.0) {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let t = TwoPlane::new(1.0, [1.0, 0.0, 0.0], [0.0; 3], 2.0, 1.0).unwrap();
        let u = t.field(&g);
        let base = phi_of(&u, &[0.0; 3], 0.5).unwrap();
        let scaled = phi_of(&u.map(|v| k * v), &[0.0; 3], 0.5).unwrap();
        prop_assert!((scaled / base - k.powi(4)).abs() <= 1e-9 * k.powi(4));
    }
}
