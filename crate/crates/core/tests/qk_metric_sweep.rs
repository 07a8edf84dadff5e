mod common;

use cmap_core::qk_metric::{
    action_jacobian, fs_metric, g_action, isometry_residual, pullback_residual, sample_fs_point, sample_group_element,
};
use cmap_core::Prepotential;
use rand::SeedableRng;
use rand_pcg::Pcg64;

#[test]
fn metric_is_positive_definite_with_exact_sigma_coefficient() {
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(5);
        for _ in 0..100 {
            let pt = sample_fs_point(&model, &region, &mut rng, 1000).unwrap();
            let g = fs_metric(&model, &pt).unwrap();
            assert!(g.eigenvalues()[0] > 0.0, "{name}: {:?}", g.eigenvalues());
            assert_eq!(g.get(1, 1), (-2.0 * pt.phi).exp());
            assert_eq!(g.matrix(), &g.matrix().transpose());
        }
    }
}

#[test]
fn group_acts_by_isometries() {
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(6);
        for _ in 0..50 {
            let pt = sample_fs_point(&model, &region, &mut rng, 1000).unwrap();
            let g = sample_group_element(model.n(), &mut rng);
            let r = isometry_residual(&model, &pt, &g).unwrap();
            assert!(r <= 1e-10, "{name}: {r:e}");
        }
    }
}

#[test]
fn composition_law() {
    for (_, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(8);
        for _ in 0..20 {
            let pt = sample_fs_point(&model, &region, &mut rng, 1000).unwrap();
            let g1 = sample_group_element(model.n(), &mut rng);
            let g2 = sample_group_element(model.n(), &mut rng);
            let twice = g_action(&g_action(&pt, &g1), &g2);
            let once = g_action(&pt, &g1.then(&g2));
            for (a, b) in twice.to_coords().iter().zip(once.to_coords()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }
}

#[test]
fn dilaton_shift_by_beta_is_not_an_isometry() {
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(9);
        let pt = sample_fs_point(&model, &region, &mut rng, 1000).unwrap();
        let mut g = sample_group_element(model.n(), &mut rng);
        g.beta = 0.7;
        let mut image = g_action(&pt, &g);
        image.phi = pt.phi + g.beta;
        let r = pullback_residual(&model, &pt, &image, &action_jacobian(&pt, &g)).unwrap();
        assert!(r > 0.1, "{name}: {r}");
    }
}
