mod common;

use cmap_core::qk_metric::sample_fs_point;
use cmap_core::twistor::{compare_metrics, round_trip_residual, ROUND_TRIP_TOL};
use rand::SeedableRng;
use rand_pcg::Pcg64;

#[test]
fn twistor_and_fs_metrics_are_proportional() {
    let mut constants = Vec::new();
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(7);
        let mut worst = 0.0_f64;
        for _ in 0..25 {
            let pt = sample_fs_point(&model, &region, &mut rng, 1000).unwrap();
            let cmp = compare_metrics(&model, &pt).unwrap();
            worst = worst.max(cmp.max_rel_dev);
            constants.push(cmp.constant);
        }
        println!("{name}: worst deviation {worst:e}");
        assert!(worst <= 1e-6, "{name}: deviation {worst:e}");
    }
    let lo = constants.iter().cloned().fold(f64::MAX, f64::min);
    let hi = constants.iter().cloned().fold(f64::MIN, f64::max);
    println!("constant in [{lo}, {hi}]");
    assert!(hi - lo <= 1e-8);
    assert!((lo + 4.0).abs() < 1e-8);
}

#[test]
fn dilaton_relations_round_trip() {
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(11);
        for _ in 0..20 {
            let pt = sample_fs_point(&model, &region, &mut rng, 1000).unwrap();
            let r = round_trip_residual(&model, &pt).unwrap();
            assert!(r < ROUND_TRIP_TOL, "{name}: {r:e}");
        }
    }
}
