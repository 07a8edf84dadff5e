mod common;

use cmap_core::special_kahler::{
    curly_n_sum, domain_check, projective_potential, sample_candidate, sk_data, ProjectivePoint,
};
use cmap_core::Error;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_pcg::Pcg64;

#[test]
fn n_is_real_and_potential_has_no_offset() {
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(3);
        let mut checked = 0;
        while checked < 100 {
            let z = sample_candidate(model_n(&model), &region, &mut rng);
            if !domain_check(&model, &z).is_valid() {
                continue;
            }
            let sk = sk_data(&model, &z.full()).unwrap();
            let scale = sk.n.matrix().iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            assert!(sk.n_imaginary <= 1e-12 * scale, "{name}: {}", sk.n_imaginary);
            let (k, _) = projective_potential(&model, &z).unwrap();
            assert!((k.exp() - sk.kahler).abs() <= 1e-12 * sk.kahler, "{name}");
            checked += 1;
        }
    }
}

fn model_n(m: &cmap_core::Model) -> usize {
    use cmap_core::Prepotential;
    m.n()
}

#[test]
fn positivity_and_negative_block_imply_negative_sum() {
    for (name, model, region) in common::models() {
        let mut rng = Pcg64::seed_from_u64(4);
        let mut hits = 0;
        let mut draws = 0;
        while hits < 100 && draws < 100_000 {
            draws += 1;
            let z = sample_candidate(model_n(&model), &region, &mut rng);
            let r = domain_check(&model, &z);
            if r.positivity && r.kahler_block_negdef {
                assert!(r.curly_n_sum_negdef, "{name} at {z:?}");
                assert!(curly_n_sum(&model, &z).unwrap().is_negative_definite());
                hits += 1;
            }
        }
        assert_eq!(hits, 100, "{name}");
    }
}

#[test]
fn outside_unit_ball_fails_positivity() {
    let model = cmap_core::QuadraticModel::standard(1);
    let z = ProjectivePoint::new(vec![Complex64::new(1.5, 0.0)]);
    let r = domain_check(&model, &z);
    assert_eq!(r.first_failure(), Some("positivity"));
    assert!(matches!(r.require(), Err(Error::OutsideDomain { verdict }) if verdict == "positivity"));
}
