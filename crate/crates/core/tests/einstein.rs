use cmap_core::curvature::{einstein_convergence, einstein_residual, DEFAULT_STEP};
use cmap_core::prepotential::{Prepotential, QuadraticModel};
use cmap_core::qk_metric::{fs_metric, sample_fs_point, FsPoint};
use cmap_core::special_kahler::SampleBox;
use cmap_core::Result;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_pcg::Pcg64;

fn metric_fn(model: &QuadraticModel) -> impl Fn(&[f64]) -> Result<DMatrix<f64>> + '_ {
    move |x: &[f64]| Ok(fs_metric(model, &FsPoint::from_coords(model.n(), x)?)?.into_matrix())
}

fn lambdas(model: &QuadraticModel, points: usize, seed: u64) -> Vec<f64> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let f = metric_fn(model);
    (0..points)
        .map(|_| {
            let pt = sample_fs_point(model, &SampleBox::quadratic(), &mut rng, 1000).unwrap();
            let e = einstein_residual(&f, &pt.to_coords(), DEFAULT_STEP).unwrap();
            println!("n={}: lambda {} residual {:e}", model.n(), e.lambda, e.residual);
            assert!(e.residual <= 1e-3, "{e:?}");
            assert!(e.lambda < 0.0);
            e.lambda
        })
        .collect()
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
}

#[test]
fn quadratic_n0_is_einstein() {
    let l = lambdas(&QuadraticModel::standard(0), 5, 3);
    assert!(spread(&l) <= 1e-3);
}

#[test]
fn quadratic_n1_is_einstein() {
    let l = lambdas(&QuadraticModel::standard(1), 2, 5);
    assert!(spread(&l) <= 1e-3);
}

#[test]
fn residual_converges_under_step_halving() {
    let model = QuadraticModel::standard(0);
    let f = metric_fn(&model);
    let x = FsPoint {
        phi: 0.2,
        sigma: -0.1,
        a: vec![0.3],
        b: vec![-0.2],
        z: FsPoint::origin(0).z,
    }
    .to_coords();
    let [coarse, fine] = einstein_convergence(&f, &x, DEFAULT_STEP).unwrap();
    assert!(coarse.residual <= 1e-3 && fine.residual <= 1e-3);
    assert!((coarse.lambda - fine.lambda).abs() <= 1e-3);
}
