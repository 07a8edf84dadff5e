use approx::assert_relative_eq;
use cmap_core::numerics::{
    circle_integral, hermitian_to_real, holomorphic_gradient, holomorphic_jet, HermitianMatrix, Scalar,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn smooth<S: Scalar>(z: &[S]) -> S {
    z[0].exp() * z[1] * z[1] + (S::one() + z[0] * z[1].scale(c(0.3, 0.1))).ln() + z[2].powi(3).sqrt()
}

fn smooth_c(z: &[Complex64]) -> Complex64 {
    smooth(z)
}

fn point() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-0.8..0.8f64, -0.8..0.8f64), 3).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (re, im))| if i == 2 { c(1.0 + 0.3 * re, 0.3 * im) } else { c(re, im) })
            .collect()
    })
}

proptest! {
    #[test]
    fn gradient_matches_central_differences(z in point()) {
        let (value, grad) = holomorphic_gradient(smooth, &z).unwrap();
        prop_assert_eq!(value, smooth_c(&z));
        let h = 1e-5;
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let fd = (smooth_c(&zp) - smooth_c(&zm)) / (2.0 * h);
            prop_assert!((fd - grad[k]).norm() <= 1e-8 * grad[k].norm().max(1.0), "slot {}: {} vs {}", k, fd, grad[k]);
        }
    }

    #[test]
    fn hessian_is_symmetric_and_matches_gradient_differences(z in point()) {
        let jet = holomorphic_jet(smooth, &z).unwrap();
        prop_assert!(jet.hessian_asymmetry() == 0.0);
        let h = 1e-5;
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let (_, gp) = holomorphic_gradient(smooth, &zp).unwrap();
            let (_, gm) = holomorphic_gradient(smooth, &zm).unwrap();
            for j in 0..z.len() {
                let fd = (gp[j] - gm[j]) / (2.0 * h);
                prop_assert!((fd - jet.hessian[j][k]).norm() <= 1e-7 * jet.hessian[j][k].norm().max(1.0));
            }
        }
    }

    #[test]
    fn realified_spectrum_is_doubled(entries in prop::collection::vec(-1.0..1.0f64, 18)) {
        let m = 3;
        let raw = DMatrix::from_fn(m, m, |i, j| c(entries[i * m + j], entries[9 + i * m + j]));
        let h = HermitianMatrix::new(&raw + raw.adjoint()).unwrap();
        let mut expected: Vec<f64> = h.eigenvalues().iter().flat_map(|&e| [2.0 * e, 2.0 * e]).collect();
        expected.sort_by(f64::total_cmp);
        let got = hermitian_to_real(&h).eigenvalues();
        for (a, b) in got.iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-10, "{:?} vs {:?}", got, expected);
        }
    }

    #[test]
    fn trapezoid_integrates_polynomials(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6), r in 0.2..2.0f64) {
        let a: Vec<Complex64> = coeffs.iter().map(|&(x, y)| c(x, y)).collect();
        let g = |zeta: Complex64| a.iter().enumerate().map(|(k, ak)| ak * Complex64::powi(&zeta, k as i32 - 3)).sum::<Complex64>();
        let got = circle_integral(g, r, 256).unwrap();
        prop_assert!((got - a[2]).norm() <= 1e-12 * (1.0 + r.powi(-3)));
    }
}

#[test]
fn circle_integral_of_powers() {
    for k in -6..=6 {
        let got = circle_integral(|z: Complex64| Complex64::powi(&z, k), 0.7, 256).unwrap();
        let want = if k == -1 { 1.0 } else { 0.0 };
        assert_relative_eq!(got.re, want, epsilon = 1e-12);
        assert!(got.im.abs() < 1e-12);
    }
}
