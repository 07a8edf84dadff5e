//! Degree-two homogeneous holomorphic prepotentials `F(X^I)`.
//!
//! Index labels follow the usual convention `I = 1..n+1` with the special
//! index `1`; internally `X^1` lives in slot 0. Every evaluator is generic
//! over [`Scalar`] so the same formula serves plain values and nested dual
//! numbers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{holomorphic_jet, ComplexJet, Jet, Scalar};

pub trait Prepotential: Send + Sync {
    /// `X` has `n + 1` components.
    fn n(&self) -> usize;

    /// `F(X)`.
    fn eval<S: Scalar>(&self, x: &[S]) -> S;

    /// The conjugate function `F̄(X̃) = conj(F(conj(X̃)))`, holomorphic in `X̃`.
    fn eval_conjugate<S: Scalar>(&self, x: &[S]) -> S;

    /// 0-based slots `I` where `F` has a pole on `X^I = 0`.
    fn pole_slots(&self) -> Vec<usize> {
        Vec::new()
    }

    fn dim(&self) -> usize {
        self.n() + 1
    }
}

fn check_len<P: Prepotential + ?Sized>(p: &P, len: usize) -> Result<()> {
    if len != p.dim() {
        return Err(Error::Configuration(format!(
            "prepotential with n = {} expects {} coordinates, got {len}",
            p.n(),
            p.dim()
        )));
    }
    Ok(())
}

/// `(F, F_I, F_IJ)` at `x`.
pub fn eval_jet<P: Prepotential>(p: &P, x: &[Complex64]) -> Result<ComplexJet> {
    jet_at(p, x)
}

/// Jet of `F` at a point whose coordinates may themselves be dual numbers.
pub fn jet_at<P: Prepotential, S: Scalar>(p: &P, x: &[S]) -> Result<Jet<S>> {
    check_len(p, x.len())?;
    holomorphic_jet(|z| p.eval(z), x)
}

/// Jet of the conjugate function `F̄` at `x̃`.
pub fn conjugate_jet_at<P: Prepotential, S: Scalar>(p: &P, xt: &[S]) -> Result<Jet<S>> {
    check_len(p, xt.len())?;
    holomorphic_jet(|z| p.eval_conjugate(z), xt)
}

/// `(|X^I F_I − 2F|, max_I |F_IJ X^J − F_I|)`; both vanish for a degree-two
/// homogeneous `F`.
pub fn homogeneity_residual<P: Prepotential>(p: &P, x: &[Complex64]) -> Result<(f64, f64)> {
    let jet = eval_jet(p, x)?;
    let euler: Complex64 = x.iter().zip(&jet.gradient).map(|(xi, fi)| xi * fi).sum::<Complex64>() - 2.0 * jet.value;
    let mut second = 0.0_f64;
    for (i, row) in jet.hessian.iter().enumerate() {
        let r: Complex64 = row.iter().zip(x).map(|(h, xj)| h * xj).sum::<Complex64>() - jet.gradient[i];
        second = second.max(r.norm());
    }
    Ok((euler.norm(), second))
}

/// `F = −i Σ_I s_I (X^I)²` with `s_1 = +1` and `s_I = ±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticModel {
    signs: Vec<f64>,
}

impl QuadraticModel {
    pub fn new(signs: Vec<i32>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Configuration("quadratic model needs at least one sign".into()));
        }
        if signs[0] != 1 {
            return Err(Error::Configuration("quadratic model requires s_1 = +1".into()));
        }
        if let Some(s) = signs.iter().find(|s| s.abs() != 1) {
            return Err(Error::Configuration(format!("quadratic signs must be ±1, got {s}")));
        }
        Ok(QuadraticModel {
            signs: signs.into_iter().map(f64::from).collect(),
        })
    }

    /// Signature `(+, −, …, −)`, whose positivity domain is the unit ball in `Z^A`.
    pub fn standard(n: usize) -> Self {
        let mut signs = vec![-1.0; n + 1];
        signs[0] = 1.0;
        QuadraticModel { signs }
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    fn sum_of_squares<S: Scalar>(&self, x: &[S]) -> S {
        x.iter().zip(&self.signs).fold(S::zero(), |acc, (&xi, &s)| {
            acc + (xi * xi).scale(Complex64::new(s, 0.0))
        })
    }
}

impl Prepotential for QuadraticModel {
    fn n(&self) -> usize {
        self.signs.len() - 1
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.sum_of_squares(x).scale(Complex64::new(0.0, -1.0))
    }

    fn eval_conjugate<S: Scalar>(&self, x: &[S]) -> S {
        self.sum_of_squares(x).scale(Complex64::new(0.0, 1.0))
    }
}

/// `F = d_ABC X^A X^B X^C / X^1` with real, totally symmetric `d_ABC`,
/// `A, B, C ∈ {2..n+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicModel {
    n: usize,
    /// Flat `n³` storage, slot `a = A − 2`.
    d: Vec<f64>,
}

impl CubicModel {
    /// Builds `d` from entries `([A, B, C], value)` (1-based labels); each entry
    /// sets `d_ABC` and all its permutations. Conflicting entries are rejected.
    pub fn from_entries(n: usize, entries: &[([usize; 3], f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Configuration("cubic model needs n ≥ 1".into()));
        }
        let mut d = vec![0.0; n * n * n];
        let mut set = vec![false; n * n * n];
        for &(labels, value) in entries {
            if let Some(l) = labels.iter().find(|&&l| l < 2 || l > n + 1) {
                return Err(Error::Configuration(format!("cubic index {l} outside 2..={}", n + 1)));
            }
            if !value.is_finite() {
                return Err(Error::Configuration("cubic coefficient must be finite".into()));
            }
            let [a, b, c] = labels.map(|l| l - 2);
            for [i, j, k] in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                let slot = (i * n + j) * n + k;
                if set[slot] && d[slot] != value {
                    return Err(Error::Configuration(format!(
                        "conflicting values for d_{{{},{},{}}}",
                        i + 2,
                        j + 2,
                        k + 2
                    )));
                }
                d[slot] = value;
                set[slot] = true;
            }
        }
        Ok(CubicModel { n, d })
    }

    /// The STU model `F = X²X³X⁴/X¹` (`d_234 = 1/6`).
    pub fn stu() -> Self {
        Self::from_entries(3, &[([2, 3, 4], 1.0 / 6.0)]).expect("valid STU coefficients")
    }

    pub fn d(&self, a: usize, b: usize, c: usize) -> f64 {
        self.d[((a - 2) * self.n + (b - 2)) * self.n + (c - 2)]
    }

    /// Largest deviation of `d` from total symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let x = self.d[(a * n + b) * n + c];
                    for y in [
                        self.d[(b * n + a) * n + c],
                        self.d[(a * n + c) * n + b],
                        self.d[(c * n + b) * n + a],
                    ] {
                        worst = worst.max((x - y).abs());
                    }
                }
            }
        }
        worst
    }

    fn cubic_over_x1<S: Scalar>(&self, x: &[S]) -> S {
        let n = self.n;
        let xa = &x[1..];
        let mut total = S::zero();
        for a in 0..n {
            let mut inner_ab = S::zero();
            for b in 0..n {
                let mut inner_c = S::zero();
                for c in 0..n {
                    let d = self.d[(a * n + b) * n + c];
                    if d != 0.0 {
                        inner_c = inner_c + xa[c].scale(Complex64::new(d, 0.0));
                    }
                }
                inner_ab = inner_ab + xa[b] * inner_c;
            }
            total = total + xa[a] * inner_ab;
        }
        total / x[0]
    }
}

impl Prepotential for CubicModel {
    fn n(&self) -> usize {
        self.n
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        self.cubic_over_x1(x)
    }

    fn eval_conjugate<S: Scalar>(&self, x: &[S]) -> S {
        self.cubic_over_x1(x)
    }

    fn pole_slots(&self) -> Vec<usize> {
        vec![0]
    }
}

/// The built-in families, plus a constant shift used as a deliberately
/// non-homogeneous control.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Quadratic(QuadraticModel),
    Cubic(CubicModel),
    Shifted { inner: Box<Model>, shift: Complex64 },
}

impl Prepotential for Model {
    fn n(&self) -> usize {
        match self {
            Model::Quadratic(m) => m.n(),
            Model::Cubic(m) => m.n(),
            Model::Shifted { inner, .. } => inner.n(),
        }
    }

    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Model::Quadratic(m) => m.eval(x),
            Model::Cubic(m) => m.eval(x),
            Model::Shifted { inner, shift } => inner.eval(x) + S::constant(*shift),
        }
    }

    fn eval_conjugate<S: Scalar>(&self, x: &[S]) -> S {
        match self {
            Model::Quadratic(m) => m.eval_conjugate(x),
            Model::Cubic(m) => m.eval_conjugate(x),
            Model::Shifted { inner, shift } => inner.eval_conjugate(x) + S::constant(shift.conj()),
        }
    }

    fn pole_slots(&self) -> Vec<usize> {
        match self {
            Model::Quadratic(m) => m.pole_slots(),
            Model::Cubic(m) => m.pole_slots(),
            Model::Shifted { inner, .. } => inner.pole_slots(),
        }
    }
}

impl From<QuadraticModel> for Model {
    fn from(m: QuadraticModel) -> Self {
        Model::Quadratic(m)
    }
}

impl From<CubicModel> for Model {
    fn from(m: CubicModel) -> Self {
        Model::Cubic(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_n0_at_one() {
        let jet = eval_jet(&QuadraticModel::standard(0), &[c(1.0, 0.0)]).unwrap();
        assert_eq!(jet.value, c(0.0, -1.0));
        assert_eq!(jet.gradient[0], c(0.0, -2.0));
        assert_eq!(jet.hessian[0][0], c(0.0, -2.0));
    }

    #[test]
    fn quadratic_n0_at_two() {
        let jet = eval_jet(&QuadraticModel::standard(0), &[c(2.0, 0.0)]).unwrap();
        assert_eq!(jet.value, c(0.0, -4.0));
    }

    #[test]
    fn stu_value() {
        let i = c(0.0, 1.0);
        let jet = eval_jet(&CubicModel::stu(), &[c(1.0, 0.0), i, i, i]).unwrap();
        assert!((jet.value - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn cubic_singular_at_x1_zero() {
        let err = eval_jet(
            &CubicModel::stu(),
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap_err();
        assert_eq!(err, Error::SingularEvaluation { index: Some(1) });
    }

    #[test]
    fn shifted_model_breaks_euler_identity() {
        let model = Model::Shifted {
            inner: Box::new(QuadraticModel::standard(1).into()),
            shift: c(1.0, 0.0),
        };
        let (euler, second) = homogeneity_residual(&model, &[c(0.4, 0.1), c(-0.2, 0.3)]).unwrap();
        assert!((euler - 2.0).abs() < 1e-14);
        assert!(second < 1e-14);
    }

    #[test]
    fn quadratic_at_imaginary_point() {
        let (a, b) = homogeneity_residual(&QuadraticModel::standard(0), &[c(0.0, 5.0)]).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn conjugate_function() {
        let model = CubicModel::from_entries(2, &[([2, 2, 3], 0.5), ([3, 3, 3], -1.25)]).unwrap();
        let x = [c(0.7, 0.2), c(0.1, -1.3), c(-0.4, -0.9)];
        let xt: Vec<Complex64> = x.iter().map(|z| z.conj()).collect();
        let lhs: Complex64 = model.eval_conjugate(&xt);
        let rhs: Complex64 = model.eval(&x);
        assert!((lhs - rhs.conj()).norm() < 1e-15);
        let q = QuadraticModel::new(vec![1, -1, 1]).unwrap();
        let lhs: Complex64 = q.eval_conjugate(&xt);
        let rhs: Complex64 = q.eval(&x);
        assert!((lhs - rhs.conj()).norm() < 1e-15);
    }

    #[test]
    fn invalid_models() {
        assert!(QuadraticModel::new(vec![-1, 1]).is_err());
        assert!(QuadraticModel::new(vec![1, 2]).is_err());
        assert!(QuadraticModel::new(vec![]).is_err());
        assert!(CubicModel::from_entries(2, &[([2, 2, 4], 1.0)]).is_err());
        assert!(CubicModel::from_entries(2, &[([2, 2, 3], 1.0), ([3, 2, 2], 2.0)]).is_err());
    }

    #[test]
    fn cubic_coefficients_are_symmetric() {
        let m = CubicModel::from_entries(3, &[([2, 3, 4], 0.25), ([2, 2, 3], -1.0), ([4, 4, 4], 2.0)]).unwrap();
        assert_eq!(m.symmetry_defect(), 0.0);
        assert_eq!(m.d(4, 2, 3), 0.25);
        assert_eq!(m.d(3, 2, 2), -1.0);
    }

    #[test]
    fn wrong_length() {
        assert!(matches!(
            eval_jet(&CubicModel::stu(), &[c(1.0, 0.0)]),
            Err(Error::Configuration(_))
        ));
    }
}
