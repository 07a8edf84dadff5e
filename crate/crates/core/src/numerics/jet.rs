//! Exact holomorphic derivatives by nested dual numbers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dual::{Dual, Hyper, Scalar};
use crate::error::{Error, Result};

/// Value, gradient and Hessian of a holomorphic function at a point.
#[derive(Clone, Debug)]
pub struct Jet<S> {
    pub value: S,
    pub gradient: Vec<S>,
    /// Symmetric; `hessian[i][j] = ∂_i ∂_j f`.
    pub hessian: Vec<Vec<S>>,
}

pub type ComplexJet = Jet<Complex64>;

impl ComplexJet {
    pub fn hessian_matrix(&self) -> DMatrix<Complex64> {
        let m = self.gradient.len();
        DMatrix::from_fn(m, m, |i, j| self.hessian[i][j])
    }

    /// Largest `|H_ij − H_ji|`.
    pub fn hessian_asymmetry(&self) -> f64 {
        let m = self.gradient.len();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..i {
                worst = worst.max((self.hessian[i][j] - self.hessian[j][i]).norm());
            }
        }
        worst
    }
}

fn seeded<S: Scalar>(x: &[S], outer: usize, inner: usize) -> Vec<Hyper<S>> {
    x.iter()
        .enumerate()
        .map(|(k, &xk)| {
            let inner_eps = if k == inner { S::one() } else { S::zero() };
            let outer_eps = if k == outer { S::one() } else { S::zero() };
            Dual::new(Dual::new(xk, inner_eps), Dual::lift(outer_eps))
        })
        .collect()
}

fn singular_index<S: Scalar>(gradient: &[S], hessian: &[Vec<S>]) -> Option<usize> {
    gradient
        .iter()
        .position(|g| !g.is_finite())
        .or_else(|| hessian.iter().position(|row| row.iter().any(|h| !h.is_finite())))
        .map(|i| i + 1)
}

/// Value, gradient and Hessian of `f` at `x`.
///
/// `f` is evaluated `m(m+1)/2` times on second-order dual numbers, once per
/// unordered index pair; the Hessian is filled symmetrically. Any non-finite
/// component is reported as [`Error::SingularEvaluation`] with the 1-based
/// label of the first coordinate whose derivatives blew up.
pub fn holomorphic_jet<S, F>(f: F, x: &[S]) -> Result<Jet<S>>
where
    S: Scalar,
    F: Fn(&[Hyper<S>]) -> Hyper<S>,
{
    let m = x.len();
    if m == 0 {
        let v = f(&[]).re.re;
        if !v.is_finite() {
            return Err(Error::SingularEvaluation { index: None });
        }
        return Ok(Jet {
            value: v,
            gradient: vec![],
            hessian: vec![],
        });
    }
    let mut value = S::zero();
    let mut gradient = vec![S::zero(); m];
    let mut hessian = vec![vec![S::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let r = f(&seeded(x, i, j));
            if i == 0 && j == 0 {
                value = r.re.re;
            }
            if i == 0 {
                gradient[j] = r.re.eps;
            }
            hessian[i][j] = r.eps.eps;
            hessian[j][i] = r.eps.eps;
        }
    }
    if !value.is_finite() || gradient.iter().any(|g| !g.is_finite()) || hessian.iter().flatten().any(|h| !h.is_finite())
    {
        return Err(Error::SingularEvaluation {
            index: singular_index(&gradient, &hessian),
        });
    }
    Ok(Jet {
        value,
        gradient,
        hessian,
    })
}

/// Value and gradient only, one first-order evaluation per coordinate.
pub fn holomorphic_gradient<S, F>(f: F, x: &[S]) -> Result<(S, Vec<S>)>
where
    S: Scalar,
    F: Fn(&[Dual<S>]) -> Dual<S>,
{
    let mut value = None;
    let mut gradient = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let args: Vec<Dual<S>> = x
            .iter()
            .enumerate()
            .map(|(k, &xk)| if k == i { Dual::variable(xk) } else { Dual::lift(xk) })
            .collect();
        let r = f(&args);
        value.get_or_insert(r.re);
        gradient.push(r.eps);
    }
    let value = match value {
        Some(v) => v,
        None => f(&[]).re,
    };
    if let Some(i) = gradient.iter().position(|g| !g.is_finite()) {
        return Err(Error::SingularEvaluation { index: Some(i + 1) });
    }
    if !value.is_finite() {
        return Err(Error::SingularEvaluation { index: None });
    }
    Ok((value, gradient))
}

/// Derivative of `f` at `x` along `direction`.
pub fn directional_derivative<S, F>(f: F, x: &[S], direction: &[S]) -> Result<(S, S)>
where
    S: Scalar,
    F: Fn(&[Dual<S>]) -> Dual<S>,
{
    let args: Vec<Dual<S>> = x.iter().zip(direction).map(|(&a, &d)| Dual::new(a, d)).collect();
    let r = f(&args);
    if !r.is_finite() {
        return Err(Error::SingularEvaluation { index: None });
    }
    Ok((r.re, r.eps))
}

/// Mixed Hessian `∂²f/∂z^a ∂z̄^b` of a real-analytic `f(z, z̄)`.
///
/// `f` receives the holomorphic and anti-holomorphic arguments as two
/// independent slices; at the base point the second slice holds `conj(z)`.
/// Returns the value and the `m × m` matrix indexed `[a, b]`.
pub fn mixed_hessian<F>(f: F, z: &[Complex64]) -> Result<(Complex64, DMatrix<Complex64>)>
where
    F: Fn(&[Hyper<Complex64>], &[Hyper<Complex64>]) -> Result<Hyper<Complex64>>,
{
    let m = z.len();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut out = DMatrix::from_element(m, m, zero);
    let mut value = None;
    for a in 0..m {
        for b in 0..m {
            let hol: Vec<Hyper<Complex64>> = z
                .iter()
                .enumerate()
                .map(|(k, &zk)| Dual::new(Dual::lift(zk), Dual::lift(if k == a { one } else { zero })))
                .collect();
            let anti: Vec<Hyper<Complex64>> = z
                .iter()
                .enumerate()
                .map(|(k, &zk)| Dual::new(Dual::new(zk.conj(), if k == b { one } else { zero }), Dual::lift(zero)))
                .collect();
            let r = f(&hol, &anti)?;
            if !r.is_finite() {
                return Err(Error::SingularEvaluation { index: Some(a + 1) });
            }
            value.get_or_insert(r.re.re);
            out[(a, b)] = r.eps.eps;
        }
    }
    let value = match value {
        Some(v) => v,
        None => f(&[], &[])?.re.re,
    };
    Ok((value, out))
}
