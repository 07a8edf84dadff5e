//! Forward-mode dual numbers over complex scalars.
//!
//! [`Scalar`] is the arithmetic interface every geometric formula in this
//! crate is written against. It is implemented by `Complex64` and, recursively,
//! by [`Dual<S>`] for any scalar `S`, so nesting `Dual<Dual<Complex64>>` yields
//! exact second derivatives (the hyper-dual trick) and deeper nestings give
//! third and fourth derivatives where a formula needs derivatives of
//! derivatives (e.g. `F_IJ` evaluated at a dual-valued point).
//!
//! Only holomorphic operations are provided. Real-analytic functions of
//! `(z, z̄)` are handled by treating `z̄` as an independent variable.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Embeds a constant (all infinitesimal parts zero).
    fn constant(z: Complex64) -> Self;

    /// The innermost value, with every infinitesimal part dropped.
    fn value(&self) -> Complex64;

    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;

    /// True iff every component is finite.
    fn is_finite(&self) -> bool;

    fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    fn scale(self, c: Complex64) -> Self {
        self * Self::constant(c)
    }

    fn powi(self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc * self)
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn constant(z: Complex64) -> Self {
        z
    }
    #[inline]
    fn value(&self) -> Complex64 {
        *self
    }
    #[inline]
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    #[inline]
    fn is_finite(&self) -> bool {
        Complex64::is_finite(*self)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    #[inline]
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    /// A variable: value `re`, unit tangent.
    #[inline]
    pub fn variable(re: S) -> Self {
        Dual { re, eps: S::one() }
    }

    #[inline]
    pub fn lift(re: S) -> Self {
        Dual { re, eps: S::zero() }
    }
}

/// Second-order scalar used for Hessians.
pub type Hyper<S> = Dual<Dual<S>>;

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    #[inline]
    fn constant(z: Complex64) -> Self {
        Dual::lift(S::constant(z))
    }

    #[inline]
    fn value(&self) -> Complex64 {
        self.re.value()
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s + s))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }

    #[inline]
    fn scale(self, c: Complex64) -> Self {
        Dual::new(self.re.scale(c), self.eps.scale(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_rule() {
        let x = Dual::variable(c(3.0, 0.0));
        let y = x * x * x;
        assert_eq!(y.re, c(27.0, 0.0));
        assert_eq!(y.eps, c(27.0, 0.0));
    }

    #[test]
    fn quotient_and_transcendentals() {
        let z0 = c(0.7, -0.4);
        let z = Dual::variable(z0);
        let f = (z.ln() + z.exp()) / z.sqrt();
        let expected = {
            let s = z0.sqrt();
            (1.0 / z0 + z0.exp()) / s - (z0.ln() + z0.exp()) / (2.0 * s * z0)
        };
        assert!((f.eps - expected).norm() < 1e-14);
    }

    #[test]
    fn nested_second_derivative() {
        // d²/dz² z⁴ = 12 z²
        let z0 = c(1.5, 0.5);
        let z: Hyper<Complex64> = Dual::new(Dual::variable(z0), Dual::lift(c(1.0, 0.0)));
        let f = z.powi(4);
        assert!((f.eps.eps - 12.0 * z0 * z0).norm() < 1e-13);
        assert!((f.eps.re - 4.0 * z0.powi(3)).norm() < 1e-13);
        assert!((f.re.eps - 4.0 * z0.powi(3)).norm() < 1e-13);
    }

    #[test]
    fn non_finite_is_detected() {
        let z = Dual::variable(c(0.0, 0.0));
        let f = Dual::lift(c(1.0, 0.0)) / z;
        assert!(!f.is_finite());
    }
}
