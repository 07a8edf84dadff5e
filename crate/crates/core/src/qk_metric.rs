//! The explicit quaternion-Kähler metric of the c-map image,
//!
//! ```text
//! ds² = dφ² − e^{−φ}(𝒩+𝒩̄)_IJ W^I W̄^J + e^{−2φ}(dσ − ½(A^I dB_I − B_I dA^I))² − 4𝒦_{AB̄} dZ^A dZ̄^B,
//! W^I = (𝒩+𝒩̄)^{−1 IJ}(2𝒩̄_JK dA^K − i dB_J),
//! ```
//!
//! realized as a real symmetric matrix in the frozen basis
//! `(dφ, dσ, dA^1…dA^{n+1}, dB_1…dB_{n+1}, Re dZ², Im dZ², …)`.
//! Hermitian products of one-forms are read as symmetric products,
//! `dz dz̄ = dx² + dy²`.
//!
//! The Heisenberg-type group acts by
//! `A → e^β(A + ε^I)`, `B → e^β(B + ε_I)`, `φ → φ + 2β`,
//! `σ → e^{2β}(σ + α − ½ε_I A^I + ½ε^I B_I)`, leaving `Z` fixed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::realify;
use crate::numerics::RealSymMatrix;
use crate::prepotential::Prepotential;
use crate::special_kahler::{domain_check, kahler_block, sample_domain_point, sk_data, ProjectivePoint, SampleBox};

/// Tolerance on the antisymmetric remainder of the expanded hermitian term.
pub const REALNESS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsPoint {
    pub phi: f64,
    pub sigma: f64,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "Z")]
    pub z: ProjectivePoint,
}

impl FsPoint {
    pub fn origin(n: usize) -> Self {
        FsPoint {
            phi: 0.0,
            sigma: 0.0,
            a: vec![0.0; n + 1],
            b: vec![0.0; n + 1],
            z: ProjectivePoint::origin(n),
        }
    }

    pub fn n(&self) -> usize {
        self.z.n()
    }

    /// Real dimension `4(n+1)`.
    pub fn dim(&self) -> usize {
        4 * (self.n() + 1)
    }

    /// Coordinates in the frozen basis order.
    pub fn to_coords(&self) -> Vec<f64> {
        let mut x = vec![self.phi, self.sigma];
        x.extend_from_slice(&self.a);
        x.extend_from_slice(&self.b);
        for z in self.z.free() {
            x.push(z.re);
            x.push(z.im);
        }
        x
    }

    pub fn from_coords(n: usize, x: &[f64]) -> Result<Self> {
        let m = n + 1;
        if x.len() != 4 * m {
            return Err(Error::Configuration(format!(
                "expected {} coordinates, got {}",
                4 * m,
                x.len()
            )));
        }
        let free = (0..n)
            .map(|k| Complex64::new(x[2 + 2 * m + 2 * k], x[3 + 2 * m + 2 * k]))
            .collect();
        Ok(FsPoint {
            phi: x[0],
            sigma: x[1],
            a: x[2..2 + m].to_vec(),
            b: x[2 + m..2 + 2 * m].to_vec(),
            z: ProjectivePoint::new(free),
        })
    }

    fn check(&self) -> Result<()> {
        let m = self.n() + 1;
        if self.a.len() != m || self.b.len() != m {
            return Err(Error::Configuration(format!(
                "A and B need {m} components, got {} and {}",
                self.a.len(),
                self.b.len()
            )));
        }
        Ok(())
    }
}

/// Parameters `(β, α, ε^I, ε_I)` of the group element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GActionParams {
    pub beta: f64,
    pub alpha: f64,
    /// `ε^I`, shifts `A^I`.
    pub eps_a: Vec<f64>,
    /// `ε_I`, shifts `B_I`.
    pub eps_b: Vec<f64>,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl GActionParams {
    pub fn identity(n: usize) -> Self {
        GActionParams {
            beta: 0.0,
            alpha: 0.0,
            eps_a: vec![0.0; n + 1],
            eps_b: vec![0.0; n + 1],
        }
    }

    /// The element acting as `self` first, then `then`.
    pub fn then(&self, then: &GActionParams) -> GActionParams {
        let s = (-self.beta).exp();
        let eps_a: Vec<f64> = self.eps_a.iter().zip(&then.eps_a).map(|(a, b)| a + s * b).collect();
        let eps_b: Vec<f64> = self.eps_b.iter().zip(&then.eps_b).map(|(a, b)| a + s * b).collect();
        let alpha =
            self.alpha + s * s * then.alpha + 0.5 * s * (dot(&then.eps_a, &self.eps_b) - dot(&then.eps_b, &self.eps_a));
        GActionParams {
            beta: self.beta + then.beta,
            alpha,
            eps_a,
            eps_b,
        }
    }
}

pub fn g_action(pt: &FsPoint, g: &GActionParams) -> FsPoint {
    let e = g.beta.exp();
    let sigma = e * e * (pt.sigma + g.alpha - 0.5 * dot(&g.eps_b, &pt.a) + 0.5 * dot(&g.eps_a, &pt.b));
    FsPoint {
        phi: pt.phi + 2.0 * g.beta,
        sigma,
        a: pt.a.iter().zip(&g.eps_a).map(|(a, ea)| e * (a + ea)).collect(),
        b: pt.b.iter().zip(&g.eps_b).map(|(b, eb)| e * (b + eb)).collect(),
        z: pt.z.clone(),
    }
}

/// `∂(g·x)/∂x` in the frozen basis.
pub fn action_jacobian(pt: &FsPoint, g: &GActionParams) -> DMatrix<f64> {
    let d = pt.dim();
    let m = pt.n() + 1;
    let e = g.beta.exp();
    let mut j = DMatrix::identity(d, d);
    j[(1, 1)] = e * e;
    for i in 0..m {
        j[(1, 2 + i)] = -0.5 * e * e * g.eps_b[i];
        j[(1, 2 + m + i)] = 0.5 * e * e * g.eps_a[i];
        j[(2 + i, 2 + i)] = e;
        j[(2 + m + i, 2 + m + i)] = e;
    }
    j
}

/// The metric matrix at `pt` (after the domain check).
pub fn fs_metric<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<RealSymMatrix> {
    pt.check()?;
    if pt.z.n() != p.n() {
        return Err(Error::Configuration(format!(
            "point has n = {}, model has n = {}",
            pt.z.n(),
            p.n()
        )));
    }
    domain_check(p, &pt.z).require()?;
    let n = p.n();
    let m = n + 1;
    let d = 4 * m;
    let sk = sk_data(p, &pt.z.full())?;

    // 𝒩 + 𝒩̄ and the expansion W = P dA + Q dB.
    let sum = DMatrix::from_fn(m, m, |i, j| 2.0 * sk.curly_n[(i, j)].re);
    let inv = sum
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegeneratePoint("𝒩 + 𝒩̄ is singular".into()))?;
    let inv_c = inv.map(|x| Complex64::new(x, 0.0));
    let p_mat = &inv_c * sk.curly_n.map(|z| z.conj()) * Complex64::new(2.0, 0.0);
    let q_mat = &inv_c * Complex64::new(0.0, -1.0);
    let mut coeff = DMatrix::from_element(m, 2 * m, Complex64::new(0.0, 0.0));
    coeff.view_mut((0, 0), (m, m)).copy_from(&p_mat);
    coeff.view_mut((0, m), (m, m)).copy_from(&q_mat);
    let sum_c = sum.map(|x| Complex64::new(x, 0.0));
    let form = coeff.transpose() * sum_c * coeff.map(|z| z.conj());

    // Realness of the hermitian term: `form` must be hermitian, so its real
    // part is symmetric and the imaginary part drops out of the quadratic form.
    let scale = form.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
    let herm = crate::numerics::linalg::hermiticity_residual(&form);
    if herm > REALNESS_TOL * scale {
        return Err(Error::Consistency(format!(
            "hermitian term not real: residual {herm:e}"
        )));
    }
    let ab_block = RealSymMatrix::symmetrize(form.map(|z| z.re), REALNESS_TOL)?;

    let mut g = DMatrix::zeros(d, d);
    g[(0, 0)] = 1.0;
    let wscale = -(-pt.phi).exp();
    for i in 0..2 * m {
        for j in 0..2 * m {
            g[(2 + i, 2 + j)] += wscale * ab_block.get(i, j);
        }
    }
    let mut theta = vec![0.0; d];
    theta[1] = 1.0;
    for i in 0..m {
        theta[2 + i] = 0.5 * pt.b[i];
        theta[2 + m + i] = -0.5 * pt.a[i];
    }
    let s2 = (-2.0 * pt.phi).exp();
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] += s2 * theta[i] * theta[j];
        }
    }
    if n > 0 {
        let block = kahler_block(p, &pt.z)?;
        let zz = realify(&(block.matrix() * Complex64::new(-4.0, 0.0)), 1.0);
        let off = 2 + 2 * m;
        g.view_mut((off, off), (2 * n, 2 * n)).copy_from(&zz);
    }
    RealSymMatrix::symmetrize(g, REALNESS_TOL)
}

/// `‖Jᵀ·M(image)·J − M(pt)‖∞` for a map with Jacobian `jac` sending `pt` to `image`.
pub fn pullback_residual<P: Prepotential>(p: &P, pt: &FsPoint, image: &FsPoint, jac: &DMatrix<f64>) -> Result<f64> {
    let m0 = fs_metric(p, pt)?;
    let m1 = fs_metric(p, image)?;
    let pulled = jac.transpose() * m1.matrix() * jac;
    Ok((pulled - m0.matrix()).iter().fold(0.0_f64, |a, x| a.max(x.abs())))
}

pub fn isometry_residual<P: Prepotential>(p: &P, pt: &FsPoint, g: &GActionParams) -> Result<f64> {
    pullback_residual(p, pt, &g_action(pt, g), &action_jacobian(pt, g))
}

/// Eigenvalues of the metric, ascending.
pub fn signature_check<P: Prepotential>(p: &P, pt: &FsPoint) -> Result<Vec<f64>> {
    Ok(fs_metric(p, pt)?.eigenvalues())
}

/// Draws an FS point with `Z` from [`sample_domain_point`] and
/// `φ, σ, A^I, B_I` uniform in `[−FIBRE_RANGE, FIBRE_RANGE]`.
pub fn sample_fs_point<P: Prepotential, R: Rng + ?Sized>(
    p: &P,
    region: &SampleBox,
    rng: &mut R,
    max_attempts: usize,
) -> Result<FsPoint> {
    let z = sample_domain_point(p, region, rng, max_attempts)?;
    let mut draw = || rng.random_range(-FIBRE_RANGE..FIBRE_RANGE);
    let phi = draw();
    let sigma = draw();
    let a = (0..p.dim()).map(|_| draw()).collect();
    let b = (0..p.dim()).map(|_| draw()).collect();
    Ok(FsPoint { phi, sigma, a, b, z })
}

/// Draws `β ∈ [−0.5, 0.5]` and `α, ε^I, ε_I ∈ [−1, 1]`.
pub fn sample_group_element<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GActionParams {
    let beta = rng.random_range(-0.5..0.5);
    let alpha = rng.random_range(-1.0..1.0);
    let eps_a = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let eps_b = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
    GActionParams {
        beta,
        alpha,
        eps_a,
        eps_b,
    }
}

/// Half-width of the sampling interval for the fibre coordinates.
pub const FIBRE_RANGE: f64 = 0.5;
